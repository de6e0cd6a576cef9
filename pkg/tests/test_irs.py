from fractions import Fraction

import numpy as np
import pytest

from soficlab import approx, irs
from soficlab.errors import InconsistentPattern
from soficlab.groups import GroupSpec, Window, ball

Z = GroupSpec.lattice(1)
Z2 = GroupSpec.lattice(2)
H3 = GroupSpec.heisenberg()


def naive_patterns(sigma, W):
    out = {}
    for j in range(sigma.degree):
        y = "".join("1" if sigma(g)(j) == j else "0" for g in W)
        out[y] = out.get(y, 0) + 1
    return {y: Fraction(c, sigma.degree) for y, c in out.items()}


def test_rotation_is_identity_only():
    W = ball(Z, 2)
    s = approx.from_action(Z, "rotation", n=10, window=W)
    assert irs.empirical_irs(s, W).items() == [("10000", Fraction(1))]


def test_two_cycle_pattern():
    W = ball(Z, 2)
    s = approx.from_action(Z, "rotation", n=2, window=W)
    # window order (0), (1), (-1), (2), (-2): the even elements fix every point
    assert irs.empirical_irs(s, W).items() == [("10011", Fraction(1))]


def test_matches_naive_count():
    W = ball(Z2, 1)
    s = approx.perturb(approx.from_action(Z2, "rotation", n=6, window=W), 0.3, seed=2)
    assert irs.empirical_irs(s, W).masses == naive_patterns(s, W)


def test_consistency_checker():
    W = ball(Z, 2)
    assert irs.is_consistent(W, "10011")
    assert not irs.is_consistent(W, "00000")  # identity bit must be 1
    assert not irs.is_consistent(W, "11000")  # 1 in H forces -1 in H
    assert not irs.is_consistent(W, "11100")  # 1 in H forces 2 in H


def test_enumerated_patterns_are_subgroups_of_z():
    # subgroups of Z seen through ball(2): {0}, 2Z, Z (kZ with k > 2 looks like {0})
    assert sorted(irs.enumerate_consistent_patterns(ball(Z, 2))) == ["10000", "10011", "11111"]


def test_fixed_fraction_and_inclusion_exclusion():
    W = ball(Z, 2)
    s = approx.perturb(approx.from_action(Z, "rotation", n=40, window=W), 0.3, seed=7)
    mu = irs.empirical_irs(s, W)
    for y, m in mu.items():
        assert irs.mass_by_inclusion_exclusion(W, y, lambda F: irs.fixed_fraction(s, F)) == m
    F = list(W)[:2]
    assert mu.fixed_fraction(F) == irs.fixed_fraction(s, F)


def test_tv_and_marginal():
    W = ball(Z, 2)
    a = irs.empirical_irs(approx.from_action(Z, "rotation", n=2, window=W), W)
    b = irs.empirical_irs(approx.from_action(Z, "rotation", n=5, window=W), W)
    assert irs.tv_distance(a, b) == 1
    assert irs.tv_distance(a, a) == 0
    sub = list(W)[:3]
    assert a.marginal(sub).items() == [("100", Fraction(1))]


def test_csv_roundtrip(tmp_path):
    W = ball(Z2, 1)
    s = approx.perturb(approx.from_action(Z2, "rotation", n=5, window=W), 0.2, seed=1)
    mu = irs.empirical_irs(s, W)
    path = tmp_path / "mu.csv"
    mu.to_csv(path)
    assert irs.PatternMeasure.from_csv(path, W).masses == mu.masses


def test_stats_match_padding():
    W = ball(Z, 2)
    s = approx.from_action(Z, "rotation", n=100, window=W)
    rep = irs.stats_match(s, approx.pad_trivial(s, 50), irs.singleton_family(W), 0)
    assert not rep.passed
    assert all(r.difference == Fraction(1, 3) for r in rep.rows)


def test_conjugation_defect_zero_for_honest_heisenberg():
    W = ball(H3, 2)
    s = approx.from_action(H3, "heisenberg_coset", q=6, r=3, window=W)
    mu = irs.empirical_irs(s, W)
    for g in H3.generators():
        assert irs.conjugation_invariance_defect(mu, g).value == 0


def test_conjugation_defect_bounded_on_perturbed():
    W = ball(H3, 2)
    for seed in range(4):
        s = approx.perturb(approx.from_action(H3, "heisenberg_coset", q=12, r=6, window=W), 0.05, seed)
        mu = irs.empirical_irs(s, W)
        for g in H3.generators():
            cd = irs.conjugation_invariance_defect(mu, g)
            mass, pair_sum = irs.conjugation_defect_bounds(s, W, g)
            assert cd.value <= mass <= pair_sum


def test_irs_window_spec_validation():
    W = ball(Z, 2)
    with pytest.raises(InconsistentPattern):
        irs.IRSWindowSpec(W, (("11000", Fraction(1)),))
    with pytest.raises(ValueError):
        irs.IRSWindowSpec(W, (("10000", Fraction(1, 2)),))
    spec = irs.IRSWindowSpec.point_mass(W, [Z.element((2,)), Z.element((-2,))])
    assert spec.patterns == (("10011", Fraction(1)),)
