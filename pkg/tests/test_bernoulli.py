import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soficlab import approx, bernoulli as B, irs
from soficlab.cylsets import CylinderSet
from soficlab.errors import ClosureError, GoodSampleNotFound, InconsistentPattern
from soficlab.groups import GroupSpec, ball

Z = GroupSpec.lattice(1)
Z2 = GroupSpec.lattice(2)
H3 = GroupSpec.heisenberg()
F2 = GroupSpec.free(2)
half = B.StepFunction.interval(Fraction(0), Fraction(1, 2), 2)
one = B.StepFunction.constant()


def brute_moments(sigma, f, m):
    """Mean and variance of pushforward over all m^d bin assignments (labels at bin centres)."""
    d = sigma.degree
    vals = []
    for bins in itertools.product(range(m), repeat=d):
        x = (np.array(bins) + 0.5) / m
        vals.append(B.pushforward(sigma, x, f))
    vals = np.array(vals)
    return vals.mean(), vals.var()


def small_instances():
    yield approx.from_action(Z, "rotation", n=3, window=ball(Z, 2))
    yield approx.from_action(Z, "trivial", d=2, window=ball(Z, 2))
    yield approx.from_action(Z, "rotation", n=2, window=ball(Z, 2))
    for seed in range(3):
        yield approx.from_action(F2, "generator_images", d=4, seed=seed, window=ball(F2, 2))
    yield approx.perturb(approx.from_action(Z2, "rotation", n=2, window=ball(Z2, 2)), 0.5, seed=1)


@pytest.mark.parametrize("idx", range(7))
def test_exact_moments_match_enumeration(idx):
    sigma = list(small_instances())[idx]
    rng = np.random.default_rng(idx)
    E_all = list(ball(sigma.group, 1))
    for _ in range(3):
        E = [g for g in E_all if rng.random() < 0.7] or E_all[:1]
        F = [g for g in E_all if rng.random() < 0.3]
        m = 2 if sigma.degree > 3 else 3
        f = B.random_family(sigma.group, E, F, bins=m, rng=rng)
        mean, var = brute_moments(sigma, f, m)
        assert B.exact_mean(sigma, f) == pytest.approx(mean, abs=1e-12)
        assert B.exact_variance(sigma, f) == pytest.approx(var, abs=1e-12)


def test_product_integral_refines_bins():
    f = B.StepFunction((1.0, 0.0))
    g = B.StepFunction((0.0, 1.0, 1.0))
    # overlap of [0,1/2) and [1/3,1) has length 1/6
    assert B.product_integral([f, g]) == pytest.approx(1 / 6, abs=1e-15)
    assert B.product_integral([]) == 1.0


def test_step_function_rejects_negative():
    with pytest.raises(ValueError):
        B.StepFunction((0.5, -1.0))


def test_mu_theta_examples():
    W = ball(Z, 2)
    e, g2 = Z.identity(), Z.element((2,))
    f = B.CylinderFunction(((e, half), (Z.element((1,)), half)))
    assert B.mu_theta(f, irs.IRSWindowSpec.point_mass(W, [])) == pytest.approx(0.25)
    f2 = B.CylinderFunction(((e, half), (g2, half)))
    W4 = ball(Z, 4)
    twoZ = irs.IRSWindowSpec.point_mass(W4, [Z.element((k,)) for k in (2, -2, 4, -4)])
    assert B.mu_theta(f2, twoZ) == pytest.approx(0.5)
    ones = B.CylinderFunction(((e, one), (g2, one)))
    assert B.mu_theta(ones, twoZ) == 1.0


def test_mu_theta_closure_and_consistency_errors():
    W = ball(Z, 1)
    f = B.CylinderFunction(((Z.element((1,)), half), (Z.element((-1,)), half)))
    with pytest.raises(ClosureError):
        B.mu_theta(f, irs.IRSWindowSpec.point_mass(W, []))
    mu = irs.PatternMeasure(ball(Z, 2), {"11000": Fraction(1)})
    with pytest.raises(InconsistentPattern):
        B.mu_theta(f, mu)


def test_phi_f_examples():
    W = ball(Z, 2)
    E = list(ball(Z, 1))
    rng = np.random.default_rng(0)
    f = B.random_family(Z, E, (), bins=4, rng=rng)
    prod = math.prod(s.integral() for s in f.functions)
    assert B.phi_f("10000", f, W) == pytest.approx(prod, rel=1e-14)
    ones = B.CylinderFunction(tuple((g, one) for g in E), (Z.element((2,)),))
    assert B.phi_f("10011", ones, W) == 1.0
    assert B.phi_f("10000", ones, W) == 0.0


@st.composite
def families(draw, spec):
    E = list(ball(spec, 1))
    keep = draw(st.lists(st.booleans(), min_size=len(E), max_size=len(E)))
    bins = draw(st.integers(1, 5))
    E = [g for g, k in zip(E, keep) if k]
    labels = tuple((g, B.StepFunction(tuple(draw(st.lists(st.floats(0, 3), min_size=bins, max_size=bins)))))
                   for g in E)
    F = [g for g in ball(spec, 1) if draw(st.booleans())]
    return B.CylinderFunction(labels, tuple(F))


@pytest.mark.parametrize("spec", [Z, Z2, H3])
@given(data=st.data())
def test_phi_equals_coset_factor_on_consistent_patterns(spec, data):
    W = ball(spec, 2)
    f = data.draw(families(spec))
    for y in irs.enumerate_consistent_patterns(W):
        a, b = B.phi_f(y, f, W), B.coset_factor(y, f, W)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_labels_reproducible_and_independent_of_slicing():
    a = B.sample_labels(1000, seed=5)
    b = B.sample_labels(1000, seed=5)
    assert np.array_equal(a.x, b.x)
    for start in (0, 1, 3, 4, 7, 401):
        assert np.array_equal(B.label_slice(5, 0, start, 1000), a.x[start:])
    assert ((0 <= a.x) & (a.x < 1)).all()


def test_labels_differ_across_seeds():
    a = B.sample_labels(10_000, seed=1).x
    b = B.sample_labels(10_000, seed=2).x
    assert np.mean(a != b) >= 0.99
    c = B.sample_labels(10_000, seed=1, stream=1).x
    assert np.mean(a != c) >= 0.99


def test_label_mean_clt():
    d = 100_000
    x = B.sample_labels(d, seed=11).x
    assert abs(x.mean() - 0.5) <= 4 / math.sqrt(12 * d)


def test_pushforward_examples():
    s = approx.from_action(Z, "rotation", n=10)
    g = Z.element((1,))
    ones = B.CylinderFunction(((Z.identity(), one), (g, one)))
    x = B.sample_labels(10, 0)
    assert B.pushforward(s, x, ones) == 1.0
    assert B.pushforward(s, x, B.CylinderFunction(((Z.identity(), half),), (g,))) == 0.0
    t = approx.from_action(Z, "trivial", d=1)
    f = B.CylinderFunction(((Z.identity(), half),))
    assert B.pushforward(t, [0.3], f) == 1.0
    assert B.pushforward(t, [0.7], f) == 0.0


def test_microstate_accessor():
    s = approx.from_action(Z, "rotation", n=5)
    x = B.sample_labels(5, 3)
    ms = B.Microstate(s, x)
    g = Z.element((1,))
    assert ms(2, g) == (0, float(x.x[1]))
    assert ms(2, Z.identity()) == (1, float(x.x[2]))


def test_exact_mean_examples():
    s = approx.from_action(Z, "rotation", n=50)
    E = list(ball(Z, 2))
    f = B.random_family(Z, E, (), bins=4, rng=np.random.default_rng(3))
    assert B.exact_mean(s, f) == pytest.approx(math.prod(h.integral() for h in f.functions), rel=1e-14)
    t = approx.from_action(Z, "trivial", d=1)
    f2 = B.CylinderFunction(((Z.identity(), half), (Z.element((1,)), half)))
    assert B.exact_mean(t, f2) == 0.5


def test_variance_without_labels_is_zero():
    s = approx.from_action(Z, "rotation", n=50)
    assert B.exact_variance(s, B.CylinderFunction((), (Z.identity(),))) == 0.0


def test_variance_bound_random_instances():
    rng = np.random.default_rng(9)
    for i in range(100):
        spec = (Z2, F2, H3)[i % 3]
        if spec is Z2:
            s = approx.perturb(approx.from_action(Z2, "rotation", n=7, window=ball(Z2, 2)), 0.2, i)
        elif spec is F2:
            s = approx.from_action(F2, "generator_images", d=40, seed=i, window=ball(F2, 1))
        else:
            s = approx.from_action(H3, "heisenberg_coset", q=6, r=2, window=ball(H3, 1))
        E_all = list(ball(spec, 1))
        E = [g for g in E_all if rng.random() < 0.6]
        F = [g for g in E_all if rng.random() < 0.2]
        f = B.random_family(spec, E, F, bins=3, rng=rng)
        assert B.exact_variance(s, f) <= B.variance_bound(s, f)


def test_block_sum_variance_ratio_exact():
    s = approx.perturb(approx.from_action(Z2, "rotation", n=9, window=ball(Z2, 2)), 0.1, 4)
    for f in B.standard_family(Z2, 1):
        assert B.exact_variance(approx.block_sum(s, 4), f) == B.exact_variance(s, f) / 4


def test_mc_constant_integrand():
    s = approx.from_action(Z, "rotation", n=20)
    st_ = B.mc_stats(s, B.CylinderFunction(()), 8, seed=0)
    assert st_.mean == 1.0 and st_.variance == 0.0


def test_mc_deterministic_across_threads():
    s = approx.from_action(Z, "rotation", n=200)
    f = B.standard_family(Z, 1)[1]
    a = B.mc_stats(s, f, 32, seed=4)
    b = B.mc_stats(s, f, 32, seed=4, threads=4)
    assert a == b


def test_mc_variance_close_to_exact():
    s = approx.from_action(Z, "rotation", n=1000)
    f = B.standard_family(Z, 1)[0]
    st_ = B.mc_stats(s, f, 4096, seed=1)
    v = B.exact_variance(s, f)
    assert 0.5 * v <= st_.variance <= 2 * v
    assert abs(st_.mean - B.exact_mean(s, f)) <= 4 * math.sqrt(v / 4096)


def test_translate_cylinder():
    e = Z.identity()
    f = B.standard_family(Z2, 1)[2]
    assert B.translate_cylinder(f, Z2.identity()) == f
    g = Z2.element((1, 2))
    t = B.translate_cylinder(f, g)
    assert t.F == f.F
    assert t.E == tuple(g * k for k in f.E)
    assert B.translate_cylinder(t, g.inverse()) == f
    with pytest.raises(ClosureError):
        B.translate_cylinder(f, Z2.element((5, 0)), window=ball(Z2, 2))


def test_translate_conjugates_bits_in_heisenberg():
    a, b = H3.element((1, 0, 0)), H3.element((0, 1, 0))
    f = B.CylinderFunction((), (b,))
    assert B.translate_cylinder(f, a).F == (a * b * a.inverse(),)


def test_equivariance_zero_for_honest_action():
    s = approx.from_action(H3, "heisenberg_mod", n=5, window=ball(H3, 2))
    x = B.sample_labels(s.degree, 0)
    f = B.CylinderFunction(((H3.identity(), half), (H3.generators()[0], half)), (H3.generators()[2],))
    for g in ball(H3, 1):
        eq = B.equivariance_defect(s, x, f, g)
        assert eq.value == 0 and eq.mismatch_mass == 0


def test_equivariance_bound_on_perturbed_actions():
    for seed in range(6):
        s = approx.perturb(approx.from_action(H3, "heisenberg_coset", q=30, r=10, window=ball(H3, 3)), 0.05, seed)
        x = B.sample_labels(s.degree, seed)
        rng = np.random.default_rng(seed)
        E = list(ball(H3, 1))
        f = B.random_family(H3, E, [H3.generators()[2]], bins=4, rng=rng)
        for g in H3.generators():
            eq = B.equivariance_defect(s, x, f, g)
            assert eq.value <= eq.bound
            limit = sum(approx.pair_defect(s, g, k) for k in f.E)
            gi = g.inverse()
            for b in f.F:
                limit += (approx.pair_defect(s, g * b, gi) + approx.pair_defect(s, g, b)
                          + Fraction(int(np.count_nonzero(s.img(gi) != s.inv(g))), s.degree))
            assert eq.mismatch_mass <= limit


def test_consistency_slack_honest_and_perturbed():
    W = ball(Z2, 2)
    s = approx.from_action(Z2, "rotation", n=20, window=W)
    for f in B.standard_family(Z2, 1):
        assert abs(B.exact_mean(s, f) - B.mu_theta(f, irs.empirical_irs(s, W))) <= 1e-12
    for seed in range(3):
        p = approx.perturb(s, 0.05, seed)
        mu = irs.empirical_irs(p, W)
        for f in B.standard_family(Z2, 1):
            gap = abs(B.exact_mean(p, f) - B.phi_expectation(f, mu))
            assert gap <= B.consistency_slack(p, f).slack + 1e-12


def test_select_good_sample_examples():
    s = approx.from_action(Z, "rotation", n=500)
    fam = B.standard_family(Z, 1)
    total_sup = sum(f.sup() for f in fam)
    _, diag = B.select_good_sample(s, fam, total_sup + 1e-9, seed=2)
    assert diag.tries == 1
    bit_only = [B.CylinderFunction((), (Z.identity(),))]
    _, diag = B.select_good_sample(s, bit_only, 1e-9, seed=2)
    assert diag.tries == 1 and diag.residuals == [0.0]
    with pytest.raises(GoodSampleNotFound) as info:
        B.select_good_sample(s, fam, 1e-9, max_tries=3, seed=2)
    assert info.value.diagnostics.tries == 3


def test_good_sample_chebyshev():
    s = approx.from_action(Z, "rotation", n=10_000)
    f = B.standard_family(Z, 1)[1]
    v = B.exact_variance(s, f)
    _, diag = B.select_good_sample(s, [f], 10 * math.sqrt(v), max_tries=10, seed=0)
    assert diag.failure_bound == pytest.approx(0.01)


def test_export_relation_data_examples():
    t = approx.from_action(Z, "trivial", d=50)
    x = B.sample_labels(50, 1)
    full = CylinderSet.full(2)
    low = CylinderSet.label(Z.identity(), [0], 2)
    bit = CylinderSet.bit(Z.identity(), 1, 2)
    data = B.export_relation_data(t, x, [full, low, bit, low.intersect(bit)])
    assert data.rho[full].all()
    assert np.array_equal(data.rho[low], x.x < 0.5)
    assert np.array_equal(data.rho[low.intersect(bit)], data.rho[low] & data.rho[bit])
