import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soficlab import approx, conjugacy as C
from soficlab.errors import DegreeMismatch
from soficlab.groups import GroupSpec, ball
from soficlab.perm import Permutation

Z = GroupSpec.lattice(1)
F2 = GroupSpec.free(2)
g1 = Z.generators()[0]
AB = (F2.generators()[0], F2.generators()[2])


def naive_objective(S, P, chi):
    d = len(chi)
    return Fraction(sum(chi[s[j]] != p[chi[j]] for s, p in zip(S, P) for j in range(d)), d)


def test_objective_small_examples():
    swap, ident = np.array([1, 0]), np.array([0, 1])
    assert C.objective([swap], [ident], ident, [g1]) == 1
    cyc4 = np.array([1, 2, 3, 0])
    best = min(C.objective([cyc4], [np.arange(4)], np.array(c), [g1]) for c in itertools.permutations(range(4)))
    assert best == 1
    c3a, c3b = np.array([1, 2, 0]), np.array([2, 0, 1])
    assert C.brute_force([c3a], [c3b], [g1]).objective == 0


def perms(d):
    return st.permutations(list(range(d))).map(np.array)


@given(st.integers(2, 7).flatmap(lambda d: st.tuples(perms(d), perms(d), perms(d), perms(d), perms(d))))
def test_objective_matches_naive_and_is_symmetric(data):
    s1, s2, p1, p2, chi = data
    S, P = [s1, s2], [p1, p2]
    E = AB
    val = C.objective(S, P, chi, E)
    assert val == naive_objective(S, P, chi)
    inv = np.argsort(chi)
    assert val == C.objective(P, S, inv, E)


@given(st.integers(2, 6).flatmap(lambda d: st.tuples(perms(d), perms(d), perms(d), perms(d))))
def test_relabelling_invariance(data):
    s, p, chi, tau = data
    # conjugating psi by tau and composing the conjugator accordingly leaves the value unchanged
    p_tau = tau[p[np.argsort(tau)]]
    assert C.objective([s], [p], chi, [g1]) == C.objective([s], [p_tau], tau[chi], [g1])


def test_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        C.objective([np.arange(3)], [np.arange(4)], np.arange(3), [g1])
    with pytest.raises(DegreeMismatch):
        C.AlignmentProblem([np.arange(3)], [np.arange(4)], (g1,))


def test_brute_force_tie_break_is_lexicographic():
    ident = np.arange(4)
    res = C.brute_force([ident], [ident], [g1])
    assert res.objective == 0 and list(res.chi.img) == [0, 1, 2, 3]
    cyc = np.array([1, 2, 3, 0])
    res = C.brute_force([cyc], [cyc], [g1])
    assert list(res.chi.img) == [0, 1, 2, 3]
    res = C.brute_force([cyc], [np.array([3, 0, 1, 2])], [g1])
    assert res.objective == 0 and list(res.chi.img) == [0, 3, 2, 1]


def test_brute_force_degree_limit():
    with pytest.raises(ValueError):
        C.brute_force([np.arange(9)], [np.arange(9)], [g1])


@pytest.mark.parametrize("seed", range(5))
def test_refinement_is_conjugation_invariant(seed):
    rng = np.random.default_rng(seed)
    d = 30
    S = np.stack([rng.permutation(d), rng.permutation(d)])
    tau = rng.permutation(d)
    P = np.stack([tau[s[np.argsort(tau)]] for s in S])
    ca, cb, _ = C.color_refinement(S, P)
    assert np.array_equal(cb[tau], ca)


@pytest.mark.parametrize("seed", range(5))
def test_align_recovers_random_conjugate(seed):
    rng = np.random.default_rng(seed)
    d = 60
    S = np.stack([rng.permutation(d), rng.permutation(d)])
    tau = rng.permutation(d)
    P = np.stack([tau[s[np.argsort(tau)]] for s in S])
    res = C.align(C.AlignmentProblem(S, P, AB, seed=seed))
    assert res.objective == 0
    assert C.objective(S, P, res.chi.img, AB) == 0


@pytest.mark.parametrize("seed", range(4))
def test_align_never_beats_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    d = 6
    S = np.stack([rng.permutation(d), rng.permutation(d)])
    P = np.stack([rng.permutation(d), rng.permutation(d)])
    E = AB
    exact = C.brute_force(S, P, E).objective
    found = C.align(C.AlignmentProblem(S, P, E, seed=seed)).objective
    assert found >= exact
    assert found == C.objective(S, P, C.align(C.AlignmentProblem(S, P, E, seed=seed)).chi.img, E)


def test_perturbation_bounded_by_identity_coupling():
    W = ball(Z, 1)
    sigma = approx.from_action(Z, "rotation", n=500, window=W)
    for rate in (0.01, 0.05):
        psi = approx.perturb(sigma, rate, seed=7)
        E = [g1]
        ident = C.objective(sigma, psi, np.arange(500), E)
        assert ident <= Fraction(int(np.count_nonzero(sigma.img(g1) != psi.img(g1))), 500)
        res = C.align(C.AlignmentProblem(sigma, psi, E, seed=1))
        assert res.objective <= ident


def test_align_trace_fields():
    sigma = approx.from_action(Z, "rotation", n=40, window=ball(Z, 1))
    res = C.align(C.AlignmentProblem(sigma, sigma, (g1,)))
    assert res.objective == 0
    for key in ("refinement_rounds", "matched_level", "colour_classes", "best_start", "runs"):
        assert key in res.trace


def test_align_is_deterministic():
    rng = np.random.default_rng(4)
    S = np.stack([rng.permutation(50)])
    P = np.stack([rng.permutation(50)])
    a = C.align(C.AlignmentProblem(S, P, (g1,), seed=3))
    b = C.align(C.AlignmentProblem(S, P, (g1,), seed=3))
    assert a.objective == b.objective and np.array_equal(a.chi.img, b.chi.img)
