"""The acceptance catalog: eleven end-to-end checks, each returning a CriterionResult."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import approx, bernoulli, conjugacy, irs, relation
from .groups import GroupSpec, ball

Z = GroupSpec.lattice(1)
Z2 = GroupSpec.lattice(2)
H3 = GroupSpec.heisenberg()
F2 = GroupSpec.free(2)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0
    time_limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return f"[{status}] criterion {self.number}: {self.name} in {self.runtime:.2f}s{limit}"


CRITERIA: dict[int, tuple[str, float | None, Callable]] = {}


def criterion(number: int, name: str, time_limit: float | None = None):
    def wrap(fn):
        CRITERIA[number] = (name, time_limit, fn)
        return fn
    return wrap


def run_criterion(number: int, threads: int | None = None) -> CriterionResult:
    name, limit, fn = CRITERIA[number]
    t0 = time.perf_counter()
    passed, detail = fn(threads=threads)
    elapsed = time.perf_counter() - t0
    if limit is not None and elapsed >= limit:
        detail["time_exceeded"] = True
        passed = False
    return CriterionResult(number, name, bool(passed), detail, elapsed, limit)


def run_suite(numbers=None, threads: int | None = None) -> list[CriterionResult]:
    return [run_criterion(n, threads) for n in (numbers or sorted(CRITERIA))]


# -- 1 ----------------------------------------------------------------------

@criterion(1, "honest actions are exact on radius-3 windows", 5.0)
def honest_exactness(threads=None):
    detail = {}
    ok = True
    for label, spec, n in (("Z on Z/1000", Z, 1000), ("Z^2 on (Z/32)^2", Z2, 32)):
        W = ball(spec, 3)
        sigma = approx.from_action(spec, "rotation", n=n, window=W)
        rep = approx.defect(sigma, approx.window_pairs(W))
        sub = approx.subgroup_consistency_defects(sigma, W)
        x = bernoulli.sample_labels(sigma.degree, seed=1)
        worst_eq = Fraction(0)
        worst_val = 0.0
        for f in bernoulli.standard_family(spec, 1):
            for g in W:
                eq = bernoulli.equivariance_defect(sigma, x, f, g)
                worst_eq = max(worst_eq, eq.mismatch_mass)
                worst_val = max(worst_val, eq.value)
        this = rep.max == 0 and rep.identity_defect == 0 and sub.total() == 0 and worst_eq == 0 and worst_val == 0
        detail[label] = {"max_pair_defect": str(rep.max), "violation_mass": str(sub.total()),
                         "equivariance_mismatch": str(worst_eq), "equivariance_value": worst_val}
        ok &= this
    return ok, detail


# -- 2 ----------------------------------------------------------------------

def _permanence_bases():
    W = ball(Z2, 1)
    yield approx.perturb(approx.from_action(Z2, "rotation", n=12, window=W), 0.2, seed=3)
    yield approx.from_action(F2, "generator_images", d=40, seed=11, window=ball(F2, 1))
    yield approx.from_action(H3, "heisenberg_coset", q=6, r=3, window=ball(H3, 1))


@criterion(2, "block sums, trivial padding and redimension obey the permanence formulas")
def permanence(threads=None):
    rng = np.random.default_rng(2024)
    bases = list(_permanence_bases())
    failures = []
    for case in range(50):
        sigma = bases[case % len(bases)]
        W = list(sigma.window)
        size = int(rng.integers(1, min(4, len(W)) + 1))
        F = [W[i] for i in rng.choice(len(W), size=size, replace=False)]
        q = int(rng.integers(1, 5))
        r = int(rng.integers(0, 30))
        d = sigma.degree
        theta = irs.fixed_fraction(sigma, F)
        got_block = irs.fixed_fraction(approx.block_sum(sigma, q), F)
        got_pad = irs.fixed_fraction(approx.pad_trivial(sigma, r), F)
        target = q * d + r
        got_re = irs.fixed_fraction(approx.redimension(sigma, target), F)
        want_pad = (d * theta + r) / (d + r)
        q2, r2 = divmod(target, d)
        want_re = (q2 * d * theta + r2) / (q2 * d + r2)
        if got_block != theta or got_pad != want_pad or got_re != want_re:
            failures.append({"case": case, "F": [str(g) for g in F], "q": q, "r": r})
    return not failures, {"cases": 50, "failures": failures}


# -- 3 ----------------------------------------------------------------------

def _perturbed_instance(i: int):
    rate = (0.01, 0.1)[i % 2]
    kind = (i // 2) % 3
    if kind == 0:
        W = ball(Z, 2)
        base = approx.from_action(Z, "rotation", n=10_000, window=W)
    elif kind == 1:
        W = ball(Z2, 2)
        base = approx.from_action(Z2, "rotation", n=100, window=W)
    else:
        W = ball(H3, 1)
        base = approx.from_action(H3, "heisenberg_coset", q=100, r=100, window=W)
    return approx.perturb(base, rate, seed=1000 + i), rate


@criterion(3, "subgroup-violation masses respect their defect bounds on perturbed actions")
def violation_inequalities(threads=None):
    failures = []
    worst = Fraction(0)
    for i in range(100):
        sigma, rate = _perturbed_instance(i)
        sub = approx.subgroup_consistency_defects(sigma)
        worst = max(worst, sub.total())
        if not sub.inequalities_hold():
            failures.append(i)
    return not failures, {"instances": 100, "failures": failures, "largest_total_violation": float(worst)}


# -- 4 ----------------------------------------------------------------------

@criterion(4, "per-pattern weights agree with coset products on consistent patterns")
def oracle_equivalence(threads=None):
    rng = np.random.default_rng(44)
    detail = {}
    ok = True
    for spec in (Z, Z2, H3):
        W = ball(spec, 2)
        E = list(ball(spec, 1))
        patterns = irs.enumerate_consistent_patterns(W)
        worst = 0.0
        for _ in range(20):
            F = [g for g in E if rng.random() < 0.3]
            f = bernoulli.random_family(spec, E, F, bins=int(rng.integers(1, 9)), rng=rng)
            for y in patterns:
                a = bernoulli.phi_f(y, f, W)
                b = bernoulli.coset_factor(y, f, W)
                rel = abs(a - b) / max(abs(b), 1e-300) if b else abs(a)
                worst = max(worst, rel)
        detail[str(spec)] = {"patterns": len(patterns), "worst_relative_gap": worst}
        ok &= worst <= 1e-12
    return ok, detail


# -- 5 ----------------------------------------------------------------------

@criterion(5, "exact means match the Bernoulli-side integrals up to the consistency slack", 30.0)
def finite_scale_consistency(threads=None):
    W = ball(Z, 2)
    sigma = approx.from_action(Z, "rotation", n=10_000, window=W)
    fam = bernoulli.standard_family(Z, 1)
    theta = irs.empirical_irs(sigma, W)
    honest = {f.name: abs(bernoulli.exact_mean(sigma, f) - bernoulli.mu_theta(f, theta)) for f in fam}
    noisy = approx.perturb(sigma, 0.01, seed=5)
    theta_n = irs.empirical_irs(noisy, W)
    perturbed = {}
    ok = all(v <= 1e-12 for v in honest.values())
    for f in fam:
        gap = abs(bernoulli.exact_mean(noisy, f) - bernoulli.phi_expectation(f, theta_n))
        slack = bernoulli.consistency_slack(noisy, f)
        perturbed[f.name] = {"gap": gap, "slack": slack.slack, "mismatch_mass": str(slack.mismatch_mass)}
        ok &= gap <= slack.slack + 1e-12
    return ok, {"honest_gaps": honest, "perturbed": perturbed,
                "perturbed_inconsistent_mass": float(theta_n.inconsistent_mass())}


# -- 6 ----------------------------------------------------------------------

@criterion(6, "Monte Carlo means sit inside the exact-variance confidence band")
def mc_calibration(threads=None):
    sigma = approx.from_action(Z, "rotation", n=1000, window=ball(Z, 2))
    fam = bernoulli.standard_family(Z, 1)
    S = 1024
    exact = {f.name: (bernoulli.exact_mean(sigma, f), bernoulli.exact_variance(sigma, f)) for f in fam}
    hits = 0
    for t in range(100):
        f = fam[t % len(fam)]
        m, v = exact[f.name]
        st = bernoulli.mc_stats(sigma, f, S, seed=600 + t, threads=threads)
        hits += abs(st.mean - m) <= 3 * math.sqrt(v / S)
    bound_ok = True
    rng = np.random.default_rng(66)
    checked = 0
    for spec, sig in ((Z, sigma), (Z2, approx.perturb(approx.from_action(Z2, "rotation", n=20, window=ball(Z2, 2)), 0.1, 6)),
                      (F2, approx.from_action(F2, "generator_images", d=300, seed=7, window=ball(F2, 1)))):
        E_all = list(ball(spec, 1))
        for _ in range(34 if spec is not Z else 32):
            E = [g for g in E_all if rng.random() < 0.6] or E_all[:1]
            F = [g for g in E_all if rng.random() < 0.2]
            f = bernoulli.random_family(spec, E, F, bins=4, rng=rng)
            bound_ok &= bernoulli.exact_variance(sig, f) <= bernoulli.variance_bound(sig, f)
            checked += 1
    for f in fam:
        bound_ok &= exact[f.name][1] <= bernoulli.variance_bound(sigma, f)
    blocks = approx.block_sum(sigma, 4)
    block_ok = all(bernoulli.exact_variance(blocks, f) == exact[f.name][1] / 4 for f in fam)
    detail = {"hits": hits, "trials": 100, "variance_bound_instances": checked + len(fam),
              "variance_bound_ok": bool(bound_ok), "block_sum_quarter_exact": bool(block_ok)}
    return hits >= 99 and bound_ok and block_ok, detail


# -- 7 ----------------------------------------------------------------------

@criterion(7, "exact variance falls by four per fourfold degree increase", 60.0)
def variance_decay(threads=None):
    fam = bernoulli.standard_family(Z, 1)
    sizes = (1000, 4000, 16000)
    table = {}
    ok = True
    for f in fam:
        vs = [bernoulli.exact_variance(approx.from_action(Z, "rotation", n=d, window=ball(Z, 2)), f) for d in sizes]
        ratios = [vs[i] / vs[i + 1] for i in range(len(vs) - 1)]
        table[f.name] = {"variances": vs, "ratios": ratios}
        ok &= all(3.8 <= r <= 4.2 for r in ratios)
    return ok, table


# -- 8 ----------------------------------------------------------------------

@criterion(8, "good labellings are found within ten tries")
def good_samples(threads=None):
    sigma = approx.from_action(Z, "rotation", n=10_000, window=ball(Z, 2))
    fam = bernoulli.standard_family(Z, 1)
    tol = 10 * math.sqrt(math.fsum(bernoulli.exact_variance(sigma, f) for f in fam))
    successes = 0
    tries = []
    for run in range(100):
        try:
            _, diag = bernoulli.select_good_sample(sigma, fam, tol, max_tries=10, seed=800 + run,
                                                   with_variance=(run == 0))
        except Exception:
            continue
        successes += 1
        tries.append(diag.tries)
    return successes >= 99, {"successes": successes, "tol": tol, "max_tries_used": max(tries, default=None)}


# -- 9 ----------------------------------------------------------------------

def relation_pipeline(d: int = 10_000, radius: int = 2, bins: int = 4, seed: int = 9, tol: float = 0.05):
    W = ball(Z, radius)
    sigma = approx.from_action(Z, "rotation", n=d, window=W)
    fam = bernoulli.standard_family(Z, 1)
    x, diag = bernoulli.select_good_sample(sigma, fam, tol, max_tries=20, seed=seed)
    base = relation.cylinder_algebra(Z, radius, bins)
    gens = list(Z.generators())
    data = bernoulli.export_relation_data(sigma, x, relation.close_family(base, gens))
    theta = irs.empirical_irs(sigma, ball(Z, 2 * (radius + 1)))
    tols = relation.Tolerances(tol, tol, tol, tol)
    report = relation.full_report(data, base, [Z.identity()] + gens, theta, tols)
    return report, diag


@criterion(9, "exported relation data passes every sofic-approximation check", 60.0)
def relation_soficity(threads=None):
    report, diag = relation_pipeline()
    inter = report.max_value("intersection")
    equi = report.max_value("equivariance")
    trace = report.max_value("trace")
    ok = report.passed and inter == 0 and equi == 0 and trace <= 0.05
    return ok, {"rows": len(report.rows), "max_intersection": inter, "max_equivariance": equi,
                "max_trace": trace, "sample_tries": diag.tries}


# -- 10 ---------------------------------------------------------------------

def _independent_cycle(d: int, seed: int) -> np.ndarray:
    pi = np.random.default_rng([seed, 0xCC]).permutation(d)
    out = np.empty(d, dtype=np.int64)
    out[pi] = pi[(np.arange(d) + 1) % d]
    return out


def torus_trend(sizes=(8, 16, 32), radius: int = 3):
    E = list(Z2.generators())

    def pair(n):
        W = ball(Z2, radius)
        return (approx.from_action(Z2, "rotation", n=n, window=W),
                approx.from_action(Z2, "cyclic_embedding", n=n, window=W))

    fam = irs.pair_family(ball(Z2, radius))
    return conjugacy.conjugacy_trend([(f"n={n}", (lambda n=n: pair(n))) for n in sizes], E, fam, 0)


@criterion(10, "alignment recovers conjugacies and matches brute force")
def conjugacy_checks(threads=None):
    d = 10_000
    a = approx.from_action(Z, "generator_images", d=d, images=[_independent_cycle(d, 1)])
    b = approx.from_action(Z, "generator_images", d=d, images=[_independent_cycle(d, 2)])
    res = conjugacy.align(conjugacy.AlignmentProblem(a, b, Z.generators()))
    part_a = res.objective == 0

    matches = undercuts = 0
    E = [F2.generators()[0], F2.generators()[2]]
    for i in range(100):
        s = approx.from_action(F2, "generator_images", d=6, seed=1000 + i)
        p = approx.from_action(F2, "generator_images", d=6, seed=5000 + i)
        bf = conjugacy.brute_force(s, p, E)
        al = conjugacy.align(conjugacy.AlignmentProblem(s, p, E, seed=i))
        matches += al.objective == bf.objective
        undercuts += al.objective < bf.objective
    part_b = matches >= 90 and undercuts == 0

    rows = torus_trend()
    objs = [r.objective for r in rows]
    part_c = all(r.stats_passed for r in rows) and None not in objs and all(
        objs[i] >= objs[i + 1] for i in range(len(objs) - 1))
    detail = {"cycle_objective": str(res.objective), "brute_force_matches": matches, "undercuts": undercuts,
              "torus_objectives": [str(o) for o in objs], "torus_stats_pass": [r.stats_passed for r in rows]}
    return part_a and part_b and part_c, detail


# -- 11 ---------------------------------------------------------------------

@criterion(11, "trivial padding is flagged as a stabilizer-statistics mismatch")
def padding_mismatch(threads=None):
    d = 1000
    W = ball(Z, 2)
    sigma = approx.from_action(Z, "rotation", n=d, window=W)
    padded = approx.pad_trivial(sigma, d // 2)
    fam = irs.singleton_family(W)
    rep = irs.stats_match(sigma, padded, fam, 0)
    diffs = {str(r.F[0]): str(r.difference) for r in rep.rows}
    exact = all(r.difference == Fraction(1, 3) for r in rep.rows)
    rows = conjugacy.conjugacy_trend([("pad", sigma, padded)], Z.generators(), fam, 0)
    flagged = not rows[0].stats_passed and "mismatch" in rows[0].note
    return exact and flagged and not rep.passed, {"differences": diffs, "trend_note": rows[0].note}
