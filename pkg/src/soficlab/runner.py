"""Pipeline orchestration: build the approximations a config asks for, run the stages, persist results.

Outputs in the run directory:
  report.json     schema-tagged summary (config echo, tables, checks); byte-identical across reruns
  run_meta.json   wall-clock runtime and thread count, kept apart so report.json stays deterministic
  <table>.csv     one file per result table
  <table>.dat/.gp gnuplot data and script for tables indexed by degree
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import approx, bernoulli, conjugacy, irs, relation, suite
from .bernoulli import CylinderFunction, StepFunction
from .config import ExperimentConfig
from .groups import DifferenceSet, ball, validate_closure

SCHEMA = "soficlab.report/1"


@dataclass
class RunReport:
    config: dict
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.errors and all(c["passed"] for c in self.checks)

    def body(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": self.config,
            "passed": self.passed,
            "checks": self.checks,
            "errors": self.errors,
            "tables": self.tables,
        }

    def check(self, stage: str, name: str, value, tolerance, passed: bool):
        self.checks.append({"stage": stage, "name": name, "value": _jsonable(value),
                            "tolerance": _jsonable(tolerance), "passed": bool(passed)})


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# -- building blocks ---------------------------------------------------------

def build(config: ExperimentConfig, construction, size: int) -> approx.ApproxHom:
    spec = config.group_spec()
    W = ball(spec, config.window_radius)
    params = dict(construction.params)
    params[construction.size_param] = size
    sigma = approx.from_action(spec, construction.action, window=W, degree_cap=config.degree_cap,
                               label=construction.name(), **params)
    if construction.block_sum:
        sigma = approx.block_sum(sigma, construction.block_sum, config.degree_cap)
    if construction.pad_trivial is not None:
        sigma = approx.pad_trivial(sigma, construction.pad_trivial)
    if construction.perturb is not None:
        sigma = approx.perturb(sigma, construction.perturb.rate, construction.perturb.seed)
    return sigma


def cylinder_family(config: ExperimentConfig) -> list[CylinderFunction]:
    spec = config.group_spec()
    if config.cylinder_family == "standard":
        return bernoulli.standard_family(spec, config.label_radius, config.bins, config.seeds.labels)
    out = []
    for i, c in enumerate(config.cylinder_family):
        labels = tuple((spec.parse(s.element), StepFunction(tuple(s.values))) for s in c.labels)
        bits = tuple(spec.parse(b) for b in c.bits)
        out.append(CylinderFunction(labels, bits, c.name or f"f{i}"))
    return out


def theta_for(config: ExperimentConfig, sigma, radius: int):
    spec = config.group_spec()
    t = config.theta
    W = ball(spec, t.window_radius if t.window_radius is not None else radius)
    if t.source == "empirical":
        return irs.empirical_irs(sigma, W)
    return irs.IRSWindowSpec(W, tuple((y, Fraction(w)) for y, w in t.patterns), "user-supplied")


# -- stages ------------------------------------------------------------------

def _stage_irs(config, report, sigmas):
    rows, summary = [], []
    spec = config.group_spec()
    W = ball(spec, config.window_radius)
    for (cname, size), sigma in sigmas.items():
        mu = irs.empirical_irs(sigma, W)
        for y, m in mu.items():
            rows.append({"construction": cname, "size": size, "d": sigma.degree, "pattern": y,
                         "mass": str(m), "mass_float": float(m)})
        for g in spec.generators():
            cd = irs.conjugation_invariance_defect(mu, g)
            mass, pair_sum = irs.conjugation_defect_bounds(sigma, W, g)
            summary.append({"construction": cname, "size": size, "d": sigma.degree, "g": str(g),
                            "conjugation_defect": str(cd.value), "coverage": str(cd.coverage),
                            "mismatch_bound": str(mass), "pair_defect_bound": str(pair_sum),
                            "inconsistent_mass": str(mu.inconsistent_mass())})
            report.check("irs", f"{cname}/{size}/conj {g}", cd.value, mass, cd.value <= mass)
    report.tables["irs_patterns"] = rows
    report.tables["irs_summary"] = summary


def _stage_defect(config, report, sigmas):
    rows = []
    W = ball(config.group_spec(), config.window_radius)
    tol = config.tolerances.defect
    for (cname, size), sigma in sigmas.items():
        rep = approx.defect(sigma, approx.window_pairs(W))
        for g, h, v in rep.rows():
            rows.append({"construction": cname, "size": size, "d": sigma.degree, "g": g, "h": h,
                         "defect": str(v), "defect_float": float(v)})
        sub = approx.subgroup_consistency_defects(sigma, W)
        report.check("defect", f"{cname}/{size}/max pair defect", rep.max, tol, rep.max <= tol)
        report.check("defect", f"{cname}/{size}/violation bounds", sub.total(), "pair-defect bounds",
                     sub.inequalities_hold())
    report.tables["defects"] = rows


def _stage_bernoulli(config, report, sigmas, threads):
    rows = []
    fam = cylinder_family(config)
    for (cname, size), sigma in sigmas.items():
        theta = theta_for(config, sigma, config.window_radius)
        for i, f in enumerate(fam):
            mean = bernoulli.exact_mean(sigma, f)
            var = bernoulli.exact_variance(sigma, f)
            bound = bernoulli.variance_bound(sigma, f)
            mc = bernoulli.mc_stats(sigma, f, config.mc_samples, config.seeds.mc + 7919 * i, threads)
            if isinstance(theta, irs.PatternMeasure):
                side = bernoulli.phi_expectation(f, theta)
                slack = bernoulli.consistency_slack(sigma, f).slack
            else:
                side = bernoulli.mu_theta(f, theta)
                slack = None
            rows.append({"construction": cname, "size": size, "d": sigma.degree, "f": f.name,
                         "exact_mean": mean, "exact_variance": var, "variance_bound": bound,
                         "mc_mean": mc.mean, "mc_variance": mc.variance, "mc_radius": mc.radius,
                         "theta_integral": side, "gap": abs(mean - side), "slack": slack})
            report.check("bernoulli", f"{cname}/{size}/{f.name}/variance bound", var, bound, var <= bound)
            if slack is not None:
                report.check("bernoulli", f"{cname}/{size}/{f.name}/theta gap", abs(mean - side), slack,
                             abs(mean - side) <= slack + 1e-12)
    report.tables["bernoulli"] = rows


def _stage_relcheck(config, report, sigmas):
    rows = []
    spec = config.group_spec()
    fam = cylinder_family(config)
    tol = config.tolerances
    radius = config.label_radius
    for (cname, size), sigma in sigmas.items():
        if config.tolerances.good_sample is not None:
            gs_tol = config.tolerances.good_sample
        else:
            gs_tol = 10 * math.sqrt(math.fsum(bernoulli.exact_variance(sigma, f) for f in fam))
        x, diag = bernoulli.select_good_sample(sigma, fam, max(gs_tol, 1e-300), config.max_tries,
                                               config.seeds.labels)
        base = relation.cylinder_algebra(spec, radius, config.relation_bins)
        gens = list(spec.generators())
        data = bernoulli.export_relation_data(sigma, x, relation.close_family(base, gens))
        theta = theta_for(config, sigma, 2 * (radius + 1))
        tols = relation.Tolerances(tol.defect, tol.intersection, tol.trace, tol.equivariance)
        rep = relation.full_report(data, base, [spec.identity()] + gens, theta, tols)
        for r in rep.rows:
            rows.append({"construction": cname, "size": size, "d": sigma.degree, "kind": r.kind,
                         "parameters": r.parameters, "value": r.value, "exact": r.exact,
                         "tolerance": r.tolerance, "pass": r.passed})
        for kind in ("homomorphism", "intersection", "trace", "equivariance"):
            worst = rep.max_value(kind)
            limit = getattr(tols, kind)
            report.check("relcheck", f"{cname}/{size}/max {kind}", worst, limit, worst <= limit)
        failing = [r for r in rep.rows if r.kind in ("missing-set", "closure")]
        report.check("relcheck", f"{cname}/{size}/family closure", len(failing), 0, not failing)
        report.check("relcheck", f"{cname}/{size}/good sample tries", diag.tries, config.max_tries, True)
    report.tables["relcheck"] = rows


def _stage_align(config, report):
    spec = config.group_spec()
    c1, c2 = config.constructions[:2]
    E = list(spec.generators())
    fam = irs.pair_family(ball(spec, config.window_radius))
    pairs = [(f"size={s}", (lambda s=s: (build(config, c1, s), build(config, c2, s)))) for s in config.sizes]
    trend = conjugacy.conjugacy_trend(pairs, E, fam, config.tolerances.stats, seed=config.seeds.align,
                                      rounds=config.align_rounds, restarts=config.align_restarts)
    rows = []
    for size, r in zip(config.sizes, trend):
        rows.append({"size": size, "d": r.degree_sigma, "d_psi": r.degree_psi, "stats_pass": r.stats_passed,
                     "max_stats_difference": str(r.stats.max_difference),
                     "objective": None if r.objective is None else str(r.objective),
                     "objective_float": None if r.objective is None else float(r.objective),
                     "note": r.note})
        report.check("align", f"size={size}/stats match", r.stats.max_difference, config.tolerances.stats,
                     r.stats_passed)
        if config.tolerances.alignment is not None and r.objective is not None:
            report.check("align", f"size={size}/objective", r.objective, config.tolerances.alignment,
                         r.objective <= Fraction(str(config.tolerances.alignment)))
    report.tables["align_trend"] = rows


def _stage_suite(config, report, threads):
    rows = []
    for res in suite.run_suite(config.suite_criteria or None, threads):
        rows.append({"criterion": res.number, "name": res.name, "passed": res.passed,
                     "time_limit": res.time_limit, "detail": json.dumps(res.detail, sort_keys=True, default=str)})
        report.check("suite", f"criterion {res.number}", res.passed, True, res.passed)
    report.tables["suite"] = rows


# -- entry points ------------------------------------------------------------

def run(config: ExperimentConfig, output_dir=None, threads: int | None = None) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(config.model_dump(mode="json"))
    sigmas = {}
    needs_sigma = [p for p in config.pipelines if p not in ("align", "suite")]
    if needs_sigma:
        for c in config.constructions:
            for s in config.sizes:
                try:
                    sigmas[(c.name(), s)] = build(config, c, s)
                except Exception as exc:
                    report.errors.append({"stage": "build", "construction": c.name(), "size": s, "error": str(exc)})
    stages = {
        "irs": lambda: _stage_irs(config, report, sigmas),
        "defect": lambda: _stage_defect(config, report, sigmas),
        "bernoulli": lambda: _stage_bernoulli(config, report, sigmas, threads),
        "relcheck": lambda: _stage_relcheck(config, report, sigmas),
        "align": lambda: _stage_align(config, report),
        "suite": lambda: _stage_suite(config, report, threads),
    }
    for name in config.pipelines:
        try:
            stages[name]()
        except Exception as exc:
            report.errors.append({"stage": name, "error": f"{type(exc).__name__}: {exc}"})
    report.runtime = time.perf_counter() - t0
    write(report, Path(output_dir or config.output_dir), threads)
    return report


def write(report: RunReport, out: Path, threads: int | None = None):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.body(), indent=1, sort_keys=True, default=str) + "\n")
    (out / "run_meta.json").write_text(json.dumps({"runtime_s": report.runtime, "threads": threads}) + "\n")
    for name, rows in report.tables.items():
        if not rows:
            continue
        cols = list(rows[0])
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in rows:
                w.writerow({k: _jsonable(v) for k, v in r.items()})
        _gnuplot(out, name, rows)


def _gnuplot(out: Path, name: str, rows: list[dict]):
    """Degree-indexed numeric columns become a .dat file plus a log-log plot script."""
    if "d" not in rows[0]:
        return
    numeric = [k for k, v in rows[0].items()
               if k != "d" and isinstance(v, (int, float)) and not isinstance(v, bool)]
    if not numeric:
        return
    series_key = next((k for k in ("f", "construction") if k in rows[0]), None)
    with open(out / f"{name}.dat", "w") as fh:
        fh.write("# d " + " ".join(numeric) + "\n")
        groups_: dict = {}
        for r in rows:
            groups_.setdefault(r.get(series_key, ""), []).append(r)
        for key, rs in groups_.items():
            fh.write(f"# series {key}\n")
            for r in sorted(rs, key=lambda r: r["d"]):
                vals = ["nan" if r[k] is None else repr(float(r[k])) for k in numeric]
                fh.write(f"{r['d']} " + " ".join(vals) + "\n")
            fh.write("\n\n")
    plot_col = numeric.index(next((k for k in ("exact_variance", "objective_float", "defect_float")
                                   if k in numeric), numeric[0])) + 2
    (out / f"{name}.gp").write_text(
        f"set logscale xy\nset xlabel 'd'\nset ylabel '{numeric[plot_col - 2]}'\n"
        f"plot for [i=0:*] '{name}.dat' index i using 1:{plot_col} with linespoints title columnheader(1)\n"
    )


def describe(config: ExperimentConfig) -> str:
    spec = config.group_spec()
    lines = [f"experiment {config.name}", f"group {spec} ({'amenable' if spec.amenable else 'not amenable'})"]
    try:
        W = ball(spec, config.window_radius)
        E = ball(spec, config.label_radius)
        lines.append(f"window: ball of radius {config.window_radius}, {len(W)} elements")
        lines.append(f"label window: ball of radius {config.label_radius}, {len(E)} elements")
        rep = validate_closure(W, DifferenceSet(tuple(E)))
        if rep.ok:
            lines.append("closure: label differences lie in the window")
        else:
            lines.append("closure FAILED; missing " + ", ".join(str(m) for m in rep.missing))
    except Exception as exc:
        lines.append(f"window construction failed: {exc}")
        W = ()
    for c in config.constructions:
        lines.append(f"construction {c.name()}: action {c.action}, params {c.params}")
        for s in config.sizes:
            try:
                sigma = build(config, c, s)
            except Exception as exc:
                lines.append(f"  size {s}: WARNING {exc}")
                continue
            d = sigma.degree
            mem = d * 8 * (len(W) + 4)
            lines.append(f"  size {s}: d = {d}, about {mem / 2**20:.1f} MiB of image arrays")
    if not config.pipelines:
        lines.append("no pipelines requested")
    else:
        lines.append("pipelines: " + ", ".join(config.pipelines))
    lines.append(f"output directory: {config.output_dir}")
    return "\n".join(lines)
