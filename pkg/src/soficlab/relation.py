"""Defect metrics for finite sofic-approximation data of an orbit equivalence relation.

Given a set map rho on a family of cylinder sets and permutations sigma, the
checks measure how far rho is from preserving intersections, how far the
fixed-point traces are from the target measure, and how far rho is from
intertwining translation with sigma.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import groups
from .bernoulli import mu_theta_set
from .cylsets import CylinderSet, SoficApproxData
from .errors import ClosureError, MissingSet
from .groups import Element

UNCHECKED_NOTE = (
    "only translations by group elements are checked; other full-group elements are out of scope. "
    "Complements are not required of the family."
)


def _rho(data: SoficApproxData, B: CylinderSet) -> np.ndarray:
    try:
        return data.rho[B]
    except KeyError:
        raise MissingSet(f"set {B} is not in the declared family") from None


def _mass(mask: np.ndarray, d: int) -> Fraction:
    return Fraction(int(np.count_nonzero(mask)), d)


def intersection_defect(data: SoficApproxData, B1: CylinderSet, B2: CylinderSet) -> Fraction:
    """u_d of rho(B1 & B2) symmetric-difference (rho(B1) & rho(B2))."""
    both = _rho(data, B1.intersect(B2))
    return _mass(both ^ (_rho(data, B1) & _rho(data, B2)), data.degree)


def fixed_trace(data: SoficApproxData, B: CylinderSet, g: Element) -> Fraction:
    """u_d of the points of rho(B) fixed by sigma(g)."""
    img = data.image(g)
    return _mass(_rho(data, B) & (img == np.arange(data.degree)), data.degree)


def trace_defect(data: SoficApproxData, B: CylinderSet, g: Element, theta) -> float:
    """|u_d{j in rho(B) : sigma(g) j = j} - mu_theta(B and y(g) = 1)|."""
    target = mu_theta_set(B.intersect(CylinderSet.bit(g, 1, B.bins)), theta)
    return abs(float(fixed_trace(data, B, g)) - target)


def image_set(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[img[mask]] = True
    return out


def equivariance_defect(data: SoficApproxData, B: CylinderSet, g: Element) -> Fraction:
    """u_d of rho(gB) symmetric-difference sigma(g) rho(B)."""
    moved = image_set(data.image(g), _rho(data, B))
    return _mass(_rho(data, B.translate(g)) ^ moved, data.degree)


def close_family(base: Sequence[CylinderSet], translations: Iterable[Element] = ()) -> list[CylinderSet]:
    """base plus all pairwise intersections and all translates by the given elements."""
    base = list(dict.fromkeys(base))
    out = dict.fromkeys(base)
    for i, a in enumerate(base):
        for b in base[i:]:
            out.setdefault(a.intersect(b))
    for g in translations:
        for a in base:
            out.setdefault(a.translate(g))
    return list(out)


def homomorphism_defects(data: SoficApproxData, elements: Sequence[Element]) -> list[tuple[Element, Element, Fraction]]:
    rows = []
    for g in elements:
        for h in elements:
            composed = data.image(g)[data.image(h)]
            gh = data.image(groups.multiply(g, h))
            rows.append((g, h, _mass(composed != gh, data.degree)))
    return rows


@dataclass(frozen=True)
class Tolerances:
    homomorphism: float = 0.05
    intersection: float = 0.05
    trace: float = 0.05
    equivariance: float = 0.05


@dataclass(frozen=True)
class CheckRow:
    kind: str
    parameters: str
    value: float
    tolerance: float
    passed: bool
    exact: str = ""  # exact rational value when available


@dataclass
class RelationReport:
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    notes: tuple = (UNCHECKED_NOTE,)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def rows_of(self, kind: str) -> list[CheckRow]:
        return [r for r in self.rows if r.kind == kind]

    def max_value(self, kind: str) -> float:
        return max((r.value for r in self.rows_of(kind)), default=0.0)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "parameters", "value", "exact", "tolerance", "pass"])
            for r in self.rows:
                w.writerow([r.kind, r.parameters, repr(r.value), r.exact, r.tolerance, int(r.passed)])


def _row(kind: str, params: str, value, tol: float) -> CheckRow:
    exact = str(value) if isinstance(value, Fraction) else ""
    v = float(value)
    return CheckRow(kind, params, v, tol, v <= tol, exact)


def full_report(
    data: SoficApproxData,
    family: Sequence[CylinderSet],
    test_elements: Sequence[Element],
    theta,
    tolerances: Tolerances = Tolerances(),
    pairs: Iterable[tuple[CylinderSet, CylinderSet]] | None = None,
) -> RelationReport:
    """Every defect of the sequential definition, tested on the supplied family.

    ``pairs`` defaults to all unordered pairs of ``family``; each pair's
    intersection must be in the data and also gets a trace check.
    Equivariance is tested for each B in ``family`` and each test element.
    Missing sets needed by a requested check are reported as failing rows.
    """
    report = RelationReport()
    family = list(dict.fromkeys(family))
    if not family:
        msg = "empty family: the relation checks pass vacuously"
        warnings.warn(msg)
        report.warnings.append(msg)
    test_elements = list(test_elements)

    for g, h, v in homomorphism_defects(data, test_elements):
        report.rows.append(_row("homomorphism", f"g={g};h={h}", v, tolerances.homomorphism))

    if pairs is None:
        pairs = [(a, b) for i, a in enumerate(family) for b in family[i + 1:]]
    trace_sets = dict.fromkeys(family)
    for a, b in pairs:
        params = f"B1={a};B2={b}"
        try:
            v = intersection_defect(data, a, b)
        except MissingSet as exc:
            report.rows.append(CheckRow("missing-set", params, float("inf"), 0.0, False, str(exc)))
            continue
        trace_sets.setdefault(a.intersect(b))
        report.rows.append(_row("intersection", params, v, tolerances.intersection))

    for B in trace_sets:
        for g in test_elements:
            params = f"B={B};g={g}"
            try:
                v = trace_defect(data, B, g, theta)
            except ClosureError as exc:
                report.rows.append(CheckRow("closure", params, float("inf"), 0.0, False, str(exc)))
                continue
            report.rows.append(_row("trace", params, v, tolerances.trace))

    for B in family:
        for g in test_elements:
            params = f"B={B};g={g}"
            try:
                v = equivariance_defect(data, B, g)
            except MissingSet as exc:
                report.rows.append(CheckRow("missing-set", params, float("inf"), 0.0, False, str(exc)))
                continue
            report.rows.append(_row("equivariance", params, v, tolerances.equivariance))
    return report


def cylinder_algebra(group, radius: int, bins: int) -> list[CylinderSet]:
    """Full space, every single-bin label constraint and every bit constraint over a ball."""
    out = [CylinderSet.full(bins)]
    for g in groups.ball(group, radius):
        out += [CylinderSet.label(g, [b], bins) for b in range(bins)]
        out += [CylinderSet.bit(g, 1, bins), CylinderSet.bit(g, 0, bins)]
    return out


def corrupt(data: SoficApproxData, B: CylinderSet, fraction: float, seed: int = 0) -> SoficApproxData:
    """Copy of data with rho(B) flipped on a seeded random fraction of points."""
    rng = np.random.default_rng([seed, 0xC0])
    d = data.degree
    k = int(round(fraction * d))
    rho = {S: m.copy() for S, m in data.rho.items()}
    idx = rng.choice(d, size=k, replace=False)
    rho[B][idx] = ~rho[B][idx]
    return SoficApproxData(data.group, d, rho, dict(data.generator_images), data.window, data.sigma)
