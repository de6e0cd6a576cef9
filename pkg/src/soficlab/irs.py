"""Empirical stabilizer statistics of approximate homomorphisms on windows.

A point j of sigma's domain has stabilizer pattern y_j with y_j(g) = 1 iff
sigma(g) fixes j. Pushing the uniform measure on points forward along
j -> y_j|_W gives a :class:`PatternMeasure`, the window restriction of the
empirical invariant random subgroup. Patterns are bit strings in window
order; masses are exact fractions.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import groups
from .approx import ApproxHom, pair_defect
from .errors import InconsistentPattern, WindowMismatch
from .groups import Element, Window


@dataclass(frozen=True)
class PatternMeasure:
    window: Window
    masses: dict  # bit string -> Fraction

    def __post_init__(self):
        total = sum(self.masses.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"pattern masses sum to {total}, not 1")
        n = len(self.window)
        for y, m in self.masses.items():
            if len(y) != n or set(y) - {"0", "1"}:
                raise ValueError(f"bad pattern {y!r} for a window of size {n}")
            if m < 0:
                raise ValueError("negative mass")

    def __len__(self):
        return len(self.masses)

    def items(self):
        return sorted(self.masses.items())

    def fixed_fraction(self, F: Iterable[Element]) -> Fraction:
        """Mass of patterns equal to 1 on every element of F."""
        idx = [self.window.index(g) for g in F]
        return sum((m for y, m in self.masses.items() if all(y[i] == "1" for i in idx)), Fraction(0))

    def marginal(self, sub: Sequence[Element]) -> "PatternMeasure":
        idx = [self.window.index(g) for g in sub]
        out: dict[str, Fraction] = {}
        for y, m in self.masses.items():
            key = "".join(y[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + m
        return PatternMeasure(Window.of(sub), _reorder(out, sub))

    def violations(self) -> list[tuple[str, Fraction]]:
        """Patterns that are not subgroup-consistent on the window, with their masses."""
        keys = list(self.masses)
        if not keys:
            return []
        mask = consistent_mask(self.window, _bits_matrix(keys))
        return [(k, self.masses[k]) for k, ok in zip(keys, mask) if not ok]

    def inconsistent_mass(self) -> Fraction:
        return sum((m for _, m in self.violations()), Fraction(0))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pattern", "numerator", "denominator"])
            for y, m in self.items():
                w.writerow([y, m.numerator, m.denominator])

    @classmethod
    def from_csv(cls, path, window: Window) -> "PatternMeasure":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(window, {r["pattern"]: Fraction(int(r["numerator"]), int(r["denominator"])) for r in rows})


def _reorder(masses: dict, sub: Sequence[Element]) -> dict:
    # Window.of may move the identity to the front; keep bit order aligned with it
    sub = list(sub)
    w = Window.of(sub)
    if list(w) == sub:
        return masses
    perm = [sub.index(g) for g in w]
    return {"".join(y[i] for i in perm): m for y, m in masses.items()}


def _bits_matrix(patterns: Sequence[str]) -> np.ndarray:
    return np.array([[c == "1" for c in y] for y in patterns], dtype=bool).reshape(len(patterns), -1)


@lru_cache(maxsize=256)
def _window_tables(window: Window):
    inv_pairs = []
    triples = []
    for i, g in enumerate(window):
        gi = groups.inverse(g)
        if gi in window:
            inv_pairs.append((i, window.index(gi)))
        for j, h in enumerate(window):
            gh = groups.multiply(g, h)
            if gh in window:
                triples.append((i, j, window.index(gh)))
    return window.identity_index, np.array(inv_pairs, dtype=np.int64).reshape(-1, 2), np.array(
        triples, dtype=np.int64
    ).reshape(-1, 3)


def consistent_mask(window: Window, bits: np.ndarray) -> np.ndarray:
    """Row-wise subgroup-consistency check of a (patterns x window) boolean matrix.

    A pattern y passes iff y(e) = 1, y(g) = y(g^-1) whenever g^-1 is in the
    window, and y(g) = y(h) = 1 with gh in the window forces y(gh) = 1.
    """
    bits = np.asarray(bits, dtype=bool)
    e, inv_pairs, triples = _window_tables(window)
    ok = bits[:, e].copy()
    if len(inv_pairs):
        ok &= (bits[:, inv_pairs[:, 0]] == bits[:, inv_pairs[:, 1]]).all(axis=1)
    if len(triples):
        viol = bits[:, triples[:, 0]] & bits[:, triples[:, 1]] & ~bits[:, triples[:, 2]]
        ok &= ~viol.any(axis=1)
    return ok


def is_consistent(window: Window, pattern: str) -> bool:
    return bool(consistent_mask(window, _bits_matrix([pattern]))[0])


def enumerate_consistent_patterns(window: Window, limit_bits: int = 22) -> list[str]:
    """Every subgroup-consistent bit pattern on a small window, in lexicographic order."""
    n = len(window)
    if n > limit_bits:
        raise ValueError(f"window of size {n} is too large to enumerate")
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(bool)
    ok = consistent_mask(window, bits)
    return ["".join("1" if b else "0" for b in row) for row in bits[ok]]


def stabilizer_bits(sigma: ApproxHom, window: Window) -> np.ndarray:
    """(|W|, d) boolean matrix: entry (i, j) is True iff sigma(W[i]) fixes j."""
    if window.group != sigma.group:
        raise WindowMismatch("window and homomorphism belong to different groups")
    ar = np.arange(sigma.degree)
    return np.stack([sigma.img(g) == ar for g in window], axis=0)


def empirical_irs(sigma: ApproxHom, window: Window) -> PatternMeasure:
    bits = stabilizer_bits(sigma, window)
    packed = np.packbits(bits, axis=0).T  # one row per point
    uniq, counts = np.unique(packed, axis=0, return_counts=True)
    n = len(window)
    d = sigma.degree
    masses = {}
    for row, c in zip(uniq, counts):
        y = "".join("1" if b else "0" for b in np.unpackbits(row)[:n])
        masses[y] = Fraction(int(c), d)
    return PatternMeasure(window, masses)


def fixed_fraction(sigma: ApproxHom, F: Iterable[Element], window: Window | None = None) -> Fraction:
    """Fraction of points fixed by sigma(g) for every g in F (1 when F is empty)."""
    F = list(F)
    if window is not None:
        outside = [g for g in F if g not in window]
        if outside:
            raise WindowMismatch(f"elements {outside} are not in the window")
    d = sigma.degree
    ar = np.arange(d)
    mask = np.ones(d, dtype=bool)
    for g in F:
        mask &= sigma.img(g) == ar
    return Fraction(int(np.count_nonzero(mask)), d)


def tv_distance(mu1: PatternMeasure, mu2: PatternMeasure) -> Fraction:
    if tuple(mu1.window) != tuple(mu2.window):
        raise WindowMismatch("measures live on different windows")
    keys = set(mu1.masses) | set(mu2.masses)
    zero = Fraction(0)
    return sum((abs(mu1.masses.get(k, zero) - mu2.masses.get(k, zero)) for k in keys), zero) / 2


def mass_by_inclusion_exclusion(window: Window, pattern: str, theta) -> Fraction:
    """Recover the mass of ``pattern`` from fixed fractions theta(F), F a subset of the window.

    Uses mass(y) = sum over S containing ones(y) of (-1)^{|S| - |ones(y)|} theta(S).
    Exponential in the number of zero bits; meant for small windows.
    """
    ones = [g for g, b in zip(window, pattern) if b == "1"]
    zeros = [g for g, b in zip(window, pattern) if b == "0"]
    total = Fraction(0)
    for mask in range(1 << len(zeros)):
        extra = [z for i, z in enumerate(zeros) if mask >> i & 1]
        sign = -1 if len(extra) % 2 else 1
        total += sign * Fraction(theta(ones + extra))
    return total


@dataclass(frozen=True)
class StatsRow:
    F: tuple[Element, ...]
    theta_sigma: Fraction
    theta_psi: Fraction
    difference: Fraction
    passed: bool


@dataclass(frozen=True)
class StatsMatchReport:
    rows: tuple[StatsRow, ...]
    tol: Fraction

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def max_difference(self) -> Fraction:
        return max((r.difference for r in self.rows), default=Fraction(0))


def stats_match(sigma: ApproxHom, psi: ApproxHom, family: Iterable[Sequence[Element]], tol) -> StatsMatchReport:
    tol = Fraction(str(tol)) if isinstance(tol, float) else Fraction(tol)
    rows = []
    for F in family:
        F = tuple(F)
        a = fixed_fraction(sigma, F)
        b = fixed_fraction(psi, F)
        diff = abs(a - b)
        rows.append(StatsRow(F, a, b, diff, diff <= tol))
    return StatsMatchReport(tuple(rows), tol)


def singleton_family(window: Window, include_identity: bool = False) -> list[tuple[Element, ...]]:
    return [(g,) for g in window if include_identity or not g.is_identity]


def pair_family(window: Window) -> list[tuple[Element, ...]]:
    elems = [g for g in window if not g.is_identity]
    fam = [(g,) for g in elems]
    fam += [(a, b) for i, a in enumerate(elems) for b in elems[i + 1:]]
    return fam


@dataclass(frozen=True)
class ConjugationDefect:
    value: Fraction
    coverage: Fraction
    subwindow: tuple[Element, ...]


def conjugation_subwindow(window: Window, g: Element) -> list[Element]:
    gi = groups.inverse(g)
    return [h for h in window if groups.multiply(groups.multiply(gi, h), g) in window]


def conjugation_invariance_defect(mu: PatternMeasure, g: Element) -> ConjugationDefect:
    """TV distance between mu and its conjugate g.mu on the largest sub-window where both are defined.

    Conjugation acts on patterns by (g.y)(h) = y(g^-1 h g).
    """
    window = mu.window
    sub = conjugation_subwindow(window, g)
    if not sub:
        raise WindowMismatch(f"no window element h has g^-1 h g in the window for g = {g}")
    gi = groups.inverse(g)
    direct_idx = [window.index(h) for h in sub]
    conj_idx = [window.index(groups.multiply(groups.multiply(gi, h), g)) for h in sub]
    a: dict[str, Fraction] = {}
    b: dict[str, Fraction] = {}
    for y, m in mu.masses.items():
        ka = "".join(y[i] for i in direct_idx)
        kb = "".join(y[i] for i in conj_idx)
        a[ka] = a.get(ka, Fraction(0)) + m
        b[kb] = b.get(kb, Fraction(0)) + m
    zero = Fraction(0)
    tv = sum((abs(a.get(k, zero) - b.get(k, zero)) for k in set(a) | set(b)), zero) / 2
    return ConjugationDefect(tv, Fraction(len(sub), len(window)), tuple(sub))


def conjugation_defect_bounds(sigma: ApproxHom, window: Window, g: Element) -> tuple[Fraction, Fraction]:
    """Two upper bounds for the conjugation defect of empirical_irs(sigma, window).

    Returns (mismatch mass, pair-defect sum). The first is the mass of points
    where the conjugated pattern and the pattern at sigma(g)j disagree on the
    sub-window; the second bounds it by a union over sub-window elements h of
    defect(g^-1, hg) + defect(h, g) + d(sigma(g^-1), sigma(g)^-1).
    """
    d = sigma.degree
    ar = np.arange(d)
    gi = groups.inverse(g)
    sg, sg_inv = sigma.img(g), sigma.inv(g)
    bad = np.zeros(d, dtype=bool)
    pair_sum = Fraction(0)
    inv_gap = Fraction(int(np.count_nonzero(sigma.img(gi) != sg_inv)), d)
    for h in conjugation_subwindow(window, g):
        c = groups.multiply(groups.multiply(gi, h), g)
        left = sigma.img(c) == ar
        right = sg_inv[sigma.img(h)[sg]] == ar
        bad |= left != right
        pair_sum += pair_defect(sigma, gi, groups.multiply(h, g)) + pair_defect(sigma, h, g) + inv_gap
    return Fraction(int(np.count_nonzero(bad)), d), pair_sum


@dataclass(frozen=True)
class IRSWindowSpec:
    """A prescribed (or empirical) IRS restricted to a window, checked to be subgroup-consistent."""

    window: Window
    patterns: tuple[tuple[str, Fraction], ...]
    provenance: str = "user-supplied"

    def __post_init__(self):
        if self.provenance not in ("empirical-from-sigma", "exact-subgroup-list", "user-supplied"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        pats = tuple((str(y), Fraction(w) if not isinstance(w, float) else Fraction(str(w)))
                     for y, w in self.patterns)
        object.__setattr__(self, "patterns", pats)
        total = sum((w for _, w in pats), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        if any(w < 0 for _, w in pats):
            raise ValueError("negative weight")
        n = len(self.window)
        for y, _ in pats:
            if len(y) != n:
                raise ValueError(f"pattern {y!r} does not match window size {n}")
        if pats:
            mask = consistent_mask(self.window, _bits_matrix([y for y, _ in pats]))
            bad = [y for (y, _), ok in zip(pats, mask) if not ok]
            if bad:
                raise InconsistentPattern(f"patterns not subgroup-consistent: {bad[:5]}")

    @classmethod
    def from_measure(cls, mu: PatternMeasure, provenance: str = "empirical-from-sigma") -> "IRSWindowSpec":
        return cls(mu.window, tuple(mu.items()), provenance)

    @classmethod
    def point_mass(cls, window: Window, subgroup_members: Iterable[Element]) -> "IRSWindowSpec":
        members = set(subgroup_members) | {window.group.identity()}
        y = "".join("1" if g in members else "0" for g in window)
        return cls(window, ((y, Fraction(1)),), "exact-subgroup-list")

    def as_measure(self) -> PatternMeasure:
        masses: dict[str, Fraction] = {}
        for y, w in self.patterns:
            masses[y] = masses.get(y, Fraction(0)) + w
        return PatternMeasure(self.window, masses)
