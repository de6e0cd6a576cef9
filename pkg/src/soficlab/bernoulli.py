"""Cylinder integrals of the pattern-Bernoulli measure and the labelled microstates of sigma.

A labelling x of [d] turns each point j into a microstate phi_x(j): for each
window element g the bit [sigma(g) fixes j] and the label x(sigma(g)^-1 j).
Averaging a cylinder function over the microstates is ``pushforward``; its
expectation and variance over uniformly random labels have closed forms
(``exact_mean``, ``exact_variance``) because labels at distinct points are
independent.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from . import groups
from .approx import ApproxHom
from .cylsets import CylinderSet, SoficApproxData, preimage
from .errors import ClosureError, GoodSampleNotFound
from .groups import DifferenceSet, Element, GroupSpec, Window, validate_closure
from .irs import IRSWindowSpec, PatternMeasure

DEFAULT_BINS = 16


# -- step functions ----------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """f on [0, 1] that is constant on each of the m bins [i/m, (i+1)/m)."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("a step function needs at least one bin")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ValueError("step values must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c: float = 1.0) -> "StepFunction":
        return cls((c,))

    @classmethod
    def indicator(cls, bins: Iterable[int], m: int) -> "StepFunction":
        allowed = set(bins)
        return cls(tuple(1.0 if i in allowed else 0.0 for i in range(m)))

    @classmethod
    def interval(cls, lo: Fraction, hi: Fraction, m: int) -> "StepFunction":
        """Indicator of [lo, hi); both ends must sit on the bin grid."""
        lo, hi = Fraction(lo), Fraction(hi)
        if (lo * m).denominator != 1 or (hi * m).denominator != 1:
            raise ValueError("interval ends must be multiples of 1/m")
        return cls.indicator(range(int(lo * m), int(hi * m)), m)

    @property
    def bins(self) -> int:
        return len(self.values)

    def __call__(self, x):
        arr = np.asarray(self.values)
        idx = np.minimum((np.asarray(x) * self.bins).astype(np.int64), self.bins - 1)
        return arr[idx]

    def integral(self) -> float:
        return math.fsum(self.values) / self.bins

    def sup(self) -> float:
        return max(self.values)

    def is_constant_one(self) -> bool:
        return all(v == 1.0 for v in self.values)


def product_integral(fs: Sequence[StepFunction]) -> float:
    """Exact integral of the pointwise product over [0, 1] (1 for an empty product)."""
    if not fs:
        return 1.0
    if len(fs) == 1:
        return fs[0].integral()
    m = reduce(math.lcm, (f.bins for f in fs))
    prod = np.ones(m)
    for f in fs:
        prod = prod * np.repeat(np.asarray(f.values), m // f.bins)
    return math.fsum(prod.tolist()) / m


# -- cylinder functions ------------------------------------------------------

@dataclass(frozen=True)
class CylinderFunction:
    """(product over g in E of f_g(label at g)) times the indicator that all bits in F are 1."""

    labels: tuple  # ((Element, StepFunction), ...)
    bits: tuple = ()  # (Element, ...)
    name: str = ""

    def __post_init__(self):
        labels = tuple((g, f if isinstance(f, StepFunction) else StepFunction(f)) for g, f in self.labels)
        seen = [g for g, _ in labels]
        if len(set(seen)) != len(seen):
            raise ValueError("label window has repeated elements")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "bits", tuple(dict.fromkeys(self.bits)))

    @classmethod
    def of(cls, labels: dict | None = None, bits: Iterable[Element] = (), name: str = "") -> "CylinderFunction":
        return cls(tuple((labels or {}).items()), tuple(bits), name)

    @property
    def E(self) -> tuple[Element, ...]:
        return tuple(g for g, _ in self.labels)

    @property
    def F(self) -> tuple[Element, ...]:
        return self.bits

    @property
    def functions(self) -> tuple[StepFunction, ...]:
        return tuple(f for _, f in self.labels)

    def sup(self) -> float:
        """sup |f|, the product of the factors' sup norms."""
        out = 1.0
        for f in self.functions:
            out *= f.sup()
        return out

    def max_factor_sup(self) -> float:
        return max((f.sup() for f in self.functions), default=1.0)

    def elements(self) -> list[Element]:
        return list(dict.fromkeys(self.E + self.F))


# -- labels and microstates --------------------------------------------------

@dataclass(frozen=True)
class Labels:
    x: np.ndarray
    seed: int
    stream: int = 0

    @property
    def degree(self) -> int:
        return int(self.x.size)

    def __len__(self):
        return self.degree


def _philox(seed: int, stream: int) -> np.random.Philox:
    return np.random.Philox(key=[int(seed) % (1 << 64), int(stream) % (1 << 64)])


def label_slice(seed: int, stream: int, start: int, stop: int) -> np.ndarray:
    """Labels start..stop-1 of the (seed, stream) sequence, without generating the prefix.

    Label j is the j-th 53-bit uniform drawn from a Philox counter keyed by
    (seed, stream); each counter step yields four draws.
    """
    bg = _philox(seed, stream)
    block, offset = divmod(start, 4)
    if block:
        bg.advance(block)
    out = np.random.Generator(bg).random(stop - start + offset)
    return out[offset:]


def sample_labels(d: int, seed: int, stream: int = 0) -> Labels:
    if d < 1:
        raise ValueError("d must be positive")
    x = label_slice(seed, stream, 0, d)
    x.flags.writeable = False
    return Labels(x, seed, stream)


def label_ties(x: Labels | np.ndarray) -> int:
    """Number of repeated label values; nonzero only with vanishing probability."""
    arr = x.x if isinstance(x, Labels) else np.asarray(x)
    return int(arr.size - np.unique(arr).size)


@dataclass(frozen=True)
class Microstate:
    sigma: ApproxHom
    labels: Labels

    def bit(self, j: int, g: Element) -> int:
        return int(self.sigma.img(g)[j] == j)

    def label(self, j: int, g: Element) -> float:
        return float(self.labels.x[self.sigma.inv(g)[j]])

    def __call__(self, j: int, g: Element) -> tuple[int, float]:
        return self.bit(j, g), self.label(j, g)


def _x(x) -> np.ndarray:
    return x.x if isinstance(x, Labels) else np.asarray(x, dtype=float)


def pointwise(sigma: ApproxHom, x, f: CylinderFunction) -> np.ndarray:
    """The values f(phi_x(j)) for every point j."""
    xs = _x(x)
    if xs.size != sigma.degree:
        raise ValueError(f"labels have length {xs.size}, sigma has degree {sigma.degree}")
    d = sigma.degree
    vals = np.ones(d)
    for b in f.F:
        vals *= sigma.fixed(b)
    for g, fg in f.labels:
        vals *= fg(xs[sigma.inv(g)])
    return vals


def pushforward(sigma: ApproxHom, x, f: CylinderFunction) -> float:
    return math.fsum(pointwise(sigma, x, f).tolist()) / sigma.degree


# -- exact oracles -----------------------------------------------------------

def _partition_labels(P: np.ndarray) -> np.ndarray:
    """Column-wise set-partition code of the rows of P.

    Entry (i, c) is the smallest row index k with P[k, c] == P[i, c], so two
    columns share a code iff their rows coincide in the same pattern.
    """
    r = P.shape[0]
    L = np.empty(P.shape, dtype=np.int16)
    for i in range(r):
        L[i] = i
        for k in range(i - 1, -1, -1):
            L[i] = np.where(P[k] == P[i], k, L[i])
    return L


def _classes(code: Sequence[int]) -> list[list[int]]:
    out: dict[int, list[int]] = {}
    for i, c in enumerate(code):
        out.setdefault(int(c), []).append(i)
    return list(out.values())


class _ClassIntegrals:
    """Memoized product integrals over subsets of a fixed list of step functions."""

    def __init__(self, fs: Sequence[StepFunction]):
        self.fs = list(fs)
        self.memo: dict[tuple[int, ...], float] = {}

    def __call__(self, idx: Sequence[int]) -> float:
        key = tuple(idx)
        v = self.memo.get(key)
        if v is None:
            v = product_integral([self.fs[i] for i in key])
            self.memo[key] = v
        return v

    def coset_product(self, code: Sequence[int], offset: int = 0) -> float:
        out = 1.0
        for cls in _classes(code):
            out *= self([offset + i for i in cls])
        return out


def _fixed_mask(sigma: ApproxHom, F: Sequence[Element]) -> np.ndarray:
    mask = np.ones(sigma.degree, dtype=bool)
    for b in F:
        mask &= sigma.fixed(b)
    return mask


def _preimages(sigma: ApproxHom, E: Sequence[Element]) -> np.ndarray:
    return np.stack([sigma.inv(g) for g in E]) if E else np.zeros((0, sigma.degree), dtype=np.int64)


def _per_point_psi(sigma: ApproxHom, f: CylinderFunction):
    """Psi(j) for every j, the F-fixed mask, and the preimage matrix."""
    P = _preimages(sigma, f.E)
    mask = _fixed_mask(sigma, f.F)
    if not f.E:
        return np.ones(sigma.degree), mask, P
    L = _partition_labels(P)
    uniq, inverse = np.unique(L.T, axis=0, return_inverse=True)
    ints = _ClassIntegrals(f.functions)
    vals = np.array([ints.coset_product(code) for code in uniq])
    return vals[inverse.reshape(-1)], mask, P


def exact_mean(sigma: ApproxHom, f: CylinderFunction) -> float:
    """Expectation of pushforward(sigma, x, f) over uniform labels x, in closed form."""
    psi, mask, _ = _per_point_psi(sigma, f)
    return math.fsum(psi[mask].tolist()) / sigma.degree


def exact_variance(sigma: ApproxHom, f: CylinderFunction) -> float:
    """Variance of pushforward(sigma, x, f) over uniform labels x, in closed form.

    Only ordered pairs (j, k) whose preimage sets meet contribute; each pair is
    grouped by the coincidence pattern of its 2|E| preimage points.
    """
    d = sigma.degree
    E = f.E
    if not E:
        return 0.0
    mask = _fixed_mask(sigma, f.F)
    P = _preimages(sigma, E)
    js = np.flatnonzero(mask)
    if js.size == 0:
        return 0.0
    imgs = np.stack([sigma.img(g) for g in E])
    r = len(E)
    cand_j = np.tile(js, r * r)
    cand_k = np.concatenate([imgs[b][P[a, js]] for a in range(r) for b in range(r)])
    keep = mask[cand_k]
    codes = np.unique(cand_j[keep] * d + cand_k[keep])
    pj, pk = np.divmod(codes, d)
    Q = np.concatenate([P[:, pj], P[:, pk]], axis=0)
    L = _partition_labels(Q)
    uniq, counts = np.unique(L.T, axis=0, return_counts=True)
    ints = _ClassIntegrals(list(f.functions) * 2)
    terms = []
    for code, n in zip(uniq, counts):
        joint = ints.coset_product(code)
        psi_j = ints.coset_product(code[:r])
        psi_k = ints.coset_product(code[r:], offset=r)
        terms.append(float(n) * (joint - psi_j * psi_k))
    return math.fsum(terms) / d / d


def variance_bound(sigma: ApproxHom, f: CylinderFunction) -> float:
    """(2/d)|E|^2 prod sup(f_g)^2, an a-priori ceiling on exact_variance."""
    return 2.0 / sigma.degree * len(f.E) ** 2 * f.sup() ** 2


@dataclass(frozen=True)
class MCStats:
    mean: float
    variance: float
    radius: float
    samples: int


def mc_stats(sigma: ApproxHom, f: CylinderFunction, S: int, seed: int, threads: int | None = None) -> MCStats:
    """Monte Carlo mean and unbiased variance of pushforward over S labellings (streams 0..S-1)."""
    if S < 2:
        raise ValueError("need at least two samples")

    def one(s: int) -> float:
        return pushforward(sigma, label_slice(seed, s, 0, sigma.degree), f)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, range(S)))
    else:
        vals = [one(s) for s in range(S)]
    mean = math.fsum(vals) / S
    var = math.fsum((v - mean) ** 2 for v in vals) / (S - 1)
    return MCStats(mean, var, 3.0 * math.sqrt(var / S), S)


# -- the pattern-Bernoulli side ----------------------------------------------

def _require_difference_closure(window: Window, f: CylinderFunction, extra_bits: Iterable[Element] = ()):
    rep = validate_closure(window, DifferenceSet(tuple(f.E)))
    missing = list(rep.missing) + [b for b in list(f.F) + list(extra_bits) if b not in window]
    if missing:
        raise ClosureError(
            "window must contain E*E^-1 and every bit element; missing "
            + ", ".join(str(m) for m in missing[:10]),
            missing,
        )


def _difference_index(window: Window, E: Sequence[Element]) -> np.ndarray:
    """Matrix D with D[a, b] = window index of E[a] E[b]^-1."""
    return np.array(
        [[window.index(groups.multiply(g, groups.inverse(k))) for k in E] for g in E], dtype=np.int64
    ).reshape(len(E), len(E))


def _as_spec(theta) -> IRSWindowSpec:
    if isinstance(theta, IRSWindowSpec):
        return theta
    if isinstance(theta, PatternMeasure):
        return IRSWindowSpec.from_measure(theta)
    raise TypeError("expected an IRSWindowSpec or PatternMeasure")


def coset_factor(y: str, f: CylinderFunction, window: Window, _ints=None) -> float:
    """The integrand of mu_theta at a consistent pattern: E_F(y) times the product over cosets."""
    _require_difference_closure(window, f)
    if any(y[window.index(b)] != "1" for b in f.F):
        return 0.0
    E = f.E
    if not E:
        return 1.0
    D = _difference_index(window, E)
    ints = _ints or _ClassIntegrals(f.functions)
    # class representative: the first k in E with y(g k^-1) = 1
    code = [next(b for b in range(a + 1) if b == a or y[D[a, b]] == "1") for a in range(len(E))]
    return ints.coset_product(code)


def mu_theta(f: CylinderFunction, theta) -> float:
    """Integral of f against the Bernoulli extension of the window IRS theta."""
    spec = _as_spec(theta)
    window = spec.window
    _require_difference_closure(window, f)
    ints = _ClassIntegrals(f.functions)
    terms = [float(w) * coset_factor(y, f, window, ints) for y, w in spec.patterns if w]
    return math.fsum(terms)


def phi_f(y: str, f: CylinderFunction, window: Window) -> float:
    """Per-pattern weight that spreads each coset integral evenly over the coset's E-members.

    Defined for every pattern, consistent or not; a label element g whose
    comparison set {k : y(g k^-1) = 1} is empty contributes a factor of 1.
    """
    _require_difference_closure(window, f)
    if len(y) != len(window):
        raise ValueError("pattern length does not match the window")
    if any(y[window.index(b)] != "1" for b in f.F):
        return 0.0
    E = f.E
    if not E:
        return 1.0
    D = _difference_index(window, E)
    ints = _ClassIntegrals(f.functions)
    out = 1.0
    for a in range(len(E)):
        members = [b for b in range(len(E)) if y[D[a, b]] == "1"]
        if not members:
            continue
        out *= ints(members) ** (1.0 / len(members))
    return out


def phi_expectation(f: CylinderFunction, mu: PatternMeasure) -> float:
    """sum_y mu(y) phi_f(y); accepts inconsistent patterns (perturbed empirical measures)."""
    return math.fsum(float(m) * phi_f(y, f, mu.window) for y, m in mu.items() if m)


def mu_theta_set(B: CylinderSet, theta) -> float:
    """mu_theta of a cylinder set, including bit-0 constraints, by direct pattern summation.

    A PatternMeasure (typically empirical, possibly with inconsistent patterns)
    is integrated with phi_f, which equals the coset factor on consistent patterns.
    """
    if B.empty:
        return 0.0
    fn = set_indicator(B)
    if isinstance(theta, PatternMeasure):
        window, patterns = theta.window, theta.items()
        factor = lambda y, ints: phi_f(y, fn, window)  # noqa: E731
    else:
        window, patterns = theta.window, theta.patterns
        factor = lambda y, ints: coset_factor(y, fn, window, ints)  # noqa: E731
    _require_difference_closure(window, fn, B.bit_elements)
    bit_idx = [(window.index(g), "1" if v else "0") for g, v in B.bits]
    ints = _ClassIntegrals(fn.functions)
    terms = []
    for y, w in patterns:
        if w and all(y[i] == v for i, v in bit_idx):
            terms.append(float(w) * factor(y, ints))
    return math.fsum(terms)


def set_indicator(B: CylinderSet) -> CylinderFunction:
    """Cylinder function for the label part of B (bit constraints are handled by the caller)."""
    return CylinderFunction(
        tuple((g, StepFunction.indicator(s, B.bins)) for g, s in B.labels), (), B.describe()
    )


# -- finite-scale slack ------------------------------------------------------

@dataclass(frozen=True)
class ConsistencySlack:
    mismatch_mass: Fraction
    factor_bound: float

    @property
    def slack(self) -> float:
        return float(self.mismatch_mass) * self.factor_bound


def consistency_slack(sigma: ApproxHom, f: CylinderFunction) -> ConsistencySlack:
    """Bound on |exact_mean(sigma, f) - phi_expectation(f, empirical pattern measure)|.

    Off the set M of points j where some bit [sigma(g k^-1) fixes j] differs
    from [sigma(g) sigma(k)^-1 fixes j] (g, k in E), both sides agree pointwise.
    On M each side lies in [0, max(1, max_g sup f_g)^|E|].
    """
    d = sigma.degree
    E = f.E
    ar = np.arange(d)
    bad = np.zeros(d, dtype=bool)
    for g in E:
        for k in E:
            direct = sigma.img(groups.multiply(g, groups.inverse(k))) == ar
            composed = sigma.img(g)[sigma.inv(k)] == ar
            bad |= direct != composed
    factor = max(1.0, f.max_factor_sup()) ** len(E)
    return ConsistencySlack(Fraction(int(np.count_nonzero(bad)), d), factor)


# -- translation and equivariance -------------------------------------------

def translate_cylinder(f: CylinderFunction, g: Element, window: Window | None = None) -> CylinderFunction:
    """The translate of f by g: labels at g E (f'_{gk} = f_k) and bits at g F g^-1."""
    labels = tuple((groups.multiply(g, k), fk) for k, fk in f.labels)
    bits = tuple(groups.conjugate(g, b) for b in f.F)
    if window is not None:
        missing = [h for h, _ in labels if h not in window] + [b for b in bits if b not in window]
        if missing:
            raise ClosureError(f"translate by {g} leaves the window", missing)
    return CylinderFunction(labels, bits, f.name)


@dataclass(frozen=True)
class EquivarianceDefect:
    value: float
    bound: float
    mismatch_mass: Fraction
    sup: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound


def equivariance_mismatch(sigma: ApproxHom, f: CylinderFunction, g: Element) -> np.ndarray:
    """Points where the two sides of the equivariance identity read coordinates through different
    permutation compositions."""
    d = sigma.degree
    sg, sg_inv = sigma.img(g), sigma.inv(g)
    bad = np.zeros(d, dtype=bool)
    for k in f.E:
        # (sigma(g) sigma(k))^-1 vs sigma(g k)^-1
        composed = sigma.inv(k)[sg_inv]
        bad |= composed != sigma.inv(groups.multiply(g, k))
    for b in f.F:
        composed = sg[sigma.img(b)[sg_inv]]
        bad |= composed != sigma.img(groups.conjugate(g, b))
    return bad


def equivariance_defect(sigma: ApproxHom, x, f: CylinderFunction, g: Element) -> EquivarianceDefect:
    """l2(u_d) distance between f(phi_x(sigma(g)^-1 j)) and (translate of f by g)(phi_x(j))."""
    d = sigma.degree
    vals = pointwise(sigma, x, f)
    lhs = vals[sigma.inv(g)]
    rhs = pointwise(sigma, x, translate_cylinder(f, g))
    value = math.sqrt(math.fsum(((lhs - rhs) ** 2).tolist()) / d)
    mass = Fraction(int(np.count_nonzero(equivariance_mismatch(sigma, f, g))), d)
    C = f.sup()
    return EquivarianceDefect(value, 2.0 * C * math.sqrt(float(mass)), mass, C)


# -- good samples and relation export ---------------------------------------

@dataclass
class GoodSampleDiagnostics:
    tries: int
    residuals: list  # per-f residuals of the accepted (or last) sample
    residual_sums: list  # one per try
    means: list
    variances: list | None = None
    failure_bound: float | None = None  # Chebyshev bound on the per-try failure probability
    ties: int = 0

    def to_dict(self) -> dict:
        return {
            "tries": self.tries,
            "residuals": self.residuals,
            "residual_sums": self.residual_sums,
            "means": self.means,
            "variances": self.variances,
            "failure_bound": self.failure_bound,
            "ties": self.ties,
        }


def select_good_sample(
    sigma: ApproxHom,
    fs: Sequence[CylinderFunction],
    tol: float,
    max_tries: int = 10,
    seed: int = 0,
    with_variance: bool = True,
) -> tuple[Labels, GoodSampleDiagnostics]:
    """First labelling (streams 0, 1, ...) whose total residual against the exact means is < tol.

    The reported failure bound is (sum_f sqrt(Var_f))^2 / tol^2, which bounds
    P(sum_f |residual_f| >= tol) by Chebyshev and Minkowski.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    means = [exact_mean(sigma, f) for f in fs]
    variances = bound = None
    if with_variance:
        variances = [exact_variance(sigma, f) for f in fs]
        bound = math.fsum(math.sqrt(max(v, 0.0)) for v in variances) ** 2 / tol ** 2
    sums = []
    residuals: list = []
    for t in range(max_tries):
        x = sample_labels(sigma.degree, seed, stream=t)
        residuals = [abs(pushforward(sigma, x, f) - m) for f, m in zip(fs, means)]
        total = math.fsum(residuals)
        sums.append(total)
        if total < tol:
            diag = GoodSampleDiagnostics(t + 1, residuals, sums, means, variances, bound, label_ties(x))
            return x, diag
    diag = GoodSampleDiagnostics(max_tries, residuals, sums, means, variances, bound)
    raise GoodSampleNotFound(
        f"no labelling within tol={tol} after {max_tries} tries (smallest residual {min(sums):.3g})", diag
    )


def export_relation_data(sigma: ApproxHom, x, algebra: Iterable[CylinderSet]) -> SoficApproxData:
    xs = _x(x)
    rho = {}
    for B in algebra:
        rho[B] = preimage(sigma, xs, B)
    gens = {s: np.asarray(sigma.img(s)) for s in sigma.group.generators()}
    return SoficApproxData(sigma.group, sigma.degree, rho, gens, sigma.window, sigma)


# -- a standard test family --------------------------------------------------

def standard_family(group: GroupSpec, radius: int = 1, bins: int = DEFAULT_BINS, seed: int = 0) -> list[CylinderFunction]:
    """Three cylinder functions used by the acceptance checks.

    half: indicator of the lower half at the identity label.
    product: seeded random step functions on every label of the radius ball.
    pair: two overlapping intervals at the identity and first generator,
    times the identity bit.
    """
    e = group.identity()
    ball = groups.ball(group, radius)
    rng = np.random.default_rng([seed, 0x5F])
    half = CylinderFunction(((e, StepFunction.interval(Fraction(0), Fraction(1, 2), bins)),), (), "half")
    product = CylinderFunction(
        tuple((g, StepFunction(tuple(rng.uniform(0.0, 1.0, bins)))) for g in ball), (), "product"
    )
    s = group.generators()[0]
    pair = CylinderFunction(
        (
            (e, StepFunction.interval(Fraction(0), Fraction(1, 2), bins)),
            (s, StepFunction.interval(Fraction(1, 4), Fraction(3, 4), bins)),
        ),
        (e,),
        "pair",
    )
    return [half, product, pair]


def random_family(group: GroupSpec, E: Sequence[Element], F: Sequence[Element] = (), bins: int = 4,
                  rng: np.random.Generator | None = None, name: str = "random") -> CylinderFunction:
    rng = rng or np.random.default_rng(0)
    return CylinderFunction(
        tuple((g, StepFunction(tuple(rng.uniform(0.0, 2.0, bins)))) for g in E), tuple(F), name
    )
