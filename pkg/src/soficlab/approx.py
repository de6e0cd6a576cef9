"""Approximate homomorphisms G -> Sym(d).

An :class:`ApproxHom` stores exact images for a window of group elements
(always including the generating set). Elements outside the window are
evaluated by composing generator images along the element's shortlex-least
geodesic word, left to right. For arbitrary approximate homomorphisms that
rule is a modeling convention, so reports carry :data:`EVALUATION_NOTE`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from . import groups
from .errors import DegreeMismatch, EvaluationError, GroupMismatch
from .groups import Element, GroupSpec, Window
from .perm import INDEX_DTYPE, Permutation, hamming, invert_array

DEFAULT_DEGREE_CAP = 10_000_000
DEFAULT_WORD_CAP = 64
EVALUATION_NOTE = (
    "elements outside the stored window are evaluated by left-to-right composition "
    "of generator images along the shortlex-least geodesic word"
)

ACTIONS = (
    "rotation",
    "cyclic_embedding",
    "lattice_coset",
    "regular",
    "heisenberg_mod",
    "heisenberg_coset",
    "trivial",
    "generator_images",
)


@dataclass(frozen=True, eq=False)
class ApproxHom:
    group: GroupSpec
    degree: int
    window: Window
    images: dict  # Element -> Permutation; covers window and generators
    label: str = ""
    honest: bool = False
    max_word_length: int = DEFAULT_WORD_CAP
    _cache: dict = field(default_factory=dict, repr=False)
    _inv_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.window.group != self.group:
            raise GroupMismatch("window belongs to a different group")
        for g, p in self.images.items():
            if p.degree != self.degree:
                raise DegreeMismatch(f"image of {g} has degree {p.degree}, expected {self.degree}")
        missing = [s for s in self.group.generators() if s not in self.images]
        if missing:
            raise ValueError(f"generator images missing for {missing}")

    def __call__(self, g: Element) -> Permutation:
        return evaluate(self, g)

    def img(self, g: Element) -> np.ndarray:
        return evaluate(self, g).img

    def inv(self, g: Element) -> np.ndarray:
        """Image array of sigma(g)^-1 (the inverse permutation, not sigma(g^-1))."""
        arr = self._inv_cache.get(g)
        if arr is None:
            arr = invert_array(self.img(g))
            arr.flags.writeable = False
            self._inv_cache[g] = arr
        return arr

    def fixed(self, g: Element) -> np.ndarray:
        return self.img(g) == np.arange(self.degree)

    def with_images(self, images: dict, degree: int | None = None, label: str | None = None,
                    honest: bool | None = None) -> "ApproxHom":
        return ApproxHom(
            self.group,
            self.degree if degree is None else degree,
            self.window,
            images,
            self.label if label is None else label,
            self.honest if honest is None else honest,
            self.max_word_length,
        )


def evaluate(sigma: ApproxHom, g: Element) -> Permutation:
    if g.group != sigma.group:
        raise GroupMismatch(f"{g} is not an element of {sigma.group}")
    p = sigma.images.get(g)
    if p is not None:
        return p
    p = sigma._cache.get(g)
    if p is not None:
        return p
    word = groups.geodesic_word(g, sigma.max_word_length)
    gens = sigma.group.generators()
    acc = np.arange(sigma.degree, dtype=INDEX_DTYPE)
    for idx in word:
        acc = acc[sigma.images[gens[idx]].img]
    p = Permutation._wrap(acc)
    sigma._cache[g] = p
    return p


# -- builtin constructions ---------------------------------------------------

def _mixed_radix(radices: Sequence[int]) -> np.ndarray:
    """All points of prod(range(r)) as a (d, len(radices)) array; coordinate 0 varies fastest."""
    d = int(np.prod(radices)) if radices else 1
    j = np.arange(d, dtype=INDEX_DTYPE)
    cols = []
    for r in radices:
        cols.append(j % r)
        j = j // r
    return np.stack(cols, axis=1) if cols else np.zeros((d, 0), dtype=INDEX_DTYPE)


def _encode(coords: np.ndarray, radices: Sequence[int]) -> np.ndarray:
    out = np.zeros(coords.shape[0], dtype=INDEX_DTYPE)
    mult = 1
    for i, r in enumerate(radices):
        out += coords[:, i] * mult
        mult *= r
    return out


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Upper-triangular row basis with positive diagonal for a full-rank integer lattice."""
    m = [list(map(int, r)) for r in rows]
    k = len(m)
    if k == 0 or any(len(r) != k for r in m):
        raise ValueError("subgroup basis must be a square integer matrix")
    for col in range(k):
        # gcd-eliminate column col among rows col..k-1
        while True:
            nz = [i for i in range(col, k) if m[i][col] != 0]
            if not nz:
                raise ValueError("subgroup basis is not of full rank (infinite index)")
            piv = min(nz, key=lambda i: abs(m[i][col]))
            m[col], m[piv] = m[piv], m[col]
            done = True
            for i in range(col + 1, k):
                if m[i][col]:
                    q = m[i][col] // m[col][col]
                    m[i] = [a - q * b for a, b in zip(m[i], m[col])]
                    if m[i][col]:
                        done = False
            if done:
                break
        if m[col][col] < 0:
            m[col] = [-a for a in m[col]]
    for col in range(k):
        for i in range(col):
            q = m[i][col] // m[col][col]
            m[i] = [a - q * b for a, b in zip(m[i], m[col])]
    return m


def _lattice_coset_map(hnf: list[list[int]]):
    k = len(hnf)
    radices = [hnf[i][i] for i in range(k)]
    pts = _mixed_radix(radices)
    basis = np.array(hnf, dtype=INDEX_DTYPE)

    def reduce(v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for i in range(k):
            q = np.floor_divide(v[:, i], radices[i])
            v -= q[:, None] * basis[i][None, :]
        return v

    def point_map(nf):
        return _encode(reduce(pts + np.array(nf, dtype=INDEX_DTYPE)[None, :]), radices)

    return int(np.prod(radices)), point_map


def _construction(spec: GroupSpec, action: str, d: int | None, params: dict):
    """Return (degree, point_map or None, honest) for a builtin action."""
    if action == "rotation":
        _need(spec, "lattice", action)
        k = spec.rank
        n = params.get("n")
        if n is None:
            n = _int_root(d, k, action)
        n = int(n)
        if d is not None and d != n ** k:
            raise ValueError(f"rotation on (Z/{n})^{k} has degree {n ** k}, not {d}")
        radices = [n] * k
        pts = _mixed_radix(radices)
        return n ** k, lambda nf: _encode((pts + np.array(nf)[None, :]) % n, radices), True
    if action == "cyclic_embedding":
        _need(spec, "lattice", action)
        k = spec.rank
        n = params.get("n")
        if n is None:
            n = _int_root(d, k, action)
        n = int(n)
        N = n ** k
        steps = params.get("steps") or [n ** i for i in range(k)]
        if len(steps) != k:
            raise ValueError("one step per lattice generator required")
        if d is not None and d != N:
            raise ValueError(f"cyclic embedding of Z^{k} on Z/{N} has degree {N}, not {d}")
        base = np.arange(N, dtype=INDEX_DTYPE)
        return N, lambda nf: (base + sum(int(s) * int(v) for s, v in zip(steps, nf))) % N, True
    if action == "lattice_coset":
        _need(spec, "lattice", action)
        basis = params.get("subgroup")
        if basis is None:
            raise ValueError("lattice_coset needs a 'subgroup' basis matrix")
        deg, pm = _lattice_coset_map(hermite_normal_form(basis))
        if d is not None and d != deg:
            raise ValueError(f"coset space has {deg} points, not {d}")
        return deg, pm, True
    if action == "regular":
        _need(spec, "abelian", action)
        radices = list(spec.moduli)
        pts = _mixed_radix(radices)
        mods = np.array(radices)[None, :]
        deg = int(np.prod(radices))
        if d is not None and d != deg:
            raise ValueError(f"regular action has degree {deg}, not {d}")
        return deg, lambda nf: _encode((pts + np.array(nf)[None, :]) % mods, radices), True
    if action == "heisenberg_mod":
        _need(spec, "heisenberg", action)
        n = int(params.get("n") or _int_root(d, 3, action))
        if d is not None and d != n ** 3:
            raise ValueError(f"H3(Z/{n}) has {n ** 3} points, not {d}")
        pts = _mixed_radix([n, n, n])

        def pm(nf):
            a, b, c = nf
            out = np.stack(
                [(a + pts[:, 0]) % n, (b + pts[:, 1]) % n, (c + pts[:, 2] + a * pts[:, 1]) % n],
                axis=1,
            )
            return _encode(out, [n, n, n])

        return n ** 3, pm, True
    if action == "heisenberg_coset":
        _need(spec, "heisenberg", action)
        q = int(params["q"])
        r = int(params.get("r", q))
        if q < 1 or r < 1 or q % r:
            raise ValueError("heisenberg_coset needs r dividing q")
        pts = _mixed_radix([q, r])
        if d is not None and d != q * r:
            raise ValueError(f"coset space has {q * r} points, not {d}")

        def pm(nf):
            a, b, c = nf
            out = np.stack([(pts[:, 0] + b) % q, (pts[:, 1] + c + a * pts[:, 0]) % r], axis=1)
            return _encode(out, [q, r])

        return q * r, pm, True
    if action == "trivial":
        if d is None:
            raise ValueError("trivial action needs a degree")
        base = np.arange(d, dtype=INDEX_DTYPE)
        return d, lambda nf: base, True
    if action == "generator_images":
        return d, None, spec.kind == "free"
    raise ValueError(f"unknown action {action!r}; expected one of {ACTIONS}")


def _need(spec: GroupSpec, kind: str, action: str):
    if spec.kind != kind:
        raise ValueError(f"action {action!r} requires a {kind} group, got {spec}")


def _int_root(d: int | None, k: int, action: str) -> int:
    if d is None:
        raise ValueError(f"{action} needs 'n' or a degree")
    n = round(d ** (1.0 / k))
    for cand in (n - 1, n, n + 1):
        if cand > 0 and cand ** k == d:
            return cand
    raise ValueError(f"degree {d} is not a perfect {k}-th power")


def from_action(
    spec: GroupSpec,
    action: str,
    d: int | None = None,
    *,
    window: Window | None = None,
    radius: int = 2,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    label: str = "",
    **params,
) -> ApproxHom:
    """Build sigma from a builtin action; see :data:`ACTIONS`.

    ``generator_images`` takes ``images`` (one image sequence per positive
    generator) or ``seed`` for uniformly random generator images of degree d.
    """
    if window is None:
        window = groups.ball(spec, radius)
    deg, point_map, honest = _construction(spec, action, d, params)
    if deg is None or deg < 1:
        raise ValueError("degree must be positive")
    if deg > degree_cap:
        raise ValueError(f"degree {deg} exceeds cap {degree_cap}")
    gens = spec.generators()
    images: dict[Element, Permutation] = {}
    if point_map is not None:
        for g in list(window) + [s for s in gens if s not in window]:
            images[g] = Permutation._wrap(point_map(g.nf))
    else:
        gen_images = _generator_images(spec, deg, params)
        partial = ApproxHom(spec, deg, window, gen_images, honest=honest)
        for g in window:
            images[g] = evaluate(partial, g)
        images.update(gen_images)
    return ApproxHom(spec, deg, window, images, label or action, honest)


def _generator_images(spec: GroupSpec, d: int, params: dict) -> dict:
    gens = spec.generators()
    out: dict[Element, Permutation] = {}
    seed = params.get("seed")
    explicit = params.get("images")
    rng = np.random.default_rng(seed) if explicit is None else None
    i = 0
    for s in gens:
        if s in out:
            continue
        if explicit is not None:
            if i >= len(explicit):
                raise ValueError("not enough generator images")
            p = Permutation(explicit[i])
        else:
            p = Permutation._wrap(rng.permutation(d).astype(INDEX_DTYPE))
        if p.degree != d:
            raise ValueError("generator image degree mismatch")
        i += 1
        out[s] = p
        out[groups.inverse(s)] = p.inverse()
    return out


# -- defects ----------------------------------------------------------------

@dataclass(frozen=True)
class DefectReport:
    pairs: tuple[tuple[Element, Element], ...]
    values: tuple[Fraction, ...]
    identity_defect: Fraction

    @property
    def max(self) -> Fraction:
        return max(self.values, default=Fraction(0))

    @property
    def mean(self) -> Fraction:
        if not self.values:
            return Fraction(0)
        return sum(self.values, Fraction(0)) / len(self.values)

    def rows(self):
        for (g, h), v in zip(self.pairs, self.values):
            yield str(g), str(h), v


def pair_defect(sigma: ApproxHom, g: Element, h: Element) -> Fraction:
    gh = groups.multiply(g, h)
    lhs = sigma.img(gh)
    rhs = sigma.img(g)[sigma.img(h)]
    return Fraction(int(np.count_nonzero(lhs != rhs)), sigma.degree)


def defect(sigma: ApproxHom, pairs: Iterable[tuple[Element, Element]]) -> DefectReport:
    pairs = tuple(pairs)
    vals = tuple(pair_defect(sigma, g, h) for g, h in pairs)
    e = sigma.group.identity()
    return DefectReport(pairs, vals, hamming(evaluate(sigma, e), Permutation.identity(sigma.degree)))


def window_pairs(window: Window) -> list[tuple[Element, Element]]:
    return list(product(window, window))


# -- modifications ----------------------------------------------------------

def perturb(sigma: ApproxHom, rate: float, seed: int) -> ApproxHom:
    """Post-compose every stored image with noise on ceil(rate*d) random points.

    The noise is a uniformly random permutation of a uniformly random subset,
    drawn independently per stored image, so hamming(sigma(g), sigma'(g)) <=
    ceil(rate*d)/d <= rate + 1/d.
    """
    if not 0 <= rate <= 1:
        raise ValueError("rate must lie in [0, 1]")
    d = sigma.degree
    k = math.ceil(Fraction(str(rate)) * d)
    images = {}
    for idx, (g, p) in enumerate(sigma.images.items()):
        if k < 2:
            images[g] = p
            continue
        rng = np.random.default_rng([int(seed), idx])
        subset = rng.choice(d, size=k, replace=False)
        noise = np.arange(d, dtype=INDEX_DTYPE)
        noise[subset] = subset[rng.permutation(k)]
        images[g] = Permutation._wrap(noise[p.img])
    return sigma.with_images(images, label=f"{sigma.label}+noise({rate})", honest=(k < 2 and sigma.honest))


def block_sum(sigma: ApproxHom, q: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> ApproxHom:
    """q disjoint copies: point (j, r) is encoded as j + r*d."""
    if q < 1:
        raise ValueError("q must be positive")
    d = sigma.degree
    if q * d > degree_cap:
        raise ValueError(f"degree {q * d} exceeds cap {degree_cap}")
    offsets = (np.arange(q, dtype=INDEX_DTYPE) * d)[:, None]
    images = {g: Permutation._wrap((p.img[None, :] + offsets).reshape(-1)) for g, p in sigma.images.items()}
    return sigma.with_images(images, degree=q * d, label=f"{sigma.label}^(+{q})")


def pad_trivial(sigma: ApproxHom, r: int) -> ApproxHom:
    """Append r points fixed by every image."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    d = sigma.degree
    tail = np.arange(d, d + r, dtype=INDEX_DTYPE)
    images = {g: Permutation._wrap(np.concatenate([p.img, tail])) for g, p in sigma.images.items()}
    return sigma.with_images(images, degree=d + r, label=f"{sigma.label}+t{r}")


def redimension(sigma: ApproxHom, target_d: int) -> ApproxHom:
    if target_d < sigma.degree:
        raise ValueError(f"target degree {target_d} is below {sigma.degree}")
    q, r = divmod(target_d, sigma.degree)
    return pad_trivial(block_sum(sigma, q), r)


# -- subgroup consistency -----------------------------------------------------

@dataclass(frozen=True)
class SubgroupDefects:
    """Masses of points whose stabilizer pattern breaks a subgroup axiom.

    ``product_violation[(g, h)]``: fixed by sigma(g), sigma(h) but not sigma(gh).
    ``inverse_violation[g]``: fixed by exactly one of sigma(g), sigma(g^-1).
    Each comes with the pair-defect bound it must satisfy.
    """

    product_violation: dict
    product_bound: dict
    inverse_violation: dict
    inverse_bound: dict
    identity_moved: Fraction

    def inequalities_hold(self) -> bool:
        return all(self.product_violation[k] <= self.product_bound[k] for k in self.product_violation) and all(
            self.inverse_violation[k] <= self.inverse_bound[k] for k in self.inverse_violation
        )

    def total(self) -> Fraction:
        return (
            sum(self.product_violation.values(), Fraction(0))
            + sum(self.inverse_violation.values(), Fraction(0))
            + self.identity_moved
        )


def subgroup_consistency_defects(sigma: ApproxHom, window: Window | None = None) -> SubgroupDefects:
    window = sigma.window if window is None else window
    d = sigma.degree
    ar = np.arange(d)
    fixed = {g: sigma.img(g) == ar for g in window}
    e = sigma.group.identity()
    sig_e = sigma.img(e)
    prod_v, prod_b = {}, {}
    for g in window:
        for h in window:
            gh = groups.multiply(g, h)
            if gh not in window:
                continue
            bad = fixed[g] & fixed[h] & ~fixed[gh]
            prod_v[(g, h)] = Fraction(int(np.count_nonzero(bad)), d)
            prod_b[(g, h)] = pair_defect(sigma, g, h)
    inv_v, inv_b = {}, {}
    e_moved = Fraction(int(np.count_nonzero(sig_e != ar)), d)
    for g in window:
        gi = groups.inverse(g)
        fg = fixed[g]
        fgi = fixed[gi] if gi in fixed else sigma.img(gi) == ar
        inv_v[g] = Fraction(int(np.count_nonzero(fg != fgi)), d)
        comp = sigma.img(gi)[sigma.img(g)]
        inv_b[g] = Fraction(int(np.count_nonzero(comp != sig_e)), d) + e_moved
    return SubgroupDefects(prod_v, prod_b, inv_v, inv_b, e_moved)


def composition_mismatch(sigma: ApproxHom, g: Element, h: Element) -> np.ndarray:
    """Boolean mask of points where sigma(gh) and sigma(g)sigma(h) disagree."""
    return sigma.img(groups.multiply(g, h)) != sigma.img(g)[sigma.img(h)]


def images_from_callable(spec: GroupSpec, window: Window, d: int, fn: Callable[[Element], Sequence[int]]) -> ApproxHom:
    """Wrap an arbitrary map g -> image sequence as an ApproxHom on ``window``."""
    images = {}
    for g in list(window) + [s for s in spec.generators() if s not in window]:
        images[g] = Permutation(fn(g))
    return ApproxHom(spec, d, window, images, label="custom")
