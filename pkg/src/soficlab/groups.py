"""Catalog of countable groups with exact normal forms.

Four families are supported: integer lattices Z^k, finite abelian products
Z/m_1 x ... x Z/m_r, the discrete Heisenberg group H_3(Z) and free groups
F_k. Elements carry their group so that mixing groups is caught early.

Normal forms:

* lattice: tuple of k integers
* abelian: tuple of residues, ``0 <= a_i < m_i``
* heisenberg: ``(a, b, c)`` for the matrix [[1, a, c], [0, 1, b], [0, 0, 1]],
  so ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``
* free: freely reduced tuple of nonzero letters; ``i`` is the i-th basis
  element and ``-i`` its inverse (1-based)
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ClosureError, EvaluationError, GroupMismatch, WindowTooLarge

KINDS = ("lattice", "abelian", "heisenberg", "free")
DEFAULT_WINDOW_CAP = 200_000
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    rank: int = 1
    moduli: tuple[int, ...] = ()
    # positive generators as normal forms; None selects the standard basis
    custom_generators: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "abelian":
            if not self.moduli or any(int(m) < 2 for m in self.moduli):
                raise ValueError("abelian groups need moduli >= 2")
            object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
            object.__setattr__(self, "rank", len(self.moduli))
        elif self.kind == "heisenberg":
            object.__setattr__(self, "rank", 2)
        elif self.rank < 1:
            raise ValueError("rank must be positive")
        if self.custom_generators is not None:
            if self.kind == "free":
                raise ValueError("free groups use their free basis as generating set")
            gens = tuple(self._reduce(tuple(int(v) for v in g)) for g in self.custom_generators)
            if not gens:
                raise ValueError("empty generating set")
            object.__setattr__(self, "custom_generators", gens)

    # -- constructors -------------------------------------------------------
    @classmethod
    def lattice(cls, k: int = 1) -> "GroupSpec":
        return cls("lattice", rank=k)

    @classmethod
    def abelian(cls, *moduli: int) -> "GroupSpec":
        return cls("abelian", moduli=tuple(moduli))

    @classmethod
    def heisenberg(cls) -> "GroupSpec":
        return cls("heisenberg")

    @classmethod
    def free(cls, k: int = 2) -> "GroupSpec":
        return cls("free", rank=k)

    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        gens = data.get("generators")
        return cls(
            kind=data["kind"],
            rank=int(data.get("rank", 1)),
            moduli=tuple(data.get("moduli", ())),
            custom_generators=None if gens is None else tuple(tuple(g) for g in gens),
        )

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in ("lattice", "free"):
            out["rank"] = self.rank
        if self.kind == "abelian":
            out["moduli"] = list(self.moduli)
        if self.custom_generators is not None:
            out["generators"] = [list(g) for g in self.custom_generators]
        return out

    @property
    def amenable(self) -> bool:
        return not (self.kind == "free" and self.rank >= 2)

    @property
    def abelian_group(self) -> bool:
        return self.kind in ("lattice", "abelian") or (self.kind == "free" and self.rank == 1)

    @property
    def order(self) -> int | None:
        if self.kind == "abelian":
            out = 1
            for m in self.moduli:
                out *= m
            return out
        return None

    def __str__(self):
        if self.kind == "lattice":
            return f"Z^{self.rank}"
        if self.kind == "abelian":
            return " x ".join(f"Z/{m}" for m in self.moduli)
        if self.kind == "heisenberg":
            return "H3(Z)"
        return f"F_{self.rank}"

    # -- normal-form arithmetic --------------------------------------------
    def _reduce(self, nf: tuple) -> tuple:
        if self.kind == "lattice":
            if len(nf) != self.rank:
                raise ValueError(f"expected {self.rank} coordinates, got {nf}")
            return tuple(int(v) for v in nf)
        if self.kind == "abelian":
            if len(nf) != len(self.moduli):
                raise ValueError(f"expected {len(self.moduli)} residues, got {nf}")
            return tuple(int(v) % m for v, m in zip(nf, self.moduli))
        if self.kind == "heisenberg":
            if len(nf) != 3:
                raise ValueError(f"Heisenberg elements are triples, got {nf}")
            return tuple(int(v) for v in nf)
        out: list[int] = []
        for letter in nf:
            letter = int(letter)
            if letter == 0 or abs(letter) > self.rank:
                raise ValueError(f"letter {letter} outside F_{self.rank}")
            if out and out[-1] == -letter:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def _mul(self, a: tuple, b: tuple) -> tuple:
        if self.kind == "lattice":
            return tuple(x + y for x, y in zip(a, b))
        if self.kind == "abelian":
            return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))
        if self.kind == "heisenberg":
            return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])
        # free reduction at the seam only; both inputs are already reduced
        i = 0
        n = min(len(a), len(b))
        while i < n and a[len(a) - 1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def _inv(self, a: tuple) -> tuple:
        if self.kind == "lattice":
            return tuple(-x for x in a)
        if self.kind == "abelian":
            return tuple((-x) % m for x, m in zip(a, self.moduli))
        if self.kind == "heisenberg":
            return (-a[0], -a[1], a[0] * a[1] - a[2])
        return tuple(-x for x in reversed(a))

    def _identity_nf(self) -> tuple:
        if self.kind in ("lattice", "abelian"):
            return (0,) * self.rank
        if self.kind == "heisenberg":
            return (0, 0, 0)
        return ()

    # -- element-level API --------------------------------------------------
    def element(self, nf: Iterable[int]) -> "Element":
        return Element(self, self._reduce(tuple(nf)))

    def identity(self) -> "Element":
        return Element(self, self._identity_nf())

    def parse(self, text: str) -> "Element":
        """Parse a free-group word such as ``"a a^-1 b"``, or a normal form such as ``"(1,0)"``."""
        if self.kind != "free":
            return self.element(int(tok) for tok in text.strip("() ").replace(",", " ").split())
        letters: list[int] = []
        for tok in text.replace("⁻¹", "^-1").split():
            base, _, power = tok.partition("^")
            power_i = int(power) if power else 1
            for ch in base:
                idx = _LETTERS.index(ch) + 1
                if len(base) > 1 and power:
                    raise ValueError(f"ambiguous token {tok!r}")
                letters.extend([idx if power_i > 0 else -idx] * abs(power_i))
        return self.element(letters)

    def generators(self) -> tuple["Element", ...]:
        """Symmetric generating set S in canonical order: s_1, s_1^-1, s_2, s_2^-1, ..."""
        return _generators(self)

    def ball(self, radius: int, cap: int = DEFAULT_WINDOW_CAP) -> "Window":
        return ball(self, radius, cap)

    def geodesic_word(self, g: "Element", max_length: int = 64) -> tuple[int, ...]:
        return geodesic_word(g, max_length)


@dataclass(frozen=True)
class Element:
    group: GroupSpec
    nf: tuple

    def __mul__(self, other: "Element") -> "Element":
        return multiply(self, other)

    def inverse(self) -> "Element":
        return inverse(self)

    @property
    def is_identity(self) -> bool:
        return self.nf == self.group._identity_nf()

    def to_json(self) -> list[int]:
        return list(self.nf)

    def __str__(self):
        if self.group.kind != "free":
            return "(" + ",".join(str(v) for v in self.nf) + ")"
        if not self.nf:
            return "e"
        return "".join(_LETTERS[abs(v) - 1] + ("⁻¹" if v < 0 else "") for v in self.nf)

    def __repr__(self):
        return f"Element({self.group}, {self})"


def multiply(a: Element, b: Element) -> Element:
    if a.group != b.group:
        raise GroupMismatch(f"cannot multiply elements of {a.group} and {b.group}")
    return Element(a.group, a.group._mul(a.nf, b.nf))


def inverse(a: Element) -> Element:
    return Element(a.group, a.group._inv(a.nf))


def conjugate(g: Element, h: Element) -> Element:
    """g h g^-1."""
    return multiply(multiply(g, h), inverse(g))


_gen_cache: dict[GroupSpec, tuple[Element, ...]] = {}


def _generators(spec: GroupSpec) -> tuple[Element, ...]:
    cached = _gen_cache.get(spec)
    if cached is not None:
        return cached
    if spec.custom_generators is not None:
        positive = [Element(spec, g) for g in spec.custom_generators]
    elif spec.kind == "free":
        positive = [Element(spec, (i,)) for i in range(1, spec.rank + 1)]
    elif spec.kind == "heisenberg":
        positive = [Element(spec, (1, 0, 0)), Element(spec, (0, 1, 0))]
    else:
        positive = []
        for i in range(spec.rank):
            v = [0] * spec.rank
            v[i] = 1
            positive.append(spec.element(v))
    out: list[Element] = []
    for s in positive:
        for t in (s, inverse(s)):
            if t not in out and not t.is_identity:
                out.append(t)
    if not out:
        raise ValueError(f"generating set of {spec} is trivial")
    result = tuple(out)
    _gen_cache[spec] = result
    return result


@dataclass(frozen=True)
class Window:
    """Ordered, duplicate-free finite subset of a group containing the identity."""

    elements: tuple[Element, ...]
    radius: int | None = None
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a window must contain the identity")
        group = self.elements[0].group
        index = {}
        for i, g in enumerate(self.elements):
            if g.group != group:
                raise GroupMismatch("window mixes elements of different groups")
            if g in index:
                raise ValueError(f"duplicate window element {g}")
            index[g] = i
        if group.identity() not in index:
            raise ValueError("a window must contain the identity")
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, elements: Iterable[Element], radius: int | None = None) -> "Window":
        elements = list(elements)
        if elements:
            e = elements[0].group.identity()
            if e not in elements:
                elements.insert(0, e)
        return cls(tuple(dict.fromkeys(elements)), radius)

    @property
    def group(self) -> GroupSpec:
        return self.elements[0].group

    @property
    def identity_index(self) -> int:
        return self._index[self.group.identity()]

    def index(self, g: Element) -> int:
        try:
            return self._index[g]
        except KeyError:
            raise KeyError(f"{g} is not in the window") from None

    def __contains__(self, g) -> bool:
        return g in self._index

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def to_json(self) -> list:
        return [g.to_json() for g in self.elements]


class _Explorer:
    """Breadth-first enumeration of a Cayley graph with shortlex-least words.

    Layers are expanded in order and generators in generating-set order, so
    the first word found for an element is the shortlex-minimal geodesic.
    """

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self.gens = spec.generators()
        e = spec._identity_nf()
        self.words: dict[tuple, tuple[int, ...]] = {e: ()}
        self.layers: list[list[tuple]] = [[e]]
        self.order: list[tuple] = [e]
        self.lock = threading.Lock()

    def extend_to(self, radius: int, cap: int):
        with self.lock:
            while len(self.layers) <= radius:
                nxt: list[tuple] = []
                for nf in self.layers[-1]:
                    w = self.words[nf]
                    for i, s in enumerate(self.gens):
                        m = self.spec._mul(nf, s.nf)
                        if m not in self.words:
                            self.words[m] = w + (i,)
                            nxt.append(m)
                if len(self.order) + len(nxt) > cap:
                    raise WindowTooLarge(
                        f"ball of radius {len(self.layers)} in {self.spec} exceeds cap {cap}"
                    )
                self.layers.append(nxt)
                self.order.extend(nxt)
                if not nxt:
                    # finite group exhausted; remaining layers are empty
                    while len(self.layers) <= radius:
                        self.layers.append([])
                    break

    def size_of_ball(self, radius: int) -> int:
        return sum(len(layer) for layer in self.layers[: radius + 1])


_explorers: dict[GroupSpec, _Explorer] = {}
_explorers_lock = threading.Lock()


def _explorer(spec: GroupSpec) -> _Explorer:
    with _explorers_lock:
        ex = _explorers.get(spec)
        if ex is None:
            ex = _explorers[spec] = _Explorer(spec)
        return ex


def ball(spec: GroupSpec, radius: int, cap: int = DEFAULT_WINDOW_CAP) -> Window:
    """All elements of word length <= radius, identity first, shortlex order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    ex = _explorer(spec)
    ex.extend_to(radius, cap)
    n = ex.size_of_ball(radius)
    if n > cap:
        raise WindowTooLarge(f"ball of radius {radius} in {spec} has {n} > {cap} elements")
    return Window(tuple(Element(spec, nf) for nf in ex.order[:n]), radius)


def word_length(g: Element, max_length: int = 64) -> int:
    return len(geodesic_word(g, max_length))


def geodesic_word(g: Element, max_length: int = 64) -> tuple[int, ...]:
    """Shortlex-least geodesic word for g as indices into ``g.group.generators()``."""
    spec = g.group
    if spec.kind == "free":
        word = tuple(2 * (v - 1) if v > 0 else 2 * (-v - 1) + 1 for v in g.nf)
    elif spec.kind == "lattice" and spec.custom_generators is None:
        word = tuple(
            idx
            for i, v in enumerate(g.nf)
            for idx in ([2 * i] * v if v > 0 else [2 * i + 1] * (-v))
        )
    else:
        ex = _explorer(spec)
        word = ex.words.get(g.nf)
        r = len(ex.layers) - 1
        while word is None and r < max_length:
            r += 1
            ex.extend_to(r, DEFAULT_WINDOW_CAP)
            word = ex.words.get(g.nf)
            if not ex.layers[r]:
                break
        if word is None:
            raise EvaluationError(f"{g} not reached within word length {max_length}")
    if len(word) > max_length:
        raise EvaluationError(f"{g} has word length {len(word)} > cap {max_length}")
    return word


# -- closure requirements ---------------------------------------------------

@dataclass(frozen=True)
class ProductsUpTo:
    length: int


@dataclass(frozen=True)
class DifferenceSet:
    """E * E^-1 must lie in the window."""

    subset: tuple[Element, ...]


@dataclass(frozen=True)
class Translate:
    """g * W must lie in ``target``."""

    g: Element
    target: Window


@dataclass(frozen=True)
class Conjugate:
    """g F g^-1 must lie in the window."""

    g: Element
    subset: tuple[Element, ...]


@dataclass(frozen=True)
class ClosureReport:
    ok: bool
    missing: tuple[Element, ...]
    requirement: object

    def raise_if_failed(self, what: str = "window"):
        if not self.ok:
            shown = ", ".join(str(m) for m in self.missing[:10])
            raise ClosureError(f"{what} closure failed; missing {shown}", self.missing)


def validate_closure(window: Window, requirement) -> ClosureReport:
    if isinstance(requirement, ProductsUpTo):
        level = list(window)
        needed: dict[Element, None] = dict.fromkeys(level)
        for _ in range(requirement.length - 1):
            level = list(dict.fromkeys(multiply(a, b) for a in level for b in window))
            needed.update(dict.fromkeys(level))
        candidates = needed
        domain = window
    elif isinstance(requirement, DifferenceSet):
        candidates = dict.fromkeys(
            multiply(a, inverse(b)) for a in requirement.subset for b in requirement.subset
        )
        domain = window
    elif isinstance(requirement, Translate):
        candidates = dict.fromkeys(multiply(requirement.g, h) for h in window)
        domain = requirement.target
    elif isinstance(requirement, Conjugate):
        candidates = dict.fromkeys(conjugate(requirement.g, h) for h in requirement.subset)
        domain = window
    else:
        raise TypeError(f"unknown closure requirement {requirement!r}")
    missing = tuple(g for g in candidates if g not in domain)
    return ClosureReport(not missing, missing, requirement)


def difference_set(elements: Sequence[Element]) -> list[Element]:
    return list(dict.fromkeys(multiply(a, inverse(b)) for a in elements for b in elements))
