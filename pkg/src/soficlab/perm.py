"""Permutations of {0, ..., d-1} and the normalized Hamming metric.

Composition follows ``compose(p, q)(j) = p(q(j))``. All fractional results
are exact :class:`fractions.Fraction` values built from integer counts.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeMismatch

INDEX_DTYPE = np.int64


class Permutation:
    """Immutable bijection of ``range(degree)`` stored as its image array."""

    __slots__ = ("img",)

    def __init__(self, img, check: bool = True):
        arr = np.array(img, dtype=INDEX_DTYPE, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValueError("permutations need degree >= 1")
        if check:
            seen = np.zeros(arr.size, dtype=bool)
            if arr.min() < 0 or arr.max() >= arr.size:
                raise ValueError("image out of range")
            seen[arr] = True
            if not seen.all():
                raise ValueError("image sequence is not a bijection")
        arr.flags.writeable = False
        self.img = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Permutation":
        p = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=INDEX_DTYPE)
        arr.flags.writeable = False
        p.img = arr
        return p

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls._wrap(np.arange(d, dtype=INDEX_DTYPE))

    @classmethod
    def from_cycles(cls, d: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = np.arange(d, dtype=INDEX_DTYPE)
        for cyc in cycles:
            cyc = list(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                img[a] = b
        return cls(img)

    @classmethod
    def rotation(cls, d: int, shift: int = 1) -> "Permutation":
        return cls._wrap((np.arange(d, dtype=INDEX_DTYPE) + shift) % d)

    @property
    def degree(self) -> int:
        return int(self.img.size)

    def __call__(self, j: int) -> int:
        return int(self.img[j])

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def inverse(self) -> "Permutation":
        return inverse(self)

    def fixed_points(self) -> np.ndarray:
        return self.img == np.arange(self.degree)

    def is_identity(self) -> bool:
        return bool(self.fixed_points().all())

    def tolist(self) -> list[int]:
        return self.img.tolist()

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.degree == other.degree and bool(np.array_equal(self.img, other.img))

    def __hash__(self):
        return hash(self.img.tobytes())

    def __repr__(self):
        if self.degree <= 12:
            return f"Permutation({self.img.tolist()})"
        return f"Permutation(degree={self.degree})"


def _check(p: Permutation, q: Permutation):
    if p.degree != q.degree:
        raise DegreeMismatch(f"degrees differ: {p.degree} vs {q.degree}")


def compose(p: Permutation, q: Permutation) -> Permutation:
    _check(p, q)
    return Permutation._wrap(p.img[q.img])


def inverse(p: Permutation) -> Permutation:
    inv = np.empty_like(p.img)
    inv[p.img] = np.arange(p.degree, dtype=INDEX_DTYPE)
    return Permutation._wrap(inv)


def invert_array(img: np.ndarray) -> np.ndarray:
    inv = np.empty_like(img)
    inv[img] = np.arange(img.size, dtype=img.dtype)
    return inv


def disagreements(p: Permutation, q: Permutation) -> int:
    _check(p, q)
    return int(np.count_nonzero(p.img != q.img))


def hamming(p: Permutation, q: Permutation) -> Fraction:
    return Fraction(disagreements(p, q), p.degree)


def fixed_fraction_joint(ps: Sequence[Permutation]) -> Fraction:
    """Fraction of points fixed by every permutation in ``ps`` (1 for an empty list)."""
    ps = list(ps)
    if not ps:
        return Fraction(1)
    d = ps[0].degree
    mask = np.ones(d, dtype=bool)
    ar = np.arange(d)
    for p in ps:
        if p.degree != d:
            raise DegreeMismatch(f"degrees differ: {d} vs {p.degree}")
        mask &= p.img == ar
    return Fraction(int(np.count_nonzero(mask)), d)


def random_permutation(d: int, rng: np.random.Generator) -> Permutation:
    return Permutation._wrap(rng.permutation(d).astype(INDEX_DTYPE))
