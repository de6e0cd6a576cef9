"""Cylinder sets in the pattern-and-label space and their preimages under the microstate map.

A cylinder set constrains finitely many stabilizer bits (y(g) = 0 or 1) and
finitely many labels (x(g) lies in a union of the m uniform bins). The
preimage of a set B on [d] is rho(B) = {j : phi_x(j) satisfies B}.
"""
from __future__ import annotations

import json

from dataclasses import dataclass, field

import numpy as np

from . import groups
from .groups import Element, GroupSpec, Window


def _key(g: Element):
    return g.nf


@dataclass(frozen=True)
class CylinderSet:
    bins: int
    bits: tuple = ()  # ((Element, 0 | 1), ...) sorted by element
    labels: tuple = ()  # ((Element, frozenset of bin indices), ...) sorted by element
    empty: bool = False

    def __post_init__(self):
        if self.bins < 1:
            raise ValueError("bins must be positive")
        bits = dict()
        empty = self.empty
        for g, v in self.bits:
            v = int(v)
            if v not in (0, 1):
                raise ValueError(f"bit constraint must be 0 or 1, got {v}")
            if bits.get(g, v) != v:
                empty = True
            bits[g] = v
        labels = dict()
        for g, s in self.labels:
            s = frozenset(int(b) for b in s)
            if any(b < 0 or b >= self.bins for b in s):
                raise ValueError(f"bin index out of range for {self.bins} bins")
            labels[g] = labels[g] & s if g in labels else s
        # a label constraint allowing every bin is no constraint
        labels = {g: s for g, s in labels.items() if len(s) < self.bins}
        if any(not s for s in labels.values()):
            empty = True
        if empty:  # one canonical empty set
            bits, labels = {}, {}
        object.__setattr__(self, "bits", tuple(sorted(bits.items(), key=lambda t: _key(t[0]))))
        object.__setattr__(self, "labels", tuple(sorted(labels.items(), key=lambda t: _key(t[0]))))
        object.__setattr__(self, "empty", empty)

    @classmethod
    def full(cls, bins: int) -> "CylinderSet":
        return cls(bins)

    @classmethod
    def label(cls, g: Element, allowed, bins: int) -> "CylinderSet":
        return cls(bins, labels=((g, frozenset(allowed)),))

    @classmethod
    def bit(cls, g: Element, value: int, bins: int) -> "CylinderSet":
        return cls(bins, bits=((g, value),))

    @property
    def bit_elements(self) -> tuple[Element, ...]:
        return tuple(g for g, _ in self.bits)

    @property
    def label_elements(self) -> tuple[Element, ...]:
        return tuple(g for g, _ in self.labels)

    @property
    def arity(self) -> int:
        return len(self.bits) + len(self.labels)

    def intersect(self, other: "CylinderSet") -> "CylinderSet":
        if self.bins != other.bins:
            raise ValueError("cylinder sets use different bin counts")
        return CylinderSet(self.bins, self.bits + other.bits, self.labels + other.labels,
                           self.empty or other.empty)

    def translate(self, g: Element) -> "CylinderSet":
        """The set gB: bit constraints move to g b g^-1, label constraints to g k."""
        return CylinderSet(
            self.bins,
            tuple((groups.conjugate(g, b), v) for b, v in self.bits),
            tuple((groups.multiply(g, k), s) for k, s in self.labels),
            self.empty,
        )

    def describe(self) -> str:
        if self.empty:
            return "empty"
        parts = [f"y({g})={v}" for g, v in self.bits]
        parts += [f"x({g})in{{{','.join(map(str, sorted(s)))}}}/{self.bins}" for g, s in self.labels]
        return " & ".join(parts) if parts else "full"

    def __str__(self):
        return self.describe()


def label_bins(x: np.ndarray, bins: int) -> np.ndarray:
    return np.minimum((np.asarray(x) * bins).astype(np.int64), bins - 1)


def preimage(sigma, x: np.ndarray, B: CylinderSet) -> np.ndarray:
    """Boolean mask of rho(B) on [d]."""
    d = sigma.degree
    if B.empty:
        return np.zeros(d, dtype=bool)
    mask = np.ones(d, dtype=bool)
    ar = np.arange(d)
    for g, v in B.bits:
        fixed = sigma.img(g) == ar
        mask &= fixed if v else ~fixed
    if B.labels:
        b = label_bins(x, B.bins)
        for g, allowed in B.labels:
            ok = np.zeros(B.bins, dtype=bool)
            ok[list(allowed)] = True
            mask &= ok[b[sigma.inv(g)]]
    return mask


@dataclass
class SoficApproxData:
    """Finite sofic-approximation data: a set map rho on a family of cylinder sets plus sigma."""

    group: GroupSpec
    degree: int
    rho: dict  # CylinderSet -> boolean mask of length degree
    generator_images: dict  # Element -> int64 image array
    window: Window | None = None
    sigma: object = field(default=None, repr=False)

    def __post_init__(self):
        for B, m in self.rho.items():
            m = np.asarray(m, dtype=bool)
            if m.shape != (self.degree,):
                raise ValueError(f"rho({B}) is not a subset of [{self.degree}]")
            self.rho[B] = m
        for g, img in self.generator_images.items():
            img = np.asarray(img, dtype=np.int64)
            if img.shape != (self.degree,) or not np.array_equal(np.sort(img), np.arange(self.degree)):
                raise ValueError(f"image of {g} is not a permutation of degree {self.degree}")
            self.generator_images[g] = img

    @property
    def family(self) -> list[CylinderSet]:
        return list(self.rho)

    def image(self, g: Element) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma.img(g)
        if g in self.generator_images:
            return self.generator_images[g]
        from .approx import ApproxHom, evaluate
        from .perm import Permutation

        gens = {s: Permutation(self.generator_images[s]) for s in self.group.generators()}
        w = self.window or Window.of([self.group.identity()])
        self.sigma = ApproxHom(self.group, self.degree, w, gens)
        return evaluate(self.sigma, g).img

    def dump(self, path):
        """Write a compressed numpy archive; cylinder sets are stored by description and index."""
        arrays = {}
        meta = []
        for i, (B, m) in enumerate(self.rho.items()):
            arrays[f"rho_{i}"] = np.packbits(m)
            meta.append(_set_to_json(B))
        gens = list(self.generator_images.items())
        for i, (g, img) in enumerate(gens):
            arrays[f"gen_{i}"] = img
        header = {
            "group": self.group.to_dict(),
            "degree": self.degree,
            "sets": meta,
            "generators": [g.to_json() for g, _ in gens],
        }
        np.savez_compressed(path, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)

    @classmethod
    def load(cls, path) -> "SoficApproxData":
        with np.load(path) as z:
            header = json.loads(bytes(z["header"]).decode())
            spec = GroupSpec.from_dict(header["group"])
            d = header["degree"]
            rho = {}
            for i, s in enumerate(header["sets"]):
                rho[_set_from_json(spec, s)] = np.unpackbits(z[f"rho_{i}"])[:d].astype(bool)
            gens = {spec.element(nf): z[f"gen_{i}"] for i, nf in enumerate(header["generators"])}
        return cls(spec, d, rho, gens)


def _set_to_json(B: CylinderSet) -> dict:
    return {
        "bins": B.bins,
        "empty": B.empty,
        "bits": [[g.to_json(), v] for g, v in B.bits],
        "labels": [[g.to_json(), sorted(s)] for g, s in B.labels],
    }


def _set_from_json(spec: GroupSpec, data: dict) -> CylinderSet:
    return CylinderSet(
        data["bins"],
        tuple((spec.element(nf), v) for nf, v in data["bits"]),
        tuple((spec.element(nf), frozenset(s)) for nf, s in data["labels"]),
        data["empty"],
    )
