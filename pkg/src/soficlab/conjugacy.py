"""Search for a relabelling chi of [d] that makes sigma look like psi on a window.

The objective is sum over g in E of hamming(chi sigma(g) chi^-1, psi(g)),
i.e. the number of (g, j) with chi(sigma(g) j) != psi(g)(chi j), over d.
``brute_force`` is exact for tiny d; ``align`` combines joint colour
refinement, propagation along the Schreier graphs and transposition local
search.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .approx import ApproxHom
from .errors import DegreeMismatch
from .groups import Element
from .irs import StatsMatchReport, stats_match
from .perm import Permutation, invert_array

BRUTE_FORCE_MAX_DEGREE = 8
DEFAULT_ROUNDS = 6


def _images(sigma, E: Sequence[Element]) -> np.ndarray:
    if isinstance(sigma, ApproxHom):
        return np.stack([sigma.img(g) for g in E]).astype(np.int64)
    return np.asarray(sigma, dtype=np.int64).reshape(len(E), -1)


def _check_pair(S: np.ndarray, P: np.ndarray):
    if S.shape != P.shape:
        raise DegreeMismatch(f"degrees differ: {S.shape[1]} vs {P.shape[1]}")


def mismatch_count(S: np.ndarray, P: np.ndarray, chi: np.ndarray) -> int:
    """Number of pairs (g, j) with chi[S_g j] != P_g[chi j]."""
    return int(np.count_nonzero(chi[S] != P[:, chi]))


def objective(sigma, psi, chi, E: Sequence[Element]) -> Fraction:
    S, P = _images(sigma, E), _images(psi, E)
    _check_pair(S, P)
    c = chi.img if isinstance(chi, Permutation) else np.asarray(chi, dtype=np.int64)
    if c.size != S.shape[1]:
        raise DegreeMismatch("conjugator has the wrong degree")
    return Fraction(mismatch_count(S, P, c), S.shape[1])


@dataclass(frozen=True)
class AlignmentProblem:
    sigma: object
    psi: object
    E: tuple
    rounds: int = DEFAULT_ROUNDS
    budget: int = 200_000
    seed: int = 0
    restarts: int = 8
    wide_limit: int = 256

    def __post_init__(self):
        object.__setattr__(self, "E", tuple(self.E))
        _check_pair(_images(self.sigma, self.E), _images(self.psi, self.E))


@dataclass
class AlignmentResult:
    chi: Permutation
    objective: Fraction
    trace: dict = field(default_factory=dict)


def brute_force(sigma, psi, E: Sequence[Element]) -> AlignmentResult:
    """Global minimum over Sym(d); ties go to the lexicographically first image sequence."""
    S, P = _images(sigma, E), _images(psi, E)
    _check_pair(S, P)
    d = S.shape[1]
    if d > BRUTE_FORCE_MAX_DEGREE:
        raise ValueError(f"brute force is limited to d <= {BRUTE_FORCE_MAX_DEGREE}, got {d}")
    chis = np.array(list(itertools.permutations(range(d))), dtype=np.int64)
    counts = np.zeros(len(chis), dtype=np.int64)
    for s, p in zip(S, P):
        counts += np.count_nonzero(chis[:, s] != p[chis], axis=1)
    best = int(np.argmin(counts))
    return AlignmentResult(
        Permutation(chis[best]), Fraction(int(counts[best]), d), {"method": "brute-force", "candidates": len(chis)}
    )


# -- colour refinement -------------------------------------------------------

def _relabel(keys_a: np.ndarray, keys_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    both = np.concatenate([keys_a, keys_b], axis=0)
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    return inv[: len(keys_a)], inv[len(keys_a):]


def refinement_levels(S: np.ndarray, P: np.ndarray, rounds: int = DEFAULT_ROUNDS) -> list[tuple[np.ndarray, np.ndarray]]:
    """Joint refinement of both Schreier graphs so that colour ids are comparable across sides.

    Level 0 colours j by its fixed-point pattern over E; each later level
    appends the colours of sigma(g) j and sigma(g)^-1 j for every g in E.
    Stops early once the partition is stable on both sides.
    """
    ar = np.arange(S.shape[1])
    Sinv = np.stack([invert_array(s) for s in S])
    Pinv = np.stack([invert_array(p) for p in P])
    ca, cb = _relabel((S == ar).T.astype(np.int64), (P == ar).T.astype(np.int64))
    levels = [(ca, cb)]
    for _ in range(rounds):
        ka = np.column_stack([ca] + [ca[s] for s in S] + [ca[s] for s in Sinv])
        kb = np.column_stack([cb] + [cb[p] for p in P] + [cb[p] for p in Pinv])
        na, nb = _relabel(ka, kb)
        stable = len(np.unique(na)) == len(np.unique(ca)) and len(np.unique(nb)) == len(np.unique(cb))
        ca, cb = na, nb
        levels.append((ca, cb))
        if stable:
            break
    return levels


def color_refinement(S: np.ndarray, P: np.ndarray, rounds: int = DEFAULT_ROUNDS):
    """Final refined colours of both sides and the number of rounds run."""
    levels = refinement_levels(S, P, rounds)
    ca, cb = levels[-1]
    return ca, cb, len(levels) - 1


def _class_sizes(c: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(c, return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist()))


# -- propagation matching ----------------------------------------------------

def _propagate(S, P, Sinv, Pinv, ca, cb, anchor_order) -> np.ndarray:
    """Grow chi from anchors along matching edges of both Schreier graphs, colour-respecting."""
    d = S.shape[1]
    chi = -np.ones(d, dtype=np.int64)
    taken = np.zeros(d, dtype=bool)
    free_b: dict[int, deque] = {}
    for p in range(d):
        free_b.setdefault(int(cb[p]), deque()).append(p)
    Sl, Pl = S.tolist(), P.tolist()
    Sil, Pil = Sinv.tolist(), Pinv.tolist()
    cal, cbl = ca.tolist(), cb.tolist()
    chil = chi.tolist()
    takenl = taken.tolist()
    moves = list(zip(Sl, Pl)) + list(zip(Sil, Pil))

    def next_free(color):
        q = free_b.get(color)
        while q:
            p = q[0]
            if not takenl[p]:
                return p
            q.popleft()
        return -1

    for a in anchor_order:
        if chil[a] >= 0:
            continue
        p = next_free(cal[a])
        if p < 0:
            continue
        chil[a] = p
        takenl[p] = True
        queue = deque([a])
        while queue:
            i = queue.popleft()
            pi = chil[i]
            for s, q in moves:
                j, pj = s[i], q[pi]
                if chil[j] < 0 and not takenl[pj] and cal[j] == cbl[pj]:
                    chil[j] = pj
                    takenl[pj] = True
                    queue.append(j)
    chi = np.array(chil, dtype=np.int64)
    # leftovers: same colour first, then anything
    rest = [i for i in range(d) if chil[i] < 0]
    if rest:
        for i in rest:
            p = next_free(cal[i])
            if p >= 0:
                chi[i] = p
                takenl[p] = True
        left_a = np.flatnonzero(chi < 0)
        left_b = [p for p in range(d) if not takenl[p]]
        chi[left_a] = left_b
    return chi


def _random_coupling(ca: np.ndarray, cb: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    chi = np.empty(ca.size, dtype=np.int64)
    for c in np.unique(ca):
        src = np.flatnonzero(ca == c)
        chi[src] = rng.permutation(np.flatnonzero(cb == c))
    return chi


# -- transposition local search ----------------------------------------------

class _LocalSearch:
    def __init__(self, S: np.ndarray, P: np.ndarray, chi: np.ndarray):
        self.S = S.tolist()
        self.Sinv = [invert_array(s).tolist() for s in S]
        self.P = P.tolist()
        self.Pinv = [invert_array(p).tolist() for p in P]
        self.chi = chi.tolist()
        self.inv = invert_array(chi).tolist()
        self.r = len(self.S)
        self.bad = int(np.count_nonzero(chi[S] != P[:, chi]))

    def _terms(self, a: int, b: int) -> int:
        chi = self.chi
        total = 0
        for s, si, p in zip(self.S, self.Sinv, self.P):
            for j in {a, b, si[a], si[b]}:
                total += chi[s[j]] != p[chi[j]]
        return total

    def delta(self, a: int, b: int) -> int:
        before = self._terms(a, b)
        self._swap(a, b)
        after = self._terms(a, b)
        self._swap(a, b)
        return after - before

    def _swap(self, a: int, b: int):
        chi = self.chi
        chi[a], chi[b] = chi[b], chi[a]
        self.inv[chi[a]] = a
        self.inv[chi[b]] = b

    def disagreement_points(self) -> list[int]:
        chi = self.chi
        out = set()
        for s, p in zip(self.S, self.P):
            for j in range(len(chi)):
                if chi[s[j]] != p[chi[j]]:
                    out.add(j)
                    out.add(s[j])
        return sorted(out)

    def candidates(self, j: int):
        chi, inv = self.chi, self.inv
        for s, si, p, pi in zip(self.S, self.Sinv, self.P, self.Pinv):
            # make chi(sigma_g j) = psi_g(chi j)
            yield s[j], inv[p[chi[j]]]
            # make chi(j) = psi_g^-1(chi(sigma_g j))
            yield j, inv[pi[chi[s[j]]]]
            # the edge arriving at j
            k = si[j]
            yield j, inv[p[chi[k]]]

    def wide_candidates(self, j: int):
        for b in range(len(self.chi)):
            yield j, b

    def run(self, budget: int, wide_limit: int = 0) -> tuple[int, list]:
        """First-improvement descent; when targeted moves stall and d <= wide_limit,
        every partner of each disagreement point is tried."""
        history = [self.bad]
        evals = 0
        wide = False
        while self.bad and evals < budget:
            improved = False
            gen = self.wide_candidates if wide else self.candidates
            for j in self.disagreement_points():
                for a, b in gen(j):
                    if a == b:
                        continue
                    evals += 1
                    dlt = self.delta(a, b)
                    if dlt < 0:
                        self._swap(a, b)
                        self.bad += dlt
                        history.append(self.bad)
                        improved = True
                        break
                if evals >= budget or not self.bad:
                    break
            if improved:
                wide = False
            elif not wide and len(self.chi) <= wide_limit:
                wide = True
            else:
                break
        return evals, history


def align(problem: AlignmentProblem) -> AlignmentResult:
    """Best conjugator found by propagation from refined colours plus local search.

    Colours come from the finest refinement level whose class sizes agree on
    both sides. Candidates are the identity coupling, a propagation seeded in
    colour-class order, and ``restarts`` seeded starts alternating between
    random-anchor propagation and random colour-respecting couplings. Each is
    improved by transposition search; the first best result wins.
    """
    E = problem.E
    S, P = _images(problem.sigma, E), _images(problem.psi, E)
    d = S.shape[1]
    Sinv = np.stack([invert_array(s) for s in S])
    Pinv = np.stack([invert_array(p) for p in P])
    levels = refinement_levels(S, P, problem.rounds)
    # the finest level whose colour classes have equal sizes on both sides
    # (a single colour when even the fixed-point patterns disagree)
    level = -1
    for i, (ca, cb) in enumerate(levels):
        if _class_sizes(ca) == _class_sizes(cb):
            level = i
    if level < 0:
        ca = cb = np.zeros(d, dtype=np.int64)
    else:
        ca, cb = levels[level]
    sizes_a = _class_sizes(ca)
    size_of = np.array([sizes_a[c] for c in ca.tolist()])
    base_order = np.lexsort((np.arange(d), size_of)).tolist()

    rng = np.random.default_rng([problem.seed, 0xA1])
    starts = [("identity", np.arange(d, dtype=np.int64)),
              ("propagate", _propagate(S, P, Sinv, Pinv, ca, cb, base_order))]
    for r in range(problem.restarts):
        if r % 2 == 0:
            order = rng.permutation(d).tolist()
            starts.append((f"restart-{r}", _propagate(S, P, Sinv, Pinv, ca, cb, order)))
        else:
            starts.append((f"restart-{r}", _random_coupling(ca, cb, rng)))

    best = None
    runs = []
    for name, chi in starts:
        ls = _LocalSearch(S, P, chi)
        start_bad = ls.bad
        evals, history = ls.run(problem.budget, problem.wide_limit)
        runs.append({"start": name, "initial": start_bad, "final": ls.bad, "evaluations": evals,
                     "improvements": len(history) - 1})
        if best is None or ls.bad < best[0]:
            best = (ls.bad, np.array(ls.chi, dtype=np.int64), name, history)
        if best[0] == 0:
            break
    bad, chi, name, history = best
    trace = {
        "method": "align",
        "refinement_rounds": len(levels) - 1,
        "matched_level": level,
        "colour_classes": len(sizes_a),
        "class_sizes_match": level == len(levels) - 1,
        "best_start": name,
        "history": history,
        "runs": runs,
    }
    return AlignmentResult(Permutation._wrap(chi), Fraction(bad, d), trace)


# -- trend tables ------------------------------------------------------------

@dataclass(frozen=True)
class TrendRow:
    label: str
    degree_sigma: int
    degree_psi: int
    stats: StatsMatchReport
    objective: Fraction | None
    note: str = ""

    @property
    def stats_passed(self) -> bool:
        return self.stats.passed


def conjugacy_trend(pairs, E: Sequence[Element], family, tol, seed: int = 0, rounds: int = DEFAULT_ROUNDS,
                    restarts: int = 4) -> list[TrendRow]:
    """One row per (label, sigma, psi): stabilizer-statistics match and the aligned objective.

    ``pairs`` yields (label, sigma, psi) or (label, callable returning (sigma, psi));
    a construction failure is recorded as a row note. The objective is None
    when the degrees differ.
    """
    rows = []
    for label, *rest in pairs:
        try:
            if len(rest) == 1:
                sigma, psi = rest[0]()
            else:
                sigma, psi = rest
        except Exception as exc:  # recorded, not fatal
            rows.append(TrendRow(str(label), 0, 0, StatsMatchReport((), Fraction(0)), None, f"construction failed: {exc}"))
            continue
        stats = stats_match(sigma, psi, family, tol)
        note = "" if sigma.group.amenable else "group is not amenable; no conjugacy guarantee"
        obj = None
        if sigma.degree == psi.degree:
            res = align(AlignmentProblem(sigma, psi, tuple(E), rounds=rounds, seed=seed, restarts=restarts))
            obj = res.objective
        else:
            note = (note + "; " if note else "") + "degrees differ, objective undefined"
        if not stats.passed:
            note = (note + "; " if note else "") + "stabilizer statistics mismatch"
        rows.append(TrendRow(str(label), sigma.degree, psi.degree, stats, obj, note))
    return rows
