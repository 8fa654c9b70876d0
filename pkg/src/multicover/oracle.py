"""Exact optima at desk scale: minimum multicover and maximum k-matching.

Both problems get two independent routes, a full enumeration of edge subsets
(vectorised, feasible up to ~20 edges) and a depth-first branch-and-bound.
Neither route goes through the matching/cover duality, so comparing
``m - nu_k`` with ``Opt`` is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .hypergraph import Hypergraph, complement, is_multicover, require_valid
from .lp import LpError, lp_lower_bound, solve_relaxation

Method = Literal["exhaustive", "branch-and-bound"]

DEFAULT_BUDGET = 10**7
EXHAUSTIVE_MAX_M = 22


class OracleTimeout(RuntimeError):
    def __init__(self, result: "OracleResult"):
        self.result = result
        super().__init__(
            f"node budget exhausted after {result.explored} nodes "
            f"(bounds {result.lower_bound}..{result.upper_bound})"
        )


@dataclass(frozen=True)
class OracleResult:
    value: int
    witness: tuple[int, ...]
    explored: int
    method: Method
    timed_out: bool = False
    lower_bound: int | None = None
    upper_bound: int | None = None


def _subset_matrix(m: int) -> np.ndarray:
    if m > EXHAUSTIVE_MAX_M:
        raise ValueError(f"exhaustive enumeration refused for m={m} > {EXHAUSTIVE_MAX_M}")
    codes = np.arange(1 << m, dtype=np.int64)
    return ((codes[:, None] >> np.arange(m)) & 1).astype(np.int8)


def all_subsets(m: int) -> np.ndarray:
    """Rows are the 2^m indicator vectors, row r encoding the bits of r."""
    return _subset_matrix(m)


def _best_row(mask: np.ndarray, sizes: np.ndarray, maximize: bool) -> int:
    candidates = np.flatnonzero(mask)
    key = -sizes[candidates] if maximize else sizes[candidates]
    return int(candidates[np.argmin(key)])


def _exhaustive_cover(h: Hypergraph) -> OracleResult:
    subsets = _subset_matrix(h.m)
    loads = subsets.astype(np.int32) @ h.incidence_matrix.T.astype(np.int32)
    feasible = np.all(loads >= np.asarray(h.demands), axis=1)
    sizes = subsets.sum(axis=1)
    r = _best_row(feasible, sizes, maximize=False)
    witness = tuple(int(j) for j in np.flatnonzero(subsets[r]))
    return OracleResult(len(witness), witness, 1 << h.m, "exhaustive", lower_bound=len(witness), upper_bound=len(witness))


def _exhaustive_matching(h: Hypergraph, k: Sequence[int]) -> OracleResult:
    subsets = _subset_matrix(h.m)
    loads = subsets.astype(np.int32) @ h.incidence_matrix.T.astype(np.int32)
    ok = np.all(loads <= np.asarray(k), axis=1)
    sizes = subsets.sum(axis=1)
    r = _best_row(ok, sizes, maximize=True)
    witness = tuple(int(j) for j in np.flatnonzero(subsets[r]))
    return OracleResult(len(witness), witness, 1 << h.m, "exhaustive", lower_bound=len(witness), upper_bound=len(witness))


def greedy_multicover(h: Hypergraph, demands: Sequence[int] | None = None) -> tuple[int, ...]:
    """Repeatedly take the edge covering the most residual demand (lowest index on ties)."""
    residual = list(h.demands if demands is None else demands)
    chosen: list[int] = []
    free = set(range(h.m))
    while any(r > 0 for r in residual):
        best, gain = None, 0
        for j in sorted(free):
            g = sum(1 for v in h.edges[j] if residual[v] > 0)
            if g > gain:
                best, gain = j, g
        if best is None:
            raise ValueError("instance is infeasible")
        free.discard(best)
        chosen.append(best)
        for v in h.edges[best]:
            residual[v] -= 1
    return tuple(sorted(chosen))


class _CoverSearch:
    def __init__(self, h: Hypergraph, budget: int, root_lower: int):
        self.h = h
        self.budget = budget
        self.root_lower = root_lower
        self.residual = list(h.demands)
        self.avail = list(h.degrees)
        self.state = [0] * h.m  # 0 undecided, 1 in, -1 out
        self.chosen: list[int] = []
        self.best = greedy_multicover(h)
        self.nodes = 0
        self.exhausted = False

    def run(self) -> None:
        if len(self.best) > self.root_lower:
            self._dfs()

    def _set(self, j: int, value: int) -> None:
        self.state[j] = value
        for v in self.h.edges[j]:
            self.avail[v] -= 1
            if value == 1:
                self.residual[v] -= 1
        if value == 1:
            self.chosen.append(j)

    def _unset(self, j: int) -> None:
        value = self.state[j]
        self.state[j] = 0
        for v in self.h.edges[j]:
            self.avail[v] += 1
            if value == 1:
                self.residual[v] += 1
        if value == 1:
            self.chosen.pop()

    def _dfs(self) -> None:
        if self.exhausted:
            return
        self.nodes += 1
        if self.nodes > self.budget:
            self.exhausted = True
            return
        h = self.h
        deficient = [v for v in range(h.n) if self.residual[v] > 0]
        if not deficient:
            if len(self.chosen) < len(self.best):
                self.best = tuple(sorted(self.chosen))
            return
        if any(self.residual[v] > self.avail[v] for v in deficient):
            return
        branch, coverage = -1, 0
        for j in range(h.m):
            if self.state[j] == 0:
                c = sum(1 for v in h.edges[j] if self.residual[v] > 0)
                if c > coverage:
                    branch, coverage = j, c
        need = max(max(self.residual[v] for v in deficient), math.ceil(sum(self.residual[v] for v in deficient) / coverage))
        if len(self.chosen) + need >= len(self.best):
            return
        self._set(branch, 1)
        self._dfs()
        self._unset(branch)
        if len(self.best) <= self.root_lower:
            return
        self._set(branch, -1)
        self._dfs()
        self._unset(branch)


def exact_min_multicover(
    h: Hypergraph,
    budget: int = DEFAULT_BUDGET,
    method: Method = "branch-and-bound",
    use_lp_bound: bool = True,
    raise_on_timeout: bool = False,
) -> OracleResult:
    """Minimum-cardinality b-multicover.

    Branching is on the undecided edge covering the most deficient vertices
    (lowest index on ties), "take it" first. Nodes are pruned with
    ``max(max residual demand, ceil(total residual / best coverage))`` and
    the search stops early once it meets ``ceil(Opt*)``.
    """
    require_valid(h)
    if method == "exhaustive":
        return _exhaustive_cover(h)
    root_lower = 0
    if use_lp_bound:
        try:
            root_lower = lp_lower_bound(solve_relaxation(h).objective)
        except LpError:
            root_lower = 0
    root_lower = max(root_lower, max(h.demands))
    search = _CoverSearch(h, budget, root_lower)
    search.run()
    best = search.best
    if search.exhausted:
        result = OracleResult(len(best), best, search.nodes, "branch-and-bound", True, root_lower, len(best))
        if raise_on_timeout:
            raise OracleTimeout(result)
        return result
    return OracleResult(len(best), best, search.nodes, "branch-and-bound", False, len(best), len(best))


class _MatchingSearch:
    def __init__(self, h: Hypergraph, k: Sequence[int], budget: int):
        self.h = h
        self.cap = list(k)
        self.budget = budget
        self.chosen: list[int] = []
        self.best: tuple[int, ...] = self._greedy()
        self.nodes = 0
        self.exhausted = False

    def _fits(self, j: int) -> bool:
        return all(self.cap[v] > 0 for v in self.h.edges[j])

    def _greedy(self) -> tuple[int, ...]:
        cap = list(self.cap)
        out = []
        for j, e in enumerate(self.h.edges):
            if all(cap[v] > 0 for v in e):
                out.append(j)
                for v in e:
                    cap[v] -= 1
        return tuple(out)

    def _dfs(self, j: int) -> None:
        if self.exhausted:
            return
        self.nodes += 1
        if self.nodes > self.budget:
            self.exhausted = True
            return
        h = self.h
        if j == h.m:
            if len(self.chosen) > len(self.best):
                self.best = tuple(self.chosen)
            return
        addable = [i for i in range(j, h.m) if self._fits(i)]
        bound = len(addable)
        if addable:
            smallest = min(len(h.edges[i]) for i in addable)
            touched = {v for i in addable for v in h.edges[i]}
            bound = min(bound, sum(self.cap[v] for v in touched) // smallest)
        if len(self.chosen) + bound <= len(self.best):
            return
        if self._fits(j):
            for v in h.edges[j]:
                self.cap[v] -= 1
            self.chosen.append(j)
            self._dfs(j + 1)
            self.chosen.pop()
            for v in h.edges[j]:
                self.cap[v] += 1
        self._dfs(j + 1)


def exact_max_k_matching(
    h: Hypergraph,
    k: Sequence[int],
    budget: int = DEFAULT_BUDGET,
    method: Method = "branch-and-bound",
    raise_on_timeout: bool = False,
) -> OracleResult:
    """Maximum-cardinality k-matching (the k-matching number)."""
    k = tuple(int(c) for c in k)
    if len(k) != h.n or any(c < 0 for c in k):
        raise ValueError("capacities must be a non-negative vector of length n")
    if method == "exhaustive":
        return _exhaustive_matching(h, k)
    search = _MatchingSearch(h, k, budget)
    search._dfs(0)
    best = search.best
    if search.exhausted:
        result = OracleResult(len(best), best, search.nodes, "branch-and-bound", True, len(best), None)
        if raise_on_timeout:
            raise OracleTimeout(result)
        return result
    return OracleResult(len(best), best, search.nodes, "branch-and-bound", False, len(best), len(best))


def duality_crosscheck(h: Hypergraph, budget: int = DEFAULT_BUDGET, method: Method = "branch-and-bound") -> bool:
    """``m - nu_k == Opt`` and the complement of a maximum k-matching is an optimal cover."""
    require_valid(h)
    k = tuple(d - b for d, b in zip(h.degrees, h.demands))
    cover = exact_min_multicover(h, budget, method, raise_on_timeout=True)
    matching = exact_max_k_matching(h, k, budget, method, raise_on_timeout=True)
    comp = complement(h, matching.witness)
    return h.m - matching.value == cover.value and is_multicover(h, comp).ok and len(comp) == cover.value
