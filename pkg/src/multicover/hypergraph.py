"""Hypergraph instances, degree statistics and feasibility checks.

Vertices and edges are 0-based inside the library. The text/JSON instance
formats and the CLI reports use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class InvalidHypergraphError(ValueError):
    """Raised when an operation needs a valid instance and gets a broken one."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InfeasibleInstanceError(InvalidHypergraphError):
    """Some vertex has fewer incident edges than its demand."""


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple[tuple[int, ...], ...]
    demands: tuple[int, ...]

    def __init__(self, n: int, edges: Iterable[Iterable[int]], demands: Iterable[int]):
        # Edges are kept as sorted tuples, not sets, so that a vertex repeated
        # inside one edge survives construction and shows up in validate().
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(tuple(sorted(int(v) for v in e)) for e in edges))
        object.__setattr__(self, "demands", tuple(int(b) for b in demands))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """incident[v] lists the edges containing v, in increasing index order."""
        lists: list[list[int]] = [[] for _ in range(self.n)]
        for j, e in enumerate(self.edges):
            for v in set(e):
                if 0 <= v < self.n:
                    lists[v].append(j)
        return tuple(tuple(sorted(js)) for js in lists)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(js) for js in self.incident)

    @cached_property
    def incidence_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.m), dtype=np.int64)
        for v, js in enumerate(self.incident):
            a[v, list(js)] = 1
        a.setflags(write=False)
        return a

    def with_demands(self, demands: Iterable[int]) -> "Hypergraph":
        return Hypergraph(self.n, self.edges, demands)

    def disjoint_union(self, other: "Hypergraph") -> "Hypergraph":
        shifted = [tuple(v + self.n for v in e) for e in other.edges]
        return Hypergraph(self.n + other.n, self.edges + tuple(shifted), self.demands + other.demands)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(h: Hypergraph) -> ValidationReport:
    # Messages use 1-based vertex/edge numbers, matching the file formats.
    problems: list[str] = []
    if h.n < 1:
        problems.append("n must be at least 1")
    if h.m < 1:
        problems.append("hypergraph has no edges")
    if len(h.demands) != h.n:
        problems.append(f"demand vector has length {len(h.demands)}, expected n={h.n}")
    for j, e in enumerate(h.edges, start=1):
        if not e:
            problems.append(f"edge E{j} is empty")
        bad = sorted({v + 1 for v in e if not 0 <= v < h.n})
        if bad:
            problems.append(f"edge E{j} has vertex out of range: {bad}")
        if len(set(e)) != len(e):
            problems.append(f"edge E{j} repeats a vertex")
    for i, b in enumerate(h.demands[: h.n]):
        if b < 2:
            problems.append(f"demand b_{i + 1}={b} < 2")
    if len(h.demands) == h.n:
        for i, (d, b) in enumerate(zip(h.degrees, h.demands)):
            if d < b:
                problems.append(f"deg(v{i + 1})={d} < b_{i + 1}={b}")
    return ValidationReport(tuple(problems))


def require_valid(h: Hypergraph) -> None:
    report = validate(h)
    if report.ok:
        return
    infeasible = [p for p in report.violations if p.startswith("deg(")]
    if infeasible and len(infeasible) == len(report.violations):
        raise InfeasibleInstanceError(report.violations)
    raise InvalidHypergraphError(report.violations)


@dataclass(frozen=True)
class DegreeProfile:
    delta_max: int
    delta_bar: Fraction
    ell_max: int
    ell_bar: Fraction
    b_min: int
    b_bar: Fraction

    @property
    def delta(self) -> int:
        """Delta - b + 1, the baseline approximation ratio."""
        return self.delta_max - self.b_min + 1


def degree_profile(h: Hypergraph) -> DegreeProfile:
    require_valid(h)
    sizes = [len(e) for e in h.edges]
    return DegreeProfile(
        delta_max=max(h.degrees),
        delta_bar=Fraction(sum(h.degrees), h.n),
        ell_max=max(sizes),
        ell_bar=Fraction(sum(sizes), h.m),
        b_min=min(h.demands),
        b_bar=Fraction(sum(h.demands), h.n),
    )


PROVENANCES = ("threshold", "alg1-deterministic", "alg1-randomized", "duality", "exact", "partial")


@dataclass(frozen=True)
class CoverSolution:
    chosen: tuple[int, ...]
    provenance: str = "exact"
    trial_seed: int | None = None

    def __init__(self, chosen: Iterable[int], provenance: str = "exact", trial_seed: int | None = None):
        chosen = tuple(sorted(int(j) for j in chosen))
        if len(set(chosen)) != len(chosen):
            raise ValueError("an edge can be chosen at most once")
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        object.__setattr__(self, "chosen", chosen)
        object.__setattr__(self, "provenance", provenance)
        object.__setattr__(self, "trial_seed", trial_seed)

    def __len__(self) -> int:
        return len(self.chosen)


@dataclass(frozen=True)
class MatchingSolution:
    chosen: tuple[int, ...]
    capacities: tuple[int, ...] = field(default=())

    def __init__(self, chosen: Iterable[int], capacities: Iterable[int]):
        chosen = tuple(sorted(int(j) for j in chosen))
        if len(set(chosen)) != len(chosen):
            raise ValueError("an edge can be chosen at most once")
        object.__setattr__(self, "chosen", chosen)
        object.__setattr__(self, "capacities", tuple(int(k) for k in capacities))

    def __len__(self) -> int:
        return len(self.chosen)


class CoverCheck(NamedTuple):
    ok: bool
    slack: tuple[int, ...]


class MatchingCheck(NamedTuple):
    ok: bool
    loads: tuple[int, ...]


def _loads(h: Hypergraph, chosen: Iterable[int]) -> list[int]:
    counts = [0] * h.n
    for j in chosen:
        if not 0 <= j < h.m:
            raise IndexError(f"edge index {j} out of range for m={h.m}")
        for v in h.edges[j]:
            counts[v] += 1
    return counts


def is_multicover(h: Hypergraph, cover: CoverSolution | Iterable[int]) -> CoverCheck:
    chosen = cover.chosen if isinstance(cover, CoverSolution) else cover
    slack = tuple(c - b for c, b in zip(_loads(h, chosen), h.demands))
    return CoverCheck(all(s >= 0 for s in slack), slack)


def is_k_matching(h: Hypergraph, matching: MatchingSolution) -> MatchingCheck:
    if len(matching.capacities) != h.n or any(k < 0 for k in matching.capacities):
        raise ValueError("capacities must be a non-negative vector of length n")
    loads = tuple(_loads(h, matching.chosen))
    return MatchingCheck(all(c <= k for c, k in zip(loads, matching.capacities)), loads)


def complement(h: Hypergraph, matching: MatchingSolution | Iterable[int]) -> CoverSolution:
    chosen = set(matching.chosen if isinstance(matching, MatchingSolution) else matching)
    return CoverSolution((j for j in range(h.m) if j not in chosen), provenance="duality")
