"""Greedy k-matching and the multicover obtained as its complement."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Sequence

import numpy as np

from .hypergraph import (
    CoverSolution,
    DegreeProfile,
    Hypergraph,
    InfeasibleInstanceError,
    MatchingSolution,
    complement,
    degree_profile,
    require_valid,
)

Ordering = Literal["input", "size", "random"]


def capacity_vector(h: Hypergraph) -> tuple[int, ...]:
    """k_i = deg(v_i) - b_i, the capacities dual to the demands."""
    k = tuple(d - b for d, b in zip(h.degrees, h.demands))
    negative = [i for i, c in enumerate(k) if c < 0]
    if negative:
        i = negative[0]
        raise InfeasibleInstanceError([f"deg(v{i + 1})={h.degrees[i]} < b_{i + 1}={h.demands[i]}"])
    return k


def edge_order(h: Hypergraph, order: Ordering | Sequence[int] = "input", seed: int | None = None) -> list[int]:
    if not isinstance(order, str):
        seq = [int(j) for j in order]
        if sorted(seq) != list(range(h.m)):
            raise ValueError("an explicit order must be a permutation of the edge indices")
        return seq
    if order == "input":
        return list(range(h.m))
    if order == "size":
        return sorted(range(h.m), key=lambda j: (len(h.edges[j]), j))
    if order == "random":
        return [int(j) for j in np.random.default_rng(seed).permutation(h.m)]
    raise ValueError(f"unknown edge ordering {order!r}")


def greedy_k_matching(
    h: Hypergraph,
    k: Sequence[int],
    order: Ordering | Sequence[int] = "input",
    seed: int | None = None,
) -> MatchingSolution:
    """Scan the edges once and keep every edge that still fits.

    The result is maximal for the scan order and holds at least a
    ``1/ell`` fraction of the maximum k-matching.
    """
    cap = [int(c) for c in k]
    if len(cap) != h.n or any(c < 0 for c in cap):
        raise ValueError("capacities must be a non-negative vector of length n")
    chosen = []
    for j in edge_order(h, order, seed):
        e = h.edges[j]
        if all(cap[v] > 0 for v in e):
            chosen.append(j)
            for v in e:
                cap[v] -= 1
    return MatchingSolution(chosen, k)


def duality_cover(
    h: Hypergraph, order: Ordering | Sequence[int] = "input", seed: int | None = None
) -> tuple[CoverSolution, MatchingSolution]:
    require_valid(h)
    matching = greedy_k_matching(h, capacity_vector(h), order, seed)
    return complement(h, matching), matching


@dataclass(frozen=True)
class DualityBound:
    value: Fraction
    ratio_bound: Fraction
    r: Fraction


def _matching_bound_value(p: DegreeProfile) -> Fraction:
    return (p.delta_bar / p.b_bar) * (Fraction(p.ell_max) / p.ell_bar) - 1


def lemma6_bound(h: Hypergraph, r: Fraction | int | None = None) -> DualityBound:
    """``nu_k <= value * Opt`` and the induced guarantee for the duality cover.

    With a ``r``-approximate k-matching the complement has size at most
    ``((1 - r) * Dbar*ell / (bbar*ellbar) + r) * Opt``. ``r`` defaults to
    ``1/ell``, the greedy guarantee.
    """
    p = degree_profile(h)
    r = Fraction(1, p.ell_max) if r is None else Fraction(r)
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    value = _matching_bound_value(p)
    ratio = (1 - r) * (value + 1) + r
    return DualityBound(value, ratio, r)


def five_sixths_hypotheses(p: DegreeProfile, epsilon: Fraction = Fraction(1, 2)) -> dict[str, bool]:
    """The conditions under which the duality cover is a (5/6)delta approximation."""
    return {
        "near_uniform": Fraction(p.ell_max) <= (1 + Fraction(epsilon)) * p.ell_bar,
        "epsilon_in_range": 0 <= Fraction(epsilon) <= Fraction(1, 2),
        "b_ge_3": p.b_min >= 3,
        "Delta_ge_b_plus_2": p.delta_max >= p.b_min + 2,
        "delta_ge_3": p.delta >= 3,
    }


def five_sixths_applies(p: DegreeProfile, epsilon: Fraction = Fraction(1, 2)) -> bool:
    return all(five_sixths_hypotheses(p, epsilon).values())


def five_sixths_ratio(p: DegreeProfile) -> Fraction:
    return Fraction(5, 6) * p.delta


def five_sixths_refined_ratio(p: DegreeProfile) -> Fraction:
    return (Fraction(5, 6) - Fraction(1, 2 * p.ell_max)) * p.delta


def is_maximal(h: Hypergraph, matching: MatchingSolution, skipped: Iterable[int] | None = None) -> bool:
    """No edge outside the matching can be added without breaking a capacity."""
    load = [0] * h.n
    for j in matching.chosen:
        for v in h.edges[j]:
            load[v] += 1
    chosen = set(matching.chosen)
    candidates = range(h.m) if skipped is None else skipped
    return all(
        any(load[v] >= matching.capacities[v] for v in h.edges[j]) for j in candidates if j not in chosen
    )
