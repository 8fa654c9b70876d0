"""LP-threshold covers and the hybrid threshold / randomized-rounding algorithm.

Given an optimal fractional point x of the relaxation, with
``delta = Delta - b + 1`` and ``lam = (delta + 1) / 2``:

* ``C1 = {x_j >= 1/lam}``, ``C2 = {1/delta <= x_j < 1/lam}``,
  ``C3 = {0 < x_j < 1/lam}`` (so ``C2`` is contained in ``C3``);
* if ``|C1| >= alpha * Opt*`` or ``t * |C1| >= |C2|`` the cover is
  ``C1 | C2``;
* otherwise ``C1`` is kept, each ``C3`` edge is added independently with
  probability ``lam * x_j``, and deficient vertices are repaired greedily.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .hypergraph import CoverSolution, Hypergraph, InfeasibleInstanceError, degree_profile, require_valid
from .lp import EPS_TOL, LpError, LpSolution, Mode, solve_relaxation
from .oracle import greedy_multicover

DEFAULT_T = 73

BRANCH_ALPHA = "deterministic-c1-alpha"
BRANCH_T = "deterministic-c1-t"
BRANCH_RANDOMIZED = "randomized"


class BranchPreconditionError(ValueError):
    """The point does not satisfy the randomized-branch trigger."""


@dataclass(frozen=True)
class RoundingParams:
    delta: int
    b_min: int
    ell: int
    t: int = DEFAULT_T
    seed: int = 0
    alpha_override: float | None = None

    @classmethod
    def for_instance(cls, h: Hypergraph, seed: int = 0, t: int = DEFAULT_T, alpha: float | None = None) -> "RoundingParams":
        p = degree_profile(h)
        return cls(p.delta, p.b_min, p.ell_max, t, seed, alpha)

    @property
    def lam(self) -> Fraction:
        return Fraction(self.delta + 1, 2)

    @property
    def alpha(self) -> float:
        if self.alpha_override is not None:
            return self.alpha_override
        return (self.b_min - 1) * self.delta * _exp(self.delta / 4) / (47 * self.ell)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class FractionalPoint:
    """A feasible point of the relaxation that need not be optimal."""

    x: tuple
    objective: Fraction | float
    lp_optimal: bool = False


@dataclass(frozen=True)
class Partition:
    c1: tuple[int, ...]
    c2: tuple[int, ...]
    c3: tuple[int, ...]
    x: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class RoundingTrace:
    branch: str
    x_count: int
    y_count: int
    repairs_added: int
    final_size: int
    ratio_claims_applicable: bool = True
    repair_fallback: bool = False
    bound_ratio: float | None = None
    bound_satisfied: bool | None = None
    alpha_condition: bool | None = None
    t_condition: bool | None = None


def _is_exact(x: Sequence) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in x)


def _ge(value, threshold: Fraction, tol: float) -> bool:
    if tol == 0:
        return value >= threshold
    return float(value) >= float(threshold) - tol


def make_partition(point: LpSolution | FractionalPoint, params: RoundingParams, tol: float | None = None) -> Partition:
    x = tuple(point.x)
    if tol is None:
        tol = 0 if _is_exact(x) else EPS_TOL
    inv_lam = 1 / params.lam
    inv_delta = Fraction(1, params.delta)
    c1, c2, c3 = [], [], []
    for j, v in enumerate(x):
        if _ge(v, inv_lam, tol):
            c1.append(j)
            continue
        if _ge(v, inv_delta, tol):
            c2.append(j)
        if float(v) > tol:
            c3.append(j)
    return Partition(tuple(c1), tuple(c2), tuple(c3), x)


def choose_branch(partition: Partition, opt_star: float | Fraction, params: RoundingParams) -> str:
    c1, c2 = len(partition.c1), len(partition.c2)
    threshold = params.alpha * float(opt_star)
    if c1 >= threshold:
        return BRANCH_ALPHA
    if params.t * c1 >= c2:
        return BRANCH_T
    # Borderline alpha comparisons stay deterministic: the randomized
    # analysis needs the strict inequality.
    if c1 >= threshold - EPS_TOL:
        return BRANCH_ALPHA
    return BRANCH_RANDOMIZED


def randomized_trigger(partition: Partition, opt_star: float | Fraction, params: RoundingParams) -> bool:
    return choose_branch(partition, opt_star, params) == BRANCH_RANDOMIZED


def alpha_branch_ratio(params: RoundingParams) -> float:
    return (1 - (params.b_min - 1) * _exp(params.delta / 4) / (94 * params.ell)) * params.delta


def t_branch_ratio(params: RoundingParams) -> Fraction:
    """``delta / (1 + 1/(2t + 2))``; equals ``(148/149) delta`` for t = 73."""
    return Fraction(2 * params.t + 2, 2 * params.t + 3) * params.delta


def randomized_ratio(delta: int) -> Fraction:
    return Fraction(15 * delta + 14, 20)


def combined_ratio(params: RoundingParams) -> float:
    """The overall guarantee ``max{(148/149) delta, alpha-branch ratio}``."""
    return max(float(t_branch_ratio(params)), alpha_branch_ratio(params))


def branch_ratio(branch: str, params: RoundingParams) -> float:
    if branch == BRANCH_ALPHA:
        return alpha_branch_ratio(params)
    if branch == BRANCH_T:
        return float(t_branch_ratio(params))
    return float(randomized_ratio(params.delta))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from (seed, trial) only."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def threshold_cover(h: Hypergraph, sol: LpSolution, tol: float | None = None) -> CoverSolution:
    """All edges with ``x*_j >= 1/delta``: a multicover of size below ``delta * Opt``."""
    if not sol.is_optimal:
        raise LpError("threshold cover needs an optimal LP solution")
    delta = degree_profile(h).delta
    if tol is None:
        tol = 0 if _is_exact(sol.x) else EPS_TOL
    inv_delta = Fraction(1, delta)
    return CoverSolution((j for j, v in enumerate(sol.x) if _ge(v, inv_delta, tol)), provenance="threshold")


def _inclusion_probabilities(partition: Partition, params: RoundingParams) -> np.ndarray:
    lam = float(params.lam)
    return np.minimum(1.0, lam * np.array([float(partition.x[j]) for j in partition.c3], dtype=float))


def _round_mask(
    h: Hypergraph, partition: Partition, params: RoundingParams, trial: int, probs: np.ndarray | None = None
) -> np.ndarray:
    mask = np.zeros(h.m, dtype=bool)
    mask[list(partition.c1)] = True
    if partition.c3:
        if probs is None:
            probs = _inclusion_probabilities(partition, params)
        draws = trial_rng(params.seed, trial).random(len(partition.c3)) < probs
        mask[np.asarray(partition.c3)[draws]] = True
    return mask


def _fully_covered(h: Hypergraph, mask: np.ndarray) -> int:
    loads = h.incidence_matrix @ mask.astype(np.int64)
    return int(np.count_nonzero(loads >= np.asarray(h.demands)))


def randomized_round(
    h: Hypergraph,
    sol: LpSolution | FractionalPoint,
    partition: Partition,
    params: RoundingParams,
    trial: int = 0,
) -> tuple[CoverSolution, RoundingTrace]:
    """Keep C1, add each C3 edge with probability ``min(1, lam * x_j)``. No repair."""
    mask = _round_mask(h, partition, params, trial)
    x_count = int(mask.sum())
    cover = CoverSolution(np.flatnonzero(mask), provenance="alg1-randomized", trial_seed=params.seed)
    trace = RoundingTrace(BRANCH_RANDOMIZED, x_count, _fully_covered(h, mask), 0, x_count, params.delta >= 3)
    return cover, trace


def _repair(h: Hypergraph, chosen: set[int], partition: Partition) -> tuple[set[int], bool]:
    x = partition.x
    c3 = set(partition.c3)
    loads = [0] * h.n
    for j in chosen:
        for v in h.edges[j]:
            loads[v] += 1
    fallback = False
    for v in range(h.n):
        while loads[v] < h.demands[v]:
            candidates = [j for j in h.incident[v] if j not in chosen and j in c3]
            if candidates:
                pick = min(candidates, key=lambda j: (-x[j], j))
            else:
                fallback = True
                candidates = [j for j in h.incident[v] if j not in chosen]
                if not candidates:
                    raise InfeasibleInstanceError([f"deg(v{v + 1})={h.degrees[v]} < b_{v + 1}={h.demands[v]}"])
                pick = candidates[0]
            chosen.add(pick)
            for u in h.edges[pick]:
                loads[u] += 1
    return chosen, fallback


def repair(h: Hypergraph, partial: CoverSolution, partition: Partition) -> CoverSolution:
    """Complete ``partial`` to a multicover.

    Deficient vertices are handled in index order; each takes unchosen
    incident C3 edges by decreasing ``x_j`` (lowest index on ties), falling
    back to any unchosen incident edge when C3 runs out.
    """
    chosen, _ = _repair(h, set(partial.chosen), partition)
    return CoverSolution(chosen, provenance=partial.provenance, trial_seed=partial.trial_seed)


def algorithm1_solve(
    h: Hypergraph,
    params: RoundingParams | None = None,
    sol: LpSolution | None = None,
    mode: Mode = "float",
    trial: int = 0,
) -> tuple[CoverSolution, RoundingTrace]:
    require_valid(h)
    if params is None:
        params = RoundingParams.for_instance(h)
    if sol is None:
        sol = solve_relaxation(h, mode)
    if not sol.is_optimal:
        raise LpError(f"LP relaxation not solved: {sol.status}")
    partition = make_partition(sol, params)
    branch = choose_branch(partition, sol.objective, params)
    applicable = params.delta >= 3
    opt_star = float(sol.objective)
    conditions = {
        "alpha_condition": len(partition.c1) >= params.alpha * opt_star,
        "t_condition": params.t * len(partition.c1) >= len(partition.c2),
    }

    if branch != BRANCH_RANDOMIZED:
        chosen = sorted(set(partition.c1) | set(partition.c2))
        size = len(chosen)
        ratio = branch_ratio(branch, params)
        satisfied = size <= ratio * opt_star * (1 + 1e-9) if applicable else None
        trace = RoundingTrace(branch, size, h.n, 0, size, applicable, False, ratio, satisfied, **conditions)
        return CoverSolution(chosen, provenance="alg1-deterministic"), trace

    partial, pre = randomized_round(h, sol, partition, params, trial)
    chosen, fallback = _repair(h, set(partial.chosen), partition)
    size = len(chosen)
    ratio = float(randomized_ratio(params.delta))
    trace = RoundingTrace(
        branch,
        pre.x_count,
        pre.y_count,
        size - pre.x_count,
        size,
        applicable,
        fallback,
        ratio,
        size <= ratio * opt_star * (1 + 1e-9) if applicable else None,
        **conditions,
    )
    return CoverSolution(chosen, provenance="alg1-randomized", trial_seed=params.seed), trace


# --- structural claims about feasible fractional points ---------------------


@dataclass(frozen=True)
class ThresholdStructure:
    count_violations: tuple[int, ...]
    top_violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.count_violations and not self.top_violations


def check_threshold_structure(h: Hypergraph, x: Sequence, tol: float | None = None) -> ThresholdStructure:
    """Per vertex: >= b_i incident values at least 1/delta, and the top b_i - 1
    at least 2/(delta+1) with one more distinct value at least 1/delta."""
    delta = degree_profile(h).delta
    if tol is None:
        tol = 0 if _is_exact(x) else EPS_TOL
    inv_delta, inv_lam = Fraction(1, delta), Fraction(2, delta + 1)
    bad1, bad2 = [], []
    for v in range(h.n):
        vals = sorted((x[j] for j in h.incident[v]), reverse=True)
        b = h.demands[v]
        if sum(1 for val in vals if _ge(val, inv_delta, tol)) < b:
            bad1.append(v)
        if len(vals) < b or not all(_ge(val, inv_lam, tol) for val in vals[: b - 1]) or not _ge(vals[b - 1], inv_delta, tol):
            bad2.append(v)
    return ThresholdStructure(tuple(bad1), tuple(bad2))


def partition_weight_bound_holds(h: Hypergraph, sol: LpSolution | FractionalPoint, tol: float | None = None) -> bool:
    """``delta * Opt* >= (2 delta/(delta+1)) |C1| + |C2|`` with C1/C2 split at 2/(delta+1)."""
    params = RoundingParams.for_instance(h)
    part = make_partition(sol, params, tol)
    delta = params.delta
    rhs = Fraction(2 * delta, delta + 1) * len(part.c1) + len(part.c2)
    lhs = delta * sol.objective
    if _is_exact(sol.x):
        return lhs >= rhs
    return float(lhs) >= float(rhs) - 1e-9 * (1 + float(rhs))


def small_c1_opt_bound_holds(h: Hypergraph, sol: LpSolution | FractionalPoint, params: RoundingParams | None = None) -> bool | None:
    """When ``|C1| < alpha * Opt*``: ``(b-1) n / (alpha ell) < Opt*``. None when not applicable."""
    params = params or RoundingParams.for_instance(h)
    part = make_partition(sol, params)
    opt_star = float(sol.objective)
    if not len(part.c1) < params.alpha * opt_star:
        return None
    return (params.b_min - 1) * h.n / (params.alpha * params.ell) < opt_star


# --- Monte-Carlo study of the randomized branch -------------------------------


@dataclass(frozen=True)
class StatsReport:
    trials: int
    mean_x: float
    var_x: float
    mean_y: float
    var_y: float
    p_success: float
    flags: dict[str, bool]
    seed: int
    opt_star: float
    opt_star_is_proxy: bool
    min_identity_gap: int
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def _run_trials(h: Hypergraph, partition: Partition, params: RoundingParams, trials: range) -> np.ndarray:
    out = np.empty((len(trials), 3), dtype=np.int64)
    probs = _inclusion_probabilities(partition, params)
    for row, trial in enumerate(trials):
        mask = _round_mask(h, partition, params, trial, probs)
        x_count = int(mask.sum())
        y_count = _fully_covered(h, mask)
        final = x_count
        if y_count < h.n:
            chosen, _ = _repair(h, set(int(j) for j in np.flatnonzero(mask)), partition)
            final = len(chosen)
        out[row] = (x_count, y_count, final)
    return out


def _run_chunk(args) -> np.ndarray:
    h, partition, params, start, stop = args
    return _run_trials(h, partition, params, range(start, stop))


def monte_carlo_verify(
    h: Hypergraph,
    sol: LpSolution | FractionalPoint,
    params: RoundingParams | None = None,
    trials: int = 10_000,
    jobs: int = 1,
) -> StatsReport:
    """Empirical check of the randomized-branch statistics.

    Tolerances are three standard errors of the relevant estimator; the
    variance bound on Y gets a 5% allowance.
    """
    if trials <= 0:
        raise ValueError("no trials")
    require_valid(h)
    params = params or RoundingParams.for_instance(h)
    partition = make_partition(sol, params)
    opt_star = float(sol.objective)
    if not randomized_trigger(partition, sol.objective, params):
        raise BranchPreconditionError(
            f"randomized branch not triggered: |C1|={len(partition.c1)}, |C2|={len(partition.c2)}, "
            f"alpha*Opt*={params.alpha * opt_star:.6g}, t={params.t}"
        )
    if jobs > 1 and trials >= 2 * jobs:
        bounds = np.linspace(0, trials, jobs + 1).astype(int)
        chunks = [(h, partition, params, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = np.vstack(list(pool.map(_run_chunk, chunks)))
    else:
        results = _run_trials(h, partition, params, range(trials))

    xs, ys, finals = results[:, 0].astype(float), results[:, 1].astype(float), results[:, 2]
    ddof = 1 if trials > 1 else 0
    var_x, var_y = float(xs.var(ddof=ddof)), float(ys.var(ddof=ddof))
    se_x, se_y = math.sqrt(var_x / trials), math.sqrt(var_y / trials)
    lam = float(params.lam)
    n = h.n
    target = float(randomized_ratio(params.delta)) * opt_star
    success = float(np.mean(finals <= target + 1e-9))
    se_p = math.sqrt(success * (1 - success) / trials)
    y_floor = (1 - math.exp(-lam)) * n
    var_y_cap = n * n * (1 - (1 - math.exp(-lam)) ** 2)
    gaps = results[:, 0] + n - results[:, 1] - finals
    flags = {
        "mean_x_upper": float(xs.mean()) <= lam * opt_star + 3 * se_x,
        "mean_x_lower": float(xs.mean()) > 1 + params.t / 2 - 3 * se_x,
        "mean_y_lower": float(ys.mean()) >= y_floor - 3 * se_y,
        "var_y_upper": var_y <= var_y_cap * 1.05,
        "identity_final_le_x_plus_n_minus_y": bool(np.all(gaps >= 0)),
        "p_success": success >= 0.53 - 3 * se_p,
    }
    return StatsReport(
        trials=trials,
        mean_x=float(xs.mean()),
        var_x=var_x,
        mean_y=float(ys.mean()),
        var_y=var_y,
        p_success=success,
        flags=flags,
        seed=params.seed,
        opt_star=opt_star,
        opt_star_is_proxy=not getattr(sol, "lp_optimal", isinstance(sol, LpSolution)),
        min_identity_gap=int(gaps.min()),
        extra={
            "c1": len(partition.c1),
            "c2": len(partition.c2),
            "c3": len(partition.c3),
            "lambda": lam,
            "alpha": params.alpha,
            "t": params.t,
            "mean_x_upper_bound": lam * opt_star,
            "mean_x_lower_bound": 1 + params.t / 2,
            "mean_y_lower_bound": y_floor,
            "var_y_upper_bound": var_y_cap,
            "success_target": target,
        },
    )


# --- driving the randomized branch on purpose ---------------------------------


@dataclass(frozen=True)
class ForcedPoint:
    point: FractionalPoint | None
    reason: str
    proven_impossible: bool = False

    @property
    def found(self) -> bool:
        return self.point is not None


def min_c1_size(h: Hypergraph) -> int:
    """A lower bound on |C1| valid for every feasible point.

    Each vertex has at least ``b_v - 1`` incident values >= 2/(delta+1),
    so the C1 edges carry at least ``sum(b_v - 1)`` incidences.
    """
    ell = max(len(e) for e in h.edges)
    return max(1, math.ceil(sum(b - 1 for b in h.demands) / ell))


def _constructed_point(h: Hypergraph, params: RoundingParams) -> FractionalPoint | None:
    # C1: a greedy cover of the demands b_v - 1 (all edges of tight vertices),
    # set to 1. Every other edge gets one common value in [1/delta, 1/lam).
    need = [d if d == b else b - 1 for d, b in zip(h.degrees, h.demands)]
    c1 = set(greedy_multicover(h, need))
    inv_lam, inv_delta = 1 / params.lam, Fraction(1, params.delta)
    value = inv_delta
    for v in range(h.n):
        residual = h.demands[v] - sum(1 for j in h.incident[v] if j in c1)
        if residual <= 0:
            continue
        others = sum(1 for j in h.incident[v] if j not in c1)
        if others == 0:
            return None
        value = max(value, Fraction(residual, others))
    if value >= inv_lam:
        return None
    value += (inv_lam - value) / 4
    x = tuple(Fraction(1) if j in c1 else value for j in range(h.m))
    return FractionalPoint(x, sum(x, Fraction(0)), lp_optimal=False)


def force_randomized_branch(h: Hypergraph, params: RoundingParams | None = None) -> ForcedPoint:
    """Look for a feasible point on which the hybrid algorithm would randomize.

    Tries the exact LP optimum and a constructed point. Impossibility is
    *proven* only by counting certificates; otherwise the report says the
    search came up empty.
    """
    require_valid(h)
    params = params or RoundingParams.for_instance(h)
    if params.delta <= 1:
        return ForcedPoint(None, "delta = 1: lambda = 1 and C2 is empty, so t|C1| >= |C2| always", True)
    low = min_c1_size(h)
    if params.alpha * h.m <= low:
        return ForcedPoint(None, f"alpha*m = {params.alpha * h.m:.6g} <= {low} <= |C1| for every feasible point", True)
    if params.t * low >= h.m - low:
        return ForcedPoint(None, f"t*|C1| >= {params.t * low} >= m - |C1| >= |C2| for every feasible point", True)

    candidates = []
    constructed = _constructed_point(h, params)
    if constructed is not None:
        candidates.append(constructed)
    try:
        lp = solve_relaxation(h, "rational" if h.m <= 60 else "float")
        candidates.append(FractionalPoint(lp.x, lp.objective, lp_optimal=True))
    except LpError:
        pass
    for point in candidates:
        if not point_is_feasible(h, point.x):
            continue
        if randomized_trigger(make_partition(point, params), point.objective, params):
            return ForcedPoint(point, "trigger satisfied")
    return ForcedPoint(None, "no triggering point found (not proven impossible)")


def point_is_feasible(h: Hypergraph, x: Sequence, tol: float | None = None) -> bool:
    if tol is None:
        tol = 0 if _is_exact(x) else EPS_TOL
    if any(float(v) < -tol or float(v) > 1 + tol for v in x):
        return False
    for v in range(h.n):
        total = sum((x[j] for j in h.incident[v]), Fraction(0) if tol == 0 else 0.0)
        if total < h.demands[v] - tol:
            return False
    return True
