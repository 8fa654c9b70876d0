"""Property suites behind ``multicover verify``.

Each suite maps instances to named checks; a check result is ``True``,
``False`` or ``None`` (not applicable to that instance). Results are
aggregated per property in instance order, so the output does not depend on
how many worker processes ran the checks.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .generators import GenSpec, generate, generate_flat
from .hypergraph import Hypergraph, degree_profile, is_multicover
from .lp import build_relaxation, solve_lp, verify_lp_optimality
from .matching import (
    capacity_vector,
    five_sixths_applies,
    five_sixths_ratio,
    duality_cover,
    greedy_k_matching,
    is_maximal,
    lemma6_bound,
)
from .oracle import all_subsets, exact_max_k_matching, exact_min_multicover
from .rounding import (
    BRANCH_RANDOMIZED,
    FractionalPoint,
    RoundingParams,
    algorithm1_solve,
    check_threshold_structure,
    force_randomized_branch,
    partition_weight_bound_holds,
    small_c1_opt_bound_holds,
    monte_carlo_verify,
    randomized_round,
    make_partition,
    threshold_cover,
)

SUITES = ("duality", "lemmas", "rounding", "ratios")

Checks = list[tuple[str, "bool | None", str]]


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failed": self.failed,
            "failures": self.failures[:10],
        }


# --- corpora -------------------------------------------------------------------


def small_random_instances(count: int, seed: int, max_m: int = 12, duplicates: int = 0) -> list[tuple[str, Hypergraph]]:
    """Random feasible instances with at most ``max_m`` edges.

    The last ``duplicates`` of them get one existing edge appended again
    (demands unchanged), so they carry a repeated edge.
    """
    out: list[tuple[str, Hypergraph]] = []
    attempt = 0
    while len(out) < count:
        i = len(out)
        rng = np.random.default_rng([seed, i, attempt])
        dup = i >= count - duplicates
        n = int(rng.integers(2, 7))
        m = int(rng.integers(max(2, n - 1), max_m - (1 if dup else 0) + 1))
        spec = GenSpec("random", n=n, m=m, ell_range=(1, min(4, n)), b_range=(2, 3), seed=int(rng.integers(2**32)))
        h = generate(spec)
        attempt += 1
        if h.m > max_m - (1 if dup else 0):
            continue
        if dup:
            j = int(rng.integers(h.m))
            h = Hypergraph(h.n, h.edges + (h.edges[j],), h.demands)
        out.append((f"rand{i:04d}", h))
        attempt = 0
    return out


def lp_random_instances(count: int, seed: int) -> list[tuple[str, Hypergraph]]:
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        n = int(rng.integers(3, 9))
        m = int(rng.integers(n, 15))
        spec = GenSpec("random", n=n, m=m, ell_range=(1, min(4, n)), b_range=(2, 3), seed=int(rng.integers(2**32)))
        out.append((f"lp{i:04d}", generate(spec)))
    return out


def ratio_random_instances(count: int, seed: int) -> list[tuple[str, Hypergraph]]:
    """Larger random instances, mostly with delta >= 3."""
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        n = int(rng.integers(6, 16))
        m = int(rng.integers(2 * n, 4 * n))
        spec = GenSpec("random", n=n, m=m, ell_range=(2, min(5, n)), b_range=(2, 4), seed=int(rng.integers(2**32)))
        out.append((f"ratio{i:04d}", generate(spec)))
    return out


def near_uniform_instances(count: int, seed: int, gated: bool = True) -> list[tuple[str, Hypergraph]]:
    """Near-uniform instances (ell <= 3/2 ell_bar); ``gated`` adds the
    b >= 3, Delta >= b + 2, delta >= 3 hypotheses."""
    out = []
    constraints = frozenset({"b_ge_3", "Delta_ge_b_plus_2", "delta_ge_3"}) if gated else frozenset()
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        n = int(rng.integers(5, 9))
        lo = int(rng.integers(2, 4))
        m = int(rng.integers(2 * n, 3 * n))
        spec = GenSpec(
            "near-uniform",
            n=n,
            m=m,
            ell_range=(lo, lo + 1),
            b_range=(3, 4) if gated else (2, 3),
            epsilon=Fraction(1, 2),
            constraints=constraints,
            seed=int(rng.integers(2**32)),
        )
        out.append((f"nu{i:04d}", generate(spec)))
    return out


FLAT_CONFIGS = (
    dict(n=40, m=1561, ell_range=(1, 40), b_range=(2, 2)),
    dict(n=60, m=605, ell_range=(2, 12), b_range=(2, 2)),
    dict(n=48, m=324, ell_range=(3, 24), b_range=(3, 3)),
    dict(n=30, m=903, ell_range=(1, 30), b_range=(4, 4)),
    dict(n=100, m=1002, ell_range=(4, 50), b_range=(2, 2)),
    dict(n=24, m=2000, ell_range=(2, 24), b_range=(2, 2)),
)


def flat_pairs(count: int, seed: int) -> list[tuple[str, Hypergraph, FractionalPoint]]:
    out = []
    for i in range(count):
        cfg = FLAT_CONFIGS[i % len(FLAT_CONFIGS)]
        h, point = generate_flat(GenSpec("flat", seed=seed + i, **cfg))
        out.append((f"flat{i:04d}", h, point))
    return out


# --- per-instance checks ------------------------------------------------------------


def duality_checks(h: Hypergraph, seed: int = 0) -> Checks:
    p = degree_profile(h)
    a = h.incidence_matrix.T.astype(np.int32)
    k = np.asarray(capacity_vector(h))
    subsets = all_subsets(h.m).astype(np.int32)
    is_matching = np.all(subsets @ a <= k, axis=1)
    is_cover = np.all((1 - subsets) @ a >= np.asarray(h.demands), axis=1)
    out: Checks = [("matching_iff_complement_cover", bool(np.array_equal(is_matching, is_cover)), "")]

    opt = exact_min_multicover(h).value
    nu = exact_max_k_matching(h, tuple(k)).value
    out.append(("cardinality_m_minus_nu_eq_opt", h.m - nu == opt, f"m={h.m} nu={nu} opt={opt}"))
    opt_ex = exact_min_multicover(h, method="exhaustive").value
    nu_ex = exact_max_k_matching(h, tuple(k), method="exhaustive").value
    out.append(("oracle_bnb_eq_exhaustive", opt == opt_ex and nu == nu_ex, f"{opt}/{opt_ex} {nu}/{nu_ex}"))

    rng = np.random.default_rng(seed)
    for label, caps in (("dual", tuple(int(c) for c in k)), ("random", tuple(int(c) for c in rng.integers(0, 3, size=h.n)))):
        nu_c = nu if label == "dual" else exact_max_k_matching(h, caps).value
        for order in ("input", "size", "random"):
            m = greedy_k_matching(h, caps, order, seed)
            out.append(("greedy_ge_nu_over_ell", p.ell_max * len(m) >= nu_c, f"{label}/{order}: |M|={len(m)} nu={nu_c}"))
            out.append(("greedy_gt_nu_over_ell_plus_1_minus_1", (p.ell_max + 1) * (len(m) + 1) > nu_c, ""))
            out.append(("greedy_maximal", is_maximal(h, m), f"{label}/{order}"))

    bound = lemma6_bound(h)
    out.append(("nu_le_matching_bound_opt", nu <= bound.value * opt, f"nu={nu} bound={bound.value}*{opt}"))
    cover, _ = duality_cover(h)
    out.append(("duality_cover_feasible", is_multicover(h, cover).ok, ""))
    out.append(("duality_cover_ratio", len(cover) <= bound.ratio_bound * opt, f"|S|={len(cover)} bound={bound.ratio_bound}*{opt}"))
    return out


def structure_checks(h: Hypergraph, seed: int = 0) -> Checks:
    model = build_relaxation(h)
    exact = solve_lp(model, "rational")
    approx = solve_lp(model, "float")
    p = degree_profile(h)
    opt = exact_min_multicover(h).value
    gap = abs(float(exact.objective) - approx.objective) / max(1.0, abs(float(exact.objective)))
    out: Checks = [
        ("rational_certificate", verify_lp_optimality(model, exact), ""),
        ("float_certificate", verify_lp_optimality(model, approx), ""),
        ("float_rational_gap_le_1e-6", gap <= 1e-6, f"gap={gap:.3g}"),
        ("opt_star_le_opt", exact.objective <= opt, f"{exact.objective} vs {opt}"),
    ]
    structure = check_threshold_structure(h, exact.x)
    out.append(("count_above_inv_delta", not structure.count_violations, f"vertices {structure.count_violations}"))
    out.append(("top_values_structure", not structure.top_violations, f"vertices {structure.top_violations}"))
    # Both lemmas hold for every feasible point, not only for optima.
    rng = np.random.default_rng(seed)
    z = [Fraction(int(v), 8) for v in rng.integers(0, 9, size=h.m)]
    for v in range(h.n):
        while sum(z[j] for j in h.incident[v]) < h.demands[v]:
            j = min(h.incident[v], key=lambda j: (z[j], j))
            z[j] = min(Fraction(1), z[j] + Fraction(1, 8))
    random_structure = check_threshold_structure(h, z)
    out.append(("threshold_structure_random_point", random_structure.ok, ""))
    out.append(("partition_weight_bound", partition_weight_bound_holds(h, exact), ""))
    cover = threshold_cover(h, exact)
    out.append(("threshold_cover_feasible", is_multicover(h, cover).ok, ""))
    if p.delta > 1:
        out.append(("threshold_cover_below_delta_opt", len(cover) < p.delta * opt, f"|C|={len(cover)} delta*Opt={p.delta * opt}"))
    else:
        out.append(("threshold_cover_below_delta_opt", None, "delta = 1"))
    out.append(("small_c1_opt_bound", small_c1_opt_bound_holds(h, exact), ""))
    return out


def ratio_checks(h: Hypergraph, seed: int = 0) -> Checks:
    p = degree_profile(h)
    params = RoundingParams.for_instance(h, seed=seed)
    cover, trace = algorithm1_solve(h, params)
    out: Checks = [("alg1_feasible", is_multicover(h, cover).ok, "")]
    deterministic = trace.branch != BRANCH_RANDOMIZED
    if deterministic and p.delta >= 3:
        out.append(("ratio_" + trace.branch, trace.bound_satisfied, f"|C|={trace.final_size} ratio={trace.bound_ratio}"))
    else:
        out.append(("ratio_deterministic", None, trace.branch))
    out.append(("identity2", trace.final_size <= trace.x_count + h.n - trace.y_count, ""))

    oracle = exact_min_multicover(h, budget=2_000_000)
    s, _ = duality_cover(h)
    if oracle.timed_out:
        out.append(("duality_cover_ratio", None, "oracle timeout"))
        base = oracle.lower_bound
    else:
        out.append(("duality_cover_ratio", len(s) <= lemma6_bound(h).ratio_bound * oracle.value, ""))
        base = oracle.value
        out.append(("sizes_ge_opt", min(len(s), len(cover)) >= oracle.value, ""))
    if five_sixths_applies(p):
        out.append(("five_sixths_delta", len(s) <= five_sixths_ratio(p) * base, f"basis={'bound-vs-LP' if oracle.timed_out else 'opt'}"))
    else:
        out.append(("five_sixths_delta", None, "hypotheses not met"))
    return out


def rounding_checks(h: Hypergraph, point: FractionalPoint, seed: int, trials: int) -> Checks:
    params = RoundingParams.for_instance(h, seed=seed)
    report = monte_carlo_verify(h, point, params, trials)
    out: Checks = [(f"randomized_{name}", ok, f"opt*_proxy={report.opt_star_is_proxy}") for name, ok in report.flags.items()]
    part = make_partition(point, params)
    first = randomized_round(h, point, part, params, trial=5)
    second = randomized_round(h, point, part, params, trial=5)
    out.append(("reproducible_rounding", first == second, ""))
    return out


# --- suite runner -----------------------------------------------------------------


def _task(args) -> Checks:
    suite, h, extra, seed, trials = args
    if suite == "duality":
        return duality_checks(h, seed)
    if suite == "lemmas":
        return structure_checks(h, seed)
    if suite == "ratios":
        return ratio_checks(h, seed)
    return rounding_checks(h, extra, seed, trials)


def aggregate(instance_ids: Sequence[str], per_instance: Sequence[Checks]) -> list[PropertyResult]:
    results: dict[str, PropertyResult] = {}
    for iid, checks in zip(instance_ids, per_instance):
        for name, ok, detail in checks:
            res = results.setdefault(name, PropertyResult(name))
            if ok is None:
                continue
            res.checked += 1
            if not ok:
                res.failed += 1
                res.failures.append(f"{iid}: {detail}".rstrip(": "))
    return list(results.values())


def run_suite(
    suite: str,
    instances: Sequence[tuple[str, Hypergraph]] | None = None,
    seed: int = 0,
    trials: int = 10_000,
    jobs: int = 1,
    count: int = 50,
    max_m: int = 12,
    family: str | None = None,
) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    pairs: list[tuple[str, Hypergraph, object]] = []
    if instances is not None:
        for iid, h in instances:
            if suite == "duality" and h.m > max_m:
                continue
            if suite == "rounding":
                forced = force_randomized_branch(h)
                if not forced.found:
                    continue
                pairs.append((iid, h, forced.point))
            else:
                pairs.append((iid, h, None))
    elif suite == "duality":
        pairs = [(i, h, None) for i, h in small_random_instances(count, seed, max_m, duplicates=count // 10)]
    elif suite == "lemmas":
        source = near_uniform_instances(count, seed, gated=False) if family == "near-uniform" else lp_random_instances(count, seed)
        pairs = [(i, h, None) for i, h in source]
    elif suite == "ratios":
        source = near_uniform_instances(count, seed) if family == "near-uniform" else ratio_random_instances(count, seed)
        pairs = [(i, h, None) for i, h in source]
    else:
        pairs = list(flat_pairs(count, seed))

    tasks = [(suite, h, extra, seed, trials) for _, h, extra in pairs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_instance = list(pool.map(_task, tasks))
    else:
        per_instance = [_task(t) for t in tasks]
    props = aggregate([p[0] for p in pairs], per_instance)
    return {
        "suite": suite,
        "seed": seed,
        "instances": len(pairs),
        "passed": all(p.passed for p in props),
        "properties": [p.to_json() for p in props],
        # An empty run passes vacuously; the warning keeps that visible.
        "warning": None if pairs else "no instances to check",
    }
