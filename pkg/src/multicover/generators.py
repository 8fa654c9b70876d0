"""Seeded instance generators.

Families
--------
random
    Edge sizes uniform in ``ell_range``, members sampled without replacement,
    demands uniform in ``b_range``.
uniform
    As ``random`` with every edge of size ``ell_range[1]``.
near-uniform
    As ``random``, accepted only if ``ell <= (1 + epsilon) * ell_bar``.
flat
    A layered construction together with a feasible fractional point on
    which the hybrid algorithm takes its randomized branch (see
    :func:`generate_flat`).

Vertices whose degree falls short of their demand get targeted extra edges
appended, so ``m`` can exceed the requested count. Structural constraints are
met by retrying with derived seeds; failure is reported, never relaxed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .hypergraph import Hypergraph, degree_profile, validate
from .instance_io import write_instance
from .rounding import FractionalPoint, RoundingParams, make_partition, point_is_feasible, randomized_trigger

FAMILIES = ("random", "uniform", "near-uniform", "flat")
CONSTRAINTS = ("b_ge_3", "Delta_ge_b_plus_2", "delta_ge_3")
DEFAULT_RETRIES = 100


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    family: str = "random"
    n: int = 8
    m: int = 12
    ell_range: tuple[int, int] = (2, 4)
    b_range: tuple[int, int] = (2, 3)
    epsilon: Fraction = Fraction(1, 2)
    constraints: frozenset[str] = field(default_factory=frozenset)
    seed: int = 0
    retries: int = DEFAULT_RETRIES

    def __post_init__(self):
        object.__setattr__(self, "ell_range", tuple(int(v) for v in self.ell_range))
        object.__setattr__(self, "b_range", tuple(int(v) for v in self.b_range))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "constraints", frozenset(self.constraints))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        lo, hi = self.ell_range
        if not 1 <= lo <= hi:
            raise ValueError("ell_range must satisfy 1 <= min <= max")
        if self.family != "flat" and hi > self.n:
            raise ValueError("edges cannot be larger than n")
        blo, bhi = self.b_range
        if not 2 <= blo <= bhi:
            raise ValueError("b_range must satisfy 2 <= min <= max")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        unknown = self.constraints - set(CONSTRAINTS)
        if unknown:
            raise ValueError(f"unknown constraints {sorted(unknown)}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["epsilon"] = str(self.epsilon)
        d["constraints"] = sorted(self.constraints)
        d["ell_range"] = list(self.ell_range)
        d["b_range"] = list(self.b_range)
        return d


def _rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(attempt,))))


def _sample_edge(rng: np.random.Generator, n: int, size: int, must: int | None = None, prefer: Iterable[int] = ()) -> list[int]:
    if must is None:
        return sorted(int(v) for v in rng.choice(n, size=size, replace=False))
    members = [must]
    prefer = [v for v in prefer if v != must]
    rng.shuffle(prefer)
    members += prefer[: size - 1]
    rest = [v for v in range(n) if v not in members]
    if len(members) < size:
        members += [int(v) for v in rng.choice(rest, size=size - len(members), replace=False)]
    return sorted(members)


def _one_attempt(spec: GenSpec, rng: np.random.Generator) -> Hypergraph:
    lo, hi = spec.ell_range
    if spec.family == "uniform":
        lo = hi

    def size() -> int:
        return int(rng.integers(lo, hi + 1))

    edges = [_sample_edge(rng, spec.n, size()) for _ in range(spec.m)]
    demands = [int(b) for b in rng.integers(spec.b_range[0], spec.b_range[1] + 1, size=spec.n)]
    degree = [0] * spec.n
    for e in edges:
        for v in e:
            degree[v] += 1
    for v in range(spec.n):
        while degree[v] < demands[v]:
            short = [u for u in range(spec.n) if degree[u] < demands[u]]
            e = _sample_edge(rng, spec.n, size(), must=v, prefer=short)
            edges.append(e)
            for u in e:
                degree[u] += 1
    return Hypergraph(spec.n, edges, demands)


def _failed_checks(h: Hypergraph, spec: GenSpec) -> list[str]:
    p = degree_profile(h)
    failed = []
    if spec.family == "near-uniform" and not Fraction(p.ell_max) <= (1 + spec.epsilon) * p.ell_bar:
        failed.append(f"ell={p.ell_max} > (1+eps)*ell_bar={(1 + spec.epsilon) * p.ell_bar}")
    if "b_ge_3" in spec.constraints and p.b_min < 3:
        failed.append("b < 3")
    if "Delta_ge_b_plus_2" in spec.constraints and p.delta_max < p.b_min + 2:
        failed.append("Delta < b + 2")
    if "delta_ge_3" in spec.constraints and p.delta < 3:
        failed.append("delta < 3")
    return failed


def generate(spec: GenSpec) -> Hypergraph:
    if spec.family == "flat":
        return generate_flat(spec)[0]
    reasons: list[str] = []
    for attempt in range(spec.retries):
        h = _one_attempt(spec, _rng(spec.seed, attempt))
        report = validate(h)
        if not report.ok:
            raise GenerationError(f"generator produced an invalid instance: {report.violations}")
        reasons = _failed_checks(h, spec)
        if not reasons:
            return h
    raise GenerationError(f"no instance met the constraints after {spec.retries} attempts; last: {', '.join(reasons)}")


def generate_flat(spec: GenSpec) -> tuple[Hypergraph, FractionalPoint]:
    """Layered instance whose natural fractional point randomizes.

    With ``b = b_range[0]``, ``ell_range = (s, L)``: the vertex set is split
    into blocks of size L, repeated ``b - 1`` times (value 1: these are C1),
    and into blocks of size s, repeated ``c`` times with fresh random
    permutations (value just above 1/delta: these are C2). Each vertex then
    has degree ``b - 1 + c`` and ``delta = c``. ``c`` is chosen so that ``m``
    is close to ``spec.m``.
    """
    if spec.family != "flat":
        raise ValueError("generate_flat needs family='flat'")
    small, large = spec.ell_range
    b = spec.b_range[0]
    n = spec.n
    if large > n:
        raise GenerationError(f"C1 block size {large} exceeds n={n}")
    c1_blocks = math.ceil(n / large)
    c2_blocks = math.ceil(n / small)
    layers = (spec.m - (b - 1) * c1_blocks) // c2_blocks
    if layers <= 1:
        raise GenerationError(f"delta = {max(layers, 1)}: lambda = 1, C3 empty by definition (m too small)")

    rng = _rng(spec.seed, 0)
    edges: list[list[int]] = []
    for _ in range(b - 1):
        order = list(range(n))
        edges += [order[i : i + large] for i in range(0, n, large)]
    c1_count = len(edges)
    for _ in range(layers):
        order = [int(v) for v in rng.permutation(n)]
        edges += [sorted(order[i : i + small]) for i in range(0, n, small)]
    h = Hypergraph(n, edges, [b] * n)

    params = RoundingParams.for_instance(h)
    # The smallest C2 sum a vertex sees is layers * value >= 1 at value = 1/delta.
    inv_delta, inv_lam = Fraction(1, params.delta), 1 / params.lam
    value = inv_delta + (inv_lam - inv_delta) / 4
    x = tuple(Fraction(1) if j < c1_count else value for j in range(h.m))
    point = FractionalPoint(x, sum(x, Fraction(0)), lp_optimal=False)
    if not point_is_feasible(h, x):
        raise GenerationError("constructed point violates a covering constraint")
    part = make_partition(point, params)
    if not randomized_trigger(part, point.objective, params):
        raise GenerationError(
            f"parameters cannot trigger the randomized branch: |C1|={len(part.c1)}, |C2|={len(part.c2)}, "
            f"t*|C1|={params.t * len(part.c1)}, alpha*sum(x)={params.alpha * float(point.objective):.6g}"
        )
    return h, point


def generate_corpus(spec: GenSpec, count: int) -> list[Hypergraph]:
    """``count`` instances from seeds ``spec.seed, spec.seed + 1, ...``."""
    return [generate(replace(spec, seed=spec.seed + i)) for i in range(count)]


def write_corpus(spec: GenSpec, count: int, directory: str | Path) -> Path:
    """Write ``count`` instances (text and JSON) plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    width = max(3, len(str(count - 1)))
    for i in range(count):
        s = replace(spec, seed=spec.seed + i)
        h = generate(s)
        stem = f"{spec.family}_{i:0{width}d}"
        write_instance(h, directory / stem)
        entries.append({"file": f"{stem}.txt", "json": f"{stem}.json", "spec": s.to_json()})
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"count": count, "instances": entries}, indent=2, sort_keys=True) + "\n")
    return manifest
