"""LP relaxation of the set multicover ILP and a small simplex to solve it.

The relaxation is ``min 1.x  s.t.  A x >= b,  0 <= x <= 1`` with ``A`` the
vertex-edge incidence matrix. It is solved by a bounded-variable primal
simplex on a dense tableau with Bland's rule. The same code runs on float64
arrays or on object arrays of ``Fraction`` (``mode="rational"``); the latter
gives exact optima and exact dual certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .hypergraph import Hypergraph, require_valid

Mode = Literal["float", "rational"]

# Pivot / reduced-cost tolerance for float tableaux.
FLOAT_PIVOT_TOL = 1e-11
# Threshold comparisons against 1/delta and 2/(delta+1) on float solutions.
EPS_TOL = 1e-7


class LpError(RuntimeError):
    pass


class IterationLimitError(LpError):
    pass


class MissingCertificateError(LpError):
    pass


@dataclass(frozen=True)
class LpModel:
    a: np.ndarray
    rhs: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class LpSolution:
    x: tuple
    objective: float | Fraction
    status: Literal["optimal", "infeasible"]
    mode: Mode
    duals: tuple | None = None
    bound_duals: tuple | None = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def build_relaxation(h: Hypergraph) -> LpModel:
    require_valid(h)
    return LpModel(h.incidence_matrix, h.demands)


def _tableau(model: LpModel, exact: bool):
    n, m = model.a.shape
    if exact:
        t = np.empty((n, m + n), dtype=object)
        for i in range(n):
            for j in range(m):
                t[i, j] = Fraction(-int(model.a[i, j]))
            for k in range(n):
                t[i, m + k] = Fraction(int(i == k))
        beta = np.array([Fraction(int(s) - b) for s, b in zip(model.a.sum(axis=1), model.rhs)], dtype=object)
        d = np.array([Fraction(1)] * m + [Fraction(0)] * n, dtype=object)
    else:
        t = np.hstack([-model.a.astype(float), np.eye(n)])
        beta = model.a.sum(axis=1).astype(float) - np.asarray(model.rhs, dtype=float)
        d = np.concatenate([np.ones(m), np.zeros(n)])
    return t, beta, d


def solve_lp(model: LpModel, mode: Mode = "float", max_iter: int | None = None) -> LpSolution:
    """Solve the relaxation starting from the all-ones vertex.

    Setting every ``x_j`` to its upper bound with the surplus variables basic
    is primal feasible whenever the instance is, so no phase one is needed.
    """
    exact = mode == "rational"
    if mode not in ("float", "rational"):
        raise ValueError(f"unknown mode {mode!r}")
    n, m = model.a.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    if np.any(model.a.sum(axis=1) < np.asarray(model.rhs)):
        return LpSolution(tuple([zero] * m), zero, "infeasible", mode)

    tol = 0 if exact else FLOAT_PIVOT_TOL
    t, beta, d = _tableau(model, exact)
    total = m + n
    has_upper = np.zeros(total, dtype=bool)
    has_upper[:m] = True
    at_upper = has_upper.copy()
    basis = list(range(m, total))
    is_basic = np.zeros(total, dtype=bool)
    is_basic[m:] = True
    if max_iter is None:
        max_iter = 50 * total + 1000

    for it in range(max_iter):
        improving = (at_upper & (d > tol).astype(bool)) | (~at_upper & (d < -tol).astype(bool))
        candidates = np.flatnonzero(improving & ~is_basic)
        if candidates.size == 0:
            break
        q = int(candidates[0])
        sigma = -1 if at_upper[q] else 1
        col = t[:, q]
        best = one if has_upper[q] else None
        leave = None
        for i in range(n):
            g = sigma * col[i]
            if g > tol:
                ratio = beta[i] / g
            elif g < -tol and has_upper[basis[i]]:
                ratio = (one - beta[i]) / (-g)
            else:
                continue
            if not exact and ratio < 0:
                ratio = 0.0
            if best is None or ratio < best - tol:
                best, leave = ratio, i
            elif ratio <= best + tol and leave is not None and basis[i] < basis[leave]:
                leave = i
        if best is None:
            raise LpError("unbounded direction in a bounded covering LP")
        beta = beta - (sigma * best) * col
        if leave is None:
            at_upper[q] = not at_upper[q]
            continue
        start = one if at_upper[q] else zero
        leaving = basis[leave]
        hits_upper = sigma * col[leave] < 0
        piv = t[leave, q]
        t[leave] = t[leave] / piv
        factor = t[:, q].copy()
        factor[leave] = zero
        t = t - np.outer(factor, t[leave])
        d = d - d[q] * t[leave]
        beta[leave] = start + sigma * best
        basis[leave] = q
        is_basic[q], is_basic[leaving] = True, False
        at_upper[leaving] = bool(hits_upper)
        at_upper[q] = False
    else:
        raise IterationLimitError(f"simplex did not converge in {max_iter} iterations")

    values = [one if at_upper[j] else zero for j in range(m)]
    for i, var in enumerate(basis):
        if var < m:
            values[var] = beta[i]
    if exact:
        duals = tuple(d[m:])
        bound_duals = tuple(max(zero, -d[j]) for j in range(m))
    else:
        values = [min(1.0, max(0.0, float(v))) for v in values]
        duals = tuple(max(0.0, float(v)) for v in d[m:])
        bound_duals = tuple(max(0.0, -float(d[j])) for j in range(m))
    objective = sum(values, zero)
    return LpSolution(tuple(values), objective, "optimal", mode, duals, bound_duals, it)


def solve_relaxation(h: Hypergraph, mode: Mode = "float") -> LpSolution:
    return solve_lp(build_relaxation(h), mode)


def verify_lp_optimality(model: LpModel, sol: LpSolution) -> bool:
    """Check primal feasibility, dual feasibility and a zero duality gap."""
    if sol.status != "optimal":
        return False
    exact = sol.mode == "rational"
    if sol.duals is None or sol.bound_duals is None:
        if exact:
            raise MissingCertificateError("rational-mode solution carries no dual certificate")
        return False
    a = model.a
    x, y, w = list(sol.x), list(sol.duals), list(sol.bound_duals)
    if len(x) != model.m or len(y) != model.n or len(w) != model.m:
        return False
    primal = sum(x, Fraction(0) if exact else 0.0)
    tol = 0 if exact else 1e-9 * (1 + abs(float(primal)))
    if any(v < -tol or v > 1 + tol for v in x):
        return False
    for i in range(model.n):
        if sum(x[j] for j in np.flatnonzero(a[i])) < model.rhs[i] - tol:
            return False
    if abs(sol.objective - primal) > tol:
        return False
    if any(v < -tol for v in y) or any(v < -tol for v in w):
        return False
    for j in range(model.m):
        if sum(y[i] for i in np.flatnonzero(a[:, j])) - w[j] > 1 + tol:
            return False
    dual = sum((b * yi for b, yi in zip(model.rhs, y)), Fraction(0) if exact else 0.0) - sum(w)
    return abs(dual - primal) <= tol


def lp_lower_bound(objective: float | Fraction) -> int:
    """Smallest integer that is at least the LP optimum (float-safe)."""
    if isinstance(objective, Fraction):
        return math.ceil(objective)
    return math.ceil(objective - 1e-7)


def to_lp_format(model: LpModel, names: Sequence[str] | None = None) -> str:
    """The model in CPLEX LP text format, for cross-checking with other solvers."""
    names = list(names) if names else [f"x{j + 1}" for j in range(model.m)]

    def wrap(prefix: str, terms: list[str], suffix: str = "") -> list[str]:
        lines, cur = [], prefix
        for k, term in enumerate(terms):
            piece = term if k == 0 else f" + {term}"
            if len(cur) + len(piece) > 240:
                lines.append(cur)
                cur = "   "
            cur += piece
        lines.append(cur + suffix)
        return lines

    out = ["\\ set multicover LP relaxation", "Minimize"]
    out += wrap(" obj: ", names)
    out.append("Subject To")
    for i in range(model.n):
        terms = [names[j] for j in np.flatnonzero(model.a[i])]
        out += wrap(f" v{i + 1}: ", terms, f" >= {model.rhs[i]}")
    out.append("Bounds")
    out += [f" 0 <= {nm} <= 1" for nm in names]
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(model: LpModel, path: str | Path) -> None:
    Path(path).write_text(to_lp_format(model))
