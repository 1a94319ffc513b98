"""MILP solving: reference branch-and-bound, enumeration oracle, external adapter.

Three interchangeable backends sit behind :func:`solve_milp`:

``reference``
    In-repo branch and bound over the in-repo simplex core. Best-bound
    node selection with a depth-first dive on ties, most-fractional
    branching, and a root rounding heuristic that usually closes the gap
    immediately on near-integral relaxations. Deterministic.
``external``
    scipy's HiGHS-backed ``milp``. Much faster on full-size instances;
    same instance, same contract.
``oracle``
    Brute-force enumeration of every binary assignment (hard-capped at 16
    binaries), each evaluated with an independently implemented LP solver
    (scipy ``linprog``). Exact up to LP tolerance and deliberately free of
    any code shared with the reference path, so the two can certify each
    other.

Each solve is single-threaded and deterministic; distinct instances may
be solved concurrently. The reference backend streams one log line per
processed node (id, bound, incumbent, gap) into ``SolveResult.node_log``.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleGuardError, SolverError
from .milp_instance import EQ, GE, LE, MilpInstance
from .simplex import StandardForm, simplex_solve, standardize

INT_TOL = 1e-6

BACKENDS = ("reference", "external", "oracle")


@dataclass(frozen=True)
class SolveOptions:
    """Solver controls shared by every backend."""

    relative_gap: float = 1e-4
    time_limit: float | None = None
    backend: str = "reference"

    def __post_init__(self):
        if self.relative_gap < 0:
            raise SolverError("relative_gap must be nonnegative")
        if self.backend not in BACKENDS:
            raise SolverError(f"backend must be one of {BACKENDS}")


@dataclass
class SolveResult:
    """Outcome of a MILP or LP solve over a MilpInstance."""

    status: str                       # optimal|gap_optimal|infeasible|time_limit|unbounded
    objective: float | None
    x: np.ndarray | None              # structural column values
    achieved_gap: float = 0.0
    best_bound: float | None = None
    nodes: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    node_log: list[str] = field(default_factory=list)
    ray: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "gap_optimal")


def _gap(incumbent: float, bound: float) -> float:
    return max(0.0, (incumbent - bound) / max(1.0, abs(incumbent)))


def solve_lp(instance: MilpInstance, *, form: StandardForm | None = None,
             lower: np.ndarray | None = None, upper: np.ndarray | None = None,
             basis=None, col_status=None) -> SolveResult:
    """Solve the LP relaxation (integrality dropped) with the simplex core."""
    started = time.perf_counter()
    form = form if form is not None else standardize(instance)
    lower = instance.col_lower if lower is None else lower
    upper = instance.col_upper if upper is None else upper
    res = simplex_solve(form, instance.objective, lower, upper,
                        basis=basis, col_status=col_status)
    return SolveResult(
        status=res.status,
        objective=res.objective,
        x=None if res.x is None else res.x[:instance.n_cols].copy(),
        best_bound=res.objective,
        iterations=res.iterations,
        wall_time=time.perf_counter() - started,
        ray=None if res.ray is None else res.ray[:instance.n_cols].copy(),
    )


def solve_milp(instance: MilpInstance, options: SolveOptions | None = None) -> SolveResult:
    """Solve the instance with the backend named in the options."""
    options = options or SolveOptions()
    instance.validate()
    if options.backend == "external":
        return solve_external(instance, options)
    if options.backend == "oracle":
        return oracle_enumerate(instance)
    return solve_reference(instance, options)


# ---------------------------------------------------------------------------
# Reference branch and bound


class _Node:
    __slots__ = ("bound", "depth", "fixes", "basis", "col_status")

    def __init__(self, bound, depth, fixes, basis=None, col_status=None):
        self.bound = bound
        self.depth = depth
        self.fixes = fixes          # {col: fixed binary value}
        self.basis = basis
        self.col_status = col_status


def _apply_fixes(instance, fixes):
    lower = instance.col_lower.copy()
    upper = instance.col_upper.copy()
    for col, value in fixes.items():
        lower[col] = max(lower[col], value)
        upper[col] = min(upper[col], value)
    return lower, upper


def solve_reference(instance: MilpInstance, options: SolveOptions) -> SolveResult:
    """Best-bound branch and bound over the bounded-simplex LP core."""
    started = time.perf_counter()
    form = standardize(instance)
    binaries = instance.binary_indices
    log: list[str] = []
    deadline = None if options.time_limit is None else started + options.time_limit

    def lp(fixes, warm=None):
        lower, upper = _apply_fixes(instance, fixes)
        basis = warm.basis if warm is not None else None
        col_status = warm.col_status if warm is not None else None
        try:
            return simplex_solve(form, instance.objective, lower, upper,
                                 basis=basis, col_status=col_status)
        except Exception:
            if warm is None:
                raise
            return simplex_solve(form, instance.objective, lower, upper)

    root = lp({})
    iterations = root.iterations
    if root.status == "infeasible":
        return SolveResult("infeasible", None, None, achieved_gap=np.inf,
                           iterations=iterations,
                           wall_time=time.perf_counter() - started, node_log=log)
    if root.status == "unbounded":
        raise SolverError("LP relaxation is unbounded; the sizing model is "
                          "bounded below by construction, so the instance is "
                          "outside the solver contract")

    incumbent_obj: float | None = None
    incumbent_x: np.ndarray | None = None

    def frac_cols(x):
        if len(binaries) == 0:
            return np.array([], dtype=int)
        values = x[binaries]
        away = np.abs(values - np.round(values))
        return binaries[away > INT_TOL]

    def try_incumbent(obj, x):
        nonlocal incumbent_obj, incumbent_x
        if incumbent_obj is None or obj < incumbent_obj - 1e-12 * max(1.0, abs(obj)):
            incumbent_obj, incumbent_x = obj, x.copy()

    # Root dive for an incumbent: plain rounding first, then rounding with
    # ambiguous binaries snapped to the model's safe assignment (an optional
    # meta hint naming a direction that cannot cut off grid-served dispatch),
    # then the fully safe assignment. First feasible attempt wins.
    if len(frac_cols(root.x)):
        hints = {int(k): float(v) for k, v in
                 instance.meta.get("binary_safe_value", {}).items()}
        values = root.x[binaries]
        rounded = np.round(values)
        away = np.abs(values - rounded)
        attempts = [{int(j): float(rounded[i]) for i, j in enumerate(binaries)}]
        if hints:
            attempts.append({int(j): (hints.get(int(j), float(rounded[i]))
                                      if away[i] > 0.25 else float(rounded[i]))
                             for i, j in enumerate(binaries)})
            attempts.append({int(j): hints.get(int(j), float(rounded[i]))
                             for i, j in enumerate(binaries)})
        seen: list[dict] = []
        for fixes in attempts:
            if fixes in seen:
                continue
            seen.append(fixes)
            dive = lp(fixes, warm=root)
            iterations += dive.iterations
            if dive.status == "optimal":
                try_incumbent(dive.objective, dive.x)
                break
    else:
        try_incumbent(root.objective, root.x)

    counter = 0
    heap: list[tuple[float, int, int, _Node]] = []
    if len(frac_cols(root.x)):
        heapq.heappush(heap, (root.objective, 0, counter,
                              _Node(root.objective, 0, {}, root.basis,
                                    root.col_status)))
    best_bound = root.objective
    nodes = 0
    status = "optimal"
    explored = False

    while True:
        if not heap:
            explored = True
            break
        bound, _, _, node = heapq.heappop(heap)
        best_bound = bound
        if incumbent_obj is not None and _gap(incumbent_obj, bound) <= options.relative_gap:
            break
        if deadline is not None and time.perf_counter() > deadline:
            status = "time_limit"
            break
        nodes += 1
        res = lp(node.fixes, warm=node)
        iterations += res.iterations
        inc_str = "none" if incumbent_obj is None else f"{incumbent_obj:.8g}"
        gap_str = ("inf" if incumbent_obj is None
                   else f"{_gap(incumbent_obj, bound):.3e}")
        log.append(f"node={nodes} depth={node.depth} bound={bound:.8g} "
                   f"incumbent={inc_str} gap={gap_str}")
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            raise SolverError(f"node LP ended {res.status}")
        if incumbent_obj is not None and res.objective >= incumbent_obj - 1e-12 * max(
                1.0, abs(incumbent_obj)):
            continue
        fractional = frac_cols(res.x)
        if len(fractional) == 0:
            try_incumbent(res.objective, res.x)
            continue
        values = res.x[fractional]
        away = np.abs(values - np.round(values))
        pick = int(fractional[np.argmax(away)])
        for value in (0.0, 1.0):
            counter += 1
            child = dict(node.fixes)
            child[pick] = value
            heapq.heappush(heap, (res.objective, -(node.depth + 1), counter,
                                  _Node(res.objective, node.depth + 1, child,
                                        res.basis, res.col_status)))

    if explored and incumbent_obj is not None:
        best_bound = incumbent_obj  # every node processed or pruned: bound closed

    wall = time.perf_counter() - started
    if incumbent_obj is None:
        if status == "time_limit":
            return SolveResult("time_limit", None, None, achieved_gap=np.inf,
                               best_bound=best_bound, nodes=nodes,
                               iterations=iterations, wall_time=wall, node_log=log)
        return SolveResult("infeasible", None, None, achieved_gap=np.inf,
                           best_bound=best_bound, nodes=nodes,
                           iterations=iterations, wall_time=wall, node_log=log)
    achieved = _gap(incumbent_obj, best_bound)
    if status != "time_limit":
        status = "optimal" if achieved <= 1e-12 else "gap_optimal"
    incumbent_x = incumbent_x[:instance.n_cols].copy()
    return SolveResult(status, float(incumbent_obj), incumbent_x,
                       achieved_gap=achieved, best_bound=best_bound, nodes=nodes,
                       iterations=iterations, wall_time=wall, node_log=log)


# ---------------------------------------------------------------------------
# Brute-force enumeration oracle

ORACLE_MAX_BINARIES = 16


def _scipy_rows(instance: MilpInstance):
    """Split rows into scipy-style A_ub/b_ub and A_eq/b_eq blocks."""
    import scipy.sparse as sp

    matrix = instance.matrix.tocsr()
    senses = np.array(instance.row_sense)
    ub_rows = []
    ub_rhs = []
    eq_mask = senses == EQ
    for i in np.flatnonzero(~eq_mask):
        row = matrix.getrow(i)
        if senses[i] == LE:
            ub_rows.append(row)
            ub_rhs.append(instance.rhs[i])
        else:
            ub_rows.append(-row)
            ub_rhs.append(-instance.rhs[i])
    a_ub = sp.vstack(ub_rows, format="csr") if ub_rows else None
    b_ub = np.array(ub_rhs) if ub_rows else None
    eq_idx = np.flatnonzero(eq_mask)
    a_eq = matrix[eq_idx] if len(eq_idx) else None
    b_eq = instance.rhs[eq_idx] if len(eq_idx) else None
    return a_ub, b_ub, a_eq, b_eq


def oracle_enumerate(instance: MilpInstance) -> SolveResult:
    """Certify the optimum by trying every 0/1 assignment of the binaries.

    Each assignment turns the instance into an LP solved by scipy's
    ``linprog``; the best feasible assignment wins (first one found on
    exact ties, so the result is deterministic). Refuses instances with
    more than 16 binary columns.
    """
    from scipy.optimize import linprog

    binaries = instance.binary_indices
    if len(binaries) > ORACLE_MAX_BINARIES:
        raise OracleGuardError(
            f"oracle guard: {len(binaries)} binary columns exceed the "
            f"hard limit of {ORACLE_MAX_BINARIES}")
    started = time.perf_counter()
    a_ub, b_ub, a_eq, b_eq = _scipy_rows(instance)
    base_bounds = np.column_stack([instance.col_lower, instance.col_upper])

    best_obj = None
    best_x = None
    n_lp = 0
    for bits in range(2 ** len(binaries)):
        bounds = base_bounds.copy()
        feasible_fix = True
        for pos, col in enumerate(binaries):
            value = float((bits >> pos) & 1)
            if value < bounds[col, 0] - 1e-12 or value > bounds[col, 1] + 1e-12:
                feasible_fix = False
                break
            bounds[col] = (value, value)
        if not feasible_fix:
            continue
        bounds_arg = [(lo if np.isfinite(lo) else None,
                       hi if np.isfinite(hi) else None) for lo, hi in bounds]
        res = linprog(instance.objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq,
                      b_eq=b_eq, bounds=bounds_arg, method="highs")
        n_lp += 1
        if res.status == 0 and (best_obj is None or res.fun < best_obj - 1e-12):
            best_obj = float(res.fun)
            best_x = np.asarray(res.x)
    wall = time.perf_counter() - started
    if best_obj is None:
        return SolveResult("infeasible", None, None, achieved_gap=np.inf,
                           nodes=n_lp, wall_time=wall)
    return SolveResult("optimal", best_obj, best_x, achieved_gap=0.0,
                       best_bound=best_obj, nodes=n_lp, wall_time=wall)


# ---------------------------------------------------------------------------
# External backend (scipy / HiGHS)


def solve_external(instance: MilpInstance, options: SolveOptions) -> SolveResult:
    """Solve with scipy's HiGHS ``milp`` behind the common result contract."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    started = time.perf_counter()
    senses = instance.row_sense
    row_lo = np.array([-np.inf if s == LE else instance.rhs[i]
                       for i, s in enumerate(senses)])
    row_hi = np.array([np.inf if s == GE else instance.rhs[i]
                       for i, s in enumerate(senses)])
    opts = {"presolve": True, "mip_rel_gap": options.relative_gap, "disp": False}
    if options.time_limit is not None:
        opts["time_limit"] = options.time_limit
    res = milp(c=instance.objective,
               constraints=LinearConstraint(instance.matrix, row_lo, row_hi),
               integrality=instance.col_binary.astype(int),
               bounds=Bounds(instance.col_lower, instance.col_upper),
               options=opts)
    wall = time.perf_counter() - started
    if res.status == 2:
        return SolveResult("infeasible", None, None, achieved_gap=np.inf,
                           wall_time=wall)
    if res.status == 3:
        raise SolverError("external backend reports unbounded; the sizing "
                          "model is bounded below, so the instance violates "
                          "the solver contract")
    if res.x is None:
        raise SolverError(f"external backend failed: {res.message}")
    gap = float(res.mip_gap) if res.mip_gap is not None else 0.0
    bound = float(res.mip_dual_bound) if res.mip_dual_bound is not None else None
    if res.status == 1:
        status = "time_limit"
    else:
        status = "optimal" if gap <= 1e-12 else "gap_optimal"
    return SolveResult(status, float(res.fun), np.asarray(res.x),
                       achieved_gap=gap, best_bound=bound,
                       nodes=int(res.mip_node_count or 0), wall_time=wall)
