"""Bounded-variable revised simplex, the LP core under the reference solver.

The solver works on the equality form ``A x + s = b`` where one logical
column per row carries the row sense in its bounds. The basis inverse is
held as a sparse LU factorization plus a product-form eta file, refreshed
every few dozen pivots. Phase 1 minimizes the total bound violation of
the basic variables with a piecewise-linear composite objective, which
lets it start from any basis (cold logical start or a warm basis from a
related solve). Pricing is Dantzig with a Bland fallback that engages
when the objective stalls, so the method terminates on degenerate models.

Tolerances follow the package contract: primal feasibility and dual
optimality both 1e-7. Determinism: every tie in pricing and in the ratio
test breaks by a fixed rule (largest magnitude, then lowest index), so
identical inputs give identical bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import NumericalError
from .milp_instance import GE, LE, MilpInstance

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3

REFACTOR_INTERVAL = 64
STALL_LIMIT = 300
PIVOT_TOL = 1e-9
TIE_TOL = 1e-9


@dataclass
class LpResult:
    """Outcome of one LP solve on the standardized columns."""

    status: str                      # optimal | infeasible | unbounded
    x: np.ndarray | None             # structural plus logical values
    objective: float | None
    basis: np.ndarray | None
    col_status: np.ndarray | None
    iterations: int
    ray: np.ndarray | None = None    # unbounded direction when status is unbounded


@dataclass(frozen=True)
class StandardForm:
    """Equality-form data shared by every solve of the same instance."""

    matrix: sp.csc_matrix            # [A | I], m x (n + m)
    matrix_t: sp.csr_matrix          # transpose, for pricing
    rhs: np.ndarray
    n_struct: int
    logical_lower: np.ndarray
    logical_upper: np.ndarray


def standardize(instance: MilpInstance) -> StandardForm:
    """Append one bounded logical column per row to absorb the row sense."""
    m, n = instance.n_rows, instance.n_cols
    matrix = sp.hstack([instance.matrix.tocsc(),
                        sp.identity(m, format="csc")], format="csc")
    lo = np.zeros(m)
    hi = np.zeros(m)
    for i, sense in enumerate(instance.row_sense):
        if sense == LE:
            lo[i], hi[i] = 0.0, np.inf
        elif sense == GE:
            lo[i], hi[i] = -np.inf, 0.0
        else:
            lo[i], hi[i] = 0.0, 0.0
    return StandardForm(matrix=matrix, matrix_t=matrix.T.tocsr(),
                        rhs=instance.rhs.astype(float), n_struct=n,
                        logical_lower=lo, logical_upper=hi)


class _Factor:
    """Basis inverse as sparse LU plus a product-form eta file."""

    def __init__(self, matrix: sp.csc_matrix, basis: np.ndarray):
        self.matrix = matrix
        self.refactor(basis)

    def refactor(self, basis: np.ndarray) -> None:
        try:
            self.lu = splu(self.matrix[:, basis].tocsc())
        except RuntimeError as exc:
            raise NumericalError(f"singular basis: {exc}") from exc
        self.etas: list[tuple[int, np.ndarray, float]] = []

    @property
    def age(self) -> int:
        return len(self.etas)

    def update(self, row: int, w: np.ndarray) -> None:
        self.etas.append((row, w.copy(), w[row]))

    def ftran(self, v: np.ndarray) -> np.ndarray:
        y = self.lu.solve(v)
        for row, w, wr in self.etas:
            yr = y[row] / wr
            y -= w * yr
            y[row] = yr
        return y

    def btran(self, v: np.ndarray) -> np.ndarray:
        y = v.copy()
        for row, w, wr in reversed(self.etas):
            yr = y[row]
            y[row] = 0.0
            y[row] = (yr - w @ y) / wr
        return self.lu.solve(y, trans="T")


def _cold_start(form: StandardForm, lower: np.ndarray, upper: np.ndarray):
    """Logical basis; structural columns at the finite bound nearest zero."""
    m = form.matrix.shape[0]
    n_total = form.n_struct + m
    status = np.full(n_total, AT_LOWER, dtype=np.int8)
    basis = np.arange(form.n_struct, n_total, dtype=np.int64)
    status[basis] = BASIC
    for j in range(form.n_struct):
        if np.isfinite(lower[j]):
            status[j] = AT_LOWER
        elif np.isfinite(upper[j]):
            status[j] = AT_UPPER
        else:
            status[j] = FREE
    return basis, status


def _nonbasic_values(status, lower, upper):
    x = np.zeros(len(status))
    at_lo = status == AT_LOWER
    at_up = status == AT_UPPER
    x[at_lo] = lower[at_lo]
    x[at_up] = upper[at_up]
    return x


def simplex_solve(form: StandardForm, objective: np.ndarray,
                  lower: np.ndarray, upper: np.ndarray, *,
                  basis: np.ndarray | None = None,
                  col_status: np.ndarray | None = None,
                  tol_feas: float = 1e-7, tol_opt: float = 1e-7,
                  max_iter: int | None = None) -> LpResult:
    """Solve min c.x over A x + s = b with column bounds.

    ``objective``, ``lower`` and ``upper`` cover the structural columns;
    logical bounds come from the standard form. Passing the ``basis`` and
    ``col_status`` of a previous result warm-starts the solve.
    """
    m = form.matrix.shape[0]
    n_total = form.n_struct + m
    c_full = np.concatenate([np.asarray(objective, dtype=float), np.zeros(m)])
    l_full = np.concatenate([np.asarray(lower, dtype=float), form.logical_lower])
    u_full = np.concatenate([np.asarray(upper, dtype=float), form.logical_upper])
    if np.any(l_full > u_full):
        return LpResult("infeasible", None, None, None, None, 0)
    if m == 0:
        return _solve_unconstrained(c_full, l_full, u_full)
    if max_iter is None:
        max_iter = 200 * (m + form.n_struct) + 20_000

    if basis is None or col_status is None:
        basis, status = _cold_start(form, l_full, u_full)
    else:
        basis = np.array(basis, dtype=np.int64)
        status = np.array(col_status, dtype=np.int8)
        status[basis] = BASIC

    x = _nonbasic_values(status, l_full, u_full)
    factor = _Factor(form.matrix, basis)

    def recompute_basics():
        x[basis] = 0.0
        resid = form.rhs - form.matrix @ x
        x[basis] = factor.ftran(resid)

    recompute_basics()

    fixed = (u_full - l_full) <= 0.0
    iterations = 0
    bland = False
    stall = 0
    last_merit = np.inf
    last_phase = None

    while True:
        x_b = x[basis]
        l_b, u_b = l_full[basis], u_full[basis]
        below = x_b < l_b - tol_feas
        above = x_b > u_b + tol_feas
        phase1 = bool(below.any() or above.any())
        if phase1:
            d = above.astype(float) - below.astype(float)
            pi = factor.btran(d)
            reduced = -(form.matrix_t @ pi)
            merit = float((l_b - x_b)[below].sum() + (x_b - u_b)[above].sum())
        else:
            pi = factor.btran(c_full[basis])
            reduced = c_full - form.matrix_t @ pi
            merit = float(c_full @ x)

        if phase1 is not last_phase:
            stall, bland, last_merit = 0, False, np.inf
            last_phase = phase1
        if merit < last_merit - 1e-10 * max(1.0, abs(last_merit)):
            stall = 0
            bland = False
        else:
            stall += 1
            if stall > STALL_LIMIT:
                bland = True
        last_merit = merit

        # Entering column: most attractive reduced cost, or Bland on stall.
        # score is -(improvement rate) for every eligible entering move.
        can_up = ((status == AT_LOWER) | (status == FREE)) & ~fixed
        can_dn = ((status == AT_UPPER) | (status == FREE)) & ~fixed
        score = np.zeros(n_total)
        m_up = can_up & (reduced < 0)
        score[m_up] = reduced[m_up]
        m_dn = can_dn & (reduced > 0)
        score[m_dn] = -reduced[m_dn]
        eligible = score < -tol_opt
        if not eligible.any():
            if phase1:
                return LpResult("infeasible", None, None, basis.copy(),
                                status.copy(), iterations)
            scale = max(1.0, float(np.abs(form.rhs).max(initial=0.0)))
            if _max_residual(form, x) > 1e-6 * scale:
                factor.refactor(basis)
                recompute_basics()
                resid = _max_residual(form, x)
                if resid > 1e-6 * scale:
                    raise NumericalError(
                        f"optimal basis fails the row residual check "
                        f"({resid:.3e} on rhs scale {scale:.3e})")
            return LpResult("optimal", x.copy(), float(c_full @ x), basis.copy(),
                            status.copy(), iterations)

        if bland:
            j_in = int(np.flatnonzero(eligible)[0])
        else:
            j_in = int(np.argmin(score))
        move_up = can_up[j_in] and reduced[j_in] < -tol_opt
        sigma = 1.0 if move_up else -1.0

        col = form.matrix[:, j_in].toarray().ravel()
        w = factor.ftran(col)
        rate = -sigma * w  # change of basic values per unit of entering move

        theta, blockers = _ratio_test(x_b, l_b, u_b, rate, below, above, phase1)
        theta_own = u_full[j_in] - l_full[j_in] if status[j_in] != FREE else np.inf

        if theta is None and not np.isfinite(theta_own):
            if phase1:
                raise NumericalError("phase-1 descent is unbounded; the basis "
                                     "values are numerically inconsistent")
            ray = np.zeros(n_total)
            ray[j_in] = sigma
            ray[basis] = rate
            return LpResult("unbounded", None, None, basis.copy(), status.copy(),
                            iterations, ray=ray)

        iterations += 1
        if iterations > max_iter:
            raise NumericalError(f"iteration limit {max_iter} reached "
                                 f"(m={m}, n={form.n_struct})")

        if theta is None or theta_own < theta - TIE_TOL:
            # Bound flip: the entering column crosses to its other bound.
            x[basis] = x_b + rate * theta_own
            x[j_in] = u_full[j_in] if move_up else l_full[j_in]
            status[j_in] = AT_UPPER if move_up else AT_LOWER
            continue

        # Leaving variable: largest pivot magnitude among tied blockers.
        if bland:
            r = int(blockers[np.argmin(basis[blockers])])
        else:
            r = int(blockers[np.argmax(np.abs(w[blockers]))])
        if abs(w[r]) < PIVOT_TOL:
            if factor.age:
                factor.refactor(basis)
                recompute_basics()
                continue
            raise NumericalError(f"pivot {w[r]:.3e} too small on column "
                                 f"{j_in}, row {r}")

        j_out = int(basis[r])
        x[basis] = x_b + rate * theta
        x[j_in] = x[j_in] + sigma * theta
        hit_upper = rate[r] > 0 and not (phase1 and below[r])
        if phase1 and above[r]:
            hit_upper = True
        x[j_out] = u_full[j_out] if hit_upper else l_full[j_out]
        status[j_out] = AT_UPPER if hit_upper else AT_LOWER
        status[j_in] = BASIC
        basis[r] = j_in
        factor.update(r, w)
        if factor.age >= REFACTOR_INTERVAL:
            factor.refactor(basis)
            recompute_basics()


def _max_residual(form: StandardForm, x: np.ndarray) -> float:
    return float(np.abs(form.rhs - form.matrix @ x).max(initial=0.0))


def _ratio_test(x_b, l_b, u_b, rate, below, above, phase1):
    """Largest step before a basic variable hits a blocking bound.

    Returns (theta, blocker candidate rows) or (None, None) when no basic
    variable blocks. In phase 1, variables beyond a bound block when they
    reach the violated bound (turning feasible); feasible ones block at
    whichever bound they approach, exactly as in phase 2.
    """
    m = len(x_b)
    theta = np.full(m, np.inf)
    moving_up = rate > PIVOT_TOL
    moving_dn = rate < -PIVOT_TOL

    if phase1:
        ok = ~(below | above)
    else:
        ok = np.ones(m, dtype=bool)
        below = np.zeros(m, dtype=bool)
        above = np.zeros(m, dtype=bool)

    sel = ok & moving_up & np.isfinite(u_b)
    theta[sel] = np.maximum(u_b[sel] - x_b[sel], 0.0) / rate[sel]
    sel = ok & moving_dn & np.isfinite(l_b)
    theta[sel] = np.maximum(x_b[sel] - l_b[sel], 0.0) / (-rate[sel])
    if phase1:
        sel = below & moving_up
        theta[sel] = (l_b[sel] - x_b[sel]) / rate[sel]
        sel = above & moving_dn
        theta[sel] = (x_b[sel] - u_b[sel]) / (-rate[sel])

    best = theta.min()
    if not np.isfinite(best):
        return None, None
    blockers = np.flatnonzero(theta <= best + TIE_TOL)
    return float(best), blockers


def _solve_unconstrained(c, lower, upper) -> LpResult:
    """Degenerate no-row case: each column sits at its cheapest bound."""
    x = np.zeros(len(c))
    for j, cost in enumerate(c):
        if cost > 0:
            if not np.isfinite(lower[j]):
                ray = np.zeros(len(c))
                ray[j] = -1.0
                return LpResult("unbounded", None, None, None, None, 0, ray=ray)
            x[j] = lower[j]
        elif cost < 0:
            if not np.isfinite(upper[j]):
                ray = np.zeros(len(c))
                ray[j] = 1.0
                return LpResult("unbounded", None, None, None, None, 0, ray=ray)
            x[j] = upper[j]
        else:
            x[j] = lower[j] if np.isfinite(lower[j]) else \
                (upper[j] if np.isfinite(upper[j]) else 0.0)
    return LpResult("optimal", x, float(c @ x), None, None, 0)
