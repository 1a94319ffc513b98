"""LP core: cross-checked against scipy's independent implementation."""

import numpy as np
import pytest
from scipy.optimize import linprog

from dersizer import solve_lp
from dersizer.milp_instance import EQ, GE, LE, ModelBuilder
from dersizer.simplex import simplex_solve, standardize


def _instance(cols, rows):
    b = ModelBuilder()
    for name, lo, hi, obj in cols:
        b.add_col(name, lo, hi, obj)
    for i, (coeffs, sense, rhs) in enumerate(rows):
        b.add_row(f"r{i}", list(enumerate(coeffs)), sense, rhs)
    return b.build()


def test_min_x_at_least_three():
    inst = _instance([("x", 0.0, np.inf, 1.0)], [([1.0], GE, 3.0)])
    res = solve_lp(inst)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(3.0, abs=1e-9)


def test_max_x_below_five():
    inst = _instance([("x", 0.0, np.inf, -1.0)], [([1.0], LE, 5.0)])
    res = solve_lp(inst)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-5.0, abs=1e-9)


def test_unbounded_gives_certificate_ray():
    inst = _instance([("x", 0.0, np.inf, -1.0)], [([1.0], GE, 0.0)])
    res = solve_lp(inst)
    assert res.status == "unbounded"
    ray = res.ray
    assert ray is not None
    assert float(inst.objective @ ray) < 0          # improving direction
    assert (inst.matrix @ ray >= 0).all()           # keeps the >= row feasible


def test_infeasible_box():
    inst = _instance([("x", 0.0, np.inf, 1.0)],
                     [([1.0], LE, 1.0), ([1.0], GE, 2.0)])
    assert solve_lp(inst).status == "infeasible"


def test_equality_with_free_variable():
    inst = _instance([("x", -np.inf, np.inf, 1.0), ("y", 0.0, np.inf, 2.0)],
                     [([1.0, 1.0], EQ, 4.0), ([1.0, -1.0], LE, 1.0)])
    res = solve_lp(inst)
    assert res.status == "optimal"
    # x free: push x up to the x - y <= 1 face, y down; optimum at (2.5, 1.5)
    assert res.objective == pytest.approx(5.5, abs=1e-7)


def _random_lp(seed):
    """Random bounded LP made feasible by construction around a point."""
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 11)
    m = rng.integers(1, 9)
    upper = rng.uniform(1.0, 10.0, n)
    x0 = rng.uniform(0, 1, n) * upper
    matrix = np.where(rng.random((m, n)) < 0.4, 0.0,
                      rng.normal(0.0, 2.0, (m, n)))
    y0 = matrix @ x0
    senses, rhs = [], []
    for i in range(m):
        kind = rng.integers(0, 3)
        if kind == 0:
            senses.append(LE)
            rhs.append(y0[i] + rng.uniform(0, 3))
        elif kind == 1:
            senses.append(GE)
            rhs.append(y0[i] - rng.uniform(0, 3))
        else:
            senses.append(EQ)
            rhs.append(y0[i])
    c = rng.normal(0, 1, n)
    b = ModelBuilder()
    for j in range(n):
        b.add_col(f"x{j}", 0.0, upper[j], c[j])
    for i in range(m):
        coeffs = [(j, matrix[i, j]) for j in range(n) if matrix[i, j] != 0.0]
        b.add_row(f"r{i}", coeffs, senses[i], rhs[i])
    return b.build()


@pytest.mark.parametrize("seed", range(25))
def test_random_lp_matches_independent_solver(seed):
    inst = _random_lp(seed)
    mine = solve_lp(inst)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    dense = inst.matrix.toarray()
    for i, sense in enumerate(inst.row_sense):
        if sense == LE:
            a_ub.append(dense[i]); b_ub.append(inst.rhs[i])
        elif sense == GE:
            a_ub.append(-dense[i]); b_ub.append(-inst.rhs[i])
        else:
            a_eq.append(dense[i]); b_eq.append(inst.rhs[i])
    ref = linprog(inst.objective,
                  A_ub=np.array(a_ub) if a_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(a_eq) if a_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=list(zip(inst.col_lower, inst.col_upper)),
                  method="highs")
    assert ref.status == 0, "fixture should be feasible by construction"
    assert mine.status == "optimal"
    assert mine.objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-6)


def test_warm_start_matches_cold_after_bound_change():
    inst = _random_lp(3)
    form = standardize(inst)
    first = simplex_solve(form, inst.objective, inst.col_lower, inst.col_upper)
    assert first.status == "optimal"
    tightened = inst.col_upper.copy()
    tightened[0] = min(tightened[0], first.x[0] * 0.5 + 1e-3)
    warm = simplex_solve(form, inst.objective, inst.col_lower, tightened,
                         basis=first.basis, col_status=first.col_status)
    cold = simplex_solve(form, inst.objective, inst.col_lower, tightened)
    assert warm.status == cold.status == "optimal"
    assert warm.objective == pytest.approx(cold.objective, rel=1e-9, abs=1e-9)


def test_degenerate_duplicate_rows_terminate():
    b = ModelBuilder()
    x = b.add_col("x", 0.0, 10.0, 1.0)
    y = b.add_col("y", 0.0, 10.0, 1.0)
    for i in range(6):  # the same face six times over
        b.add_row(f"dup{i}", [(x, 1.0), (y, 1.0)], GE, 4.0)
    res = solve_lp(b.build())
    assert res.status == "optimal"
    assert res.objective == pytest.approx(4.0, abs=1e-9)


def test_fixed_columns_are_respected():
    b = ModelBuilder()
    x = b.add_col("x", 2.0, 2.0, 1.0)
    y = b.add_col("y", 0.0, 10.0, 1.0)
    b.add_row("r", [(x, 1.0), (y, 1.0)], GE, 5.0)
    res = solve_lp(b.build())
    assert res.status == "optimal"
    assert res.x[x] == pytest.approx(2.0)
    assert res.x[y] == pytest.approx(3.0, abs=1e-9)
