"""Model construction: big-M values, dimensions, the product reformulation,
case handling and solution extraction."""

import numpy as np
import pytest

from dersizer import (CaseSpec, DeviceCatalog, ScenarioSet, SolveOptions,
                      TariffPlan, build_model, compute_big_m, extract_solution,
                      solve_lp, solve_milp, write_lp)
from dersizer.data_model import DayScenario
from dersizer.errors import BuildError, SolverError
from dersizer.milp_builder import expected_dimensions, linearize_product
from dersizer.milp_instance import EQ, LE, ModelBuilder
from dersizer.solver import SolveResult

from conftest import tiny_sizing_inputs


def _flat_day(load=10.0, pv=0.5, t=2, probability=1.0, id="d0"):
    quarter = [load / 4.0] * t
    return DayScenario(id=id, probability=probability, cl_ac=quarter,
                       cl_dc=quarter, nl_ac=quarter, nl_dc=quarter,
                       pv_availability=[pv] * t)


def _tariff(t):
    return TariffPlan(energy_price=[0.1] * t, demand_price=18.0, peak_cap=1000.0)


def test_big_m_es_is_battery_cap():
    scen = ScenarioSet(days=(_flat_day(),))
    assert compute_big_m(scen, DeviceCatalog(), _tariff(2))["m_es"] == 350.0


def test_big_m_degenerate_zero_then_builder_substitutes_one():
    scen = ScenarioSet(days=(_flat_day(load=0.0),))
    catalog = DeviceCatalog(pv_max=0.0, es_max=0.0)
    values = compute_big_m(scen, catalog, _tariff(2))
    assert values["m_flow"] == 0.0
    instance = build_model(scen, catalog, _tariff(2), CaseSpec.from_number(3))
    assert instance.meta["m_flow"] == 1.0


def test_big_m_flow_formula_on_fixture_scale():
    day = _flat_day(load=846.0)
    scen = ScenarioSet(days=(day,))
    values = compute_big_m(scen, DeviceCatalog(), _tariff(2))
    assert values["m_flow"] == pytest.approx(846 + 400 * 0.98 + 350 * 0.93,
                                             abs=1e-12)
    assert values["m_flow"] == pytest.approx(1563.5, abs=1e-12)


@pytest.mark.parametrize("case_number,s,t", [(0, 1, 2), (1, 1, 3), (2, 2, 4),
                                             (3, 1, 3), (3, 1, 24), (3, 6, 24)])
def test_dimensions_match_documented_formula(case_number, s, t):
    case = CaseSpec.from_number(case_number)
    days = tuple(_flat_day(t=t, probability=1.0 / s, id=f"d{i}") for i in range(s))
    scen = ScenarioSet(days=days)
    instance = build_model(scen, DeviceCatalog(), _tariff(t), case)
    expected = expected_dimensions(s, t, case)
    assert instance.n_cols == expected["n_cols"]
    assert instance.n_rows == expected["n_rows"]
    assert len(instance.binary_indices) == expected["n_binary"]
    assert instance.meta["expected_dimensions"] == expected


def test_tiny_case3_has_nine_binaries():
    scen, catalog, tariff = tiny_sizing_inputs(0)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    assert len(instance.binary_indices) == 9
    assert instance.n_cols == 82 and instance.n_rows == 96


def test_symbol_map_unique_per_index():
    scen, catalog, tariff = tiny_sizing_inputs(1)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    names = instance.col_names
    assert len(set(names)) == len(names)
    for base in ("p_grid", "v_pv", "dch_ac", "ch_dc", "soc", "f_dc_in", "z_flow",
                 "y_dch", "u_dch", "k_dch", "i_v_pv", "i_dch_ac", "shed_cl_ac",
                 "shed_nl_dc", "i_z_flow"):
        for t in range(1, 4):
            assert sum(1 for n in names if n == f"{base}_s0_t{t}") == 1, base
    assert instance.col("x_pv") == 0
    assert instance.col("p_grid", 0, 1) == instance.symbol_map["p_grid_s0_t1"]


def test_case_flags_pin_capacity_bounds():
    scen = ScenarioSet(days=(_flat_day(),))
    catalog, tariff = DeviceCatalog(), _tariff(2)
    base = build_model(scen, catalog, tariff, CaseSpec.from_number(0))
    assert base.col_upper[base.col("x_pv")] == 0.0
    assert base.col_upper[base.col("x_es")] == 0.0
    assert base.col_upper[base.col("x_inv")] == 0.0
    assert "y_dch_s0_t1" not in base.symbol_map
    pv_only = build_model(scen, catalog, tariff, CaseSpec.from_number(1))
    assert pv_only.col_upper[pv_only.col("x_pv")] == 400.0
    assert pv_only.col_upper[pv_only.col("x_es")] == 0.0
    full = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    assert full.col_upper[full.col("x_es")] == 350.0
    assert np.isinf(full.col_upper[full.col("x_inv")])


def test_case_spec_numbers():
    assert CaseSpec.from_number(0) == CaseSpec(False, False)
    assert CaseSpec.from_number(1) == CaseSpec(True, False)
    assert CaseSpec.from_number(2) == CaseSpec(False, True)
    assert CaseSpec.from_number(3) == CaseSpec(True, True)
    assert CaseSpec.from_number(3).number == 3
    from dersizer.errors import ConfigError
    with pytest.raises(ConfigError):
        CaseSpec.from_number(4)


def test_build_rejects_tariff_length_mismatch():
    scen = ScenarioSet(days=(_flat_day(t=3),))
    with pytest.raises(BuildError, match="tariff"):
        build_model(scen, DeviceCatalog(), _tariff(2), CaseSpec.from_number(0))


def test_build_rejects_invalid_scenarios():
    scen = ScenarioSet(days=(_flat_day(probability=0.4),))
    with pytest.raises(BuildError, match="probabilities sum"):
        build_model(scen, DeviceCatalog(), _tariff(2), CaseSpec.from_number(0))


def test_build_rejects_bad_soc_boundary():
    scen = ScenarioSet(days=(_flat_day(),))
    with pytest.raises(BuildError, match="boundary"):
        build_model(scen, DeviceCatalog(), _tariff(2), CaseSpec.from_number(3),
                    soc_boundary="monday")


def _product_fixture(x_value, y_value, m=350.0):
    """Minimal model isolating the exact-product reformulation."""
    b = ModelBuilder()
    x = b.add_col("x", 0.0, 350.0)
    y = b.add_col("y", y_value, y_value, binary=True)
    b.add_row("fix_x", [(x, 1.0)], EQ, x_value)
    u, k, rows = linearize_product(b, x, y, m, "t")
    assert len(rows) == 3
    return b, u, k


@pytest.mark.parametrize("x_value,y_value,expected_u",
                         [(350.0, 1.0, 350.0), (350.0, 0.0, 0.0),
                          (123.4, 1.0, 123.4), (123.4, 0.0, 0.0)])
def test_product_reformulation_forces_u(x_value, y_value, expected_u):
    from dataclasses import replace
    for sense in (1.0, -1.0):  # minimizing and maximizing u give the same value
        b, u, k = _product_fixture(x_value, y_value)
        instance = b.build()
        objective = np.zeros(instance.n_cols)
        objective[u] = sense
        instance = replace(instance, objective=objective)
        res = solve_lp(instance)
        assert res.status == "optimal"
        assert res.x[u] == pytest.approx(expected_u, abs=1e-7)
        assert res.x[k] == pytest.approx(x_value - expected_u, abs=1e-7)


def test_product_reformulation_rejects_small_m():
    b = ModelBuilder()
    x = b.add_col("x", 0.0, 350.0)
    y = b.add_col("y", 0.0, 1.0, binary=True)
    with pytest.raises(BuildError, match="big-M"):
        linearize_product(b, x, y, 200.0, "t")


def test_hand_computed_case0_objective(hand_case0):
    instance = build_model(hand_case0["set"], hand_case0["catalog"],
                           hand_case0["tariff"], CaseSpec.from_number(0))
    result = solve_milp(instance, SolveOptions(relative_gap=1e-9,
                                               backend="reference"))
    assert result.status == "optimal"
    assert result.objective == pytest.approx(hand_case0["expected"], rel=1e-9)
    solution = extract_solution(instance, result)
    assert solution.capacities["ic"] == pytest.approx(31.25, abs=1e-7)
    assert solution.breakdown.total == pytest.approx(hand_case0["expected"],
                                                     rel=1e-9)


@pytest.mark.parametrize("case_number", [0, 3])
def test_zero_load_gives_zero_objective(case_number):
    scen = ScenarioSet(days=(_flat_day(load=0.0),))
    instance = build_model(scen, DeviceCatalog(), _tariff(2),
                           CaseSpec.from_number(case_number))
    result = solve_milp(instance, SolveOptions(relative_gap=1e-9,
                                               backend="reference"))
    assert result.status == "optimal"
    assert result.objective == pytest.approx(0.0, abs=1e-9)
    solution = extract_solution(instance, result)
    assert all(v == pytest.approx(0.0, abs=1e-9)
               for v in solution.capacities.values())


def test_extract_infeasible_is_explicit():
    scen, catalog, tariff = tiny_sizing_inputs(0)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    raw = SolveResult(status="infeasible", objective=None, x=None)
    solution = extract_solution(instance, raw)
    assert solution.status == "infeasible"
    assert not solution.feasible
    assert solution.breakdown is None


def test_extract_rejects_unbounded_status():
    scen, catalog, tariff = tiny_sizing_inputs(0)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    raw = SolveResult(status="unbounded", objective=None, x=None)
    with pytest.raises(SolverError):
        extract_solution(instance, raw)


def test_fixed_soc_boundary_round_trips():
    scen, catalog, tariff = tiny_sizing_inputs(2)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3),
                           soc_boundary=0.5)
    result = solve_milp(instance, SolveOptions(relative_gap=1e-6,
                                               backend="external"))
    solution = extract_solution(instance, result)
    assert solution.grid.soc[0, 0] == pytest.approx(
        0.5 * catalog.rho_ep * solution.capacities["es"], abs=1e-5)


def test_lp_writer_round_trippable_text(tmp_path):
    scen, catalog, tariff = tiny_sizing_inputs(0)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    path = tmp_path / "model.lp"
    write_lp(instance, path)
    text = path.read_text()
    for marker in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert marker in text
    assert "x_pv" in text and "z_flow_s0_t1" in text
    assert text.count("\n obj") <= 1


def test_instance_validation_catches_corruption():
    scen, catalog, tariff = tiny_sizing_inputs(0)
    instance = build_model(scen, catalog, tariff, CaseSpec.from_number(3))
    instance.validate()
    bad = instance.with_bounds(instance.col_lower + 1e9, instance.col_upper)
    with pytest.raises(BuildError):
        bad.validate()


def test_model_builder_guards():
    b = ModelBuilder()
    x = b.add_col("x", 0.0, 1.0)
    with pytest.raises(BuildError, match="duplicate"):
        b.add_col("x")
    with pytest.raises(BuildError, match="binary"):
        b.add_col("b", 0.0, 2.0, binary=True)
    with pytest.raises(BuildError, match="sense"):
        b.add_row("r", [(x, 1.0)], "<", 0.0)
    with pytest.raises(BuildError, match="unknown column"):
        b.add_row("r", [(99, 1.0)], LE, 0.0)
    with pytest.raises(BuildError, match="non-finite"):
        b.add_row("r", [(x, np.inf)], LE, 0.0)
