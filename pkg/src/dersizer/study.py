"""End-to-end study runner: ingest, reduce, build, solve, audit, report.

A study reproduces the four-case experimental protocol (base, PV only,
storage only, full DER) on one annual profile and writes, per case, the
sizing/cost summary row, hourly dispatch and curtailment series and an
audit transcript. Outputs are plain CSV/text with fixed float formatting
and no timestamps, so identical inputs give byte-identical files; cases
are independent solves and run in a fixed order.

Demand-charge convention: per-day charges scale by the annual demand
weight (monthly billing by default); every audit header repeats this.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audit import AuditReport, check_solution, recompute_cost_breakdown
from .data_model import (DeviceCatalog, LoadSplitSpec, ScenarioSet, TariffPlan,
                         packaged_profile_path, parse_profile_csv,
                         validate_scenario_set)
from .errors import ConfigError, DersizerError, IngestionError, ValidationError
from .finance import CostBreakdown
from .milp_builder import build_model, extract_solution
from .reduction import ReductionConfig, reduce_scenarios
from .solution import CaseSpec, SizingSolution
from .solver import SolveOptions, solve_milp

RESULT_METRICS = ("pv_kw", "es_kw", "inverter_kw", "converter_kw", "ic_kw",
                  "energy_charges_usd", "demand_charges_usd",
                  "total_payment_usd", "shed_energy_kwh")

SAVINGS_COMPONENTS = ("energy_charges", "demand_charges", "total_payment", "total")


def _fmt(value: float) -> str:
    return f"{value:.6f}"


@dataclass(frozen=True)
class StudyConfig:
    """Everything one study run needs, resolvable from a JSON file."""

    profile: Path
    output_dir: Path = Path("study_out")
    cases: tuple[int, ...] = (0, 1, 2, 3)
    split: LoadSplitSpec = field(default_factory=LoadSplitSpec)
    reduction: ReductionConfig = field(default_factory=ReductionConfig)
    catalog: DeviceCatalog = field(default_factory=DeviceCatalog)
    tariff: TariffPlan | None = None   # None means the default TOU plan
    annual_day_weight: float = 365.0
    annual_demand_weight: float = 12.0
    solve: SolveOptions = field(default_factory=lambda: SolveOptions(backend="external"))
    soc_boundary: str | float = "cyclic"

    def __post_init__(self):
        object.__setattr__(self, "profile", Path(self.profile))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        cases = tuple(sorted(set(int(c) for c in self.cases)))
        if not cases:
            raise ConfigError("no cases requested")
        if not set(cases) <= {0, 1, 2, 3}:
            raise ConfigError(f"cases must be within 0..3, got {list(cases)}")
        object.__setattr__(self, "cases", cases)
        if not self.profile.exists():
            raise ConfigError(f"profile file not found: {self.profile}")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "StudyConfig":
        base = Path(base_dir) if base_dir is not None else Path(".")
        known = {"profile", "output_dir", "cases", "split", "reduction", "catalog",
                 "tariff", "weights", "solve", "soc_boundary"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            profile = raw.get("profile")
            profile_path = packaged_profile_path() if profile is None \
                else (base / profile if not Path(profile).is_absolute() else Path(profile))
            out_raw = raw.get("output_dir", "study_out")
            output_dir = base / out_raw if not Path(out_raw).is_absolute() \
                else Path(out_raw)
            tariff = None
            if "tariff" in raw:
                t = dict(raw["tariff"])
                tariff = TariffPlan(
                    energy_price=np.asarray(t.pop("energy_price"), dtype=float),
                    demand_price=float(t.pop("demand_price", 18.0)),
                    peak_cap=float(t.pop("peak_cap", 1000.0)))
                if t:
                    raise ConfigError(f"unknown tariff keys: {sorted(t)}")
            weights = raw.get("weights", {})
            solve_raw = dict(raw.get("solve", {}))
            solve = SolveOptions(
                relative_gap=float(solve_raw.pop("relative_gap", 1e-4)),
                time_limit=solve_raw.pop("time_limit", None),
                backend=solve_raw.pop("backend", "external"))
            if solve_raw:
                raise ConfigError(f"unknown solve keys: {sorted(solve_raw)}")
            return cls(
                profile=profile_path,
                output_dir=output_dir,
                cases=tuple(raw.get("cases", (0, 1, 2, 3))),
                split=LoadSplitSpec(**raw.get("split", {})),
                reduction=ReductionConfig(**raw.get("reduction", {})),
                catalog=DeviceCatalog(**raw.get("catalog", {})),
                tariff=tariff,
                annual_day_weight=float(weights.get("annual_day_weight", 365.0)),
                annual_demand_weight=float(weights.get("annual_demand_weight", 12.0)),
                solve=solve,
                soc_boundary=raw.get("soc_boundary", "cyclic"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad study config: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "StudyConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(raw, base_dir=path.parent)


@dataclass
class CaseOutcome:
    case: int
    solution: SizingSolution | None
    audit: AuditReport | None
    breakdown: CostBreakdown | None
    error: str | None = None

    @property
    def solved(self) -> bool:
        return self.solution is not None and self.solution.feasible


@dataclass
class StudyOutcome:
    exit_code: int
    scenario_set: ScenarioSet
    cases: dict[int, CaseOutcome]
    output_dir: Path


def compare_cases(breakdowns: dict[int, CostBreakdown]) -> dict[int, dict[str, float | None]]:
    """Per-component fractional savings of each case against case 0.

    ``None`` marks components whose base-case cost is zero (reported as
    n/a downstream).
    """
    if 0 not in breakdowns:
        raise ConfigError("savings need case 0 as the base")
    base = breakdowns[0]
    table: dict[int, dict[str, float | None]] = {}
    for case, current in breakdowns.items():
        if case == 0:
            continue
        row: dict[str, float | None] = {}
        for component in SAVINGS_COMPONENTS:
            base_value = getattr(base, component)
            if base_value == 0:
                row[component] = None
            else:
                row[component] = (base_value - getattr(current, component)) / base_value
        table[case] = row
    return table


def _annual_shed_kwh(solution: SizingSolution, scenario_set: ScenarioSet) -> float:
    isl = solution.islanded
    per_day = np.array([
        float(isl.shed_cl_ac[s].sum() + isl.shed_cl_dc[s].sum()
              + isl.shed_nl_ac[s].sum() + isl.shed_nl_dc[s].sum())
        for s in range(len(scenario_set.days))])
    return scenario_set.annual_day_weight * float(scenario_set.probabilities @ per_day)


def _write_results_csv(path: Path, cases: dict[int, CaseOutcome],
                       scenario_set: ScenarioSet) -> None:
    ordered = sorted(cases)
    header = ["metric"] + [f"case_{c}" for c in ordered]
    rows = []
    for metric in RESULT_METRICS:
        row = [metric]
        for case in ordered:
            outcome = cases[case]
            if not outcome.solved:
                row.append("n/a")
                continue
            sol, bd = outcome.solution, outcome.breakdown
            value = {
                "pv_kw": sol.capacities["pv"],
                "es_kw": sol.capacities["es"],
                "inverter_kw": sol.capacities["inv"],
                "converter_kw": sol.capacities["con"],
                "ic_kw": sol.capacities["ic"],
                "energy_charges_usd": bd.energy_charges,
                "demand_charges_usd": bd.demand_charges,
                "total_payment_usd": bd.total_payment,
                "shed_energy_kwh": _annual_shed_kwh(sol, scenario_set),
            }[metric]
            row.append(_fmt(value))
        rows.append(row)
    _write_csv(path, header, rows)


def _write_savings_csv(path: Path, table: dict[int, dict[str, float | None]]) -> None:
    ordered = sorted(table)
    header = ["component"] + [f"case_{c}" for c in ordered]
    rows = []
    for component in SAVINGS_COMPONENTS:
        row = [component]
        for case in ordered:
            value = table[case][component]
            row.append("n/a" if value is None else _fmt(value))
        rows.append(row)
    _write_csv(path, header, rows)


def _write_dispatch_csv(path: Path, solution: SizingSolution, s: int) -> None:
    grid = solution.grid
    header = ["interval", "p_grid_kw", "pv_kw", "ch_ac_kw", "ch_dc_kw",
              "dch_ac_kw", "dch_dc_kw", "ic_flow_ac_kw", "soc_kwh"]
    rows = []
    for t in range(grid.p_grid.shape[1]):
        rows.append([str(t + 1), _fmt(grid.p_grid[s, t]), _fmt(grid.pv_output[s, t]),
                     _fmt(grid.ch_ac[s, t]), _fmt(grid.ch_dc[s, t]),
                     _fmt(grid.dch_ac[s, t]), _fmt(grid.dch_dc[s, t]),
                     _fmt(grid.flow_ac[s, t]), _fmt(grid.soc[s, t + 1])])
    _write_csv(path, header, rows)


def _write_curtailment_csv(path: Path, solution: SizingSolution,
                           scenario_set: ScenarioSet) -> None:
    isl = solution.islanded
    header = ["day", "interval", "shed_critical_kw", "shed_noncritical_kw"]
    rows = []
    for s, day in enumerate(scenario_set.days):
        for t in range(day.intervals):
            rows.append([day.id, str(t + 1),
                         _fmt(isl.shed_cl_ac[s, t] + isl.shed_cl_dc[s, t]),
                         _fmt(isl.shed_nl_ac[s, t] + isl.shed_nl_dc[s, t])])
    _write_csv(path, header, rows)


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def run_study(config: StudyConfig) -> StudyOutcome:
    """Run every requested case and write the study outputs.

    Exit code 0 when every case solved and audited clean, 1 when any
    solve failed or came back infeasible, 2 when a solve succeeded but
    the audit flagged violations.
    """
    try:
        profile = parse_profile_csv(config.profile)
    except (IngestionError, ValidationError, OSError) as exc:
        raise ConfigError(f"cannot ingest {config.profile}: {exc}") from exc
    reduced = reduce_scenarios(profile, config.reduction, config.split)
    scenario_set = ScenarioSet(days=reduced.days,
                               annual_day_weight=config.annual_day_weight,
                               annual_demand_weight=config.annual_demand_weight)
    report = validate_scenario_set(scenario_set)
    if not report.ok:
        raise ConfigError(f"reduced scenario set invalid: {report}")
    tariff = config.tariff if config.tariff is not None \
        else TariffPlan.default_tou(scenario_set.intervals)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    outcomes: dict[int, CaseOutcome] = {}
    solve_failed = False
    audit_flagged = False
    for case_number in config.cases:
        case = CaseSpec.from_number(case_number)
        try:
            instance = build_model(scenario_set, config.catalog, tariff, case,
                                   soc_boundary=config.soc_boundary)
            raw = solve_milp(instance, config.solve)
        except DersizerError as exc:
            solve_failed = True
            outcomes[case_number] = CaseOutcome(case_number, None, None, None,
                                                error=str(exc))
            continue
        if not raw.ok:
            solve_failed = True
            solution = None
            if raw.status == "infeasible":
                solution = extract_solution(instance, raw)
            outcomes[case_number] = CaseOutcome(case_number, solution, None, None,
                                                error=f"solve status {raw.status}")
            continue
        solution = extract_solution(instance, raw)
        audit = check_solution(solution, scenario_set, config.catalog, tariff)
        breakdown = recompute_cost_breakdown(solution, scenario_set,
                                             config.catalog, tariff)
        if not audit.ok:
            audit_flagged = True
        outcomes[case_number] = CaseOutcome(case_number, solution, audit, breakdown)

        audit_path = out / f"audit_case{case_number}.txt"
        header = (f"case {case_number} status={solution.status} "
                  f"objective={_fmt(solution.objective)} gap={solution.gap:.3e}\n")
        audit_path.write_text(header + audit.to_text())
        _write_curtailment_csv(out / f"curtailment_case{case_number}.csv",
                               solution, scenario_set)
        for s, day in enumerate(scenario_set.days):
            _write_dispatch_csv(out / f"dispatch_case{case_number}_{day.id}.csv",
                                solution, s)

    _write_results_csv(out / "results.csv", outcomes, scenario_set)
    solved_breakdowns = {c: o.breakdown for c, o in outcomes.items() if o.solved}
    if 0 in solved_breakdowns and len(solved_breakdowns) > 1:
        _write_savings_csv(out / "savings.csv", compare_cases(solved_breakdowns))

    exit_code = 1 if solve_failed else (2 if audit_flagged else 0)
    return StudyOutcome(exit_code=exit_code, scenario_set=scenario_set,
                        cases=outcomes, output_dir=out)
