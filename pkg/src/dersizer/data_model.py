"""Domain types, profile ingestion and validation for the DER sizing optimizer.

Conventions used everywhere downstream:

* power is kW, energy is kWh, and intervals are one hour long, so a kW
  reading over one interval is numerically the same as its kWh energy;
* equipment costs are annualized $/kW-yr, operating prices are $/kWh
  (energy, degradation, lost load) or $/kW (demand charge);
* PV availability is a per-unit series in [0, 1] against installed kW.

Types are frozen dataclasses and safe to share between threads. The
scenario containers are deliberately permissive at construction time:
``validate_scenario_set`` is the single gate that reports every violated
invariant instead of raising on the first one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import IngestionError, ValidationError

PROFILE_COLUMNS = ("timestamp", "load_kw", "pv_pu")

PACKAGED_PROFILE = "synthetic_year.csv"


def _as_series(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D series, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class DayScenario:
    """One weighted representative day of microgrid operation.

    Loads are split into four classes by bus (AC/DC) and criticality
    (critical/non-critical). ``pv_availability`` is the per-unit PV
    resource of the same calendar day the loads came from.
    """

    id: str
    probability: float
    cl_ac: np.ndarray
    cl_dc: np.ndarray
    nl_ac: np.ndarray
    nl_dc: np.ndarray
    pv_availability: np.ndarray

    def __post_init__(self):
        for name in ("cl_ac", "cl_dc", "nl_ac", "nl_dc", "pv_availability"):
            object.__setattr__(self, name, _as_series(getattr(self, name), name))
        lengths = {len(getattr(self, n)) for n in
                   ("cl_ac", "cl_dc", "nl_ac", "nl_dc", "pv_availability")}
        if len(lengths) != 1:
            raise ValidationError(f"day {self.id}: series lengths differ: {sorted(lengths)}")

    @property
    def intervals(self) -> int:
        return len(self.cl_ac)

    def total_load(self) -> np.ndarray:
        return self.cl_ac + self.cl_dc + self.nl_ac + self.nl_dc


@dataclass(frozen=True)
class ScenarioSet:
    """Weighted representative days plus the day-to-year scaling weights.

    ``annual_day_weight`` converts an expected per-day operating cost into
    a $/yr figure (365 by default). ``annual_demand_weight`` does the same
    for the per-day demand charge under a monthly billing convention (12).
    """

    days: tuple[DayScenario, ...]
    annual_day_weight: float = 365.0
    annual_demand_weight: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        if not self.days:
            raise ValidationError("scenario set has no days")

    @property
    def intervals(self) -> int:
        return self.days[0].intervals

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([d.probability for d in self.days], dtype=float)


@dataclass(frozen=True)
class DeviceCatalog:
    """Unit economics and technical limits of every sizable device.

    Defaults are the reference commercial-building setup: investment
    costs already annualized, a two-hour battery with a 10..90% usable
    band, and lost load priced at $3000/kWh critical and $500/kWh
    non-critical. Use
    :func:`dersizer.finance.catalog_from_capital_costs` when starting
    from raw capital costs instead.
    """

    c_pv: float = 108.0       # $/kW-yr
    c_es: float = 424.0       # $/kW-yr
    c_ic: float = 8.1         # $/kW-yr
    c_inv: float = 6.5        # $/kW-yr
    c_con: float = 4.3        # $/kW-yr
    c_deg: float = 0.005      # $/kWh of battery throughput
    voll_cl: float = 3000.0   # $/kWh critical load shed
    voll_nl: float = 500.0    # $/kWh non-critical load shed
    eta_ic: float = 0.96
    eta_inv: float = 0.96
    eta_con: float = 0.98
    eta_ch: float = 0.93
    eta_dch: float = 0.93
    pv_max: float = 400.0     # kW
    es_max: float = 350.0     # kW
    rho_ep: float = 2.0       # h, battery energy/power ratio
    alpha_min: float = 0.1
    alpha_max: float = 0.9

    def __post_init__(self):
        for name in ("c_pv", "c_es", "c_ic", "c_inv", "c_con", "c_deg",
                     "voll_cl", "voll_nl", "pv_max", "es_max"):
            if getattr(self, name) < 0:
                raise ValidationError(f"catalog {name} must be nonnegative")
        for name in ("eta_ic", "eta_inv", "eta_con", "eta_ch", "eta_dch"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValidationError(f"catalog {name}={eta} outside (0, 1]")
        if not 0.0 <= self.alpha_min < self.alpha_max <= 1.0:
            raise ValidationError(
                f"SoC band [{self.alpha_min}, {self.alpha_max}] must satisfy "
                "0 <= alpha_min < alpha_max <= 1")
        if self.rho_ep <= 0:
            raise ValidationError("rho_ep must be positive")


@dataclass(frozen=True)
class TariffPlan:
    """Two-part utility tariff: hourly energy prices plus a demand charge.

    ``peak_cap`` is the interconnection limit on the billed peak, not a
    price: grid draw above it is infeasible rather than expensive.
    """

    energy_price: np.ndarray  # $/kWh, one entry per interval
    demand_price: float       # $/kW on the daily peak draw
    peak_cap: float           # kW

    def __post_init__(self):
        object.__setattr__(self, "energy_price", _as_series(self.energy_price, "energy_price"))
        if np.any(self.energy_price < 0) or self.demand_price < 0:
            raise ValidationError("tariff prices must be nonnegative")
        if self.peak_cap <= 0:
            raise ValidationError("tariff peak_cap must be positive")

    @property
    def intervals(self) -> int:
        return len(self.energy_price)

    @classmethod
    def default_tou(cls, intervals: int = 24, demand_price: float = 18.0,
                    peak_cap: float = 1000.0) -> "TariffPlan":
        """Three-period TOU placeholder for a large commercial account.

        Peak $0.16 for 12:00-18:00, part-peak $0.12 for 08:00-12:00 and
        18:00-21:00, off-peak $0.09 otherwise. Real studies should supply
        their own plan; this is only a plausible default shape.
        """
        if intervals != 24:
            raise ValidationError("default TOU plan is defined on 24 hourly intervals")
        price = np.full(24, 0.09)
        price[8:12] = 0.12
        price[18:21] = 0.12
        price[12:18] = 0.16
        return cls(energy_price=price, demand_price=demand_price, peak_cap=peak_cap)


@dataclass(frozen=True)
class LoadSplitSpec:
    """How a metered total load divides into the four modeled classes.

    The source data publishes totals only, so the split is a modeling
    choice. Defaults keep critical load low enough that a cap-sized
    battery can carry it through an islanded hour.
    """

    critical_fraction: float = 0.3
    dc_fraction_of_critical: float = 0.5
    dc_fraction_of_noncritical: float = 0.5

    def __post_init__(self):
        for name in ("critical_fraction", "dc_fraction_of_critical",
                     "dc_fraction_of_noncritical"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"split {name}={value} outside [0, 1]")


@dataclass(frozen=True)
class AnnualProfile:
    """Dense hourly record of building load and PV availability."""

    timestamps: tuple[str, ...]
    load_kw: np.ndarray
    pv_pu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "load_kw", _as_series(self.load_kw, "load_kw"))
        object.__setattr__(self, "pv_pu", _as_series(self.pv_pu, "pv_pu"))
        if not len(self.timestamps) == len(self.load_kw) == len(self.pv_pu):
            raise ValidationError("profile columns have different lengths")

    @property
    def hours(self) -> int:
        return len(self.load_kw)

    @property
    def whole_days(self) -> int:
        return self.hours // 24


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a report-style validation pass."""

    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(self.problems)


_TS_FORMAT = "%Y-%m-%dT%H:%M:%S"


def _parse_timestamp(text: str, row: int) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise IngestionError(f"row {row}: bad timestamp {text!r}") from exc


def parse_profile_csv(path, expected_columns=PROFILE_COLUMNS) -> AnnualProfile:
    """Read an hourly ``timestamp,load_kw,pv_pu`` CSV into an AnnualProfile.

    The header must match ``expected_columns`` and timestamps must be
    strictly increasing with exactly one hour between rows. Gaps and
    duplicates are ingestion errors naming the offending timestamp;
    negative loads or PV availability outside [0, 1] are validation
    errors naming the row.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"profile file not found: {path}")
    timestamps: list[str] = []
    load: list[float] = []
    pv: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != tuple(expected_columns):
            raise IngestionError(
                f"{path}: header {header!r} does not match {list(expected_columns)!r}")
        previous: datetime | None = None
        for row_number, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(expected_columns):
                raise IngestionError(f"row {row_number}: expected {len(expected_columns)} "
                                     f"fields, got {len(row)}")
            stamp = _parse_timestamp(row[0].strip(), row_number)
            if previous is not None:
                delta = stamp - previous
                if delta == timedelta(0):
                    raise IngestionError(f"row {row_number}: duplicate timestamp "
                                         f"{stamp.isoformat()}")
                if delta < timedelta(0):
                    raise IngestionError(f"row {row_number}: timestamp {stamp.isoformat()} "
                                         "goes backwards")
                if delta != timedelta(hours=1):
                    missing = previous + timedelta(hours=1)
                    raise IngestionError(f"row {row_number}: missing hour "
                                         f"{missing.isoformat()} before {stamp.isoformat()}")
            previous = stamp
            try:
                load_value = float(row[1])
                pv_value = float(row[2])
            except ValueError as exc:
                raise IngestionError(f"row {row_number}: non-numeric value") from exc
            if not np.isfinite(load_value) or not np.isfinite(pv_value):
                raise ValidationError(f"row {row_number}: non-finite value")
            if load_value < 0:
                raise ValidationError(f"row {row_number}: load_kw={load_value} is negative")
            if not 0.0 <= pv_value <= 1.0:
                raise ValidationError(f"row {row_number}: pv_pu={pv_value} outside [0, 1]")
            timestamps.append(stamp.isoformat())
            load.append(load_value)
            pv.append(pv_value)
    if not timestamps:
        raise IngestionError(f"{path}: no data rows")
    return AnnualProfile(timestamps=tuple(timestamps),
                         load_kw=np.array(load), pv_pu=np.array(pv))


def write_profile_csv(profile: AnnualProfile, path) -> None:
    """Serialize a profile back to CSV, preserving numeric content."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_COLUMNS)
        for stamp, load, pv in zip(profile.timestamps, profile.load_kw, profile.pv_pu):
            writer.writerow([stamp, format(load, ".12g"), format(pv, ".12g")])


def packaged_profile_path() -> Path:
    """Path of the synthetic annual profile that ships with the package."""
    return Path(resources.files("dersizer").joinpath("data", PACKAGED_PROFILE))


def split_loads(total_load, spec: LoadSplitSpec):
    """Split a total load series into (cl_ac, cl_dc, nl_ac, nl_dc).

    The four classes partition the input: at every interval they are
    nonnegative and sum back to the total.
    """
    total = _as_series(total_load, "total_load")
    critical = total * spec.critical_fraction
    cl_dc = critical * spec.dc_fraction_of_critical
    cl_ac = critical - cl_dc
    noncritical = total - critical
    nl_dc = noncritical * spec.dc_fraction_of_noncritical
    nl_ac = noncritical - nl_dc
    return cl_ac, cl_dc, nl_ac, nl_dc


def validate_scenario_set(scenario_set: ScenarioSet) -> ValidationReport:
    """Check every scenario-set invariant and report all violations.

    Returns a passing report or a list of human-readable problems; it
    never raises. Downstream modules assume a passing set.
    """
    problems: list[str] = []
    days = scenario_set.days
    prob_sum = float(sum(d.probability for d in days))
    if abs(prob_sum - 1.0) > 1e-9:
        problems.append(f"probabilities sum to {prob_sum:.10g}")
    expected_t = days[0].intervals
    for day in days:
        if not 0.0 < day.probability <= 1.0:
            problems.append(f"day {day.id}: probability {day.probability:.10g} "
                            "outside (0, 1]")
        if day.intervals != expected_t:
            problems.append(f"day {day.id}: {day.intervals} intervals, "
                            f"expected {expected_t}")
        for name in ("cl_ac", "cl_dc", "nl_ac", "nl_dc"):
            series = getattr(day, name)
            bad = np.flatnonzero(series < 0)
            if bad.size:
                t = int(bad[0])
                problems.append(f"day {day.id}: {name}[{t}]={series[t]:.10g} is negative")
        pv = day.pv_availability
        bad = np.flatnonzero((pv < 0) | (pv > 1))
        if bad.size:
            t = int(bad[0])
            problems.append(f"day {day.id}: pv_availability[{t}]={pv[t]:.10g} "
                            "outside [0, 1]")
    if scenario_set.annual_day_weight <= 0 or scenario_set.annual_demand_weight <= 0:
        problems.append("annual weights must be positive")
    return ValidationReport(problems=tuple(problems))
