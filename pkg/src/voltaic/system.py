"""Domain types describing one power system instance.

Everything the optimization needs is collected in :class:`SystemData`:
nodes with hourly demand, generation technologies, storage technologies,
cross-border lines and the named hourly time series they reference.
:class:`ModelConfig` carries the run settings, :class:`FeatureMatrix` the
per-node activation flags of the optional model features (all of which
must be off for the basic model to be solvable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

DISPATCHABLE = "dispatchable"
VARIABLE_RENEWABLE = "variable_renewable"
TECH_KINDS = (DISPATCHABLE, VARIABLE_RENEWABLE)

#: Optional feature modules that can be switched per node. Any active entry
#: is rejected at build time; only the basic model is solvable.
FEATURE_MODULES = ("dsm", "ev_endogenous", "ev_exogenous", "reserves", "prosumage", "heat")

HOURS_PER_YEAR = 8760


class ValidationError(ValueError):
    """Raised when input data violates a declared invariant.

    ``issues`` holds one human-readable message per violation, each naming
    the offending object and field.
    """

    def __init__(self, issues: list[str] | str):
        if isinstance(issues, str):
            issues = [issues]
        self.issues = issues
        super().__init__("; ".join(issues))


def hour_label(h: int) -> str:
    """1-based hour index to its label, e.g. 1 -> 'h1'."""
    return f"h{h}"


def hour_index(label: str) -> int:
    """Inverse of :func:`hour_label`; raises on malformed labels."""
    if not label.startswith("h"):
        raise ValueError(f"not an hour label: {label!r}")
    return int(label[1:])


@dataclass(frozen=True)
class TimeSeries:
    """A named hourly profile (demand in MWh/h or capacity factors)."""

    name: str
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Node:
    id: str
    demand: str  # name of the demand series
    min_renewable_share: float = 0.0
    co2_cap: float | None = None  # t per horizon, None = uncapped


@dataclass(frozen=True)
class Technology:
    """A generation technology, parameterized uniformly across nodes.

    Costs are annualized EUR/MW (investment, fixed) and EUR/MWh (variable).
    Variable renewables carry per-node capacity-factor series references in
    ``availability``; dispatchables have none.
    """

    id: str
    kind: str
    c_inv_power: float
    c_fix: float = 0.0
    c_var: float = 0.0
    co2_intensity: float = 0.0  # t/MWh
    cap_min: float = 0.0
    cap_max: float = math.inf
    availability: dict[str, str] | None = None  # node id -> series name

    @property
    def is_renewable(self) -> bool:
        return self.kind == VARIABLE_RENEWABLE


@dataclass(frozen=True)
class StorageTech:
    """An electricity storage technology with separate energy/power sizing."""

    id: str
    c_i_sto_e: float  # EUR/MWh(cap) per annum
    c_i_sto_p: float  # EUR/MW(cap) per annum
    c_fix: float = 0.0  # EUR/MW per annum, charged on power capacity
    eta_in: float = 1.0
    eta_out: float = 1.0
    e_min: float = 0.0
    e_max: float = math.inf
    p_min: float = 0.0
    p_max: float = math.inf
    c_var_sto: float = 0.0  # EUR/MWh on discharge


@dataclass(frozen=True)
class Line:
    """A cross-border exchange corridor with expandable transfer capacity."""

    from_node: str
    to_node: str
    ntc_existing: float = 0.0
    ntc_max: float = 0.0
    c_inv_ntc: float = 0.0
    loss_factor: float = 0.0

    @property
    def id(self) -> str:
        return f"{self.from_node}-{self.to_node}"


@dataclass(frozen=True)
class ModelConfig:
    """Run settings, mirroring the keys of ``project_variables.csv``."""

    base_year: int = 2030
    end_hour: int = HOURS_PER_YEAR
    dispatch_only: bool = False
    network_transfer: bool = True
    infeasibility: bool = False
    slack_penalty: float = 10_000.0  # EUR/MWh on slack generation
    scenarios_iteration: bool = True
    skip_input: bool = False
    skip_iteration_data_file: bool = False
    no_crossover: bool = True  # accepted for compatibility; has no effect here
    guss: bool = True
    guss_parallel: bool = False
    guss_parallel_threads: int = 0  # 0 = all available cores
    data_input_file: str = "static_input"
    time_series_file: str = "timeseries_input"
    iteration_data_file: str = "iteration_data"
    gdx_convert_parallel_threads: int = 0
    write_npz: bool = True  # binary columnar store in addition to the csv store
    report_data: bool = True

    def horizon_share(self) -> float:
        """Fraction of a full year covered; scales annualized costs."""
        return self.end_hour / HOURS_PER_YEAR


@dataclass(frozen=True)
class FeatureMatrix:
    """Binary activation flags per (feature module, node)."""

    entries: dict[tuple[str, str], int] = field(default_factory=dict)

    @classmethod
    def all_off(cls, nodes: list[str], modules: tuple[str, ...] = FEATURE_MODULES) -> "FeatureMatrix":
        return cls({(m, n): 0 for m in modules for n in nodes})

    def active(self) -> list[tuple[str, str]]:
        return sorted(key for key, flag in self.entries.items() if flag)

    def validate(self) -> list[str]:
        issues = []
        for (module, node), flag in self.entries.items():
            if flag not in (0, 1):
                issues.append(
                    f"features_node_selection: entry ({module},{node}) must be 0 or 1, got {flag}"
                )
        return issues


@dataclass(frozen=True)
class SystemData:
    """The full exogenous parameterization of one model instance."""

    nodes: tuple[Node, ...]
    technologies: tuple[Technology, ...] = ()
    storages: tuple[StorageTech, ...] = ()
    lines: tuple[Line, ...] = ()
    series: dict[str, TimeSeries] = field(default_factory=dict)

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"unknown node {node_id!r}")

    def technology(self, tech_id: str) -> Technology:
        for t in self.technologies:
            if t.id == tech_id:
                return t
        raise KeyError(f"unknown technology {tech_id!r}")

    def storage(self, sto_id: str) -> StorageTech:
        for s in self.storages:
            if s.id == sto_id:
                return s
        raise KeyError(f"unknown storage {sto_id!r}")

    def line(self, line_id: str) -> Line:
        for l in self.lines:
            if l.id == line_id:
                return l
        raise KeyError(f"unknown line {line_id!r}")

    def demand_values(self, node_id: str, end_hour: int) -> tuple[float, ...]:
        return self.series[self.node(node_id).demand].values[:end_hour]

    def with_series(self, ts: TimeSeries) -> "SystemData":
        new = dict(self.series)
        new[ts.name] = ts
        return replace(self, series=new)


def validate_system(data: SystemData, config: ModelConfig) -> list[str]:
    """Check every declared field invariant; returns issues, empty if clean.

    Each message names the object and field so a failing load can be traced
    back to its input cell.
    """
    issues: list[str] = []
    h = config.end_hour

    if not 1 <= config.end_hour <= HOURS_PER_YEAR:
        issues.append(f"config: end_hour must be in [1, {HOURS_PER_YEAR}], got {config.end_hour}")

    seen_nodes: set[str] = set()
    for node in data.nodes:
        if node.id in seen_nodes:
            issues.append(f"node {node.id}: id duplicated")
        seen_nodes.add(node.id)
        if not 0.0 <= node.min_renewable_share <= 1.0:
            issues.append(
                f"node {node.id}: min_renewable_share must be in [0, 1], got {node.min_renewable_share}"
            )
        if node.co2_cap is not None and node.co2_cap < 0:
            issues.append(f"node {node.id}: co2_cap must be >= 0, got {node.co2_cap}")
        series = data.series.get(node.demand)
        if series is None:
            issues.append(f"node {node.id}: demand references unknown series {node.demand!r}")
        elif len(series) < h:
            issues.append(
                f"node {node.id}: demand series {node.demand!r} has {len(series)} hours, "
                f"end_hour needs {h}"
            )

    seen_techs: set[str] = set()
    for tech in data.technologies:
        if tech.id in seen_techs:
            issues.append(f"technology {tech.id}: id duplicated")
        seen_techs.add(tech.id)
        if tech.kind not in TECH_KINDS:
            issues.append(f"technology {tech.id}: kind must be one of {TECH_KINDS}, got {tech.kind!r}")
        if tech.c_inv_power < 0:
            issues.append(f"technology {tech.id}: c_inv_power must be >= 0, got {tech.c_inv_power}")
        if tech.c_var < 0:
            issues.append(f"technology {tech.id}: c_var must be >= 0, got {tech.c_var}")
        if not 0 <= tech.cap_min <= tech.cap_max:
            issues.append(
                f"technology {tech.id}: need 0 <= cap_min <= cap_max, got [{tech.cap_min}, {tech.cap_max}]"
            )
        if tech.kind == VARIABLE_RENEWABLE:
            if not tech.availability:
                issues.append(f"technology {tech.id}: availability required for variable_renewable")
            else:
                for node_id in seen_nodes:
                    if node_id not in tech.availability:
                        issues.append(
                            f"technology {tech.id}: availability missing for node {node_id}"
                        )
                for node_id, series_name in tech.availability.items():
                    series = data.series.get(series_name)
                    if series is None:
                        issues.append(
                            f"technology {tech.id}: availability references unknown series "
                            f"{series_name!r} for node {node_id}"
                        )
                        continue
                    if len(series) < h:
                        issues.append(
                            f"technology {tech.id}: availability series {series_name!r} has "
                            f"{len(series)} hours, end_hour needs {h}"
                        )
                    elif any(not 0.0 <= v <= 1.0 for v in series.values[:h]):
                        issues.append(
                            f"technology {tech.id}: availability series {series_name!r} has "
                            f"values outside [0, 1]"
                        )
        elif tech.availability:
            issues.append(f"technology {tech.id}: availability only allowed for variable_renewable")

    seen_stos: set[str] = set()
    for sto in data.storages:
        if sto.id in seen_stos:
            issues.append(f"storage {sto.id}: id duplicated")
        seen_stos.add(sto.id)
        if not 0.0 < sto.eta_in <= 1.0:
            issues.append(f"storage {sto.id}: eta_in must be in (0, 1], got {sto.eta_in}")
        if not 0.0 < sto.eta_out <= 1.0:
            issues.append(f"storage {sto.id}: eta_out must be in (0, 1], got {sto.eta_out}")
        if not sto.e_min <= sto.e_max:
            issues.append(f"storage {sto.id}: need e_min <= e_max, got [{sto.e_min}, {sto.e_max}]")
        if not sto.p_min <= sto.p_max:
            issues.append(f"storage {sto.id}: need p_min <= p_max, got [{sto.p_min}, {sto.p_max}]")
        if sto.c_i_sto_e < 0 or sto.c_i_sto_p < 0:
            issues.append(f"storage {sto.id}: investment costs must be >= 0")

    seen_pairs: set[frozenset[str]] = set()
    for line in data.lines:
        if line.from_node == line.to_node:
            issues.append(f"line {line.id}: from_node and to_node must differ")
        pair = frozenset((line.from_node, line.to_node))
        if pair in seen_pairs:
            issues.append(f"line {line.id}: duplicate line for node pair")
        seen_pairs.add(pair)
        for end in (line.from_node, line.to_node):
            if end not in seen_nodes:
                issues.append(f"line {line.id}: references unknown node {end!r}")
        if not 0 <= line.ntc_existing <= line.ntc_max:
            issues.append(
                f"line {line.id}: need 0 <= ntc_existing <= ntc_max, "
                f"got [{line.ntc_existing}, {line.ntc_max}]"
            )
        if not 0.0 <= line.loss_factor < 1.0:
            issues.append(f"line {line.id}: loss_factor must be in [0, 1), got {line.loss_factor}")

    for name, ts in data.series.items():
        if name != ts.name:
            issues.append(f"series {name}: registered under mismatching name {ts.name!r}")
        if any(not math.isfinite(v) for v in ts.values):
            issues.append(f"series {name}: values must be finite")

    if config.infeasibility:
        worst = max((t.c_var for t in data.technologies), default=0.0)
        if config.slack_penalty <= worst:
            issues.append(
                f"config: slack_penalty ({config.slack_penalty}) must exceed every "
                f"c_var (max {worst}) when infeasibility is on"
            )

    return issues


def check_system(data: SystemData, config: ModelConfig) -> None:
    """Raise :class:`ValidationError` if any invariant is violated."""
    issues = validate_system(data, config)
    if issues:
        raise ValidationError(issues)
