"""Translate a :class:`SystemData` instance into a linear program.

The model minimizes total system cost over all consecutive hours of the
horizon: annualized investment and fixed costs of generation, storage and
transfer capacity (pro-rated to the horizon length) plus variable dispatch
costs. Decision variables and constraint rows are organized in *families*,
each a named block over a tuple of labeled dimensions; a family maps any
label combination to its column/row index arithmetically, which keeps the
registry small and lets coefficients be emitted as vectorized blocks.

Constraint families:

``BAL(n,h)``          hourly nodal energy balance (equality; dual = price)
``CAP_DISP(tech,n,h)`` dispatchable output capped by installed capacity
``CAP_RES(res,n,h)``  renewable output + curtailment = availability * capacity
``STO_BAL(sto,n,h)``  storage level recursion for h2..hH
``STO_CYCLE(sto,n)``  wrap-around level recursion linking h1 to hH
``STO_E_CAP``/``STO_P_IN_CAP``/``STO_P_OUT_CAP`` storage sizing limits
``FLOW_UP``/``FLOW_LO`` signed line flow bounded by transfer capacity
``RES_SHARE(n)``      minimum renewable generation share per node
``CO2_CAP(n)``        per-node emission cap, only where a cap is set
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .system import (
    FeatureMatrix,
    Line,
    ModelConfig,
    Node,
    StorageTech,
    SystemData,
    Technology,
    ValidationError,
    hour_label,
)

SENSE_LE = "L"
SENSE_EQ = "E"
SENSE_GE = "G"

#: Variable families holding capacity decisions; these are the columns fixed
#: in dispatch-only mode.
CAPACITY_FAMILIES = ("N", "N_STO_E", "N_STO_P", "NTC")


@dataclass(frozen=True)
class Family:
    """A named block of columns or rows over labeled dimensions."""

    name: str
    dims: tuple[str, ...]
    elements: tuple[tuple[str, ...], ...]
    start: int
    sense: str | None = None  # rows only
    _lookup: tuple[dict[str, int], ...] = field(repr=False, default=())

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) for e in self.elements)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape)) if self.elements else 1

    def grid(self) -> np.ndarray:
        """All indices of the family as an array of its natural shape."""
        return np.arange(self.start, self.start + self.size).reshape(self.shape)

    def index(self, key: tuple[str, ...]) -> int:
        if len(key) != len(self.dims):
            raise KeyError(f"{self.name}: key {key} does not match dims {self.dims}")
        idx = 0
        for label, lookup, dim_size in zip(key, self._lookup, self.shape):
            try:
                pos = lookup[label]
            except KeyError:
                raise KeyError(f"{self.name}: unknown element {label!r} in {key}") from None
            idx = idx * dim_size + pos
        return self.start + idx

    def key_of(self, flat: int) -> tuple[str, ...]:
        offset = flat - self.start
        key = []
        for dim_size, labels in zip(reversed(self.shape), reversed(self.elements)):
            offset, pos = divmod(offset, dim_size)
            key.append(labels[pos])
        return tuple(reversed(key))

    def keys(self) -> Iterable[tuple[str, ...]]:
        size = self.size
        for flat in range(self.start, self.start + size):
            yield self.key_of(flat)


def _make_family(name, dims, elements, start, sense=None) -> Family:
    lookup = tuple({label: i for i, label in enumerate(labels)} for labels in elements)
    return Family(name, tuple(dims), tuple(tuple(e) for e in elements), start, sense, lookup)


class LinearProgram:
    """A compiled optimization problem with a name/domain registry.

    Columns and rows live in :class:`Family` blocks; coefficients are stored
    as sparse (row, col, value) triplets. Instances are treated as immutable
    once built: anything that needs to mutate works on a :meth:`copy`.
    """

    def __init__(self):
        self.var_families: dict[str, Family] = {}
        self.row_families: dict[str, Family] = {}
        self.n_cols = 0
        self.n_rows = 0
        self.obj = np.zeros(0)
        self.lo = np.zeros(0)
        self.hi = np.zeros(0)
        self.rhs = np.zeros(0)
        self.sense = np.zeros(0, dtype="<U1")
        self.a_rows = np.zeros(0, dtype=np.int64)
        self.a_cols = np.zeros(0, dtype=np.int64)
        self.a_vals = np.zeros(0)
        self._col_starts: list[tuple[int, str]] = []
        self._row_starts: list[tuple[int, str]] = []

    # -- registry ---------------------------------------------------------

    def col_index(self, name: str, key: tuple[str, ...] = ()) -> int:
        fam = self.var_families.get(name)
        if fam is None:
            raise KeyError(f"unknown variable {name!r}")
        return fam.index(key)

    def row_index(self, name: str, key: tuple[str, ...] = ()) -> int:
        fam = self.row_families.get(name)
        if fam is None:
            raise KeyError(f"unknown constraint {name!r}")
        return fam.index(key)

    def col_label(self, j: int) -> str:
        name = self._locate(self._col_starts, j)
        fam = self.var_families[name]
        key = fam.key_of(j)
        return f"{name}({','.join(key)})" if key else name

    def row_label(self, i: int) -> str:
        name = self._locate(self._row_starts, i)
        fam = self.row_families[name]
        key = fam.key_of(i)
        return f"{name}({','.join(key)})" if key else name

    @staticmethod
    def _locate(starts: list[tuple[int, str]], idx: int) -> str:
        pos = bisect.bisect_right(starts, (idx, "￿")) - 1
        return starts[pos][1]

    # -- lifecycle --------------------------------------------------------

    def copy(self) -> "LinearProgram":
        dup = LinearProgram()
        dup.var_families = self.var_families
        dup.row_families = self.row_families
        dup.n_cols = self.n_cols
        dup.n_rows = self.n_rows
        dup.obj = self.obj.copy()
        dup.lo = self.lo.copy()
        dup.hi = self.hi.copy()
        dup.rhs = self.rhs.copy()
        dup.sense = self.sense  # senses never change after build
        dup.a_rows = self.a_rows
        dup.a_cols = self.a_cols
        dup.a_vals = self.a_vals.copy()
        dup._col_starts = self._col_starts
        dup._row_starts = self._row_starts
        dup.sets = getattr(self, "sets", {})
        return dup

    def validate(self) -> None:
        """Raise if the compiled program violates its structural invariants."""
        if self.a_rows.size:
            if self.a_rows.min() < 0 or self.a_rows.max() >= self.n_rows:
                raise ValueError("coefficient references a row outside the registry")
            if self.a_cols.min() < 0 or self.a_cols.max() >= self.n_cols:
                raise ValueError("coefficient references a column outside the registry")
        bad = np.nonzero(self.lo > self.hi)[0]
        if bad.size:
            raise ValueError(f"bounds lo > hi on column {self.col_label(int(bad[0]))}")
        if not set(np.unique(self.sense)) <= {SENSE_LE, SENSE_EQ, SENSE_GE}:
            raise ValueError("invalid row sense")


@dataclass
class _Build:
    """Mutable assembly state threaded through the emit_* stages."""

    data: SystemData
    config: ModelConfig
    nodes: list[Node]
    techs: list[Technology]
    lines: list[Line]
    hours: list[str]
    lp: LinearProgram
    demand: np.ndarray | None = None  # (n_nodes, H)
    tri_rows: list[np.ndarray] = field(default_factory=list)
    tri_cols: list[np.ndarray] = field(default_factory=list)
    tri_vals: list[np.ndarray] = field(default_factory=list)
    col_lo: list[np.ndarray] = field(default_factory=list)
    col_hi: list[np.ndarray] = field(default_factory=list)
    row_rhs: list[np.ndarray] = field(default_factory=list)
    row_sense: list[np.ndarray] = field(default_factory=list)

    @property
    def disp(self) -> list[Technology]:
        return [t for t in self.techs if not t.is_renewable]

    @property
    def res(self) -> list[Technology]:
        return [t for t in self.techs if t.is_renewable]

    @property
    def storages(self) -> list[StorageTech]:
        return list(self.data.storages)

    @property
    def H(self) -> int:
        return self.config.end_hour

    @staticmethod
    def _spread(value, size: int) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            return np.full(size, float(arr))
        arr = arr.ravel()
        if arr.size != size:
            raise ValueError(f"value block has {arr.size} entries, family needs {size}")
        return arr

    def add_vars(self, name, dims, elements, lo=0.0, hi=math.inf) -> Family | None:
        if any(len(e) == 0 for e in elements):
            return None
        fam = _make_family(name, dims, elements, self.lp.n_cols)
        self.lp.var_families[name] = fam
        self.lp._col_starts.append((fam.start, name))
        self.lp.n_cols += fam.size
        self.col_lo.append(self._spread(lo, fam.size))
        self.col_hi.append(self._spread(hi, fam.size))
        return fam

    def add_rows(self, name, dims, elements, sense, rhs=0.0) -> Family | None:
        if any(len(e) == 0 for e in elements):
            return None
        fam = _make_family(name, dims, elements, self.lp.n_rows, sense)
        self.lp.row_families[name] = fam
        self.lp._row_starts.append((fam.start, name))
        self.lp.n_rows += fam.size
        self.row_rhs.append(self._spread(rhs, fam.size))
        self.row_sense.append(np.full(fam.size, sense, dtype="<U1"))
        return fam

    def add_entries(self, rows: np.ndarray, cols: np.ndarray, vals) -> None:
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = self._spread(vals, rows.size)
        if rows.size:
            self.tri_rows.append(rows)
            self.tri_cols.append(cols)
            self.tri_vals.append(vals)

    def series_matrix(self, names: list[str]) -> np.ndarray:
        """Stack the first H values of the named series into a (len, H) array."""
        return np.array([self.data.series[n].values[: self.H] for n in names], dtype=float)


def build_model(
    data: SystemData,
    config: ModelConfig,
    features: FeatureMatrix | None = None,
    country_set: list[str] | None = None,
) -> LinearProgram:
    """Compile the dispatch-and-investment LP for the selected countries.

    ``country_set`` restricts the model to a subset of nodes (``None`` keeps
    all of them); lines are included only when both endpoints are selected.
    Raises :class:`ValidationError` for an unknown country, a time series
    shorter than the horizon, or any active optional-feature flag.
    """
    issues: list[str] = []
    known = {n.id for n in data.nodes}
    if country_set is not None:
        for node_id in country_set:
            if node_id not in known:
                issues.append(f"country_set: unknown node {node_id!r}")
    selected = set(country_set) if country_set is not None else known

    H = config.end_hour
    for node in data.nodes:
        if node.id not in selected:
            continue
        ts = data.series.get(node.demand)
        if ts is not None and len(ts) < H:
            issues.append(f"series {node.demand!r}: {len(ts)} hours < end_hour {H}")
    for tech in data.technologies:
        if tech.is_renewable and tech.availability:
            for node_id, series_name in tech.availability.items():
                if node_id not in selected:
                    continue
                ts = data.series.get(series_name)
                if ts is not None and len(ts) < H:
                    issues.append(f"series {series_name!r}: {len(ts)} hours < end_hour {H}")
    if features is not None:
        for module, node_id in features.active():
            issues.append(f"feature {module!r} active for node {node_id!r}: not supported")
    if issues:
        raise ValidationError(issues)

    nodes = [n for n in data.nodes if n.id in selected]
    lines = [
        l
        for l in data.lines
        if config.network_transfer and l.from_node in selected and l.to_node in selected
    ]
    build = _Build(
        data=data,
        config=config,
        nodes=nodes,
        techs=list(data.technologies),
        lines=lines,
        hours=[hour_label(h) for h in range(1, H + 1)],
        lp=LinearProgram(),
    )
    build.demand = build.series_matrix([n.demand for n in nodes])

    _declare_variables(build)
    emit_energy_balance(build)
    emit_capacity_limits(build)
    emit_storage_dynamics(build)
    if build.lines:
        _emit_flow_limits(build)
    emit_policy_constraints(build)
    _finalize(build)
    assemble_objective(build.lp, data, config)

    lp = build.lp
    lp.sets = {
        "n": tuple(n.id for n in nodes),
        "tech": tuple(t.id for t in build.techs),
        "disp": tuple(t.id for t in build.disp),
        "res": tuple(t.id for t in build.res),
        "sto": tuple(s.id for s in build.storages),
        "l": tuple(l.id for l in lines),
        "h": tuple(build.hours),
    }
    lp.validate()
    return lp


def _declare_variables(b: _Build) -> None:
    node_ids = [n.id for n in b.nodes]
    tech_ids = [t.id for t in b.techs]
    res_ids = [t.id for t in b.res]
    sto_ids = [s.id for s in b.storages]
    line_ids = [l.id for l in b.lines]

    b.add_vars("G", ("tech", "n", "h"), (tech_ids, node_ids, b.hours))
    b.add_vars("CU", ("res", "n", "h"), (res_ids, node_ids, b.hours))
    b.add_vars(
        "N",
        ("tech", "n"),
        (tech_ids, node_ids),
        lo=np.array([[t.cap_min] * len(node_ids) for t in b.techs]),
        hi=np.array([[t.cap_max] * len(node_ids) for t in b.techs]),
    )
    b.add_vars("STO_IN", ("sto", "n", "h"), (sto_ids, node_ids, b.hours))
    b.add_vars("STO_OUT", ("sto", "n", "h"), (sto_ids, node_ids, b.hours))
    b.add_vars("STO_L", ("sto", "n", "h"), (sto_ids, node_ids, b.hours))
    b.add_vars(
        "N_STO_E",
        ("sto", "n"),
        (sto_ids, node_ids),
        lo=np.array([[s.e_min] * len(node_ids) for s in b.storages]),
        hi=np.array([[s.e_max] * len(node_ids) for s in b.storages]),
    )
    b.add_vars(
        "N_STO_P",
        ("sto", "n"),
        (sto_ids, node_ids),
        lo=np.array([[s.p_min] * len(node_ids) for s in b.storages]),
        hi=np.array([[s.p_max] * len(node_ids) for s in b.storages]),
    )
    if b.lines:
        b.add_vars("F", ("l", "h"), (line_ids, b.hours), lo=-math.inf, hi=math.inf)
        b.add_vars(
            "NTC",
            ("l",),
            (line_ids,),
            lo=np.array([l.ntc_existing for l in b.lines]),
            hi=np.array([l.ntc_max for l in b.lines]),
        )
    if b.config.infeasibility:
        b.add_vars("SLACK", ("n", "h"), (node_ids, b.hours))


def emit_energy_balance(b: _Build) -> None:
    """BAL(n,h): generation + storage out - storage in + net imports + slack = demand."""
    bal = b.add_rows("BAL", ("n", "h"), ([n.id for n in b.nodes], b.hours), SENSE_EQ, rhs=b.demand)
    lp = b.lp
    g = lp.var_families["G"].grid()
    for t_i in range(len(b.techs)):
        b.add_entries(bal.grid(), g[t_i], 1.0)
    if b.storages:
        sto_in = lp.var_families["STO_IN"].grid()
        sto_out = lp.var_families["STO_OUT"].grid()
        for s_i in range(len(b.storages)):
            b.add_entries(bal.grid(), sto_out[s_i], 1.0)
            b.add_entries(bal.grid(), sto_in[s_i], -1.0)
    if b.lines:
        flow = lp.var_families["F"].grid()
        node_pos = {n.id: i for i, n in enumerate(b.nodes)}
        for l_i, line in enumerate(b.lines):
            # Exports leave at full value; imports arrive net of losses.
            b.add_entries(bal.grid()[node_pos[line.from_node]], flow[l_i], -1.0)
            b.add_entries(bal.grid()[node_pos[line.to_node]], flow[l_i], 1.0 - line.loss_factor)
    if b.config.infeasibility:
        slack = lp.var_families["SLACK"].grid()
        b.add_entries(bal.grid(), slack, 1.0)


def emit_capacity_limits(b: _Build) -> None:
    """Hourly output limits: G <= N for dispatchables, G + CU = phi*N for renewables."""
    lp = b.lp
    node_ids = [n.id for n in b.nodes]
    g = lp.var_families["G"].grid()
    n_grid = lp.var_families["N"].grid()
    tech_pos = {t.id: i for i, t in enumerate(b.techs)}

    disp_ids = [t.id for t in b.disp]
    cap_disp = b.add_rows("CAP_DISP", ("tech", "n", "h"), (disp_ids, node_ids, b.hours), SENSE_LE)
    if cap_disp is not None:
        for d_i, tech in enumerate(b.disp):
            t_i = tech_pos[tech.id]
            rows = cap_disp.grid()[d_i]
            b.add_entries(rows, g[t_i], 1.0)
            b.add_entries(rows, np.broadcast_to(n_grid[t_i][:, None], rows.shape), -1.0)

    res_ids = [t.id for t in b.res]
    cap_res = b.add_rows("CAP_RES", ("res", "n", "h"), (res_ids, node_ids, b.hours), SENSE_EQ)
    if cap_res is not None:
        cu = lp.var_families["CU"].grid()
        for r_i, tech in enumerate(b.res):
            if not tech.availability:
                raise ValidationError(f"technology {tech.id}: missing availability series")
            missing = [n for n in node_ids if n not in tech.availability]
            if missing:
                raise ValidationError(
                    f"technology {tech.id}: missing availability series for node {missing[0]!r}"
                )
            phi = b.series_matrix([tech.availability[n] for n in node_ids])
            t_i = tech_pos[tech.id]
            rows = cap_res.grid()[r_i]
            b.add_entries(rows, g[t_i], 1.0)
            b.add_entries(rows, cu[r_i], 1.0)
            b.add_entries(rows, np.broadcast_to(n_grid[t_i][:, None], rows.shape), -phi)


def emit_storage_dynamics(b: _Build) -> None:
    """Level recursion with charge/discharge losses, sizing caps, cyclic closure.

    The first hour links back to the last so that no free energy enters or
    leaves over the horizon: L(h1) = L(hH) + eta_in*IN(h1) - OUT(h1)/eta_out.
    """
    if not b.storages:
        return
    lp = b.lp
    node_ids = [n.id for n in b.nodes]
    sto_ids = [s.id for s in b.storages]
    sto_in = lp.var_families["STO_IN"].grid()
    sto_out = lp.var_families["STO_OUT"].grid()
    sto_l = lp.var_families["STO_L"].grid()
    e_cap = lp.var_families["N_STO_E"].grid()
    p_cap = lp.var_families["N_STO_P"].grid()

    if b.H > 1:
        bal = b.add_rows("STO_BAL", ("sto", "n", "h"), (sto_ids, node_ids, b.hours[1:]), SENSE_EQ)
    else:
        bal = None
    cyc = b.add_rows("STO_CYCLE", ("sto", "n"), (sto_ids, node_ids), SENSE_EQ)
    for s_i, sto in enumerate(b.storages):
        if bal is not None:
            rows = bal.grid()[s_i]
            b.add_entries(rows, sto_l[s_i][:, 1:], 1.0)
            b.add_entries(rows, sto_l[s_i][:, :-1], -1.0)
            b.add_entries(rows, sto_in[s_i][:, 1:], -sto.eta_in)
            b.add_entries(rows, sto_out[s_i][:, 1:], 1.0 / sto.eta_out)
        # A 1-hour horizon collapses the cycle row to charge == discharge:
        # the two level terms cancel, leaving only the flow terms.
        rows = cyc.grid()[s_i]
        if b.H > 1:
            b.add_entries(rows, sto_l[s_i][:, 0], 1.0)
            b.add_entries(rows, sto_l[s_i][:, -1], -1.0)
        b.add_entries(rows, sto_in[s_i][:, 0], -sto.eta_in)
        b.add_entries(rows, sto_out[s_i][:, 0], 1.0 / sto.eta_out)

    e_rows = b.add_rows("STO_E_CAP", ("sto", "n", "h"), (sto_ids, node_ids, b.hours), SENSE_LE)
    in_rows = b.add_rows("STO_P_IN_CAP", ("sto", "n", "h"), (sto_ids, node_ids, b.hours), SENSE_LE)
    out_rows = b.add_rows("STO_P_OUT_CAP", ("sto", "n", "h"), (sto_ids, node_ids, b.hours), SENSE_LE)
    H = b.H
    for s_i in range(len(b.storages)):
        b.add_entries(e_rows.grid()[s_i], sto_l[s_i], 1.0)
        b.add_entries(e_rows.grid()[s_i], np.broadcast_to(e_cap[s_i][:, None], (len(node_ids), H)), -1.0)
        b.add_entries(in_rows.grid()[s_i], sto_in[s_i], 1.0)
        b.add_entries(in_rows.grid()[s_i], np.broadcast_to(p_cap[s_i][:, None], (len(node_ids), H)), -1.0)
        b.add_entries(out_rows.grid()[s_i], sto_out[s_i], 1.0)
        b.add_entries(out_rows.grid()[s_i], np.broadcast_to(p_cap[s_i][:, None], (len(node_ids), H)), -1.0)


def _emit_flow_limits(b: _Build) -> None:
    lp = b.lp
    flow = lp.var_families["F"].grid()
    ntc = lp.var_families["NTC"].grid()
    line_ids = [l.id for l in b.lines]
    up = b.add_rows("FLOW_UP", ("l", "h"), (line_ids, b.hours), SENSE_LE)
    lo = b.add_rows("FLOW_LO", ("l", "h"), (line_ids, b.hours), SENSE_LE)
    for l_i in range(len(b.lines)):
        b.add_entries(up.grid()[l_i], flow[l_i], 1.0)
        b.add_entries(up.grid()[l_i], np.broadcast_to(ntc[l_i], (b.H,)), -1.0)
        b.add_entries(lo.grid()[l_i], flow[l_i], -1.0)
        b.add_entries(lo.grid()[l_i], np.broadcast_to(ntc[l_i], (b.H,)), -1.0)


def emit_policy_constraints(b: _Build) -> None:
    """Per-node renewable share floors and emission caps.

    The share row counts gross renewable generation (after curtailment)
    against gross demand; nodes with a zero share get no row at all.
    """
    lp = b.lp
    g = lp.var_families["G"].grid()
    tech_pos = {t.id: i for i, t in enumerate(b.techs)}
    node_pos = {n.id: i for i, n in enumerate(b.nodes)}

    share_nodes = [n for n in b.nodes if n.min_renewable_share > 0.0]
    if share_nodes and b.res:
        rhs = np.array(
            [n.min_renewable_share * b.demand[node_pos[n.id]].sum() for n in share_nodes]
        )
        fam = b.add_rows("RES_SHARE", ("n",), ([n.id for n in share_nodes],), SENSE_GE, rhs=rhs)
        for i, node in enumerate(share_nodes):
            row = fam.start + i
            for tech in b.res:
                cols = g[tech_pos[tech.id], node_pos[node.id]]
                b.add_entries(np.full(cols.shape, row), cols, 1.0)

    cap_nodes = [n for n in b.nodes if n.co2_cap is not None]
    if cap_nodes:
        fam = b.add_rows(
            "CO2_CAP",
            ("n",),
            ([n.id for n in cap_nodes],),
            SENSE_LE,
            rhs=np.array([n.co2_cap for n in cap_nodes]),
        )
        for i, node in enumerate(cap_nodes):
            row = fam.start + i
            for tech in b.techs:
                if tech.co2_intensity == 0.0:
                    continue
                cols = g[tech_pos[tech.id], node_pos[node.id]]
                b.add_entries(np.full(cols.shape, row), cols, tech.co2_intensity)


def _finalize(b: _Build) -> None:
    lp = b.lp
    lp.lo = np.concatenate(b.col_lo) if b.col_lo else np.zeros(0)
    lp.hi = np.concatenate(b.col_hi) if b.col_hi else np.zeros(0)
    lp.rhs = np.concatenate(b.row_rhs) if b.row_rhs else np.zeros(0)
    lp.sense = np.concatenate(b.row_sense) if b.row_sense else np.zeros(0, dtype="<U1")
    lp.a_rows = np.concatenate(b.tri_rows) if b.tri_rows else np.zeros(0, dtype=np.int64)
    lp.a_cols = np.concatenate(b.tri_cols) if b.tri_cols else np.zeros(0, dtype=np.int64)
    lp.a_vals = np.concatenate(b.tri_vals) if b.tri_vals else np.zeros(0)
    lp._col_starts.sort()
    lp._row_starts.sort()
    lp.obj = np.zeros(lp.n_cols)


def assemble_objective(lp: LinearProgram, data: SystemData, config: ModelConfig) -> np.ndarray:
    """Fill the cost vector; annualized cost terms scale with horizon share.

    Variable costs apply per hour as-is; investment and fixed costs are
    multiplied by end_hour/8760 so that partial horizons still trade off
    building against dispatching consistently.
    """
    scale = config.horizon_share()
    obj = np.zeros(lp.n_cols)

    fam = lp.var_families.get("G")
    if fam is not None:
        grid = fam.grid()
        for t_i, tech_id in enumerate(fam.elements[0]):
            obj[grid[t_i].ravel()] = data.technology(tech_id).c_var
    fam = lp.var_families.get("N")
    if fam is not None:
        grid = fam.grid()
        for t_i, tech_id in enumerate(fam.elements[0]):
            tech = data.technology(tech_id)
            obj[grid[t_i].ravel()] = scale * (tech.c_inv_power + tech.c_fix)
    fam = lp.var_families.get("STO_OUT")
    if fam is not None:
        grid = fam.grid()
        for s_i, sto_id in enumerate(fam.elements[0]):
            obj[grid[s_i].ravel()] = data.storage(sto_id).c_var_sto
    fam = lp.var_families.get("N_STO_E")
    if fam is not None:
        grid = fam.grid()
        for s_i, sto_id in enumerate(fam.elements[0]):
            obj[grid[s_i].ravel()] = scale * data.storage(sto_id).c_i_sto_e
    fam = lp.var_families.get("N_STO_P")
    if fam is not None:
        grid = fam.grid()
        for s_i, sto_id in enumerate(fam.elements[0]):
            sto = data.storage(sto_id)
            obj[grid[s_i].ravel()] = scale * (sto.c_i_sto_p + sto.c_fix)
    fam = lp.var_families.get("NTC")
    if fam is not None:
        grid = fam.grid()
        for l_i, line_id in enumerate(fam.elements[0]):
            obj[grid[l_i]] = scale * data.line(line_id).c_inv_ntc
    fam = lp.var_families.get("SLACK")
    if fam is not None:
        obj[fam.start : fam.start + fam.size] = config.slack_penalty

    lp.obj = obj
    return obj


def apply_dispatch_only(
    lp: LinearProgram, fixed_capacities: Mapping[tuple[str, tuple[str, ...]], float]
) -> LinearProgram:
    """Fix every capacity column to the given MW value (by bounds).

    Objective coefficients stay in place so the reported total cost still
    includes the fixed-cost block. Raises :class:`ValidationError` when any
    capacity column has no value in ``fixed_capacities``.
    """
    fixed = lp.copy()
    missing: list[str] = []
    for fam_name in CAPACITY_FAMILIES:
        fam = lp.var_families.get(fam_name)
        if fam is None:
            continue
        for key in fam.keys():
            value = fixed_capacities.get((fam_name, key))
            if value is None:
                missing.append(f"{fam_name}({','.join(key)})")
                continue
            j = fam.index(key)
            fixed.lo[j] = value
            fixed.hi[j] = value
    if missing:
        raise ValidationError([f"dispatch_only: no fixed capacity for {m}" for m in missing])
    fixed.validate()
    return fixed


def count_columns(
    n_nodes: int,
    n_tech: int,
    n_res: int,
    n_sto: int,
    n_lines: int,
    H: int,
    infeasibility: bool = False,
) -> int:
    """Closed-form column count of :func:`build_model` (see README)."""
    cols = H * n_nodes * (n_tech + n_res + 3 * n_sto) + n_nodes * (n_tech + 2 * n_sto)
    cols += n_lines * (H + 1)
    if infeasibility:
        cols += n_nodes * H
    return cols


def count_rows(
    n_nodes: int,
    n_disp: int,
    n_res: int,
    n_sto: int,
    n_lines: int,
    H: int,
    n_share_nodes: int,
    n_co2_nodes: int,
) -> int:
    """Closed-form row count of :func:`build_model` (see README)."""
    rows = H * n_nodes * (1 + n_disp + n_res + 4 * n_sto)
    rows += 2 * n_lines * H
    rows += (n_share_nodes if n_res else 0) + n_co2_nodes
    return rows
