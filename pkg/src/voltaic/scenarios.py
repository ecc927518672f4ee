"""Scenario table parsing and sweep execution.

Every row of ``iteration_table.csv`` is one scenario run: the first column
holds the run id, every other column heading is a symbol reference whose
cells override the base model for that run only. Overrides never leak
between rows; each run sees the base model plus its own changes.

Column headings:

* ``c_i_sto_e(n,'Li-ion')`` - parameter override; set names fan out over
  every element, quoted literals pin one element.
* ``d('DE')`` / ``phi('solar','DE')`` - time series override; the cell
  names an alternative series (from ``iteration_data`` or the base data).
* ``N.fx('gas','DE')`` / ``N.lo(...)`` / ``N.up(...)`` - variable bound
  overrides; ``fx`` fixes by setting both bounds.
* ``country_set`` - cell lists the node ids to include in that run.
* a bare constraint-block name (see ``constraints_list.csv``) - the cell
  selects a named choice, e.g. ``renewable_share`` -> ``off``.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .model import LinearProgram, apply_dispatch_only, build_model
from .solver import Delta, ModelInstance, Solution, compile as compile_instance
from .system import FeatureMatrix, ModelConfig, SystemData, ValidationError

MODES = ("rebuild", "single_instance", "parallel")

PARAMETER = "parameter"
TIMESERIES = "timeseries"
VARIABLE_FIX = "variable_fix"
VARIABLE_LO = "variable_lo"
VARIABLE_UP = "variable_up"
CONSTRAINT_CHOICE = "constraint_choice"
COUNTRY_SET = "country_set"

_SUFFIX_KINDS = {"fx": VARIABLE_FIX, "lo": VARIABLE_LO, "up": VARIABLE_UP}

#: Parameter catalog: canonical domain per overridable parameter.
PARAMETER_DOMAINS: dict[str, tuple[str, ...]] = {
    "c_i_sto_e": ("n", "sto"),
    "c_i_sto_p": ("n", "sto"),
    "c_fix_sto": ("n", "sto"),
    "c_var_sto": ("n", "sto"),
    "c_inv_power": ("n", "tech"),
    "c_fix": ("n", "tech"),
    "c_var": ("n", "tech"),
    "c_inv_ntc": ("l",),
    "co2_cap": ("n",),
    "min_renewable_share": ("n",),
}

TIMESERIES_DOMAINS: dict[str, tuple[str, ...]] = {
    "d": ("n",),
    "phi": ("res", "n"),
}

#: Named alternative constraint blocks selectable per scenario row.
CONSTRAINT_BLOCKS: dict[str, tuple[str, ...]] = {
    "renewable_share": ("on", "off"),
    "co2_cap": ("on", "off"),
}

# Subset set names that may address a wider dimension.
_SET_ALIASES = {"res": "tech", "disp": "tech"}

_HEADER_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\.(fx|lo|up))?(?:\((.*)\))?$")


@dataclass(frozen=True)
class SymbolRef:
    """A parsed column heading: symbol name, domain, and what it targets."""

    name: str
    domain: tuple[tuple[str, str], ...]  # ("set", name) or ("lit", element)
    target_kind: str

    def render(self) -> str:
        suffix = {VARIABLE_FIX: ".fx", VARIABLE_LO: ".lo", VARIABLE_UP: ".up"}.get(
            self.target_kind, ""
        )
        if not self.domain and suffix == "":
            return self.name
        inner = ",".join(f"'{v}'" if k == "lit" else v for k, v in self.domain)
        return f"{self.name}{suffix}({inner})" if self.domain else f"{self.name}{suffix}"


@dataclass(frozen=True)
class ScenarioSpec:
    """One row of the iteration table."""

    run_id: str
    overrides: tuple[tuple[SymbolRef, object], ...] = ()
    country_set: tuple[str, ...] | None = None
    constraint_choices: dict[str, str] = field(default_factory=dict)


def _split_domain(text: str) -> list[str]:
    parts: list[str] = []
    depth = 0
    quoted = False
    current = ""
    for ch in text:
        if ch == "'":
            quoted = not quoted
            current += ch
        elif ch == "," and not quoted and depth == 0:
            parts.append(current)
            current = ""
        else:
            if ch == "(" and not quoted:
                depth += 1
            elif ch == ")" and not quoted:
                depth -= 1
            current += ch
    if quoted or depth != 0:
        raise ValidationError(f"iteration_table: unbalanced quotes/parentheses in {text!r}")
    parts.append(current)
    return parts


def parse_symbol_ref(text: str) -> SymbolRef:
    """Parse one column heading; round-trips through :meth:`SymbolRef.render`."""
    raw = text.strip()
    if raw == COUNTRY_SET:
        return SymbolRef(COUNTRY_SET, (), COUNTRY_SET)
    if raw.count("(") != raw.count(")") or raw.count("'") % 2 != 0:
        raise ValidationError(f"iteration_table: unbalanced quotes/parentheses in {raw!r}")
    m = _HEADER_RE.match(raw)
    if m is None:
        raise ValidationError(f"iteration_table: malformed column heading {raw!r}")
    name, suffix, inner = m.groups()
    domain: list[tuple[str, str]] = []
    if inner is not None:
        if inner.strip() == "":
            raise ValidationError(f"iteration_table: empty domain in {raw!r}")
        for part in _split_domain(inner):
            entry = part.strip()
            if not entry:
                raise ValidationError(f"iteration_table: empty domain entry in {raw!r}")
            if entry.startswith("'") and entry.endswith("'") and len(entry) >= 2:
                domain.append(("lit", entry[1:-1]))
            elif "'" in entry:
                raise ValidationError(f"iteration_table: stray quote in domain entry {entry!r}")
            else:
                domain.append(("set", entry))
    # A name can be both a parameter and a constraint block (co2_cap): the
    # presence of a domain decides which one is meant.
    if suffix:
        kind = _SUFFIX_KINDS[suffix]
    elif name in TIMESERIES_DOMAINS:
        kind = TIMESERIES
    elif domain and name in PARAMETER_DOMAINS:
        kind = PARAMETER
    elif not domain:
        kind = CONSTRAINT_CHOICE
    else:
        kind = PARAMETER  # unknown; reported when the override is expanded
    return SymbolRef(name, tuple(domain), kind)


def parse_iteration_table(csv_text: str) -> list[ScenarioSpec]:
    """Parse the scenario table into one spec per row.

    The first column holds run ids; an absent ``country_set`` column means
    every node of the dataset participates in every run.
    """
    rows = [r for r in csv.reader(io.StringIO(csv_text)) if any(cell.strip() for cell in r)]
    if not rows:
        return []
    header = rows[0]
    refs = [parse_symbol_ref(cell) for cell in header[1:]]

    specs: list[ScenarioSpec] = []
    seen: set[str] = set()
    for row in rows[1:]:
        run_id = row[0].strip()
        if not run_id:
            raise ValidationError("iteration_table: empty run id")
        if run_id in seen:
            raise ValidationError(f"iteration_table: duplicate run id {run_id!r}")
        seen.add(run_id)
        overrides: list[tuple[SymbolRef, object]] = []
        country: tuple[str, ...] | None = None
        choices: dict[str, str] = {}
        for ref, cell in zip(refs, row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            if ref.target_kind == COUNTRY_SET:
                country = tuple(t for t in re.split(r"[,;\s]+", cell) if t)
            elif ref.target_kind == CONSTRAINT_CHOICE:
                choices[ref.name] = cell
            elif ref.target_kind == TIMESERIES:
                overrides.append((ref, cell))
            else:
                try:
                    overrides.append((ref, float(cell)))
                except ValueError:
                    raise ValidationError(
                        f"iteration_table: run {run_id}: non-numeric value {cell!r} "
                        f"for column {ref.render()!r}"
                    ) from None
        specs.append(ScenarioSpec(run_id, tuple(overrides), country, choices))
    return specs


def _match_domain(
    ref: SymbolRef, dims: tuple[str, ...], sets: dict[str, tuple[str, ...]]
) -> list[list[str]]:
    """Resolve the domain entries against the target dimensions.

    Returns one element list per dimension. Literal entries are validated
    against the dimension's elements; set-name entries fan out over the
    whole dimension. Entries are matched positionally first and by a
    permutation search otherwise, so ``N.fx('DE','gas')`` and
    ``N.fx('gas','DE')`` both resolve.
    """
    if len(ref.domain) != len(dims):
        raise ValidationError(
            f"override {ref.render()!r}: domain arity {len(ref.domain)} does not match "
            f"dimensions {dims}"
        )

    def fits(entry: tuple[str, str], dim: str) -> bool:
        kind, value = entry
        if kind == "set":
            return value == dim or _SET_ALIASES.get(value) == dim
        return value in sets.get(dim, ())

    def resolve(order: tuple[int, ...]) -> list[list[str]] | None:
        out: list[list[str]] = [[] for _ in dims]
        for pos, entry_idx in enumerate(order):
            entry = ref.domain[entry_idx]
            if not fits(entry, dims[pos]):
                return None
            kind, value = entry
            out[pos] = list(sets[value]) if kind == "set" else [value]
        return out

    direct = resolve(tuple(range(len(dims))))
    if direct is not None:
        return direct
    from itertools import permutations

    for order in permutations(range(len(dims))):
        attempt = resolve(order)
        if attempt is not None:
            return attempt
    bad = ", ".join(v for _, v in ref.domain)
    raise ValidationError(
        f"override {ref.render()!r}: domain ({bad}) does not resolve against dimensions {dims}"
    )


class _Effective:
    """Parameter view of the base data with this row's overrides applied."""

    def __init__(self, data: SystemData, overrides: dict[tuple[str, tuple[str, ...]], float]):
        self.data = data
        self.overrides = overrides

    def get(self, param: str, key: tuple[str, ...], default: float) -> float:
        return self.overrides.get((param, key), default)


def expand_overrides(
    spec: ScenarioSpec,
    lp: LinearProgram,
    data: SystemData,
    config: ModelConfig,
    constraint_blocks: dict[str, tuple[str, ...]] | None = None,
) -> list[Delta]:
    """Turn one scenario row into solver deltas against the built program."""
    blocks = CONSTRAINT_BLOCKS if constraint_blocks is None else constraint_blocks
    sets = dict(lp.sets)
    sets["h"] = lp.sets["h"]
    scale = config.horizon_share()
    deltas: list[Delta] = []

    # First pass: collect scalar parameter overrides and series swaps so that
    # derived quantities (share rhs, combined cost terms) see this row's values.
    scalar: dict[tuple[str, tuple[str, ...]], float] = {}
    series_swap: dict[tuple[str, tuple[str, ...]], str] = {}
    for ref, value in spec.overrides:
        if ref.target_kind == PARAMETER:
            if ref.name not in PARAMETER_DOMAINS:
                raise ValidationError(f"override {ref.render()!r}: unknown parameter {ref.name!r}")
            dims = PARAMETER_DOMAINS[ref.name]
            for combo in product(*_match_domain(ref, dims, sets)):
                scalar[(ref.name, combo)] = float(value)
        elif ref.target_kind == TIMESERIES:
            dims = TIMESERIES_DOMAINS[ref.name]
            if str(value) not in data.series:
                raise ValidationError(
                    f"override {ref.render()!r}: unknown series {value!r}"
                )
            for combo in product(*_match_domain(ref, dims, sets)):
                series_swap[(ref.name, combo)] = str(value)

    eff = _Effective(data, scalar)
    H = config.end_hour

    def demand_series(node_id: str) -> tuple[float, ...]:
        name = series_swap.get(("d", (node_id,)), data.node(node_id).demand)
        return data.series[name].values[:H]

    share_rhs_dirty: set[str] = set()

    for (param, key) in sorted(scalar):
        value = scalar[(param, key)]
        if param == "c_i_sto_e":
            n, s = key
            deltas.append(Delta("obj", col=lp.col_index("N_STO_E", (s, n)), value=scale * value))
        elif param == "c_i_sto_p":
            n, s = key
            fix = eff.get("c_fix_sto", key, data.storage(s).c_fix)
            deltas.append(
                Delta("obj", col=lp.col_index("N_STO_P", (s, n)), value=scale * (value + fix))
            )
        elif param == "c_fix_sto":
            n, s = key
            inv = eff.get("c_i_sto_p", key, data.storage(s).c_i_sto_p)
            deltas.append(
                Delta("obj", col=lp.col_index("N_STO_P", (s, n)), value=scale * (inv + value))
            )
        elif param == "c_var_sto":
            n, s = key
            fam = lp.var_families["STO_OUT"]
            for h in sets["h"]:
                deltas.append(Delta("obj", col=fam.index((s, n, h)), value=value))
        elif param == "c_inv_power":
            n, t = key
            fix = eff.get("c_fix", key, data.technology(t).c_fix)
            deltas.append(Delta("obj", col=lp.col_index("N", (t, n)), value=scale * (value + fix)))
        elif param == "c_fix":
            n, t = key
            inv = eff.get("c_inv_power", key, data.technology(t).c_inv_power)
            deltas.append(Delta("obj", col=lp.col_index("N", (t, n)), value=scale * (inv + value)))
        elif param == "c_var":
            n, t = key
            fam = lp.var_families["G"]
            for h in sets["h"]:
                deltas.append(Delta("obj", col=fam.index((t, n, h)), value=value))
        elif param == "c_inv_ntc":
            (line_id,) = key
            deltas.append(Delta("obj", col=lp.col_index("NTC", (line_id,)), value=scale * value))
        elif param == "co2_cap":
            (n,) = key
            deltas.append(Delta("rhs", row=lp.row_index("CO2_CAP", (n,)), value=value))
        elif param == "min_renewable_share":
            share_rhs_dirty.add(key[0])

    for (name, key), series_name in sorted(series_swap.items()):
        values = data.series[series_name].values
        if len(values) < H:
            raise ValidationError(
                f"override series {series_name!r}: {len(values)} hours < end_hour {H}"
            )
        if name == "d":
            (n,) = key
            fam = lp.row_families["BAL"]
            for i, h in enumerate(sets["h"]):
                deltas.append(Delta("rhs", row=fam.index((n, h)), value=values[i]))
            share_rhs_dirty.add(n)
        elif name == "phi":
            res, n = key
            row_fam = lp.row_families.get("CAP_RES")
            if row_fam is None:
                raise ValidationError("override phi: no renewable capacity rows in model")
            col = lp.col_index("N", (res, n))
            for i, h in enumerate(sets["h"]):
                if not 0.0 <= values[i] <= 1.0:
                    raise ValidationError(
                        f"override series {series_name!r}: availability outside [0, 1]"
                    )
                deltas.append(Delta("coef", row=row_fam.index((res, n, h)), col=col, value=-values[i]))

    for n in sorted(share_rhs_dirty):
        share = eff.get("min_renewable_share", (n,), data.node(n).min_renewable_share)
        fam = lp.row_families.get("RES_SHARE")
        if fam is None or n not in fam.elements[0]:
            raise ValidationError(
                f"override min_renewable_share({n!r}): the base model has no share row for "
                f"this node (base share is zero)"
            )
        deltas.append(Delta("rhs", row=fam.index((n,)), value=share * sum(demand_series(n))))

    for ref, value in spec.overrides:
        if ref.target_kind not in (VARIABLE_FIX, VARIABLE_LO, VARIABLE_UP):
            continue
        fam = lp.var_families.get(ref.name)
        if fam is None:
            raise ValidationError(f"override {ref.render()!r}: unknown variable {ref.name!r}")
        for combo in product(*_match_domain(ref, fam.dims, sets)):
            col = fam.index(combo)
            if ref.target_kind in (VARIABLE_FIX, VARIABLE_LO):
                deltas.append(Delta("lo", col=col, value=float(value)))
            if ref.target_kind in (VARIABLE_FIX, VARIABLE_UP):
                deltas.append(Delta("up", col=col, value=float(value)))

    for block, choice in sorted(spec.constraint_choices.items()):
        allowed = blocks.get(block)
        if allowed is None:
            raise ValidationError(f"constraint block {block!r} is not registered")
        if choice not in allowed:
            raise ValidationError(
                f"constraint block {block!r}: unknown choice {choice!r} (allowed: {allowed})"
            )
        if choice == "on":
            continue  # the base rows already enforce the block
        fam = lp.row_families.get({"renewable_share": "RES_SHARE", "co2_cap": "CO2_CAP"}[block])
        if fam is None:
            continue  # nothing to relax
        for i in range(fam.size):
            relaxed = 0.0 if block == "renewable_share" else math.inf
            deltas.append(Delta("rhs", row=fam.start + i, value=relaxed))
    return deltas


@dataclass
class RunResult:
    """Outcome of one scenario run, present even when the run failed."""

    run_id: str
    solution: Solution | None
    overrides: tuple[tuple[str, str], ...]
    error: str | None = None
    lp: LinearProgram | None = None
    wall_time: float = 0.0

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return self.solution.status

    @property
    def objective(self) -> float | None:
        return self.solution.objective if self.solution is not None else None


def _echo(spec: ScenarioSpec) -> tuple[tuple[str, str], ...]:
    echo = [(ref.render(), str(value)) for ref, value in spec.overrides]
    if spec.country_set is not None:
        echo.append((COUNTRY_SET, ",".join(spec.country_set)))
    echo.extend(sorted(spec.constraint_choices.items()))
    return tuple(echo)


def _run_on_instance(
    inst: ModelInstance,
    spec: ScenarioSpec,
    data: SystemData,
    config: ModelConfig,
    blocks: dict[str, tuple[str, ...]] | None,
    delay: float = 0.0,
) -> RunResult:
    started = time.perf_counter()
    try:
        inst.reset()
        deltas = expand_overrides(spec, inst.lp, data, config, blocks)
        if delay:
            time.sleep(delay)
        solution = inst.update_and_resolve(deltas)
        return RunResult(
            spec.run_id,
            solution,
            _echo(spec),
            lp=inst.snapshot(),
            wall_time=time.perf_counter() - started,
        )
    except (ValidationError, KeyError, ValueError) as exc:
        return RunResult(
            spec.run_id,
            None,
            _echo(spec),
            error=str(exc),
            wall_time=time.perf_counter() - started,
        )


def _run_sequential(
    data: SystemData,
    config: ModelConfig,
    features: FeatureMatrix | None,
    specs: list[ScenarioSpec],
    rebuild: bool,
    blocks: dict[str, tuple[str, ...]] | None,
    delays: list[float] | None,
    backend: str,
    fixed_capacities=None,
) -> list[RunResult]:
    results: list[RunResult] = []
    instances: dict[tuple[str, ...] | None, ModelInstance] = {}
    for idx, spec in enumerate(specs):
        delay = delays[idx] if delays else 0.0
        try:
            key = spec.country_set
            if rebuild or key not in instances:
                lp = build_model(data, config, features, list(key) if key else None)
                if fixed_capacities:
                    lp = apply_dispatch_only(lp, fixed_capacities)
                inst = compile_instance(lp, backend)
                if not rebuild:
                    instances[key] = inst
            else:
                inst = instances[key]
            results.append(_run_on_instance(inst, spec, data, config, blocks, delay))
        except (ValidationError, KeyError, ValueError) as exc:
            results.append(RunResult(spec.run_id, None, _echo(spec), error=str(exc)))
    return results


def _parallel_worker(payload) -> list[tuple[int, RunResult]]:
    data, config, features, indexed_specs, blocks, delays, backend, fixed = payload
    out: list[tuple[int, RunResult]] = []
    results = _run_sequential(
        data,
        config,
        features,
        [spec for _, spec in indexed_specs],
        rebuild=False,
        blocks=blocks,
        delays=delays,
        backend=backend,
        fixed_capacities=fixed,
    )
    for (idx, _), result in zip(indexed_specs, results):
        out.append((idx, result))
    return out


def run_scenarios(
    data: SystemData,
    config: ModelConfig,
    features: FeatureMatrix | None,
    specs: list[ScenarioSpec],
    mode: str = "single_instance",
    threads: int = 0,
    constraint_blocks: dict[str, tuple[str, ...]] | None = None,
    backend: str = "highs",
    fixed_capacities=None,
    _test_delays: list[float] | None = None,
) -> list[RunResult]:
    """Execute all scenario rows and return results in spec order.

    ``rebuild`` compiles a fresh model per run; ``single_instance`` compiles
    once per country set and re-solves with per-run deltas applied to the
    restored base; ``parallel`` distributes specs round-robin over worker
    processes, each owning its own instances. All three modes produce the
    same objectives. ``threads`` = 0 uses every available core.
    """
    if not specs:
        raise ValidationError("run_scenarios: no scenario specs given")
    if mode not in MODES:
        raise ValidationError(f"run_scenarios: unknown mode {mode!r} (use one of {MODES})")

    if mode in ("rebuild", "single_instance"):
        return _run_sequential(
            data,
            config,
            features,
            specs,
            rebuild=(mode == "rebuild"),
            blocks=constraint_blocks,
            delays=_test_delays,
            backend=backend,
            fixed_capacities=fixed_capacities,
        )

    workers = threads if threads > 0 else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(specs)))
    shards: list[list[tuple[int, ScenarioSpec]]] = [[] for _ in range(workers)]
    for idx, spec in enumerate(specs):
        shards[idx % workers].append((idx, spec))
    payloads = [
        (
            data,
            config,
            features,
            shard,
            constraint_blocks,
            [_test_delays[i] for i, _ in shard] if _test_delays else None,
            backend,
            fixed_capacities,
        )
        for shard in shards
        if shard
    ]
    ordered: list[RunResult | None] = [None] * len(specs)
    if workers == 1:
        chunks = [_parallel_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_parallel_worker, payloads))
    for chunk in chunks:
        for idx, result in chunk:
            ordered[idx] = result
    return [r for r in ordered if r is not None]
