"""Per-run result stores: symbol extraction, serialization, round-trips.

Each scenario run gets one store directory ``<run_id>/`` holding one sorted
CSV per extracted symbol plus ``run.meta`` (scalar metadata as JSON), and
optionally a single self-describing binary file ``store.npz`` with the same
content. Both formats round-trip losslessly and are byte-identical across
repeated runs and extraction thread counts; nothing time- or host-dependent
is ever written.
"""

from __future__ import annotations

import io
import json
import logging
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import CAPACITY_FAMILIES
from .symbols import LEVEL, MARGINAL, PARAMETER, Symbol

log = logging.getLogger(__name__)

CSV_FORMAT = "csv"
NPZ_FORMAT = "npz"
_NPZ_NAME = "store.npz"
_META_NAME = "run.meta"


@dataclass
class SymbolStore:
    """All extracted symbols of one run plus scalar metadata."""

    run_id: str
    symbols: dict[str, Symbol] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def extract_symbols(
    results,
    reporting: list[tuple[str, str]],
    threads: int = 1,
    config_echo: dict | None = None,
) -> list[SymbolStore]:
    """Pull the configured symbols out of each run's solution.

    ``reporting`` holds (symbol, kind) pairs with kind ``level`` or
    ``marginal``. Symbols named in the list but absent from a solution are
    stored empty with a warning, never an error. Runs are independent, so
    extraction may fan out over ``threads`` workers (0 = one per run) with
    output identical to the sequential order.
    """

    def one(result) -> SymbolStore:
        return _extract_one(result, reporting, config_echo)

    results = list(results)
    workers = threads if threads > 0 else len(results)
    if workers <= 1 or len(results) <= 1:
        return [one(r) for r in results]
    with ThreadPoolExecutor(max_workers=min(workers, len(results))) as pool:
        return list(pool.map(one, results))


def _extract_one(result, reporting, config_echo) -> SymbolStore:
    store = SymbolStore(result.run_id)
    store.meta = {
        "run_id": result.run_id,
        "status": result.status,
        "objective": result.objective,
        "overrides": [list(pair) for pair in result.overrides],
    }
    if result.error is not None:
        store.meta["error"] = result.error
    if config_echo:
        store.meta["config"] = dict(sorted(config_echo.items()))

    solution = result.solution
    lp = result.lp
    if solution is None or not solution.is_optimal or lp is None:
        return store

    store.meta["sets"] = {k: list(v) for k, v in sorted(lp.sets.items())}
    invest, variable = _objective_split(lp, solution)
    store.meta["objective_investment"] = invest
    store.meta["objective_variable"] = variable

    for name, kind in reporting:
        if name == "d":
            store.symbols["d"] = _demand_symbol(lp)
            continue
        if kind == MARGINAL:
            fam = lp.row_families.get(name)
            source = solution.dual
        else:
            fam = lp.var_families.get(name)
            source = solution.primal
        if fam is None:
            log.warning("run %s: symbol %r (%s) not in the model; stored empty", result.run_id, name, kind)
            store.symbols[name] = Symbol(name, kind, (), {})
            continue
        values = source[fam.start : fam.start + fam.size]
        records = {key: float(v) for key, v in zip(fam.keys(), values)}
        store.symbols[name] = Symbol(name, kind, fam.dims, records)
    return store


def _demand_symbol(lp) -> Symbol:
    """Demand as seen by the model: the balance rows' right-hand sides."""
    fam = lp.row_families["BAL"]
    values = lp.rhs[fam.start : fam.start + fam.size]
    return Symbol("d", PARAMETER, fam.dims, {k: float(v) for k, v in zip(fam.keys(), values)})


def _objective_split(lp, solution) -> tuple[float, float]:
    contribution = lp.obj * solution.primal
    invest = 0.0
    for fam_name in CAPACITY_FAMILIES:
        fam = lp.var_families.get(fam_name)
        if fam is not None:
            invest += float(contribution[fam.start : fam.start + fam.size].sum())
    return invest, float(contribution.sum()) - invest


# -- serialization ---------------------------------------------------------


def _meta_text(meta: dict) -> str:
    return json.dumps(meta, sort_keys=True, indent=2) + "\n"


def _symbol_csv(symbol: Symbol) -> str:
    out = io.StringIO()
    out.write(",".join([*symbol.dims, "value"]) + "\n")
    for key in sorted(symbol.records):
        out.write(",".join([*key, repr(symbol.records[key])]) + "\n")
    return out.getvalue()


def write_store(store: SymbolStore, root: Path | str, formats=(CSV_FORMAT,)) -> Path:
    """Write one run's store under ``root/<run_id>/``; returns the directory.

    The CSV format is always produced; add ``"npz"`` to also pack the whole
    run into one binary columnar file.
    """
    target = Path(root) / store.run_id
    target.mkdir(parents=True, exist_ok=True)
    meta = dict(store.meta)
    meta["symbol_kinds"] = {n: s.value_kind for n, s in sorted(store.symbols.items())}
    meta["symbol_units"] = {n: s.unit for n, s in sorted(store.symbols.items())}
    (target / _META_NAME).write_text(_meta_text(meta))
    for name in sorted(store.symbols):
        (target / f"{name}.csv").write_text(_symbol_csv(store.symbols[name]))
    if NPZ_FORMAT in formats:
        _write_npz(store, target / _NPZ_NAME)
    return target


def _write_npz(store: SymbolStore, path: Path) -> None:
    arrays: dict[str, np.ndarray] = {
        "__meta__": np.array(_meta_text(store.meta)),
        "__symbols__": np.array(sorted(store.symbols), dtype="<U64"),
    }
    for name in sorted(store.symbols):
        sym = store.symbols[name]
        keys = sorted(sym.records)
        arrays[f"{name}/dims"] = np.array(sym.dims, dtype="<U32")
        arrays[f"{name}/kind"] = np.array(sym.value_kind)
        arrays[f"{name}/unit"] = np.array(sym.unit)
        if keys:
            arrays[f"{name}/keys"] = np.array(keys, dtype="<U64")
        else:
            arrays[f"{name}/keys"] = np.zeros((0, len(sym.dims)), dtype="<U1")
        arrays[f"{name}/values"] = np.array([sym.records[k] for k in keys], dtype=float)
    # Fixed zip timestamps keep repeated runs byte-identical.
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        for key in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asanyarray(arrays[key]), allow_pickle=False)
            info = zipfile.ZipInfo(key + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, buf.getvalue())


def read_store(run_dir: Path | str, fmt: str = CSV_FORMAT) -> SymbolStore:
    """Load one run directory back; inverse of :func:`write_store`."""
    run_dir = Path(run_dir)
    if fmt == NPZ_FORMAT:
        return _read_npz(run_dir / _NPZ_NAME, run_dir.name)
    if fmt != CSV_FORMAT:
        raise ValueError(f"unknown store format {fmt!r}")
    meta = json.loads((run_dir / _META_NAME).read_text())
    kinds = meta.pop("symbol_kinds", {})
    units = meta.pop("symbol_units", {})
    store = SymbolStore(meta.get("run_id", run_dir.name), meta=meta)
    for csv_path in sorted(run_dir.glob("*.csv")):
        name = csv_path.stem
        lines = csv_path.read_text().splitlines()
        header = lines[0].split(",")
        dims = tuple(header[:-1])
        records: dict[tuple[str, ...], float] = {}
        for line in lines[1:]:
            parts = line.split(",")
            records[tuple(parts[:-1])] = float(parts[-1])
        kind = kinds.get(name, PARAMETER if name == "d" else LEVEL)
        store.symbols[name] = Symbol(name, kind, dims, records, unit=units.get(name, ""))
    return store


def _read_npz(path: Path, fallback_run_id: str) -> SymbolStore:
    with np.load(path) as data:
        meta = json.loads(str(data["__meta__"]))
        store = SymbolStore(meta.get("run_id", fallback_run_id), meta=meta)
        for name in data["__symbols__"].tolist():
            dims = tuple(data[f"{name}/dims"].tolist())
            keys = data[f"{name}/keys"]
            values = data[f"{name}/values"]
            records = {
                tuple(str(k) for k in key): float(v) for key, v in zip(keys, values)
            }
            store.symbols[name] = Symbol(
                name, str(data[f"{name}/kind"]), dims, records, unit=str(data[f"{name}/unit"])
            )
    return store


def read_all_stores(results_dir: Path | str, fmt: str = CSV_FORMAT) -> list[SymbolStore]:
    """Load every run directory under ``results_dir``, sorted by run id."""
    results_dir = Path(results_dir)
    stores = []
    for run_dir in sorted(p for p in results_dir.iterdir() if p.is_dir()):
        stores.append(read_store(run_dir, fmt))
    return stores
