"""Plot-ready report tables derived from result stores.

``standard_report`` emits one CSV per figure-style view (installed capacity,
annual generation with curtailment, storage sizing and throughput, residual
load duration curves) plus a ``manifest.json`` describing every produced
table. Numbers are kept at full precision throughout the pipeline and only
rounded to six significant digits here, at emission.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .symbols import Symbol, SymbolsHandler, aggregate
from .system import hour_index

log = logging.getLogger(__name__)


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _hour_series(symbol: Symbol, node: str, run: str, selector: dict | None = None) -> dict[str, float]:
    """Collapse a symbol to {hour: value} for one node and run.

    Dimensions other than ``h``, ``n`` and ``run`` (for example ``tech``)
    are summed out after filtering by ``selector`` entries, when given.
    """
    out: dict[str, float] = {}
    dims = symbol.dims
    h_pos = dims.index("h")
    n_pos = dims.index("n") if "n" in dims else None
    r_pos = dims.index("run") if "run" in dims else None
    selector = selector or {}
    sel_pos = {dims.index(d): set(v) for d, v in selector.items() if d in dims}
    for key, value in symbol.records.items():
        if n_pos is not None and key[n_pos] != node:
            continue
        if r_pos is not None and key[r_pos] != run:
            continue
        if any(key[p] not in allowed for p, allowed in sel_pos.items()):
            continue
        hour = key[h_pos]
        out[hour] = out.get(hour, 0.0) + value
    return out


def rldc(
    demand: Symbol,
    vre_gen: Symbol,
    node: str,
    run: str,
    companions: dict[str, Symbol] | None = None,
) -> tuple[list[str], list[list]]:
    """Residual load duration curve for one node and run.

    Residual load is demand minus renewable generation net of curtailment,
    before storage and trade; those enter as companion columns re-ordered by
    the same descending-residual sort. Ties are broken by ascending hour.
    """
    d = _hour_series(demand, node, run)
    v = _hour_series(vre_gen, node, run)
    missing = sorted(set(d) - set(v), key=hour_index)
    if missing:
        raise KeyError(f"renewable generation misses hours {missing[:3]} for {node}/{run}")
    residual = {h: d[h] - v[h] for h in d}
    order = sorted(residual, key=lambda h: (-residual[h], hour_index(h)))

    companion_series = {
        name: _hour_series(sym, node, run) for name, sym in (companions or {}).items()
    }
    headers = ["n", "run", "rank", "h", "residual", *companion_series.keys()]
    rows: list[list] = []
    for rank, hour in enumerate(order, start=1):
        row = [node, run, rank, hour, residual[hour]]
        row.extend(series.get(hour, 0.0) for series in companion_series.values())
        rows.append(row)
    return headers, rows


def _write_table(path: Path, headers: list[str], rows: list[list]) -> None:
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def standard_report(handler: SymbolsHandler, out_dir: Path | str) -> dict:
    """Write the standard result tables; returns the manifest.

    Sections whose input symbols are missing are skipped with a notice in
    the manifest rather than failing the report.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"tables": [], "notices": []}

    def notice(msg: str) -> None:
        log.warning("%s", msg)
        manifest["notices"].append(msg)

    def grab(name: str) -> Symbol | None:
        try:
            return handler.lookup(name)
        except KeyError:
            return None

    capacity = grab("N")
    if capacity is not None:
        rows = [
            [key[1], key[2], key[0], value]
            for key, value in sorted(capacity.records.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0]))
        ]
        _write_table(out_dir / "capacity.csv", ["tech", "n", "run", "value"], rows)
        manifest["tables"].append(
            {"name": "capacity.csv", "dims": ["tech", "n", "run"], "unit": "MW"}
        )
    else:
        notice("capacity.csv skipped: symbol N not extracted")

    generation = grab("G")
    if generation is not None:
        annual = aggregate(generation, "h", "sum")
        curtail = grab("CU")
        curtailed = aggregate(curtail, "h", "sum") if curtail is not None else None
        rows = []
        for key in sorted(annual.records, key=lambda k: (k[1], k[2], k[0])):
            run, tech, node = key
            cu = curtailed.records.get(key, 0.0) if curtailed is not None else 0.0
            rows.append([tech, node, run, annual.records[key], cu])
        _write_table(
            out_dir / "generation.csv",
            ["tech", "n", "run", "generation", "curtailment"],
            rows,
        )
        manifest["tables"].append(
            {"name": "generation.csv", "dims": ["tech", "n", "run"], "unit": "MWh"}
        )
    else:
        notice("generation.csv skipped: symbol G not extracted")

    sto_e = grab("N_STO_E")
    sto_p = grab("N_STO_P")
    if sto_e is not None and sto_p is not None and len(sto_e):
        charge = grab("STO_IN")
        discharge = grab("STO_OUT")
        charge_total = aggregate(charge, "h", "sum") if charge is not None else None
        discharge_total = aggregate(discharge, "h", "sum") if discharge is not None else None
        rows = []
        for key in sorted(sto_e.records, key=lambda k: (k[1], k[2], k[0])):
            run, sto, node = key
            rows.append(
                [
                    sto,
                    node,
                    run,
                    sto_e.records[key],
                    sto_p.records.get(key, 0.0),
                    charge_total.records.get(key, 0.0) if charge_total else 0.0,
                    discharge_total.records.get(key, 0.0) if discharge_total else 0.0,
                ]
            )
        _write_table(
            out_dir / "storage.csv",
            ["sto", "n", "run", "energy_cap", "power_cap", "charge", "discharge"],
            rows,
        )
        manifest["tables"].append(
            {"name": "storage.csv", "dims": ["sto", "n", "run"], "unit": "MWh/MW"}
        )
    elif sto_e is None or sto_p is None:
        notice("storage.csv skipped: storage symbols not extracted")

    _emit_rldc(handler, out_dir, manifest, notice, grab)

    rows = []
    for run_id in handler.runs():
        meta = handler.meta(run_id)
        rows.append(
            [
                run_id,
                meta.get("status", ""),
                float(meta.get("objective") or 0.0),
                float(meta.get("objective_investment") or 0.0),
                float(meta.get("objective_variable") or 0.0),
            ]
        )
    _write_table(
        out_dir / "summary.csv",
        ["run", "status", "objective", "investment_cost", "variable_cost"],
        rows,
    )
    manifest["tables"].append({"name": "summary.csv", "dims": ["run"], "unit": "EUR"})

    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def _emit_rldc(handler, out_dir, manifest, notice, grab) -> None:
    demand = grab("d")
    generation = grab("G")
    if demand is None or generation is None:
        notice("rldc.csv skipped: needs symbols d and G")
        return

    headers: list[str] | None = None
    all_rows: list[list] = []
    for run_id in handler.runs():
        meta = handler.meta(run_id)
        sets = meta.get("sets", {})
        res = set(sets.get("res", []))
        disp = [t for t in sets.get("tech", []) if t not in res]
        nodes = sets.get("n", [])
        vre = _select(generation, res)
        companions: dict[str, Symbol] = {}
        for tech in disp:
            companions[f"gen_{tech}"] = _select(generation, {tech})
        charge = grab("STO_IN")
        discharge = grab("STO_OUT")
        if charge is not None:
            companions["sto_in"] = charge
        if discharge is not None:
            companions["sto_out"] = discharge
        for node in nodes:
            file_headers, rows = rldc(demand, vre, node, run_id, companions)
            net_import = _net_import_rows(demand, generation, charge, discharge, grab("SLACK"), node, run_id)
            file_headers = file_headers + ["net_import"]
            for row in rows:
                row.append(net_import.get(row[3], 0.0))
            if headers is None:
                headers = file_headers
            all_rows.extend(rows)
    if headers is not None:
        _write_table(out_dir / "rldc.csv", headers, all_rows)
        manifest["tables"].append(
            {"name": "rldc.csv", "dims": ["n", "run", "rank"], "unit": "MWh/h"}
        )


def _select(symbol: Symbol, techs: set[str]) -> Symbol:
    pos = symbol.dims.index("tech")
    records = {k: v for k, v in symbol.records.items() if k[pos] in techs}
    return Symbol(symbol.name, symbol.value_kind, symbol.dims, records, symbol.unit)


def _net_import_rows(demand, generation, charge, discharge, slack, node, run) -> dict[str, float]:
    """Net imports from the balance identity: d - sum G - out + in - slack."""
    d = _hour_series(demand, node, run)
    g = _hour_series(generation, node, run)
    sto_in = _hour_series(charge, node, run) if charge is not None else {}
    sto_out = _hour_series(discharge, node, run) if discharge is not None else {}
    sl = _hour_series(slack, node, run) if slack is not None else {}
    return {
        h: d.get(h, 0.0)
        - g.get(h, 0.0)
        - sto_out.get(h, 0.0)
        + sto_in.get(h, 0.0)
        - sl.get(h, 0.0)
        for h in d
    }
