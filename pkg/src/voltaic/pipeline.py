"""End-to-end project execution: load, build, sweep, extract, write, report."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .project import Project, load_project
from .reports import standard_report
from .scenarios import RunResult, run_scenarios
from .store import CSV_FORMAT, NPZ_FORMAT, extract_symbols, read_all_stores, write_store
from .symbols import SymbolsHandler
from .system import ValidationError


@dataclass
class RunSummary:
    results: list[RunResult]
    store_dirs: list[Path]

    @property
    def all_optimal(self) -> bool:
        return all(r.status == "optimal" for r in self.results)


def pick_mode(project: Project, override: str | None = None) -> str:
    if override:
        return override
    config = project.config
    if config.guss and config.guss_parallel:
        return "parallel"
    if config.guss:
        return "single_instance"
    return "rebuild"


def run_project(
    root: Path | str,
    mode: str | None = None,
    threads: int | None = None,
    backend: str = "highs",
) -> RunSummary:
    """Run a project's configured scenario set and write the result stores.

    ``mode`` and ``threads`` override the project settings when given.
    Existing stores for the same run ids are overwritten; results land under
    ``<root>/results/<run_id>/``.
    """
    project = load_project(root)
    config = project.config
    results = run_scenarios(
        project.data,
        config,
        project.features,
        project.specs,
        mode=pick_mode(project, mode),
        threads=config.guss_parallel_threads if threads is None else threads,
        constraint_blocks=project.constraint_blocks or None,
        backend=backend,
        fixed_capacities=project.fixed_capacities if config.dispatch_only else None,
    )
    stores = extract_symbols(
        results,
        project.reporting,
        threads=config.gdx_convert_parallel_threads,
        config_echo=project.config_echo,
    )
    formats = (CSV_FORMAT, NPZ_FORMAT) if config.write_npz else (CSV_FORMAT,)
    store_dirs = [write_store(store, project.layout.results, formats) for store in stores]
    summary = RunSummary(results, store_dirs)
    if config.report_data and summary.all_optimal:
        report_project(root)
    return summary


def report_project(root: Path | str) -> dict:
    """Build the standard report from the stores under ``<root>/results``."""
    root = Path(root)
    results_dir = root / "results"
    if not results_dir.is_dir() or not any(results_dir.iterdir()):
        raise ValidationError(f"{results_dir}: no result stores found (run the project first)")
    handler = SymbolsHandler(read_all_stores(results_dir))
    return standard_report(handler, root / "report")


def validate_project(root: Path | str) -> Project:
    """Load-time checks only; raises :class:`ValidationError` on any issue."""
    return load_project(root)
