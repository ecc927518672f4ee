#!/usr/bin/env python3
"""Compare wall times of the three sweep execution modes on one dataset.

Rebuilding compiles a fresh model per run; single-instance compiles once
and patches values between solves; parallel shards runs over worker
processes. All three produce the same objectives; this script measures
what the reuse and the parallelism actually buy on this machine.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
from conftest import random_sweep_table, two_node_sweep_system  # noqa: E402

from voltaic.scenarios import parse_iteration_table, run_scenarios  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--hours", type=int, default=48)
    parser.add_argument("--threads", type=int, default=0, help="0 = all cores")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    data, config = two_node_sweep_system(args.hours)
    specs = parse_iteration_table(random_sweep_table(args.runs, args.seed))
    print(f"{args.runs} runs, {args.hours} hours, 2 nodes\n")

    reference = None
    for mode in ("rebuild", "single_instance", "parallel"):
        start = time.perf_counter()
        results = run_scenarios(data, config, None, specs, mode=mode, threads=args.threads)
        elapsed = time.perf_counter() - start
        bad = [r.run_id for r in results if r.status != "optimal"]
        objectives = [r.objective for r in results]
        if reference is None:
            reference = objectives
        drift = max(
            abs(a - b) / max(1.0, abs(a)) for a, b in zip(reference, objectives)
        )
        print(
            f"{mode:16s} {elapsed:7.2f}s  "
            f"max objective drift vs rebuild: {drift:.2e}  "
            f"{'FAILED RUNS: ' + ','.join(bad) if bad else ''}"
        )


if __name__ == "__main__":
    main()
