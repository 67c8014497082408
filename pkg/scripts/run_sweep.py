#!/usr/bin/env python3
"""Full sweep: every behaviour over nA 1..20, writing the summary table and
plot data to an output directory.

    python scripts/run_sweep.py --runs 1000 --seed 0 --out-dir out/
"""

import argparse
import time
from pathlib import Path

from avtestgen.harness import BEHAVIOUR_ORDER, ExperimentConfig, sweep
from avtestgen.reporting import emit_plot_data, metadata, write_metadata, write_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("out"))
    args = ap.parse_args()

    base = ExperimentConfig(runs=args.runs, base_seed=args.seed)
    t0 = time.perf_counter()

    def progress(config, _results):
        print(f"  {config.behaviour.kind.value:>18} nA={config.n_agents:2d}  {time.perf_counter() - t0:6.1f}s", flush=True)

    summaries = sweep(base, BEHAVIOUR_ORDER, range(1, 21), workers=args.workers, on_batch=progress)
    elapsed = time.perf_counter() - t0
    path = write_summary(summaries, args.out_dir / "summary.csv", base, elapsed_seconds=round(elapsed, 1))
    for p in emit_plot_data(summaries, args.out_dir):
        write_metadata(p, metadata(base, source=path.name))
    print(f"{len(summaries)} batches in {elapsed:.0f}s -> {args.out_dir}")


if __name__ == "__main__":
    main()
