#!/usr/bin/env python3
"""Side-by-side comparison of the four behaviours at three pedestrians:
accuracy, mean score with its 95% interval, combined score and t_g."""

import argparse

from avtestgen.behaviours import BehaviourKind
from avtestgen.harness import ExperimentConfig, run_batch

ORDER = (BehaviourKind.PROXIMITY, BehaviourKind.ELECTION, BehaviourKind.CONSTRAINED_RANDOM, BehaviourKind.RANDOM)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=3)
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = ExperimentConfig(n_agents=args.agents, runs=args.runs, base_seed=args.seed)
    print(f"{'behaviour':<20}{'accuracy %':>11}{'score':>9}{'+/-':>7}{'combined':>10}{'t_g':>7}")
    for kind in ORDER:
        s = run_batch(base.with_behaviour(kind))
        score = f"{s.mean_score:9.2f}{s.score_ci95:7.2f}" if s.mean_score is not None else f"{'-':>9}{'-':>7}"
        tg = f"{s.mean_t_g:7.2f}" if s.mean_t_g is not None else f"{'-':>7}"
        print(f"{kind.value:<20}{s.accuracy_percent:11.1f}{score}{s.combined_score:10.3f}{tg}")


if __name__ == "__main__":
    main()
