#!/usr/bin/env python3
"""Accuracy at a few nA values with each modelling switch turned back to its
narrower setting: zones on the footprint columns only, the kinematic
trigger, and ending a test at the first stopping-zone intrusion."""

import argparse
from dataclasses import replace

from avtestgen.behaviours import TriggerMode
from avtestgen.gridworld import GridConfig
from avtestgen.harness import BEHAVIOUR_ORDER, ExperimentConfig, run_batch

VARIANTS = {
    "default": {},
    "footprint_zone": {"grid": GridConfig(zone_spans_lane=False)},
    "kinematic_trigger": {"trigger": TriggerMode.KINEMATIC},
    "stop_on_unavoidable": {"stop_on_unavoidable": True},
}


def build(base, variant):
    opts = dict(VARIANTS[variant])
    trigger = opts.pop("trigger", None)
    if trigger is not None:
        base = replace(base, behaviour=replace(base.behaviour, trigger_mode=trigger))
    return replace(base, **opts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--na", type=int, nargs="+", default=[1, 3, 20])
    args = ap.parse_args()

    print("variant,nA," + ",".join(k.value for k in BEHAVIOUR_ORDER))
    for variant in VARIANTS:
        for na in args.na:
            base = build(ExperimentConfig(n_agents=na, runs=args.runs, base_seed=args.seed), variant)
            accs = [run_batch(base.with_behaviour(k)).accuracy for k in BEHAVIOUR_ORDER]
            print(f"{variant},{na}," + ",".join(f"{a:.3f}" for a in accs), flush=True)


if __name__ == "__main__":
    main()
