"""Command-line interface.

Subcommands: ``run`` (one test, trace to stdout), ``batch`` (one summary),
``sweep`` (all behaviours over an nA range), ``spawn-mask`` and ``plots``.
Option precedence: command-line flags, then a ``key=value`` file given with
``--config``, then built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .behaviours import BehaviourKind, BehaviourParams, TriggerMode
from .gridworld import GridConfig
from .harness import (
    BEHAVIOUR_ORDER,
    MAX_AGENTS,
    ConfigError,
    ExperimentConfig,
    ScoreMeanMode,
    run_test,
    run_tests,
    spawn_mask,
    summarize,
    sweep,
)
from .reporting import (
    ReportError,
    default_out_dir,
    emit_plot_data,
    metadata,
    read_summary,
    spawn_mask_text,
    summary_csv,
    trace_lines,
    write_metadata,
    write_summary,
    write_trace,
)

USAGE_ERROR = 2

_DEFAULT_BEHAVIOUR = BehaviourParams()
_DEFAULT_EXPERIMENT = ExperimentConfig()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_agents(text: str) -> int:
    n = int(text)
    if not 1 <= n <= MAX_AGENTS:
        raise argparse.ArgumentTypeError(f"nA must be in [1, {MAX_AGENTS}], got {n}")
    return n


def _add_experiment_flags(p: argparse.ArgumentParser, *, agents=True, runs=True) -> None:
    p.add_argument("--config", type=Path, help="key=value file of defaults")
    p.add_argument("--behaviour", choices=[k.value for k in BehaviourKind], default="proximity")
    if agents:
        p.add_argument("--agents", type=_positive_agents, default=_DEFAULT_EXPERIMENT.n_agents)
    if runs:
        p.add_argument("--runs", type=int, default=_DEFAULT_EXPERIMENT.runs)
    p.add_argument("--seed", type=int, default=_DEFAULT_EXPERIMENT.base_seed)
    p.add_argument("--cross-probability", type=float, default=_DEFAULT_BEHAVIOUR.cross_probability)
    p.add_argument(
        "--trigger-mode",
        choices=[m.value for m in TriggerMode],
        default=_DEFAULT_BEHAVIOUR.trigger_mode.value,
    )
    p.add_argument("--fixed-radius", type=float, default=_DEFAULT_BEHAVIOUR.fixed_radius)
    p.add_argument(
        "--score-mean-mode",
        choices=[m.value for m in ScoreMeanMode],
        default=_DEFAULT_EXPERIMENT.score_mean_mode.value,
    )
    p.add_argument(
        "--stop-on-unavoidable",
        action=argparse.BooleanOptionalAction,
        default=_DEFAULT_EXPERIMENT.stop_on_unavoidable,
        help="end a test at the first stopping-zone intrusion",
    )
    p.add_argument(
        "--zone-spans-lane",
        action=argparse.BooleanOptionalAction,
        default=GridConfig().zone_spans_lane,
        help="assertion zones cover the whole AV lane rather than the AV footprint columns",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="avtestgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one test and print its trace")
    _add_experiment_flags(p, runs=False)
    p.add_argument("--run-index", type=int, default=0)

    p = sub.add_parser("batch", help="run one (behaviour, nA) batch and print its summary")
    _add_experiment_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, help="also write the summary CSV here")
    p.add_argument("--trace", type=Path, help="write the batch trace here")

    p = sub.add_parser("sweep", help="all behaviours over an nA range")
    _add_experiment_flags(p, agents=False)
    p.add_argument("--na-min", type=_positive_agents, default=1)
    p.add_argument("--na-max", type=_positive_agents, default=MAX_AGENTS)
    p.add_argument("--behaviours", default=",".join(k.value for k in BEHAVIOUR_ORDER))
    p.add_argument("--out-dir", type=Path, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="also write one trace file per batch")

    p = sub.add_parser("spawn-mask", help="print the valid spawn grid")
    p.add_argument("--zone-spans-lane", action=argparse.BooleanOptionalAction, default=GridConfig().zone_spans_lane)

    p = sub.add_parser("plots", help="emit plot data from a summary file")
    p.add_argument("--summary", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, default=None)
    return parser


def read_config_file(path: Path) -> dict[str, str]:
    """Parse ``key=value`` lines; '#' starts a comment; keys use flag names
    with or without dashes (``cross-probability`` or ``cross_probability``)."""
    values = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise KeyError(command)


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None)
    if config_path is None:
        return args
    file_values = read_config_file(config_path)
    sub = _subparser(parser, args.command)
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in file_values.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{config_path}: unknown key {key!r}")
        if isinstance(action, argparse.BooleanOptionalAction) or action.const is True:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[key] = action.type(value) if action.type else value
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"{config_path}: invalid {key} {value!r}: {exc}") from exc
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"{config_path}: invalid {key} {value!r}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def experiment_from_args(args: argparse.Namespace, n_agents: int = 1) -> ExperimentConfig:
    behaviour = BehaviourParams(
        kind=BehaviourKind(args.behaviour),
        cross_probability=args.cross_probability,
        trigger_mode=TriggerMode(args.trigger_mode),
        fixed_radius=args.fixed_radius,
    )
    return ExperimentConfig(
        behaviour=behaviour,
        n_agents=getattr(args, "agents", n_agents),
        runs=getattr(args, "runs", 1),
        base_seed=args.seed,
        grid=GridConfig(zone_spans_lane=args.zone_spans_lane),
        score_mean_mode=ScoreMeanMode(args.score_mean_mode),
        stop_on_unavoidable=args.stop_on_unavoidable,
    )


def cmd_run(args) -> int:
    config = experiment_from_args(args)
    result = run_test(config, args.run_index)
    sys.stdout.write(trace_lines([result]))
    return 0


def cmd_batch(args) -> int:
    config = experiment_from_args(args)
    results = run_tests(config, args.workers, record_trace=args.trace is not None)
    summary = summarize(results, config)
    if args.trace is not None:
        write_trace(results, args.trace, config)
    if args.out is not None:
        write_summary([summary], args.out, config)
    sys.stdout.write(summary_csv([summary]))
    return 0


def cmd_sweep(args) -> int:
    if args.na_min > args.na_max:
        raise UsageError(f"--na-min {args.na_min} exceeds --na-max {args.na_max}")
    try:
        kinds = [BehaviourKind(k.strip()) for k in args.behaviours.split(",") if k.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out_dir = args.out_dir if args.out_dir is not None else default_out_dir()
    base = experiment_from_args(args, n_agents=args.na_min)
    na_range = range(args.na_min, args.na_max + 1)

    def write_batch_trace(config, results):
        name = f"trace_{config.behaviour.kind.value}_nA{config.n_agents:02d}.ndjson"
        write_trace(results, out_dir / "traces" / name, config)

    on_batch = write_batch_trace if args.trace else None

    summaries = sweep(base, kinds, na_range, workers=args.workers, on_batch=on_batch)
    summary_path = write_summary(
        summaries,
        out_dir / "summary.csv",
        base,
        behaviours=[k.value for k in kinds],
        na_range=[args.na_min, args.na_max],
    )
    plot_files = emit_plot_data(summaries, out_dir)
    for path in plot_files:
        write_metadata(path, metadata(base, source=summary_path.name))
    print(f"wrote {summary_path} and {len(plot_files)} plot files to {out_dir}")
    return 0


def cmd_spawn_mask(args) -> int:
    grid = GridConfig(zone_spans_lane=args.zone_spans_lane)
    mask = spawn_mask(grid)
    sys.stdout.write(spawn_mask_text(mask, grid))
    print(f"valid spawn cells: {int(mask.sum())}")
    return 0


def cmd_plots(args) -> int:
    try:
        summaries = read_summary(args.summary)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read summary {args.summary}: {exc}") from exc
    if not summaries:
        raise UsageError(f"{args.summary} holds no summary rows")
    out_dir = args.out_dir if args.out_dir is not None else default_out_dir()
    paths = emit_plot_data(summaries, out_dir)
    print(f"wrote {len(paths)} plot files to {out_dir}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "batch": cmd_batch,
    "sweep": cmd_sweep,
    "spawn-mask": cmd_spawn_mask,
    "plots": cmd_plots,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    except (UsageError, ConfigError, ReportError, ValueError) as exc:
        print(f"avtestgen: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
