"""Geospatial trace log, summary table, plot data and metadata sidecars.

Traces are newline-delimited JSON, one :class:`TraceRecord` per line. The
summary is CSV with a fixed column set; every output file gets a
``<name>.meta.json`` sidecar recording the configuration, seed, generator and
artifact version.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .behaviours import BehaviourKind, BehaviourParams, TriggerMode
from .gridworld import GridConfig, Heading, column_kinds
from .harness import BatchSummary, ExperimentConfig, ScoreMeanMode, Spawn, TestResult, run_test
from .rng import GENERATOR_ID
from .trace import TRACE_FIELDS, TraceRecord

SUMMARY_SCHEMA_VERSION = 1
SUMMARY_COLUMNS = (
    "behaviour",
    "nA",
    "runs",
    "successful",
    "unavoidable",
    "expired",
    "accuracy",
    "mean_score",
    "score_ci95",
    "combined_score",
    "mean_t_c_seconds",
    "mean_t_g_ticks",
    "t_g_ci95",
    "base_seed",
)
CPU_COLUMNS = ("mean_t_c_seconds",)

PLOT_FILES = {
    "accuracy": ("accuracy.csv", False),
    "score": ("score.csv", True),
    "combined": ("combined.csv", False),
    "cpu": ("cpu.csv", False),
    "tg": ("tg.csv", True),
}

OUT_DIR_ENV = "AVTESTGEN_OUT_DIR"


class ReportError(OSError):
    pass


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "out"))


def _atomic_write(path: Path | str, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary sibling; nothing partial is
    left behind on failure."""
    path = Path(path)
    tmp = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def config_to_dict(config: ExperimentConfig) -> dict:
    return _plain(config)


def config_from_dict(data: dict) -> ExperimentConfig:
    behaviour = dict(data["behaviour"])
    behaviour["kind"] = BehaviourKind(behaviour["kind"])
    behaviour["trigger_mode"] = TriggerMode(behaviour["trigger_mode"])
    return ExperimentConfig(
        behaviour=BehaviourParams(**behaviour),
        n_agents=data["n_agents"],
        runs=data["runs"],
        base_seed=data["base_seed"],
        grid=GridConfig(**data["grid"]),
        score_mean_mode=ScoreMeanMode(data["score_mean_mode"]),
        stop_on_unavoidable=data["stop_on_unavoidable"],
    )


def metadata(config: ExperimentConfig | None = None, **extra) -> dict:
    meta = {
        "artifact": "avtestgen",
        "version": __version__,
        "generator": GENERATOR_ID,
        "summary_schema": SUMMARY_SCHEMA_VERSION,
    }
    if config is not None:
        meta["config"] = config_to_dict(config)
        meta["base_seed"] = config.base_seed
    meta.update(_plain(extra))
    return meta


def sidecar_path(path: Path | str) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_metadata(path: Path | str, meta: dict) -> Path:
    return _atomic_write(sidecar_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_metadata(path: Path | str) -> dict:
    return json.loads(sidecar_path(path).read_text(encoding="utf-8"))


# -- traces -----------------------------------------------------------------


def trace_lines(results: Iterable[TestResult]) -> str:
    buf = io.StringIO()
    for result in results:
        for rec in result.trace:
            buf.write(json.dumps(rec.as_dict(), separators=(",", ":")))
            buf.write("\n")
    return buf.getvalue()


def write_trace(
    results: Sequence[TestResult], path: Path | str, config: ExperimentConfig | None = None
) -> Path:
    """Write the trace of every result, plus a sidecar with the spawns and
    decision seed of each run so the traces can be replayed."""
    runs = [
        {
            "run_index": r.run_index,
            "decision_seed": r.decision_seed,
            "spawns": [[s.column, s.row, s.heading.name.lower()] for s in r.spawns],
        }
        for r in results
    ]
    out = _atomic_write(path, trace_lines(results))
    write_metadata(out, metadata(config, runs=runs))
    return out


def read_trace(path: Path | str) -> list[TraceRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            data = json.loads(line)
            records.append(TraceRecord(**{k: data[k] for k in TRACE_FIELDS}))
    return records


def replay_trace(path: Path | str) -> list[TestResult]:
    """Re-run every test recorded in a trace file from its sidecar."""
    meta = read_metadata(path)
    config = config_from_dict(meta["config"])
    out = []
    for run in meta["runs"]:
        spawns = [Spawn(c, r, Heading[h.upper()]) for c, r, h in run["spawns"]]
        out.append(run_test(config, run["run_index"], spawns=spawns, decision_seed=run["decision_seed"]))
    return out


# -- summaries --------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def summary_row(s: BatchSummary) -> dict:
    return {
        "behaviour": s.behaviour,
        "nA": s.n_agents,
        "runs": s.runs,
        "successful": s.successful,
        "unavoidable": s.unavoidable,
        "expired": s.expired,
        "accuracy": s.accuracy,
        "mean_score": s.mean_score,
        "score_ci95": s.score_ci95,
        "combined_score": s.combined_score,
        "mean_t_c_seconds": s.mean_t_c,
        "mean_t_g_ticks": s.mean_t_g,
        "t_g_ci95": s.t_g_ci95,
        "base_seed": s.base_seed,
    }


def summary_csv(summaries: Sequence[BatchSummary], drop: Sequence[str] = ()) -> str:
    cols = [c for c in SUMMARY_COLUMNS if c not in drop]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for s in summaries:
        row = summary_row(s)
        writer.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def write_summary(
    summaries: Sequence[BatchSummary], path: Path | str, config: ExperimentConfig | None = None, **meta
) -> Path:
    out = _atomic_write(path, summary_csv(summaries))
    write_metadata(out, metadata(config, columns=list(SUMMARY_COLUMNS), **meta))
    return out


def _num(text: str, kind=float):
    return None if text == "" else kind(text)


def read_summary(path: Path | str) -> list[BatchSummary]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        BatchSummary(
            behaviour=BehaviourKind(r["behaviour"]),
            n_agents=int(r["nA"]),
            runs=int(r["runs"]),
            successful=int(r["successful"]),
            unavoidable=int(r["unavoidable"]),
            expired=int(r["expired"]),
            accuracy=float(r["accuracy"]),
            mean_score=_num(r["mean_score"]),
            score_ci95=_num(r["score_ci95"]),
            combined_score=float(r["combined_score"]),
            mean_t_c=_num(r["mean_t_c_seconds"]),
            mean_t_g=_num(r["mean_t_g_ticks"]),
            t_g_ci95=_num(r["t_g_ci95"]),
            base_seed=int(r["base_seed"]),
        )
        for r in rows
    ]


# -- plot data --------------------------------------------------------------


def _plot_value(s: BatchSummary, figure: str) -> tuple[float | None, float | None]:
    if figure == "accuracy":
        return s.accuracy, None
    if figure == "score":
        return s.mean_score, s.score_ci95
    if figure == "combined":
        return s.combined_score, None
    if figure == "cpu":
        return s.mean_t_c, None
    return s.mean_t_g, s.t_g_ci95


def plot_table(summaries: Sequence[BatchSummary], figure: str) -> str:
    """One figure's data: a row per nA, a column per behaviour (plus a CI
    column for score and t_g). Missing cells are left empty."""
    with_ci = PLOT_FILES[figure][1]
    kinds = [k for k in BehaviourKind if any(s.behaviour is k for s in summaries)]
    na_values = sorted({s.n_agents for s in summaries})
    cells = {(s.behaviour, s.n_agents): s for s in summaries}
    header = ["nA"]
    for k in kinds:
        header.append(k.value)
        if with_ci:
            header.append(f"{k.value}_ci95")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for na in na_values:
        row = [str(na)]
        for k in kinds:
            s = cells.get((k, na))
            value, ci = _plot_value(s, figure) if s else (None, None)
            row.append(_fmt(value))
            if with_ci:
                row.append(_fmt(ci))
        writer.writerow(row)
    return buf.getvalue()


def emit_plot_data(summaries: Sequence[BatchSummary], out_dir: Path | str) -> list[Path]:
    if not summaries:
        raise ValueError("no summaries to plot")
    out_dir = Path(out_dir)
    return [_atomic_write(out_dir / name, plot_table(summaries, fig)) for fig, (name, _) in PLOT_FILES.items()]


def spawn_mask_text(mask, config: GridConfig) -> str:
    """Row 0 first; '#' invalid pavement, 'o' valid pavement, '.' road."""
    kinds = column_kinds(config)
    lines = []
    for row in range(config.length):
        chars = []
        for col, kind in enumerate(kinds):
            if kind.is_road:
                chars.append(".")
            else:
                chars.append("o" if mask[row, col] else "#")
        lines.append(f"{row:3d} {''.join(chars)}")
    return "\n".join(lines) + "\n"
