"""Spawn generation, the single-test tick loop, batch runs, sweeps and the
summary statistics."""

from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .behaviours import BehaviourKind, BehaviourParams, Team, WorldView, perceive
from .gridworld import (
    AvState,
    GridConfig,
    Heading,
    PedestrianState,
    advance_av,
    apply_action,
    column_kinds,
    compute_valid_spawn_mask,
    valid_spawn_cells,
)
from .rng import DECISION_STREAM, SPAWN_STREAM, make_rng, mix_seed, randbelow
from .trace import AV_ENTITY_ID, TraceRecord
from .verdict import (
    Outcome,
    ScoreLedger,
    ZoneHit,
    check_precondition,
    check_unavoidable,
    classify_outcome,
    resolve_zone_events,
    score_tick,
)

MAX_AGENTS = 20
Z95 = 1.96


class ConfigError(ValueError):
    pass


class ScoreMeanMode(Enum):
    ALL_AGENTS = "all_agents"
    TRIGGERING_AGENT = "triggering_agent"


@dataclass(frozen=True)
class ExperimentConfig:
    behaviour: BehaviourParams = field(default_factory=BehaviourParams)
    n_agents: int = 1
    runs: int = 1000
    base_seed: int = 0
    grid: GridConfig = field(default_factory=GridConfig)
    score_mean_mode: ScoreMeanMode = ScoreMeanMode.ALL_AGENTS
    stop_on_unavoidable: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not 1 <= self.n_agents <= MAX_AGENTS:
            raise ConfigError(f"n_agents must be in [1, {MAX_AGENTS}], got {self.n_agents}")
        if self.n_agents > len(valid_cells(self.grid)):
            raise ConfigError(f"only {len(valid_cells(self.grid))} valid spawn cells")

    def with_behaviour(self, kind: BehaviourKind) -> ExperimentConfig:
        return replace(self, behaviour=replace(self.behaviour, kind=kind))


@dataclass(frozen=True)
class Spawn:
    column: int
    row: int
    heading: Heading

    @property
    def position(self) -> tuple[int, int]:
        return self.column, self.row


@dataclass
class TestResult:
    __test__ = False  # not a pytest class

    run_index: int
    outcome: Outcome
    ticks_elapsed: int
    decision_cpu: float  # seconds
    ledger: ScoreLedger
    trace: list[TraceRecord]
    spawns: list[Spawn]
    decision_seed: int
    trigger_agent: int | None = None
    unavoidable_agent: int | None = None

    @property
    def scores(self) -> dict[int, int]:
        return self.ledger.totals


@dataclass(frozen=True)
class BatchSummary:
    behaviour: BehaviourKind
    n_agents: int
    runs: int
    successful: int
    unavoidable: int
    expired: int
    accuracy: float
    mean_score: float | None
    score_ci95: float | None
    combined_score: float
    mean_t_c: float | None
    mean_t_g: float | None
    t_g_ci95: float | None
    base_seed: int
    score_variance: float | None = None
    max_agent_score: int | None = None  # over every agent of every run

    @property
    def accuracy_percent(self) -> float:
        return 100.0 * self.accuracy


@lru_cache(maxsize=8)
def spawn_mask(grid: GridConfig) -> np.ndarray:
    mask = compute_valid_spawn_mask(grid)
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=8)
def valid_cells(grid: GridConfig) -> tuple[tuple[int, int], ...]:
    return tuple(valid_spawn_cells(spawn_mask(grid)))


def generate_spawn_list(
    base_seed: int, n_agents: int, run_index: int, valid_mask: np.ndarray
) -> list[Spawn]:
    """Distinct valid pavement cells plus walking headings for one run.

    Depends only on (base_seed, n_agents, run_index), so every behaviour gets
    the same spawns for the same run.
    """
    cells = valid_spawn_cells(valid_mask)
    if n_agents > len(cells):
        raise ConfigError(f"need {n_agents} spawn cells, only {len(cells)} valid")
    rng = make_rng(mix_seed(base_seed, n_agents, run_index, SPAWN_STREAM))
    spawns = []
    for i in range(n_agents):
        j = i + randbelow(rng, len(cells) - i)
        cells[i], cells[j] = cells[j], cells[i]
        heading = Heading.NORTH if rng.random() < 0.5 else Heading.SOUTH
        spawns.append(Spawn(cells[i][0], cells[i][1], heading))
    return spawns


def decision_seed_for(base_seed: int, n_agents: int, run_index: int) -> int:
    return mix_seed(base_seed, n_agents, run_index, DECISION_STREAM)


def run_test(
    config: ExperimentConfig,
    run_index: int,
    spawns: Sequence[Spawn] | None = None,
    decision_seed: int | None = None,
    record_trace: bool = True,
) -> TestResult:
    """Run one test to its terminal outcome.

    Per tick: start-of-tick percepts, decisions (timed), simultaneous
    pedestrian moves, AV advance with zone checks at every swept front,
    scoring, then the outcome check. ``spawns`` and ``decision_seed`` override
    the values derived from the config, for replay.
    """
    grid = config.grid
    if spawns is None:
        spawns = generate_spawn_list(config.base_seed, config.n_agents, run_index, spawn_mask(grid))
    if decision_seed is None:
        decision_seed = decision_seed_for(config.base_seed, config.n_agents, run_index)
    spawns = list(spawns)

    peds = [PedestrianState(i, s.position, s.heading) for i, s in enumerate(spawns)]
    ids = [p.id for p in peds]
    av = AvState.initial(grid)
    team = Team(config.behaviour, make_rng(decision_seed))
    ledger = ScoreLedger.for_agents(ids)
    road = [k.is_road for k in column_kinds(grid)]
    trace: list[TraceRecord] = []
    cpu = 0.0
    tick = 0
    outcome = None
    trigger: ZoneHit | None = None
    unavoidable: ZoneHit | None = None
    first_unavoidable: ZoneHit | None = None

    while outcome is None:
        tick += 1
        world = WorldView.capture(av, tick, grid)
        percepts = [perceive(p, world) for p in peds]
        t0 = time.perf_counter()
        actions = team.decide(percepts)
        cpu += time.perf_counter() - t0

        peds = [apply_action(p, a, grid) for p, a in zip(peds, actions)]
        for p, mem in zip(peds, team.memories):
            if mem.crossing != p.crossing or mem.target_column != p.target_column:
                peds[p.id] = replace(p, crossing=mem.crossing, target_column=mem.target_column)

        av, swept = advance_av(av, grid)
        positions = {p.id: p.position for p in peds}
        trigger = check_precondition(positions, swept, grid)
        unavoidable = check_unavoidable(positions, swept, grid)
        if config.stop_on_unavoidable:
            trigger, unavoidable = resolve_zone_events(trigger, unavoidable)
        elif trigger is not None:
            unavoidable = None
        if first_unavoidable is None:
            first_unavoidable = unavoidable
        in_road = {p.id: road[p.position[0]] for p in peds}
        score_tick(ledger, tick, in_road, trigger.agent_id if trigger else None)
        outcome = classify_outcome(
            trigger, first_unavoidable, av.front_row, grid, config.stop_on_unavoidable
        )

        if record_trace:
            trace.append(
                TraceRecord(run_index, tick, AV_ENTITY_ID, "av", av.path_columns[0], av.front_row, "advance", 0)
            )
            for p, a in zip(peds, actions):
                event = None
                if trigger is not None and trigger.agent_id == p.id:
                    event = "trigger"
                elif unavoidable is not None and unavoidable.agent_id == p.id:
                    event = "unavoidable"
                trace.append(
                    TraceRecord(
                        run_index, tick, p.id, "pedestrian", p.position[0], p.position[1],
                        a.value, ledger.tick_delta(p.id, tick), event,
                    )
                )

    return TestResult(
        run_index=run_index,
        outcome=outcome,
        ticks_elapsed=tick,
        decision_cpu=cpu,
        ledger=ledger,
        trace=trace,
        spawns=spawns,
        decision_seed=decision_seed,
        trigger_agent=trigger.agent_id if trigger else None,
        unavoidable_agent=first_unavoidable.agent_id if first_unavoidable else None,
    )


def confidence_interval_95(samples: Sequence[float]) -> tuple[float, float] | None:
    """Mean and normal-approximation 95% half-width (sample sd); None if empty."""
    n = len(samples)
    if n == 0:
        return None
    mean = math.fsum(samples) / n
    if n == 1:
        return mean, 0.0
    return mean, Z95 * statistics.stdev(samples) / math.sqrt(n)


def score_samples(results: Iterable[TestResult], mode: ScoreMeanMode) -> list[float]:
    """Agent scores from successful tests: every agent's total, or only the
    triggering agent's."""
    out = []
    for r in results:
        if r.outcome is not Outcome.SUCCESSFUL:
            continue
        if mode is ScoreMeanMode.TRIGGERING_AGENT:
            out.append(float(r.scores[r.trigger_agent]))
        else:
            out.extend(float(r.scores[i]) for i in sorted(r.scores))
    return out


def summarize(results: Sequence[TestResult], config: ExperimentConfig) -> BatchSummary:
    counts = {o: 0 for o in Outcome}
    for r in results:
        counts[r.outcome] += 1
    runs = len(results)
    successful = [r for r in results if r.outcome is Outcome.SUCCESSFUL]
    accuracy = counts[Outcome.SUCCESSFUL] / runs if runs else 0.0

    samples = score_samples(successful, config.score_mean_mode)
    score = confidence_interval_95(samples)
    tg = confidence_interval_95([float(r.ticks_elapsed) for r in successful])
    tc = confidence_interval_95([r.decision_cpu for r in successful])
    mean_score = score[0] if score else None
    combined = mean_score * (100.0 * accuracy) / 1000.0 if mean_score is not None else 0.0
    return BatchSummary(
        behaviour=config.behaviour.kind,
        n_agents=config.n_agents,
        runs=runs,
        successful=counts[Outcome.SUCCESSFUL],
        unavoidable=counts[Outcome.UNAVOIDABLE],
        expired=counts[Outcome.EXPIRED],
        accuracy=accuracy,
        mean_score=mean_score,
        score_ci95=score[1] if score else None,
        combined_score=combined,
        mean_t_c=tc[0] if tc else None,
        mean_t_g=tg[0] if tg else None,
        t_g_ci95=tg[1] if tg else None,
        base_seed=config.base_seed,
        score_variance=statistics.variance(samples) if len(samples) > 1 else None,
        max_agent_score=max((max(r.scores.values()) for r in results), default=None),
    )


def _run_chunk(config: ExperimentConfig, run_indices: Sequence[int], record_trace: bool) -> list[TestResult]:
    return [run_test(config, i, record_trace=record_trace) for i in run_indices]


def run_tests(
    config: ExperimentConfig, workers: int = 1, record_trace: bool = False
) -> list[TestResult]:
    """All runs of a batch, in run_index order."""
    indices = list(range(config.runs))
    if workers <= 1:
        return _run_chunk(config, indices, record_trace)
    chunks = [indices[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [config] * workers, chunks, [record_trace] * workers))
    results = [r for part in parts for r in part]
    results.sort(key=lambda r: r.run_index)
    return results


def run_batch(config: ExperimentConfig, workers: int = 1) -> BatchSummary:
    return summarize(run_tests(config, workers), config)


BEHAVIOUR_ORDER = (
    BehaviourKind.RANDOM,
    BehaviourKind.CONSTRAINED_RANDOM,
    BehaviourKind.PROXIMITY,
    BehaviourKind.ELECTION,
)


def sweep(
    base: ExperimentConfig,
    behaviours: Sequence[BehaviourKind] = BEHAVIOUR_ORDER,
    na_range: Iterable[int] = range(1, MAX_AGENTS + 1),
    workers: int = 1,
    on_batch=None,
) -> list[BatchSummary]:
    """Every (behaviour, nA) batch, ordered by behaviour then nA.

    ``on_batch(config, results)`` is called after each batch, e.g. to write
    traces.
    """
    na_values = list(na_range)
    out = []
    for kind in behaviours:
        for na in na_values:
            config = replace(base.with_behaviour(kind), n_agents=na)
            results = run_tests(config, workers, record_trace=on_batch is not None)
            if on_batch is not None:
                on_batch(config, results)
            out.append(summarize(results, config))
    return out
