"""Assertion-precondition monitor, outcome classification and agent scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .gridworld import GridConfig

LIVING_COST = 1
ROAD_PENALTY = 5
ZONE_REWARD = 100
MAX_AGENT_SCORE = ZONE_REWARD - LIVING_COST - ROAD_PENALTY  # 94


class Outcome(Enum):
    SUCCESSFUL = "successful"
    UNAVOIDABLE = "unavoidable"
    EXPIRED = "expired"


class EventKind(Enum):
    LIVING = "living"
    ROAD_PENALTY = "road_penalty"
    ZONE_REWARD = "zone_reward"


@dataclass(frozen=True)
class ScoreEvent:
    tick: int
    kind: EventKind
    delta: int


@dataclass(frozen=True)
class ZoneHit:
    agent_id: int
    sweep_step: int  # 0-based index into the swept fronts
    front_row: int


@dataclass
class ScoreLedger:
    totals: dict[int, int] = field(default_factory=dict)
    events: dict[int, list[ScoreEvent]] = field(default_factory=dict)

    @classmethod
    def for_agents(cls, ids: Iterable[int]) -> ScoreLedger:
        ids = list(ids)
        return cls({i: 0 for i in ids}, {i: [] for i in ids})

    def add(self, agent_id: int, tick: int, kind: EventKind, delta: int) -> None:
        if kind is EventKind.ZONE_REWARD and self.rewarded(agent_id):
            raise ValueError(f"agent {agent_id} already rewarded")
        self.totals[agent_id] += delta
        self.events[agent_id].append(ScoreEvent(tick, kind, delta))

    def rewarded(self, agent_id: int) -> bool:
        return any(e.kind is EventKind.ZONE_REWARD for e in self.events[agent_id])

    def tick_delta(self, agent_id: int, tick: int) -> int:
        return sum(e.delta for e in reversed(self.events[agent_id]) if e.tick == tick)


def _band_hits(
    positions: Mapping[int, tuple[int, int]],
    swept_fronts: list[int],
    config: GridConfig,
    bands: list[tuple[tuple[int, ...], int, int]],
) -> ZoneHit | None:
    """First (sweep step, agent id) with an agent inside any band. A band is
    (columns, near, far): rows front+near .. front+far, clipped to the road end."""
    end = config.end_row
    for step, front in enumerate(swept_fronts):
        for aid in sorted(positions):
            col, row = positions[aid]
            for cols, near, far in bands:
                if cols[0] <= col <= cols[-1] and front + near <= row <= min(front + far, end):
                    return ZoneHit(aid, step, front)
    return None


def check_precondition(
    positions: Mapping[int, tuple[int, int]], swept_fronts: list[int], config: GridConfig
) -> ZoneHit | None:
    """First agent inside the precondition zone, scanning ascending swept
    front, then ascending agent id."""
    band = (config.zone_columns, config.zone_near_offset, config.zone_far_offset)
    return _band_hits(positions, swept_fronts, config, [band])


def check_unavoidable(
    positions: Mapping[int, tuple[int, int]], swept_fronts: list[int], config: GridConfig
) -> ZoneHit | None:
    """First agent inside the stopping zone or under the AV footprint."""
    footprint = (config.path_columns, -(config.footprint_length - 1), 0)
    stopping = (config.zone_columns, 1, config.stopping_distance)
    return _band_hits(positions, swept_fronts, config, [footprint, stopping])


def resolve_zone_events(
    trigger: ZoneHit | None, unavoidable: ZoneHit | None
) -> tuple[ZoneHit | None, ZoneHit | None]:
    """Keep whichever event happened first in the sweep; a precondition hit
    wins ties."""
    if trigger is not None and (unavoidable is None or trigger.sweep_step <= unavoidable.sweep_step):
        return trigger, None
    return None, unavoidable


def score_tick(
    ledger: ScoreLedger,
    tick: int,
    in_road: Mapping[int, bool],
    trigger_id: int | None = None,
) -> ScoreLedger:
    for aid in ledger.totals:
        ledger.add(aid, tick, EventKind.LIVING, -LIVING_COST)
        if in_road[aid]:
            ledger.add(aid, tick, EventKind.ROAD_PENALTY, -ROAD_PENALTY)
    if trigger_id is not None and not ledger.rewarded(trigger_id):
        ledger.add(trigger_id, tick, EventKind.ZONE_REWARD, ZONE_REWARD)
    return ledger


def classify_outcome(
    trigger: ZoneHit | None,
    unavoidable: ZoneHit | None,
    av_front: int,
    config: GridConfig,
    stop_on_unavoidable: bool = False,
) -> Outcome | None:
    """Terminal outcome at the end of a tick, or None if the test continues.

    A test ends when the precondition triggers or the AV reaches the road end.
    ``unavoidable`` is the first stopping-zone intrusion seen so far; it decides
    Unavoidable vs Expired at the road end, or ends the test at once when
    ``stop_on_unavoidable`` is set.
    """
    if trigger is not None:
        return Outcome.SUCCESSFUL
    if unavoidable is not None and stop_on_unavoidable:
        return Outcome.UNAVOIDABLE
    if av_front >= config.end_row:
        return Outcome.UNAVOIDABLE if unavoidable is not None else Outcome.EXPIRED
    return None
