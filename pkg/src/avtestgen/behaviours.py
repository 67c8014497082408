"""Pedestrian decision policies: random, constrained random, proximity and
election.

Every policy maps a :class:`Percept` (plus explicit per-agent memory and, for
the stochastic ones, a seeded generator) to an :class:`Action`. Directed
crossings move straight across the road, one column per tick, to the far
pavement.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

from .gridworld import (
    ACTIONS,
    Action,
    AvState,
    GridConfig,
    Heading,
    PedestrianState,
    lateral_action,
)


class BehaviourKind(Enum):
    RANDOM = "random"
    CONSTRAINED_RANDOM = "constrained_random"
    PROXIMITY = "proximity"
    ELECTION = "election"

    @property
    def directed(self) -> bool:
        return self in (BehaviourKind.PROXIMITY, BehaviourKind.ELECTION)


class TriggerMode(Enum):
    KINEMATIC = "kinematic"
    FIXED_RADIUS = "fixed_radius"


@dataclass(frozen=True)
class BehaviourParams:
    kind: BehaviourKind = BehaviourKind.PROXIMITY
    cross_probability: float = 0.1  # per tick, constrained random only
    trigger_mode: TriggerMode = TriggerMode.FIXED_RADIUS
    fixed_radius: float = 25.0  # cells
    zone_near_offset: int = 9
    zone_far_offset: int = 14

    def __post_init__(self):
        if not 0.0 <= self.cross_probability <= 1.0:
            raise ValueError(f"cross_probability {self.cross_probability} not in [0, 1]")
        if self.fixed_radius <= 0:
            raise ValueError("fixed_radius must be positive")


@dataclass(frozen=True)
class WorldView:
    """The part of a start-of-tick snapshot shared by every agent."""

    av_front_row: int
    av_path_columns: tuple[int, ...]
    zone_columns: tuple[int, ...]
    av_speed: int
    tick: int
    grid_width: int
    grid_length: int
    pavement_width: int

    @classmethod
    def capture(cls, av: AvState, tick: int, config: GridConfig) -> WorldView:
        return cls(
            av.front_row,
            av.path_columns,
            config.zone_columns,
            config.av_speed,
            tick,
            config.width,
            config.length,
            config.pavement_width,
        )


class Percept(NamedTuple):
    """What one agent perceives at the start of a tick.

    AV-relative quantities are derived on access, so a policy only pays for
    the perception it actually uses.
    """

    agent_id: int
    self_position: tuple[int, int]
    heading: Heading
    world: WorldView

    @property
    def av_front_row(self) -> int:
        return self.world.av_front_row

    @property
    def av_path_columns(self) -> tuple[int, ...]:
        return self.world.av_path_columns

    @property
    def tick(self) -> int:
        return self.world.tick

    @property
    def distance_to_av(self) -> float:
        """Euclidean distance in cells to the centre of the AV front edge."""
        path = self.world.av_path_columns
        col, row = self.self_position
        return math.hypot(col - (path[0] + path[-1]) / 2, row - self.world.av_front_row)

    @property
    def longitudinal_gap(self) -> int:
        return self.self_position[1] - self.world.av_front_row

    @property
    def lateral_cells_to_path(self) -> int:
        col = self.self_position[0]
        zone = self.world.zone_columns
        if col < zone[0]:
            return zone[0] - col
        if col > zone[-1]:
            return col - zone[-1]
        return 0

    @property
    def in_road(self) -> bool:
        w = self.world
        return w.pavement_width <= self.self_position[0] < w.grid_width - w.pavement_width


def perceive(ped: PedestrianState, world: WorldView) -> Percept:
    return Percept(ped.id, ped.position, ped.heading, world)


@dataclass
class AgentMemory:
    """Per-agent policy state carried across ticks within one test."""

    crossing: bool = False
    target_column: int | None = None
    crossed: bool = False


@dataclass(frozen=True)
class ElectionState:
    elected_id: int | None = None
    election_closed: bool = False


def walk_action(percept: Percept) -> Action:
    """Walk along the pavement, turning around at either end of the map."""
    nxt = percept.self_position[1] + percept.heading.value
    if 0 <= nxt < percept.world.grid_length:
        return Action.FORWARD
    return Action.BACKWARD


def opposite_pavement_column(percept: Percept) -> int:
    """Nearest pavement column on the other side of the road."""
    w = percept.world
    if percept.self_position[0] < w.grid_width / 2:
        return w.grid_width - w.pavement_width
    return w.pavement_width - 1


def start_crossing(percept: Percept, memory: AgentMemory) -> None:
    memory.crossing = True
    memory.target_column = opposite_pavement_column(percept)


def crossing_step(percept: Percept, memory: AgentMemory) -> Action | None:
    """Next lateral step of an ongoing crossing, or None once it is finished."""
    col = percept.self_position[0]
    if memory.target_column is None or col == memory.target_column:
        memory.crossing = False
        memory.target_column = None
        memory.crossed = True
        return None
    return lateral_action(percept.heading, memory.target_column - col)


def triggered(percept: Percept, params: BehaviourParams) -> bool:
    """Proximity trigger: has the AV come close enough that crossing now puts
    this agent in front of it at the right moment?"""
    if params.trigger_mode is TriggerMode.FIXED_RADIUS:
        return percept.longitudinal_gap > 0 and percept.distance_to_av <= params.fixed_radius
    gap = percept.longitudinal_gap
    reach = percept.world.av_speed * percept.lateral_cells_to_path + params.zone_far_offset
    return 0 < gap <= reach


def decide_random(percept: Percept, rng: random.Random) -> Action:
    return ACTIONS[int(rng.random() * len(ACTIONS))]


def decide_constrained_random(
    percept: Percept, memory: AgentMemory, rng: random.Random, params: BehaviourParams
) -> Action:
    if memory.crossing:
        step = crossing_step(percept, memory)
        if step is not None:
            return step
    if rng.random() < params.cross_probability:
        start_crossing(percept, memory)
        return crossing_step(percept, memory)
    return walk_action(percept)


def decide_proximity(percept: Percept, params: BehaviourParams, memory: AgentMemory) -> Action:
    if memory.crossing:
        step = crossing_step(percept, memory)
        if step is not None:
            return step
    elif not memory.crossed and triggered(percept, params):
        start_crossing(percept, memory)
        return crossing_step(percept, memory)
    return walk_action(percept)


def elect(
    candidates: list[tuple[int, Percept]], params: BehaviourParams, election: ElectionState
) -> ElectionState:
    """Pick the triggered candidate nearest the AV (lowest id on ties). Once an
    agent is elected the election stays closed for the rest of the test."""
    if election.election_closed:
        return election
    best = None
    for agent_id, percept in candidates:
        if not triggered(percept, params):
            continue
        key = (percept.distance_to_av, agent_id)
        if best is None or key < best:
            best = key
    if best is None:
        return election
    return replace(election, elected_id=best[1], election_closed=True)


def decide_election(
    percept: Percept, params: BehaviourParams, election: ElectionState, memory: AgentMemory
) -> Action:
    if election.elected_id != percept.agent_id:
        return walk_action(percept)
    if memory.crossing:
        step = crossing_step(percept, memory)
        if step is not None:
            return step
    elif not memory.crossed:
        start_crossing(percept, memory)
        return crossing_step(percept, memory)
    return walk_action(percept)


@dataclass
class Team:
    """All agents of one test running a single behaviour.

    ``decide`` takes the start-of-tick percepts of every agent, in agent id
    order (ids are 0..n-1), and returns one action per agent.
    """

    params: BehaviourParams
    rng: random.Random
    memories: list[AgentMemory] = field(default_factory=list)
    election: ElectionState = field(default_factory=ElectionState)

    def decide(self, percepts: list[Percept]) -> list[Action]:
        kind, params, rng = self.params.kind, self.params, self.rng
        if kind is BehaviourKind.RANDOM:
            return [decide_random(p, rng) for p in percepts]
        mems = self.memories
        while len(mems) < len(percepts):
            mems.append(AgentMemory())
        if kind is BehaviourKind.CONSTRAINED_RANDOM:
            return [decide_constrained_random(p, m, rng, params) for p, m in zip(percepts, mems)]
        if kind is BehaviourKind.PROXIMITY:
            return [decide_proximity(p, params, m) for p, m in zip(percepts, mems)]
        election = self.election = elect([(p.agent_id, p) for p in percepts], params, self.election)
        return [decide_election(p, params, election, m) for p, m in zip(percepts, mems)]
