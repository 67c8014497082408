"""Discrete road environment: geometry, AV kinematics, assertion zones, TTC
and valid spawn locations.

Positions are ``(column, row)`` tuples. Columns run west to east across the
road, rows run along the road in the AV's direction of travel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from enum import Enum

import numpy as np


class BoundsError(ValueError):
    pass


class UndefinedTTCError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    width: int = 12
    length: int = 66
    cell_size: float = 1.5  # metres
    av_speed: int = 6  # cells/tick
    ped_speed: int = 1  # cells/tick
    tick_duration: float = 1.0  # seconds
    stopping_distance: int = 8
    precondition_depth: int = 6
    pavement_width: int = 2
    lane_width: int = 4
    av_start_front: int = 2
    footprint_length: int = 3
    footprint_width: int = 2
    zone_spans_lane: bool = True

    def __post_init__(self):
        if self.width != 2 * (self.pavement_width + self.lane_width):
            raise ValueError("width must equal two pavements plus two lanes")
        if self.footprint_width > self.lane_width:
            raise ValueError("AV footprint wider than its lane")

    @property
    def n_cells(self) -> int:
        return self.width * self.length

    @property
    def end_row(self) -> int:
        return self.length - 1

    @cached_property
    def path_columns(self) -> tuple[int, ...]:
        # centred in the AV lane
        lane_start = self.pavement_width
        offset = (self.lane_width - self.footprint_width) // 2
        first = lane_start + offset
        return tuple(range(first, first + self.footprint_width))

    @cached_property
    def lane_av_columns(self) -> tuple[int, ...]:
        return tuple(range(self.pavement_width, self.pavement_width + self.lane_width))

    @cached_property
    def zone_columns(self) -> tuple[int, ...]:
        """Columns covered by the stopping and precondition zones."""
        return self.lane_av_columns if self.zone_spans_lane else self.path_columns

    @property
    def av_speed_mps(self) -> float:
        return self.av_speed * self.cell_size / self.tick_duration

    @property
    def zone_near_offset(self) -> int:
        return self.stopping_distance + 1

    @property
    def zone_far_offset(self) -> int:
        return self.stopping_distance + self.precondition_depth


class CellKind(Enum):
    PAVEMENT_WEST = "pavement_west"
    LANE_AV = "lane_av"
    LANE_OPPOSITE = "lane_opposite"
    PAVEMENT_EAST = "pavement_east"

    @property
    def is_road(self) -> bool:
        return self in (CellKind.LANE_AV, CellKind.LANE_OPPOSITE)

    @property
    def is_pavement(self) -> bool:
        return not self.is_road


class Heading(Enum):
    """Pavement walking direction; the value is the row step of Forward."""

    NORTH = 1
    SOUTH = -1

    @property
    def reversed(self) -> Heading:
        return Heading.SOUTH if self is Heading.NORTH else Heading.NORTH


class Action(Enum):
    """Pedestrian actions, relative to the pedestrian's heading."""

    STAY = "stay"
    FORWARD = "forward"
    BACKWARD = "backward"
    LEFT = "left"
    RIGHT = "right"


ACTIONS = tuple(Action)


@dataclass(frozen=True)
class AvState:
    front_row: int
    path_columns: tuple[int, ...] = (3, 4)
    footprint_length: int = 3
    footprint_width: int = 2

    @classmethod
    def initial(cls, config: GridConfig) -> AvState:
        return cls(
            front_row=config.av_start_front,
            path_columns=config.path_columns,
            footprint_length=config.footprint_length,
            footprint_width=config.footprint_width,
        )

    @property
    def rear_row(self) -> int:
        return self.front_row - self.footprint_length + 1

    def footprint(self) -> set[tuple[int, int]]:
        return {
            (c, r)
            for c in self.path_columns
            for r in range(self.rear_row, self.front_row + 1)
        }


@dataclass(frozen=True)
class ZoneRect:
    row_min: int
    row_max: int
    columns: frozenset[int]

    @property
    def empty(self) -> bool:
        return self.row_max < self.row_min

    @property
    def depth(self) -> int:
        return max(0, self.row_max - self.row_min + 1)

    def __contains__(self, pos) -> bool:
        col, row = pos
        return col in self.columns and self.row_min <= row <= self.row_max

    def cells(self) -> set[tuple[int, int]]:
        return {(c, r) for c in self.columns for r in range(self.row_min, self.row_max + 1)}


@dataclass(frozen=True)
class PedestrianState:
    id: int
    position: tuple[int, int]
    heading: Heading = Heading.NORTH
    crossing: bool = False
    target_column: int | None = None


def in_bounds(config: GridConfig, pos: tuple[int, int]) -> bool:
    col, row = pos
    return 0 <= col < config.width and 0 <= row < config.length


def classify_cell(config: GridConfig, pos: tuple[int, int]) -> CellKind:
    if not in_bounds(config, pos):
        raise BoundsError(f"position {pos} outside {config.width}x{config.length} grid")
    col = pos[0]
    pw, lw = config.pavement_width, config.lane_width
    if col < pw:
        return CellKind.PAVEMENT_WEST
    if col < pw + lw:
        return CellKind.LANE_AV
    if col < pw + 2 * lw:
        return CellKind.LANE_OPPOSITE
    return CellKind.PAVEMENT_EAST


def column_kinds(config: GridConfig) -> tuple[CellKind, ...]:
    """Cell kind per column; kinds depend on the column only."""
    return tuple(classify_cell(config, (c, 0)) for c in range(config.width))


def pavement_columns(config: GridConfig) -> tuple[int, ...]:
    return tuple(c for c, k in enumerate(column_kinds(config)) if k.is_pavement)


def compute_zones(av: AvState, config: GridConfig) -> tuple[ZoneRect, ZoneRect]:
    """Stopping zone and precondition zone ahead of the AV front, clipped to
    the end of the road."""
    cols = frozenset(config.zone_columns)
    f, end = av.front_row, config.end_row
    stop_lo, stop_hi = f + 1, f + config.stopping_distance
    pre_lo, pre_hi = stop_hi + 1, stop_hi + config.precondition_depth
    stopping = ZoneRect(stop_lo, min(stop_hi, end), cols)
    precondition = ZoneRect(pre_lo, min(pre_hi, end), cols)
    return stopping, precondition


def ttc(av: AvState, ped_row: int, config: GridConfig) -> float:
    """Time to collision in seconds for a pedestrian ``ped_row`` in the AV path."""
    gap = ped_row - av.front_row
    if gap < 0:
        raise UndefinedTTCError(f"row {ped_row} is behind the AV front at {av.front_row}")
    return gap * config.cell_size / config.av_speed_mps


def advance_av(av: AvState, config: GridConfig) -> tuple[AvState, list[int]]:
    """Move the AV one tick; also returns every intermediate front row so zone
    checks can run at single-cell resolution."""
    f = av.front_row
    swept = list(range(f + 1, f + config.av_speed + 1))
    return replace(av, front_row=f + config.av_speed), swept


def is_expired(av: AvState, config: GridConfig) -> bool:
    return av.front_row >= config.end_row


def action_delta(action: Action, heading: Heading) -> tuple[int, int]:
    """Absolute (dcol, drow) of an action. Facing north, right is east."""
    h = heading.value
    if action is Action.FORWARD:
        return 0, h
    if action is Action.BACKWARD:
        return 0, -h
    if action is Action.RIGHT:
        return h, 0
    if action is Action.LEFT:
        return -h, 0
    return 0, 0


def lateral_action(heading: Heading, dcol: int) -> Action:
    """Relative action that steps one column in the sign of ``dcol``."""
    if dcol == 0:
        return Action.STAY
    return Action.RIGHT if (dcol > 0) == (heading is Heading.NORTH) else Action.LEFT


def apply_action(ped: PedestrianState, action: Action, config: GridConfig) -> PedestrianState:
    """Move ``ped`` one cell. Backward turns the pedestrian around as it steps,
    so a pavement walker reverses at the map ends. Moves off the grid are
    clamped to no-ops (heading is still updated)."""
    dcol, drow = action_delta(action, ped.heading)
    col, row = ped.position
    heading = ped.heading.reversed if action is Action.BACKWARD else ped.heading
    new_pos = (col + dcol * config.ped_speed, row + drow * config.ped_speed)
    if not in_bounds(config, new_pos):
        new_pos = ped.position
    if new_pos == ped.position and heading is ped.heading:
        return ped
    return replace(ped, position=new_pos, heading=heading)


def _tick_zone_windows(config: GridConfig) -> list[list[tuple[int, int]]]:
    """Per tick (index 0 = tick 1), the precondition-zone row ranges evaluated
    at each swept front, for a fresh AV."""
    av = AvState.initial(config)
    windows = []
    while not is_expired(av, config):
        av, swept = advance_av(av, config)
        tick = []
        for s in swept:
            _, pre = compute_zones(replace(av, front_row=s), config)
            if not pre.empty:
                tick.append((pre.row_min, pre.row_max))
        windows.append(tick)
    return windows


def compute_valid_spawn_mask(config: GridConfig) -> np.ndarray:
    """Boolean ``[row, column]`` array, True on pavement cells from which a
    pedestrian can be inside the precondition zone at some swept zone check.

    Reachability on an open rectangle with a stay action is Manhattan distance,
    so the check reduces to a distance-to-interval test per tick.
    """
    mask = np.zeros((config.length, config.width), dtype=bool)
    path = config.zone_columns
    windows = _tick_zone_windows(config)
    for col in pavement_columns(config):
        lateral = min(abs(col - p) for p in path)
        for row in range(config.length):
            for t, tick in enumerate(windows, start=1):
                budget = t * config.ped_speed - lateral
                if budget < 0:
                    continue
                if any(max(lo - row, 0, row - hi) <= budget for lo, hi in tick):
                    mask[row, col] = True
                    break
    return mask


def valid_spawn_cells(mask: np.ndarray) -> list[tuple[int, int]]:
    """Valid cells as (column, row), ordered by column then row."""
    cols, rows = np.nonzero(mask.T)
    return [(int(c), int(r)) for c, r in zip(cols, rows)]
