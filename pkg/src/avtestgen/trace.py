from __future__ import annotations

from dataclasses import asdict, dataclass

AV_ENTITY_ID = -1

TRACE_FIELDS = (
    "run_index",
    "tick",
    "entity_id",
    "entity_kind",
    "column",
    "row",
    "action",
    "score_delta",
    "event",
)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One row of the per-tick geospatial log."""

    run_index: int
    tick: int
    entity_id: int
    entity_kind: str  # "av" | "pedestrian"
    column: int
    row: int
    action: str  # Action value, or "advance" for the AV
    score_delta: int
    event: str | None = None  # "trigger" | "unavoidable"

    def as_dict(self) -> dict:
        return asdict(self)
