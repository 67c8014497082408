import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avtestgen.behaviours import BehaviourKind, BehaviourParams
from avtestgen.gridworld import GridConfig
from avtestgen.harness import ExperimentConfig, run_test
from avtestgen.verdict import (
    MAX_AGENT_SCORE,
    EventKind,
    Outcome,
    ScoreLedger,
    ZoneHit,
    check_precondition,
    check_unavoidable,
    classify_outcome,
    resolve_zone_events,
    score_tick,
)

GRID = GridConfig()
NARROW = GridConfig(zone_spans_lane=False)
F = 20


@pytest.mark.parametrize(
    "pos, hit",
    [((3, F + 10), True), ((3, F + 8), False), ((6, F + 10), False), ((4, F + 9), True), ((4, F + 15), False)],
)
def test_precondition_examples(pos, hit):
    got = check_precondition({0: pos}, [F], NARROW)
    assert (got is not None) == hit


def test_precondition_on_lane_edge_needs_lane_zone():
    assert check_precondition({0: (2, F + 10)}, [F], GRID) is not None
    assert check_precondition({0: (2, F + 10)}, [F], NARROW) is None


@pytest.mark.parametrize(
    "pos, hit",
    [((4, F + 3), True), ((4, F + 9), False), ((3, F), True), ((3, F - 2), True), ((3, F - 3), False)],
)
def test_unavoidable_examples(pos, hit):
    got = check_unavoidable({0: pos}, [F], NARROW)
    assert (got is not None) == hit


def test_footprint_stays_on_path_columns():
    assert check_unavoidable({0: (2, F - 1)}, [F], GRID) is None
    assert check_unavoidable({0: (2, F + 1)}, [F], GRID) is not None


def test_precondition_clipped_at_road_end():
    assert check_precondition({0: (3, 65)}, [60], NARROW) is None
    assert check_precondition({0: (3, 65)}, [56], NARROW) is not None


def test_first_hit_in_sweep_then_id_order():
    swept = [F + k for k in range(1, 7)]
    # agent 1 enters the zone at the first swept front, agent 0 only later
    positions = {0: (3, F + 20), 1: (3, F + 11)}
    hit = check_precondition(positions, swept, NARROW)
    assert hit == ZoneHit(1, 0, F + 1)
    both = {0: (3, F + 11), 1: (4, F + 11)}
    assert check_precondition(both, swept, NARROW).agent_id == 0


def test_trigger_before_unavoidable_in_same_tick():
    swept = [F + k for k in range(1, 7)]
    positions = {0: (3, F + 1 + 9), 1: (3, F + 2 + 8)}
    trig = check_precondition(positions, swept, NARROW)
    unav = check_unavoidable(positions, swept, NARROW)
    assert trig.sweep_step == 0 and unav.sweep_step == 1
    t, u = resolve_zone_events(trig, unav)
    assert t == trig and u is None
    assert classify_outcome(t, u, F + 6, NARROW, stop_on_unavoidable=True) is Outcome.SUCCESSFUL


def test_precondition_wins_ties_and_later_trigger_loses():
    a, b = ZoneHit(0, 2, 0), ZoneHit(1, 2, 0)
    assert resolve_zone_events(a, b) == (a, None)
    late = ZoneHit(0, 3, 0)
    assert resolve_zone_events(late, b) == (None, b)


# -- outcomes ---------------------------------------------------------------


def test_classify_outcome():
    hit = ZoneHit(0, 0, 10)
    assert classify_outcome(hit, None, 10, GRID) is Outcome.SUCCESSFUL
    assert classify_outcome(hit, hit, 10, GRID) is Outcome.SUCCESSFUL
    assert classify_outcome(None, hit, 10, GRID, stop_on_unavoidable=True) is Outcome.UNAVOIDABLE
    assert classify_outcome(None, hit, 10, GRID) is None
    assert classify_outcome(None, hit, 68, GRID) is Outcome.UNAVOIDABLE
    assert classify_outcome(None, None, 68, GRID) is Outcome.EXPIRED
    assert classify_outcome(None, None, 64, GRID) is None


# -- scoring ----------------------------------------------------------------


def test_score_adjacent_spawn_is_94():
    ledger = ScoreLedger.for_agents([0])
    score_tick(ledger, 1, {0: True}, trigger_id=0)
    assert ledger.totals[0] == 94 == MAX_AGENT_SCORE


def test_score_ten_pavement_ticks():
    ledger = ScoreLedger.for_agents([0])
    for t in range(1, 11):
        score_tick(ledger, t, {0: False})
    assert ledger.totals[0] == -10


def test_score_three_road_ticks_then_trigger():
    ledger = ScoreLedger.for_agents([0, 1])
    for t in (1, 2, 3):
        score_tick(ledger, t, {0: True, 1: False}, trigger_id=0 if t == 3 else None)
    assert ledger.totals == {0: 82, 1: -3}
    assert ledger.tick_delta(0, 3) == 94


def test_zone_reward_at_most_once():
    ledger = ScoreLedger.for_agents([0])
    score_tick(ledger, 1, {0: True}, trigger_id=0)
    score_tick(ledger, 2, {0: True}, trigger_id=0)
    rewards = [e for e in ledger.events[0] if e.kind is EventKind.ZONE_REWARD]
    assert len(rewards) == 1
    with pytest.raises(ValueError):
        ledger.add(0, 3, EventKind.ZONE_REWARD, 100)


@given(
    st.integers(0, 2**32),
    st.integers(1, 20),
    st.sampled_from(list(BehaviourKind)),
    st.booleans(),
)
@settings(max_examples=60, deadline=None)
def test_agent_scores_bounded(seed, n_agents, kind, stop):
    config = ExperimentConfig(
        behaviour=BehaviourParams(kind=kind), n_agents=n_agents, base_seed=seed, stop_on_unavoidable=stop
    )
    r = run_test(config, 0, record_trace=False)
    assert max(r.scores.values()) <= MAX_AGENT_SCORE
    assert min(r.scores.values()) >= -6 * r.ticks_elapsed
    rewarded = [i for i in r.scores if r.ledger.rewarded(i)]
    assert rewarded == ([r.trigger_agent] if r.outcome is Outcome.SUCCESSFUL else [])
    assert r.ticks_elapsed <= 11
