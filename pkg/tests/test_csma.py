"""Contention engine tests: window bounds, backoff mechanics, the slot
guard, and an exact scripted replay against a hand-computed trace."""

import math
import random
from pathlib import Path

import pytest

from bansim.mac import (
    BackoffState,
    MacTimingConstants,
    PRIORITY_TABLE,
    PhaseKind,
    PriorityClass,
    draw_backoff,
    guard_check,
    on_busy,
    on_failure,
    on_idle_slot,
    on_success,
)
from bansim.mac.csma import ScriptedDraws, replay_contention, trace_line

GOLDEN = Path(__file__).parent / "data" / "contention_replay.csv"
TIMING = MacTimingConstants()


class TestPriorityTable:
    def test_eight_classes_with_valid_bounds(self):
        assert sorted(PRIORITY_TABLE) == list(range(8))
        for up, cls in PRIORITY_TABLE.items():
            assert cls.user_priority == up
            assert 1 <= cls.cw_min <= cls.cw_max

    def test_higher_priority_contends_harder(self):
        for low, high in zip(range(7), range(1, 8)):
            assert PRIORITY_TABLE[high].cw_min <= PRIORITY_TABLE[low].cw_min
            assert PRIORITY_TABLE[high].cw_max <= PRIORITY_TABLE[low].cw_max

    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError):
            PriorityClass(0, 0, 4)
        with pytest.raises(ValueError):
            PriorityClass(0, 8, 4)


class TestBackoffDraw:
    def test_degenerate_window_always_draws_one(self):
        state = BackoffState(PRIORITY_TABLE[7])  # cw_min = 1
        rng = random.Random(7)
        for _ in range(50):
            draw_backoff(state, rng)
            assert state.counter == 1
            state.counter = 0

    def test_draws_uniform_over_window(self):
        state = BackoffState(PRIORITY_TABLE[2])  # cw_min = 8
        rng = random.Random(20240817)
        counts = {v: 0 for v in range(1, 9)}
        n = 100_000
        for _ in range(n):
            draw_backoff(state, rng)
            counts[state.counter] += 1
            state.counter = 0
        for v in range(1, 9):
            assert abs(counts[v] / n - 0.125) < 0.01

    def test_draw_unlocks(self):
        state = BackoffState(PRIORITY_TABLE[2])
        state.locked = True
        draw_backoff(state, ScriptedDraws([5]))
        assert not state.locked and state.counter == 5


class TestCountdown:
    def test_transmission_due_exactly_at_zero(self):
        state = BackoffState(PRIORITY_TABLE[2])
        draw_backoff(state, ScriptedDraws([4]))
        signals = [on_idle_slot(state) for _ in range(4)]
        assert signals == [False, False, False, True]
        assert state.counter == 0

    def test_counting_without_backoff_in_progress_fails(self):
        state = BackoffState(PRIORITY_TABLE[2])
        with pytest.raises(ValueError):
            on_idle_slot(state)

    def test_locked_counter_ignores_idle_slots(self):
        state = BackoffState(PRIORITY_TABLE[2])
        draw_backoff(state, ScriptedDraws([5]))
        on_idle_slot(state)
        on_busy(state)
        before = state.counter
        for _ in range(10):
            assert on_idle_slot(state) is False
        assert state.counter == before == 4
        assert state.locked


class TestGuard:
    # needed = slot + data + sifs + ack + guard = 125+400+50+100+85 = 760
    def test_exact_fit_proceeds(self):
        state = BackoffState(PRIORITY_TABLE[2])
        assert guard_check(state, 340, 1100, 400, 100, TIMING)
        assert not state.locked

    def test_one_microsecond_short_locks(self):
        state = BackoffState(PRIORITY_TABLE[2])
        assert not guard_check(state, 341, 1100, 400, 100, TIMING)
        assert state.locked

    def test_unbounded_phase_never_locks(self):
        state = BackoffState(PRIORITY_TABLE[2])
        assert guard_check(state, 10**12, None, 400, 100, TIMING)
        assert guard_check(state, 10**12, math.inf, 400, 100, TIMING)
        assert not state.locked


def reference_window(priority, outcomes):
    """Independent restatement of the window rule: double on every second
    consecutive failure, saturate at the bound, reset on success."""
    cw, fails, expect = priority.cw_min, 0, []
    for ok in outcomes:
        if ok:
            cw, fails = priority.cw_min, 0
        else:
            fails += 1
            if fails % 2 == 0:
                cw = min(2 * cw, priority.cw_max)
        expect.append((cw, fails))
    return expect


class TestWindowRule:
    def test_doubling_on_even_failures_only(self):
        state = BackoffState(PRIORITY_TABLE[4])  # (4, 16)
        seen = []
        for _ in range(6):
            on_failure(state)
            seen.append(state.cw)
        assert seen == [4, 8, 8, 16, 16, 16]

    def test_success_resets_and_is_idempotent(self):
        state = BackoffState(PRIORITY_TABLE[4])
        for _ in range(4):
            on_failure(state)
        assert state.cw == 16 and state.consecutive_failures == 4
        on_success(state)
        assert state.cw == 4 and state.consecutive_failures == 0
        on_success(state)
        assert state.cw == 4 and state.consecutive_failures == 0

    def test_redraw_respects_new_window(self):
        state = BackoffState(PRIORITY_TABLE[4])
        rng = random.Random(99)
        on_failure(state, rng)
        on_failure(state, rng)  # window now 8
        assert 1 <= state.counter <= 8
        for _ in range(200):
            on_failure(state, rng)
            assert 1 <= state.counter <= state.cw <= 16

    @pytest.mark.parametrize("up", [0, 2, 4, 7])
    def test_matches_reference_interpreter(self, up):
        priority = PRIORITY_TABLE[up]
        rng = random.Random(4000 + up)
        outcomes = [rng.random() < 0.4 for _ in range(2000)]
        state = BackoffState(priority)
        for ok, (exp_cw, exp_fails) in zip(outcomes, reference_window(priority, outcomes)):
            on_success(state) if ok else on_failure(state)
            assert (state.cw, state.consecutive_failures) == (exp_cw, exp_fails)


class TestScriptedDraws:
    def test_pops_in_order_and_validates_range(self):
        rng = ScriptedDraws([3, 8])
        assert rng.randint(1, 8) == 3
        with pytest.raises(ValueError):
            rng.randint(1, 4)  # 8 outside [1, 4]
        with pytest.raises(IndexError):
            ScriptedDraws([]).randint(1, 8)


GOLDEN_PHASES = [
    (PhaseKind.RAP1, 0, 1100),
    (PhaseKind.TYPE_A, 1100, 2000),
    (PhaseKind.CAP, 2000, 3100),
    (PhaseKind.RAP2, 3100, 6000),
]


def golden_replay():
    return replay_contention(
        phases=GOLDEN_PHASES,
        draws=[3, 5, 8],
        data_tx_us=400,
        ack_tx_us=100,
        ack_outcomes=[False, False, True],
        timing=TIMING,
        priority=PRIORITY_TABLE[2],
    )


class TestReplay:
    def test_trace_line_format(self):
        state = BackoffState(PRIORITY_TABLE[2])
        state.counter, state.consecutive_failures = 5, 1
        assert trace_line(1060, "n0", "draw", state, PhaseKind.RAP1) == (
            "1060,n0,draw,5,8,1,RAP1"
        )

    def test_exact_match_against_hand_computed_trace(self):
        expected = GOLDEN.read_text().splitlines()
        assert golden_replay() == expected

    def test_behavioral_milestones(self):
        rows = [line.split(",") for line in golden_replay()]

        def rows_for(event):
            return [r for r in rows if r[2] == event]

        # Counter frozen at the guard lock, resumed unchanged after unlock.
        lock_cap = next(r for r in rows if r[2] == "lock" and r[6] == "CAP")
        unlock_rap2 = next(r for r in rows if r[2] == "unlock" and r[6] == "RAP2")
        assert lock_cap[3] == unlock_rap2[3] == "2"

        # Window doubles on the second failure only, and resets on success.
        fails = rows_for("fail")
        assert [(r[4], r[5]) for r in fails] == [("8", "1"), ("16", "2")]
        draws = rows_for("draw")
        assert [r[3] for r in draws] == ["3", "5", "8"]
        success = rows_for("success")
        assert [(r[4], r[5]) for r in success] == [("8", "0")]

        # Each (re)entry into an admissible phase waits one interframe
        # space before the slot grid starts.
        first_counts = {}
        for r in rows:
            if r[2] == "count" and r[6] not in first_counts:
                first_counts[r[6]] = int(r[0])
        entries = {r[6]: int(r[0]) for r in rows if r[2] == "sifs"}
        for phase, t0 in entries.items():
            assert first_counts[phase] == t0 + TIMING.psifs_us + TIMING.csma_slot_us

    def test_replay_stops_at_success(self):
        lines = golden_replay()
        assert lines[-1].split(",")[2] == "success"
        assert sum(1 for l in lines if l.split(",")[2] == "tx_start") == 3

    def test_inadmissible_phase_only_logged(self):
        type_a = [l for l in golden_replay() if l.endswith("TypeI_II_a")]
        assert len(type_a) == 1
        assert type_a[0].split(",")[2] == "enter"
