"""Slotted CSMA/CA contention engine.

One BackoffState per node: the node draws a counter uniformly from
[1, CW], decrements it once per idle contention slot, and transmits when
it reaches zero. The counter locks (value preserved, never redrawn) while
the channel is busy and whenever the time left in the current access phase
cannot fit one more slot plus a full frame exchange and the nominal guard
time. CW doubles only on every second consecutive failure, capped at
CW_max, and resets to CW_min on success.

The module also carries a scripted replay driver that walks a single node
through an explicit phase/outcome timeline and emits the canonical trace
line per event: `time_us,node,event,counter,cw,failures,phase`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from bansim.mac.superframe import PhaseKind, TrafficKind, admissible

__all__ = [
    "PriorityClass",
    "PRIORITY_TABLE",
    "MacTimingConstants",
    "BackoffState",
    "ScriptedDraws",
    "draw_backoff",
    "on_idle_slot",
    "on_busy",
    "guard_check",
    "on_failure",
    "on_success",
    "trace_line",
    "replay_contention",
]


class Rng(Protocol):
    def randint(self, a: int, b: int) -> int: ...


@dataclass(frozen=True)
class PriorityClass:
    user_priority: int  # 0 (lowest) .. 7 (highest)
    cw_min: int
    cw_max: int

    def __post_init__(self):
        if not 1 <= self.cw_min <= self.cw_max:
            raise ValueError(f"need 1 <= cw_min <= cw_max, got ({self.cw_min}, {self.cw_max})")


# Contention window bounds per user priority. Implementation defaults:
# monotone in priority, halving roughly every step, highest priority most
# aggressive. Override per scenario where other bounds are required.
PRIORITY_TABLE = {
    up: PriorityClass(up, lo, hi)
    for up, (lo, hi) in enumerate(
        [(16, 64), (16, 32), (8, 32), (8, 16), (4, 16), (4, 8), (2, 8), (1, 4)]
    )
}


@dataclass(frozen=True)
class MacTimingConstants:
    """Interframe spacing, contention slot size, and nominal guard time.

    Implementation defaults; the model ties behavior to the constants, not
    to these particular values.
    """

    psifs_us: int = 50
    csma_slot_us: int = 125
    gtn_us: int = 85


@dataclass
class BackoffState:
    priority: PriorityClass
    cw: int = 0  # 0 = not yet initialized, replaced by cw_min
    counter: int = 0
    locked: bool = False
    consecutive_failures: int = 0

    def __post_init__(self):
        if self.cw == 0:
            self.cw = self.priority.cw_min
        if not self.priority.cw_min <= self.cw <= self.priority.cw_max:
            raise ValueError(f"cw {self.cw} outside priority bounds")


def draw_backoff(state: BackoffState, rng: Rng) -> BackoffState:
    """Draw a fresh counter uniformly over [1, CW] and unlock."""
    state.counter = rng.randint(1, state.cw)
    if not 1 <= state.counter <= state.cw:
        raise ValueError(f"drawn counter {state.counter} outside [1, {state.cw}]")
    state.locked = False
    return state


def on_idle_slot(state: BackoffState) -> bool:
    """Count one idle slot down; True signals a due transmission.

    A locked state ignores idle slots entirely.
    """
    if state.locked:
        return False
    if state.counter <= 0:
        raise ValueError("no backoff in progress")
    state.counter -= 1
    return state.counter == 0


def on_busy(state: BackoffState) -> BackoffState:
    """Busy channel: freeze the counter exactly where it is."""
    state.locked = True
    return state


def guard_check(
    state: BackoffState,
    now_us: float,
    phase_end_us: float | None,
    pending_tx_us: float,
    ack_tx_us: float,
    timing: MacTimingConstants,
) -> bool:
    """Decide at a slot boundary whether the exchange still fits the phase.

    Proceeding requires the upcoming slot plus the data transmission, one
    interframe space, the acknowledgement, and the nominal guard time to
    finish by `phase_end_us`; an exact fit proceeds. Returns True to
    proceed, False after locking the counter.
    """
    if phase_end_us is None or phase_end_us == math.inf:
        return True
    needed = (
        timing.csma_slot_us + pending_tx_us + timing.psifs_us + ack_tx_us + timing.gtn_us
    )
    if now_us + needed > phase_end_us:
        state.locked = True
        return False
    return True


def on_failure(state: BackoffState, rng: Rng | None = None) -> BackoffState:
    """Record a missed acknowledgement.

    CW doubles on even-numbered consecutive failures only, saturating at
    CW_max. When `rng` is given the replacement backoff is drawn here;
    callers that timestamp the draw separately pass None and call
    draw_backoff themselves.
    """
    state.consecutive_failures += 1
    if state.consecutive_failures % 2 == 0:
        state.cw = min(2 * state.cw, state.priority.cw_max)
    if rng is not None:
        draw_backoff(state, rng)
    return state


def on_success(state: BackoffState) -> BackoffState:
    """Acknowledged transmission: reset the contention window."""
    state.cw = state.priority.cw_min
    state.consecutive_failures = 0
    state.locked = False
    return state


# ------------------------------------------------------------------- replay


class ScriptedDraws:
    """Deterministic stand-in for an RNG: pops pre-decided draw values."""

    def __init__(self, values: list[int]):
        self._values = list(values)

    def randint(self, a: int, b: int) -> int:
        if not self._values:
            raise IndexError("scripted draws exhausted")
        value = self._values.pop(0)
        if not a <= value <= b:
            raise ValueError(f"scripted draw {value} outside [{a}, {b}]")
        return value


def trace_line(
    time_us: int, node: str, event: str, state: BackoffState, phase: PhaseKind
) -> str:
    return (
        f"{time_us},{node},{event},{state.counter},{state.cw},"
        f"{state.consecutive_failures},{phase.value}"
    )


def replay_contention(
    phases: list[tuple[PhaseKind, int, int]],
    draws: list[int],
    data_tx_us: int,
    ack_tx_us: int,
    ack_outcomes: list[bool],
    timing: MacTimingConstants = MacTimingConstants(),
    priority: PriorityClass = PRIORITY_TABLE[2],
    node_id: str = "n0",
) -> list[str]:
    """Walk one node's contention for a single frame through a scripted
    timeline of (phase kind, start_us, end_us) and scripted draw values.

    `ack_outcomes[i]` says whether transmission attempt i is acknowledged.
    The walk ends at the first acknowledged transmission. Returns the
    emitted trace lines.

    Timeline conventions: entering an admissible phase unlocks a frozen
    counter, then contention waits one interframe space before the slot
    grid starts; after a missed acknowledgement the grid resumes at the
    timeout instant (the guard time already covers the gap). At each slot
    boundary the guard check runs first; a locked counter keeps its value
    until the next admissible phase.
    """
    state = BackoffState(priority)
    rng = ScriptedDraws(draws)
    lines: list[str] = []
    tx_index = 0
    drawn = False

    for kind, start_us, end_us in phases:
        t = start_us
        lines.append(trace_line(t, node_id, "enter", state, kind))
        if not admissible(kind, priority.user_priority, TrafficKind.CONTENTION):
            continue
        if state.locked:
            state.locked = False
            lines.append(trace_line(t, node_id, "unlock", state, kind))
        lines.append(trace_line(t, node_id, "sifs", state, kind))
        t += timing.psifs_us
        if not drawn:
            draw_backoff(state, rng)
            drawn = True
            lines.append(trace_line(t, node_id, "draw", state, kind))

        while True:
            if t >= end_us:
                break
            if not guard_check(state, t, end_us, data_tx_us, ack_tx_us, timing):
                lines.append(trace_line(t, node_id, "lock", state, kind))
                break
            t += timing.csma_slot_us
            due = on_idle_slot(state)
            lines.append(trace_line(t, node_id, "count", state, kind))
            if not due:
                continue
            lines.append(trace_line(t, node_id, "tx_start", state, kind))
            t += data_tx_us
            lines.append(trace_line(t, node_id, "tx_end", state, kind))
            if tx_index >= len(ack_outcomes):
                raise IndexError("scripted acknowledgement outcomes exhausted")
            acked = ack_outcomes[tx_index]
            tx_index += 1
            if acked:
                t += timing.psifs_us
                lines.append(trace_line(t, node_id, "ack", state, kind))
                t += ack_tx_us
                on_success(state)
                lines.append(trace_line(t, node_id, "success", state, kind))
                return lines
            t += timing.psifs_us + ack_tx_us + timing.gtn_us
            on_failure(state)
            lines.append(trace_line(t, node_id, "fail", state, kind))
            draw_backoff(state, rng)
            lines.append(trace_line(t, node_id, "draw", state, kind))
    return lines
