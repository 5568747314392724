"""Deterministic discrete-event kernel.

The kernel joins the superframe layout, the CSMA engine, codec airtimes,
and security sessions into end-to-end runs. Time is a 64-bit microsecond
clock; events dispatch in (time, class, insertion order), with phase
starts sorting ahead of anything else at the same instant, so a run is a
pure function of (scenario, seed).

Contention runs on one global slot grid per access phase. The grid
starts one interframe space after phase entry, pauses while a frame
exchange occupies the channel, and resumes one interframe space after an
acknowledgement (immediately after a timeout, whose guard time already
covers the gap). At every grid instant pending draws happen first, then
each contender checks the phase-fit guard; counters decrement at slot
ends and a counter reaching zero transmits at once. Overlapping
transmissions fail everyone in collision mode and are a scenario error
in ideal mode; a lone transmission is always delivered (zero bit
errors). Polled and scheduled traffic runs inside the shared phases on
pre-computed grants, one frame exchange per grant.

Every transmission passes the security gate: a node whose session is at
an authenticated level must hold an active pairwise key, its payload
goes out through secure_frame, and the hub admits it on delivery, so
counter and tag handling are exercised on every simulated frame.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path

from bansim.errors import ScenarioError, SimulationError
from bansim.mac.csma import (
    BackoffState,
    PRIORITY_TABLE,
    draw_backoff,
    guard_check,
    on_busy,
    on_failure,
    on_idle_slot,
    on_success,
    trace_line,
)
from bansim.mac.superframe import (
    PhaseKind,
    PhaseLayout,
    TrafficKind,
    admissible,
    build_layout,
    phase_at,
    place_scheduled,
    schedule_polls,
)
from bansim.phy.ppdu import frame_airtime_us
from bansim.phy.rates import info_data_rate
from bansim.security import (
    SECURITY_WIRE_OVERHEAD,
    SecurityLevel,
    SecurityManager,
    admit_frame,
    secure_frame,
)
from bansim.sim.scenario import NodeSpec, Scenario, SecuritySpec
from bansim.sim.stats import NodeStats, RunStats, write_stats_csv

__all__ = ["EventKind", "SimEvent", "Simulation", "run", "run_to_files", "write_trace"]

BEACON_BODY_LEN = 17
HUB_ID = "hub"


class EventKind(Enum):
    PHASE_START = auto()
    SLOT_TICK = auto()
    TX_START = auto()
    TX_END = auto()
    ACK_DUE = auto()
    POLL_GRANT = auto()
    BEACON_TX = auto()
    TRAFFIC_ARRIVAL = auto()


@dataclass(frozen=True)
class SimEvent:
    time_us: int
    sequence: int
    kind: EventKind
    data: tuple = ()


def _round_us(t: float) -> int:
    return int(t + 0.5)


@dataclass
class _Node:
    spec: NodeSpec
    backoff: BackoffState
    rng: random.Random
    stats: NodeStats
    airtime_us: float  # data frame, security overhead included
    airtime_int: int
    payload_airtime_us: float  # the user-payload share, exact
    queue: list[int] = field(default_factory=list)  # arrival times
    drawn: bool = False  # a backoff counter is in progress
    lock_reason: str | None = None  # "busy" | "guard" while locked
    service_start: int | None = None
    security: SecuritySpec = field(default_factory=SecuritySpec)
    session: object = None  # SecuritySession when level >= 1


class _Exchange:
    """One channel occupation: a set of simultaneous data transmissions
    and the acknowledgement cycle that follows."""

    def __init__(self, kind: PhaseKind, phase_end: int, contention: bool):
        self.kind = kind
        self.phase_end = phase_end
        self.contention = contention
        self.wires: dict[str, bytes | None] = {}
        self.pending = 0
        self.collided = False
        self.max_end = 0


class Simulation:
    def __init__(self, scenario: Scenario, collect_trace: bool = False):
        self.sc = scenario
        self.layout: PhaseLayout = build_layout(scenario.superframe)
        self.timing = scenario.timing
        self.end_time = scenario.run.duration_us
        self.collect_trace = collect_trace
        self.trace: list[str] = []

        self.now = 0
        self._heap: list[tuple[int, int, int, EventKind, tuple]] = []
        self._seq = 0

        self.ack_airtime_us = frame_airtime_us(scenario.phy, 0)
        self.ack_int = _round_us(self.ack_airtime_us)
        self.beacon_airtime_us = frame_airtime_us(scenario.phy, BEACON_BODY_LEN)
        psdu_rate = info_data_rate(scenario.phy, "psdu")

        self.security = SecurityManager(HUB_ID)
        self.nodes: dict[str, _Node] = {}
        for spec in scenario.nodes:
            sec = scenario.security.get(spec.node_id, SecuritySpec())
            body_len = spec.payload_bytes + SECURITY_WIRE_OVERHEAD[sec.level]
            airtime = frame_airtime_us(scenario.phy, body_len)
            node = _Node(
                spec=spec,
                backoff=BackoffState(PRIORITY_TABLE[spec.priority]),
                rng=random.Random(f"{scenario.run.seed}:{spec.node_id}"),
                stats=NodeStats(spec.node_id),
                airtime_us=airtime,
                airtime_int=_round_us(airtime),
                payload_airtime_us=8 * spec.payload_bytes / psdu_rate * 1000.0,
                security=sec,
            )
            if sec.level >= SecurityLevel.AUTHENTICATED:
                node.session = self.security.associate(spec.node_id, sec.level, sec.mk)
            self.nodes[spec.node_id] = node
        groups: dict[str, list[str]] = {}
        for node_id, sec in scenario.security.items():
            if sec.group:
                groups.setdefault(sec.group, []).append(node_id)
        for group_id in sorted(groups):
            self.security.distribute_gtk(group_id, sorted(groups[group_id]))

        self._contention = [
            n for n in sorted(self.nodes) if self.nodes[n].spec.access == "contention"
        ]
        self._polled = [
            n for n in sorted(self.nodes) if self.nodes[n].spec.access == "polled"
        ]
        self._scheduled = [
            n for n in sorted(self.nodes) if self.nodes[n].spec.access == "scheduled"
        ]

        self.exchange: _Exchange | None = None
        self.stats = RunStats(elapsed_us=self.end_time)
        for node_id, node in self.nodes.items():
            self.stats.nodes[node_id] = node.stats

        # Hub trace lines borrow the node line format with zeroed
        # contention fields.
        self._hub_state = BackoffState(PRIORITY_TABLE[0])
        self._hub_state.cw = 0

        beacon_span = self.layout.span(PhaseKind.BEACON)
        if beacon_span is not None:
            span_us = beacon_span.length_slots * self.layout.slot_length_us
            if self.beacon_airtime_us > span_us:
                raise ScenarioError(
                    f"beacon airtime {self.beacon_airtime_us:.0f} us exceeds the "
                    f"{span_us} us beacon phase"
                )

    # ------------------------------------------------------------ plumbing

    def _push(self, time_us: int, kind: EventKind, data: tuple = ()) -> None:
        if time_us >= self.end_time:
            return
        rank = 0 if kind == EventKind.PHASE_START else 1
        self._seq += 1
        heapq.heappush(self._heap, (time_us, rank, self._seq, kind, data))

    def _emit(self, time_us: int, node_id: str, event: str, state: BackoffState, kind: PhaseKind) -> None:
        if self.collect_trace:
            self.trace.append(trace_line(time_us, node_id, event, state, kind))

    # --------------------------------------------------------------- setup

    def _poll_spans(self) -> set[PhaseKind]:
        """Shared phases available for polling: spans holding a scheduled
        allocation are reserved for it, the hub polls only in the rest."""
        taken = set()
        for node_id in self._scheduled:
            spec = self.nodes[node_id].spec
            for slot in (spec.slot_start, spec.slot_start + spec.slot_len - 1):
                kind, _ = phase_at(self.layout, slot * self.layout.slot_length_us)
                taken.add(kind)
        return {PhaseKind.TYPE_A, PhaseKind.TYPE_B} - taken

    def _schedule_superframes(self) -> None:
        duration = self.layout.duration_us
        poll_spans = self._poll_spans()
        index = 0
        while index * duration < self.end_time:
            base = index * duration
            for span in self.layout.phases:
                if span.length_slots == 0:
                    continue
                start = base + span.start_slot * self.layout.slot_length_us
                end = start + span.length_slots * self.layout.slot_length_us
                self._push(start, EventKind.PHASE_START, (span.kind, start, end))
                if span.kind == PhaseKind.BEACON and self.layout.beacon_in(index):
                    self._push(start, EventKind.BEACON_TX, (end,))
                if self._polled and span.kind in poll_spans:
                    for grant in schedule_polls(
                        self.layout, self._polled, span.kind, self._grant_us(), base
                    ):
                        self._push(
                            grant.start_us,
                            EventKind.POLL_GRANT,
                            (grant.node_id, grant.duration_us, end),
                        )
            if self._scheduled:
                allocs = [self.nodes[n].spec.allocation() for n in self._scheduled]
                placed = place_scheduled(allocs, self.layout, index)
                starts: dict[str, int] = {}
                for slot in sorted(placed):
                    starts.setdefault(placed[slot], slot)
                for node_id, slot in sorted(starts.items()):
                    node = self.nodes[node_id]
                    start = base + slot * self.layout.slot_length_us
                    length = node.spec.slot_len * self.layout.slot_length_us
                    self._push(
                        start, EventKind.POLL_GRANT, (node_id, length, start + length)
                    )
            index += 1

    def _grant_us(self) -> int:
        if self.sc.poll_grant_us is not None:
            return self.sc.poll_grant_us
        need = [
            self.nodes[n].airtime_int + self.timing.psifs_us + self.ack_int + self.timing.gtn_us
            for n in self._polled
        ]
        return max(need) if need else 0

    def _seed_traffic(self) -> None:
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            model = node.spec.traffic[0]
            if model == "saturated":
                node.queue.append(0)
                node.stats.offered += 1
            elif model == "poisson":
                self._push_arrival(node, 0)
            else:  # scripted
                for t in node.spec.traffic[1]:
                    self._push(t, EventKind.TRAFFIC_ARRIVAL, (node_id,))

    def _push_arrival(self, node: _Node, after_us: int) -> None:
        rate_per_s = node.spec.traffic[1]
        gap = node.rng.expovariate(rate_per_s) * 1_000_000
        self._push(after_us + _round_us(gap), EventKind.TRAFFIC_ARRIVAL, (node.spec.node_id,))

    # ----------------------------------------------------------- main loop

    def run(self) -> RunStats:
        self._schedule_superframes()
        self._seed_traffic()
        while self._heap:
            time_us, _, _, kind, data = heapq.heappop(self._heap)
            self.now = time_us
            if kind == EventKind.PHASE_START:
                self._on_phase_start(*data)
            elif kind == EventKind.SLOT_TICK:
                self._on_slot_tick(*data)
            elif kind == EventKind.TX_END:
                self._on_tx_end(*data)
            elif kind == EventKind.ACK_DUE:
                self._on_ack_due(*data)
            elif kind == EventKind.POLL_GRANT:
                self._on_poll_grant(*data)
            elif kind == EventKind.BEACON_TX:
                self._on_beacon()
            elif kind == EventKind.TRAFFIC_ARRIVAL:
                self._on_arrival(*data)
        for node in self.nodes.values():
            node.stats.queued = len(node.queue)
        self.stats.check_conservation()
        return self.stats

    # ------------------------------------------------------------- phases

    def _participants(self, kind: PhaseKind) -> list[_Node]:
        return [
            self.nodes[n]
            for n in self._contention
            if admissible(kind, self.nodes[n].spec.priority, TrafficKind.CONTENTION)
        ]

    def _on_phase_start(self, kind: PhaseKind, start: int, end: int) -> None:
        participants = self._participants(kind)
        if not participants:
            return
        for node in participants:
            self._emit(start, node.spec.node_id, "enter", node.backoff, kind)
            if node.backoff.locked:
                node.backoff.locked = False
                node.lock_reason = None
                self._emit(start, node.spec.node_id, "unlock", node.backoff, kind)
            self._emit(start, node.spec.node_id, "sifs", node.backoff, kind)
        self._push(
            start + self.timing.psifs_us,
            EventKind.SLOT_TICK,
            (kind, end, False, False),
        )

    # ----------------------------------------------------------- the grid

    def _on_slot_tick(self, kind: PhaseKind, phase_end: int, slot_ends: bool, unlock: bool) -> None:
        t = self.now
        if t >= phase_end or self.exchange is not None:
            return
        participants = self._participants(kind)

        if unlock:
            for node in participants:
                if node.backoff.locked and node.lock_reason == "busy":
                    node.backoff.locked = False
                    node.lock_reason = None
                    self._emit(t, node.spec.node_id, "unlock", node.backoff, kind)

        transmitters: list[_Node] = []
        if slot_ends:
            for node in participants:
                state = node.backoff
                if node.drawn and not state.locked and state.counter > 0:
                    due = on_idle_slot(state)
                    self._emit(t, node.spec.node_id, "count", state, kind)
                    if due:
                        transmitters.append(node)
        if transmitters:
            self._begin_exchange(transmitters, t, kind, phase_end)
            return

        for node in participants:
            if node.queue and not node.drawn and not node.backoff.locked:
                draw_backoff(node.backoff, node.rng)
                node.drawn = True
                if node.service_start is None:
                    node.service_start = t
                self._emit(t, node.spec.node_id, "draw", node.backoff, kind)

        for node in participants:
            state = node.backoff
            if node.drawn and not state.locked:
                if not guard_check(
                    state, t, phase_end, node.airtime_int, self.ack_int, self.timing
                ):
                    node.lock_reason = "guard"
                    self._emit(t, node.spec.node_id, "lock", state, kind)

        self._push(t + self.timing.csma_slot_us, EventKind.SLOT_TICK, (kind, phase_end, True, False))

    # ---------------------------------------------------------- exchanges

    def _secure_payload(self, node: _Node) -> bytes | None:
        if node.session is None:
            return None
        if not node.session.ptk_active:
            raise SimulationError(
                f"{node.spec.node_id}: secured transmission without an active pairwise key"
            )
        return secure_frame(bytes(node.spec.payload_bytes), node.session)

    def _begin_exchange(self, transmitters: list[_Node], t: int, kind: PhaseKind, phase_end: int) -> None:
        if len(transmitters) > 1 and self.sc.run.channel == "ideal":
            raise SimulationError(
                f"{len(transmitters)} overlapping transmissions on an ideal channel at t={t}"
            )
        exchange = _Exchange(kind, phase_end, contention=True)
        exchange.collided = len(transmitters) > 1
        exchange.pending = len(transmitters)
        self.exchange = exchange
        for node in transmitters:
            exchange.wires[node.spec.node_id] = self._secure_payload(node)
            self._emit(t, node.spec.node_id, "tx_start", node.backoff, kind)
            self._push(t + node.airtime_int, EventKind.TX_END, (node.spec.node_id,))
        busy_ids = {n.spec.node_id for n in transmitters}
        for node in self._participants(kind):
            if node.spec.node_id in busy_ids:
                continue
            if node.drawn and not node.backoff.locked:
                on_busy(node.backoff)
                node.lock_reason = "busy"
                self._emit(t, node.spec.node_id, "lock", node.backoff, kind)

    def _on_tx_end(self, node_id: str) -> None:
        exchange = self.exchange
        assert exchange is not None, "transmission ended outside an exchange"
        node = self.nodes[node_id]
        t = self.now
        assert t <= exchange.phase_end, "transmission crossed its phase boundary"
        self._emit(t, node_id, "tx_end", node.backoff, exchange.kind)
        node.stats.tx_airtime_us += node.airtime_us
        self.stats.busy_us += node.airtime_us
        if exchange.collided:
            timeout = t + self.timing.psifs_us + self.ack_int + self.timing.gtn_us
            exchange.max_end = max(exchange.max_end, timeout)
            self._push(timeout, EventKind.ACK_DUE, (node_id, "timeout"))
        else:
            exchange.max_end = max(exchange.max_end, t + self.timing.psifs_us + self.ack_int)
            self._push(t + self.timing.psifs_us, EventKind.ACK_DUE, (node_id, "ack"))

    def _on_ack_due(self, node_id: str, outcome: str) -> None:
        exchange = self.exchange
        assert exchange is not None, "acknowledgement due outside an exchange"
        node = self.nodes[node_id]
        t = self.now
        if outcome == "ack":
            self.stats.busy_us += self.ack_airtime_us
            self.stats.ack_airtime_us += self.ack_airtime_us
            self._emit(t, node_id, "ack", node.backoff, exchange.kind)
            self._push(t + self.ack_int, EventKind.ACK_DUE, (node_id, "success"))
            return
        if outcome == "success":
            self._complete_delivery(node, t, exchange)
        else:  # timeout
            node.stats.failed += 1
            node.stats.collided += 1
            on_failure(node.backoff)
            self._emit(t, node_id, "fail", node.backoff, exchange.kind)
            draw_backoff(node.backoff, node.rng)
            self._emit(t, node_id, "draw", node.backoff, exchange.kind)
        exchange.pending -= 1
        if exchange.pending == 0:
            self.exchange = None
            if exchange.contention:
                resume = exchange.max_end if exchange.collided else t + self.timing.psifs_us
                self._push(resume, EventKind.SLOT_TICK, (exchange.kind, exchange.phase_end, False, True))

    def _complete_delivery(self, node: _Node, t: int, exchange: _Exchange) -> None:
        wire = exchange.wires.get(node.spec.node_id)
        if wire is not None:
            body = admit_frame(wire, node.session)
            assert body == bytes(node.spec.payload_bytes), "secured round trip altered the body"
        stats = node.stats
        stats.delivered += 1
        stats.payload_bits += 8 * node.spec.payload_bytes
        stats.payload_airtime_us += node.payload_airtime_us
        if node.service_start is not None:
            stats.access_delay_sum_us += t - node.service_start
        node.queue.pop(0)
        node.drawn = False
        node.service_start = None
        if exchange.contention:
            on_success(node.backoff)
        self._emit(t, node.spec.node_id, "success", node.backoff, exchange.kind)
        if node.spec.traffic[0] == "saturated":
            node.queue.append(t)
            stats.offered += 1

    # ------------------------------------------------- grants and beacons

    def _on_poll_grant(self, node_id: str, duration: int, phase_end: int) -> None:
        node = self.nodes[node_id]
        if not node.queue or self.exchange is not None:
            return
        t = self.now
        needed = node.airtime_int + self.timing.psifs_us + self.ack_int + self.timing.gtn_us
        if needed > duration:
            return
        if node.service_start is None:
            node.service_start = t
        kind, _ = phase_at(self.layout, t % self.layout.duration_us)
        exchange = _Exchange(kind, phase_end, contention=False)
        exchange.pending = 1
        exchange.wires[node_id] = self._secure_payload(node)
        self.exchange = exchange
        self._emit(t, node_id, "tx_start", node.backoff, kind)
        self._push(t + node.airtime_int, EventKind.TX_END, (node_id,))

    def _on_beacon(self) -> None:
        t = self.now
        self.stats.busy_us += self.beacon_airtime_us
        self.stats.beacon_airtime_us += self.beacon_airtime_us
        self.stats.beacons += 1
        self._emit(t, HUB_ID, "tx_start", self._hub_state, PhaseKind.BEACON)
        self._emit(
            t + _round_us(self.beacon_airtime_us),
            HUB_ID,
            "tx_end",
            self._hub_state,
            PhaseKind.BEACON,
        )

    def _on_arrival(self, node_id: str) -> None:
        node = self.nodes[node_id]
        node.queue.append(self.now)
        node.stats.offered += 1
        if node.spec.traffic[0] == "poisson":
            self._push_arrival(node, self.now)


# ------------------------------------------------------------- front door


def run(scenario: Scenario, collect_trace: bool = False) -> tuple[RunStats, list[str]]:
    """Run one scenario to completion; returns the stats and, when asked
    for, the event trace lines."""
    sim = Simulation(scenario, collect_trace=collect_trace)
    stats = sim.run()
    return stats, sim.trace


def write_trace(lines: list[str], out) -> None:
    Path(out).write_text("".join(line + "\n" for line in lines))


def run_to_files(
    scenario: Scenario, stats_path=None, trace_path=None
) -> RunStats:
    """Run and write the stats CSV and optional trace where the scenario
    or the caller says; caller paths win."""
    stats_path = stats_path or scenario.run.stats_out
    trace_path = trace_path or scenario.run.trace_out
    stats, trace = run(scenario, collect_trace=trace_path is not None)
    if stats_path:
        write_stats_csv(stats, stats_path)
    if trace_path:
        write_trace(trace, trace_path)
    return stats
