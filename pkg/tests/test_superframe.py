"""Superframe layout, phase admission, and access scheduling tests."""

import pytest

from bansim.errors import AllocationConflict, InvalidLayoutError
from bansim.mac import (
    OperationalMode,
    PHASE_ORDER,
    PhaseKind,
    PollGrant,
    ScheduledAllocation,
    SuperframeConfig,
    TrafficKind,
    admissible,
    build_layout,
    phase_at,
    place_scheduled,
    schedule_polls,
)

FULL_SLOTS = {
    PhaseKind.BEACON: 4,
    PhaseKind.EAP1: 10,
    PhaseKind.RAP1: 50,
    PhaseKind.TYPE_A: 80,
    PhaseKind.EAP2: 10,
    PhaseKind.RAP2: 40,
    PhaseKind.TYPE_B: 50,
    PhaseKind.CAP: 12,
}


def full_layout():
    return build_layout(SuperframeConfig(phase_slots=dict(FULL_SLOTS)))


class TestBuildLayout:
    def test_phases_cover_superframe_in_canonical_order(self):
        layout = full_layout()
        assert [p.kind for p in layout.phases] == PHASE_ORDER
        cursor = 0
        for phase in layout.phases:
            assert phase.start_slot == cursor
            cursor += phase.length_slots
        assert cursor == 256
        assert layout.duration_us == 256 * 500

    def test_zero_length_phase_has_no_span(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.EAP2] = 0
        slots[PhaseKind.RAP2] += 10
        layout = build_layout(SuperframeConfig(phase_slots=slots))
        assert layout.span(PhaseKind.EAP2) is None
        assert layout.span(PhaseKind.RAP2).length_slots == 50

    def test_slot_sum_mismatch_rejected(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.CAP] += 1
        with pytest.raises(InvalidLayoutError):
            build_layout(SuperframeConfig(phase_slots=slots))

    def test_negative_phase_length_rejected(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.CAP] = -2
        slots[PhaseKind.RAP2] += 14
        with pytest.raises(InvalidLayoutError):
            build_layout(SuperframeConfig(phase_slots=slots))

    def test_nonpositive_geometry_rejected(self):
        with pytest.raises(InvalidLayoutError):
            build_layout(SuperframeConfig(slot_length_us=0, phase_slots=dict(FULL_SLOTS)))
        with pytest.raises(InvalidLayoutError):
            build_layout(
                SuperframeConfig(slots_per_superframe=0, phase_slots=dict(FULL_SLOTS))
            )

    def test_beacon_mode_requires_beacon_phase(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.BEACON] = 0
        slots[PhaseKind.RAP1] += 4
        with pytest.raises(InvalidLayoutError):
            build_layout(SuperframeConfig(phase_slots=slots))

    def test_beacon_prohibited_band_keeps_superframe_but_no_beacon(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.BEACON] = 0
        slots[PhaseKind.RAP1] += 4
        layout = build_layout(
            SuperframeConfig(phase_slots=slots, beacon_prohibited=True)
        )
        assert layout.span(PhaseKind.BEACON) is None
        assert not layout.beacon_in(0)
        with pytest.raises(InvalidLayoutError):
            build_layout(
                SuperframeConfig(phase_slots=dict(FULL_SLOTS), beacon_prohibited=True)
            )

    def test_nonbeacon_bounded_is_one_shared_phase(self):
        for fill, kind in (("I", PhaseKind.TYPE_A), ("II", PhaseKind.TYPE_B)):
            layout = build_layout(
                SuperframeConfig(
                    mode=OperationalMode.NONBEACON_BOUNDED, fill_phase_type=fill
                )
            )
            span = layout.span(kind)
            assert span.start_slot == 0
            assert span.length_slots == 256
            others = [p for p in layout.phases if p.kind != kind]
            assert all(p.length_slots == 0 for p in others)

    def test_nonbeacon_bounded_rejects_unknown_fill(self):
        with pytest.raises(InvalidLayoutError):
            build_layout(
                SuperframeConfig(
                    mode=OperationalMode.NONBEACON_BOUNDED, fill_phase_type="III"
                )
            )

    def test_unbounded_mode_is_all_type_two(self):
        layout = build_layout(
            SuperframeConfig(mode=OperationalMode.NONBEACON_UNBOUNDED)
        )
        assert layout.span(PhaseKind.TYPE_B).length_slots == 256

    def test_beacon_period_multiplier_gates_beacons(self):
        layout = build_layout(
            SuperframeConfig(phase_slots=dict(FULL_SLOTS), beacon_period_multiplier=3)
        )
        carried = [i for i in range(9) if layout.beacon_in(i)]
        assert carried == [0, 3, 6]


class TestPhaseAt:
    def test_matches_independent_boundary_arithmetic(self):
        # Small superframe so every microsecond can be swept against an
        # oracle built straight from the slot counts.
        slots = {
            PhaseKind.BEACON: 1,
            PhaseKind.RAP1: 3,
            PhaseKind.TYPE_A: 2,
            PhaseKind.CAP: 2,
        }
        layout = build_layout(
            SuperframeConfig(
                slot_length_us=7, slots_per_superframe=8, phase_slots=slots
            )
        )
        bounds = []
        cursor = 0
        for kind in PHASE_ORDER:
            n = slots.get(kind, 0)
            if n:
                bounds.append((kind, cursor * 7, (cursor + n) * 7))
                cursor += n
        assert cursor == 8
        for t in range(56):
            expected = next(
                (k, end - t) for k, start, end in bounds if start <= t < end
            )
            assert phase_at(layout, t) == expected

    def test_out_of_range_instants_rejected(self):
        layout = full_layout()
        with pytest.raises(ValueError):
            phase_at(layout, -1)
        with pytest.raises(ValueError):
            phase_at(layout, layout.duration_us)

    def test_zero_length_phase_never_reported(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.EAP1] = 0
        slots[PhaseKind.RAP1] += 10
        layout = build_layout(SuperframeConfig(phase_slots=slots))
        seen = {phase_at(layout, t)[0] for t in range(0, layout.duration_us, 250)}
        assert PhaseKind.EAP1 not in seen


class TestAdmissible:
    def test_full_matrix(self):
        for priority in range(8):
            for traffic in TrafficKind:
                for phase in PhaseKind:
                    ok = admissible(phase, priority, traffic)
                    if phase in (PhaseKind.EAP1, PhaseKind.EAP2):
                        assert ok == (
                            traffic == TrafficKind.CONTENTION and priority == 7
                        )
                    elif phase in (PhaseKind.RAP1, PhaseKind.RAP2, PhaseKind.CAP):
                        assert ok == (traffic == TrafficKind.CONTENTION)
                    elif phase in (PhaseKind.TYPE_A, PhaseKind.TYPE_B):
                        assert ok == (
                            traffic in (TrafficKind.POLLED, TrafficKind.SCHEDULED)
                        )
                    else:
                        assert not ok

    def test_priority_out_of_range(self):
        with pytest.raises(ValueError):
            admissible(PhaseKind.RAP1, 8, TrafficKind.CONTENTION)
        with pytest.raises(ValueError):
            admissible(PhaseKind.RAP1, -1, TrafficKind.CONTENTION)


class TestSchedulePolls:
    def test_round_robin_fills_phase(self):
        layout = full_layout()  # TYPE_A: slots 64..144 -> [32000, 72000) us
        span = layout.span(PhaseKind.TYPE_A)
        start = span.start_slot * 500
        grants = schedule_polls(layout, ["a", "b", "c"], PhaseKind.TYPE_A, 7000)
        assert len(grants) == (span.length_slots * 500) // 7000 == 5
        assert [g.node_id for g in grants] == ["a", "b", "c", "a", "b"]
        assert grants[0] == PollGrant("a", start, 7000, "I")
        for prev, cur in zip(grants, grants[1:]):
            assert cur.start_us == prev.start_us + 7000
        end = start + span.length_slots * 500
        assert grants[-1].start_us + 7000 <= end
        assert end - (grants[-1].start_us + 7000) < 7000

    def test_type_two_phase_gets_frame_count_label(self):
        layout = full_layout()
        grants = schedule_polls(layout, ["a"], PhaseKind.TYPE_B, 12500)
        assert grants and all(g.type_label == "II" for g in grants)

    def test_superframe_offset_shifts_grants(self):
        layout = full_layout()
        base = schedule_polls(layout, ["a"], PhaseKind.TYPE_A, 7000)
        shifted = schedule_polls(
            layout, ["a"], PhaseKind.TYPE_A, 7000, superframe_start_us=128000
        )
        assert [g.start_us - 128000 for g in shifted] == [g.start_us for g in base]

    def test_degenerate_inputs(self):
        layout = full_layout()
        assert schedule_polls(layout, [], PhaseKind.TYPE_A, 7000) == []
        # Grant longer than the whole phase: nothing fits.
        assert schedule_polls(layout, ["a"], PhaseKind.TYPE_A, 10**9) == []
        with pytest.raises(ValueError):
            schedule_polls(layout, ["a"], PhaseKind.RAP1, 7000)
        with pytest.raises(ValueError):
            schedule_polls(layout, ["a"], PhaseKind.TYPE_A, 0)

    def test_layout_without_shared_phase_yields_nothing(self):
        slots = dict(FULL_SLOTS)
        slots[PhaseKind.TYPE_A] = 0
        slots[PhaseKind.RAP1] += 80
        layout = build_layout(SuperframeConfig(phase_slots=slots))
        assert schedule_polls(layout, ["a"], PhaseKind.TYPE_A, 7000) == []


class TestScheduledAllocations:
    def test_periodic_activity(self):
        alloc = ScheduledAllocation("a", 10, 4, periodicity=3, offset=1)
        active = [i for i in range(10) if alloc.active_in(i)]
        assert active == [1, 4, 7]

    def test_every_superframe_by_default(self):
        alloc = ScheduledAllocation("a", 10, 4)
        assert all(alloc.active_in(i) for i in range(5))

    def test_placement_and_interleaving(self):
        layout = full_layout()
        allocs = [
            ScheduledAllocation("a", 10, 4, periodicity=2, offset=0),
            ScheduledAllocation("b", 10, 4, periodicity=2, offset=1),
            ScheduledAllocation("c", 20, 2),
        ]
        even = place_scheduled(allocs, layout, 0)
        odd = place_scheduled(allocs, layout, 1)
        assert {s for s, n in even.items() if n == "a"} == {10, 11, 12, 13}
        assert "b" not in even.values()
        assert {s for s, n in odd.items() if n == "b"} == {10, 11, 12, 13}
        assert "a" not in odd.values()
        for mapping in (even, odd):
            assert {s for s, n in mapping.items() if n == "c"} == {20, 21}

    def test_overlap_is_a_conflict(self):
        layout = full_layout()
        allocs = [
            ScheduledAllocation("a", 10, 4),
            ScheduledAllocation("b", 13, 2),
        ]
        with pytest.raises(AllocationConflict):
            place_scheduled(allocs, layout, 0)
        # Same slots, different superframe parity: no conflict.
        staggered = [
            ScheduledAllocation("a", 10, 4, periodicity=2, offset=0),
            ScheduledAllocation("b", 13, 2, periodicity=2, offset=1),
        ]
        assert place_scheduled(staggered, layout, 0)
        assert place_scheduled(staggered, layout, 1)

    def test_allocation_past_superframe_end(self):
        layout = full_layout()
        with pytest.raises(InvalidLayoutError):
            place_scheduled([ScheduledAllocation("a", 255, 2)], layout, 0)

    def test_field_validation(self):
        with pytest.raises(ValueError):
            ScheduledAllocation("a", 0, 1, periodicity=0)
        with pytest.raises(ValueError):
            ScheduledAllocation("a", 0, 0)
        with pytest.raises(ValueError):
            ScheduledAllocation("a", 0, 1, direction="sideways")
