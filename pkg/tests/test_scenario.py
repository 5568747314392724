"""Scenario text format: parsing, line-numbered rejection, semantic checks."""

import textwrap

import pytest

from bansim.errors import ScenarioError
from bansim.mac.superframe import OperationalMode, PhaseKind
from bansim.security import SecurityLevel
from bansim.sim.scenario import load_scenario, parse_scenario

BASIC = """\
[phy]
kind = nb
band = 402-405
rate = low

[superframe]
slot_length_us = 500
slots = 256
beacon_slots = 4
rap1_slots = 120
cap_slots = 132

[nodes]
n0 = priority=4, traffic=saturated, payload=120, access=contention

[run]
seed = 9
duration_ms = 250
channel = ideal
"""


def scn(text: str):
    return parse_scenario(textwrap.dedent(text))


class TestParsing:
    def test_basic_round_trip(self):
        sc = scn(BASIC)
        assert sc.phy.band_id.value == "402-405"
        assert sc.superframe.slots_per_superframe == 256
        assert sc.superframe.phase_slots[PhaseKind.RAP1] == 120
        assert sc.run.seed == 9
        assert sc.run.duration_us == 250_000
        node = sc.nodes[0]
        assert (node.node_id, node.priority, node.payload_bytes) == ("n0", 4, 120)
        assert node.traffic == ("saturated",)

    def test_comments_and_blank_lines_ignored(self):
        sc = scn(
            """
            # leading comment
            [phy]
            kind = nb   # trailing comment

            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [run]
            duration_ms = 1
            """
        )
        assert sc.phy.kind.value == "nb"

    def test_defaults_fill_in(self):
        sc = scn("[superframe]\nmode = unbounded\n")
        assert sc.phy.band_id.value == "402-405"  # nb high on the default band
        assert sc.superframe.mode == OperationalMode.NONBEACON_UNBOUNDED
        assert sc.timing.psifs_us == 50
        assert sc.timing.csma_slot_us == 125
        assert sc.timing.gtn_us == 85
        assert sc.run.seed == 1 and sc.run.channel == "ideal"
        assert sc.nodes == ()

    def test_traffic_models(self):
        sc = scn(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 196
            type_a_slots = 56
            [nodes]
            a = traffic=saturated
            b = traffic=poisson:40, access=polled
            c = traffic=scripted:0;1000;250000, access=polled
            [run]
            channel = ideal
            """
        )
        by_id = {n.node_id: n for n in sc.nodes}
        assert by_id["a"].traffic == ("saturated",)
        assert by_id["b"].traffic == ("poisson", 40.0)
        assert by_id["c"].traffic == ("scripted", (0, 1000, 250000))

    def test_uwb_and_hbc_selection(self):
        uwb = scn("[phy]\nkind = uwb\nchannel = 7\n[superframe]\nmode = unbounded\n")
        assert uwb.phy.kind.value == "uwb"
        hbc = scn("[phy]\nkind = hbc\ncenter = 27\n[superframe]\nmode = unbounded\n")
        assert hbc.phy.kind.value == "hbc"
        assert hbc.phy.center_freq == 27.0

    def test_rate_override(self):
        sc = scn(
            "[phy]\nkind = nb\nrate_override_kbps = 971\n[superframe]\nmode = unbounded\n"
        )
        assert sc.phy.rate_override_kbps == 971.0

    def test_csma_overrides(self):
        sc = scn(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [csma]
            psifs_us = 75
            slot_us = 145
            gtn_us = 100
            """
        )
        assert (sc.timing.psifs_us, sc.timing.csma_slot_us, sc.timing.gtn_us) == (75, 145, 100)

    def test_security_entries(self):
        sc = scn(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [nodes]
            n0 = payload=100
            n1 = payload=100
            [security]
            n0 = level=2, mk=preshared, group=ward
            n1 = level=1, mk=unauthenticated, group=ward
            [run]
            channel = collision
            """
        )
        assert sc.security["n0"].level == SecurityLevel.ENCRYPTED
        assert sc.security["n0"].group == "ward"
        assert sc.security["n1"].mk == "unauthenticated"


def error_line(text: str) -> tuple[int, str]:
    with pytest.raises(ScenarioError) as info:
        scn(text)
    return info.value.line, str(info.value)


class TestRejection:
    def test_unknown_section_carries_its_line(self):
        line, msg = error_line("[phy]\nkind = nb\n\n[warp_drive]\n")
        assert line == 4 and "warp_drive" in msg

    def test_unknown_key_carries_its_line(self):
        line, msg = error_line("[phy]\nkind = nb\nantenna = yagi\n")
        assert line == 3 and "antenna" in msg

    def test_unknown_node_sub_key(self):
        line, msg = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = colour=red\n"
        )
        assert line == 5 and "colour" in msg

    def test_duplicate_key(self):
        line, _ = error_line("[run]\nseed = 1\nseed = 2\n[superframe]\nmode = unbounded\n")
        assert line == 3

    def test_duplicate_node(self):
        line, _ = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = payload=10\nn0 = payload=20\n"
        )
        assert line == 6

    def test_duplicate_sub_key(self):
        line, _ = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = payload=10, payload=20\n"
        )
        assert line == 5

    def test_entry_before_any_section(self):
        line, _ = error_line("kind = nb\n")
        assert line == 1

    def test_malformed_line(self):
        line, msg = error_line("[phy]\njust some words\n")
        assert line == 2 and "key = value" in msg

    def test_bad_numbers_name_the_key(self):
        line, msg = error_line("[run]\nseed = banana\n[superframe]\nmode = unbounded\n")
        assert line == 2 and "seed" in msg

    def test_bad_traffic(self):
        line, msg = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = traffic=fountain\n"
        )
        assert line == 5 and "fountain" in msg

    def test_unsorted_scripted_times(self):
        line, _ = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = traffic=scripted:5000;100\n"
        )
        assert line == 5

    def test_bad_channel_model(self):
        line, _ = error_line("[run]\nchannel = rayleigh\n[superframe]\nmode = unbounded\n")
        assert line == 2

    def test_bad_security_level(self):
        line, _ = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = payload=10\n[security]\nn0 = level=3\n"
        )
        assert line == 7


class TestSemantics:
    def test_phase_sum_mismatch_points_at_superframe(self):
        line, msg = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 100\ncap_slots = 100\n"
        )
        assert line == 1 and "256" in msg

    def test_priority_range(self):
        line, _ = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = priority=9\n"
        )
        assert line == 4  # the [nodes] header line

    def test_ideal_channel_contention_limit(self):
        _, msg = error_line(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [nodes]
            a = access=contention
            b = access=contention
            [run]
            channel = ideal
            """
        )
        assert "at most one contention node" in msg

    def test_collision_channel_lifts_the_limit(self):
        sc = scn(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [nodes]
            a = access=contention
            b = access=contention
            [run]
            channel = collision
            """
        )
        assert len(sc.nodes) == 2

    def test_payload_plus_security_overhead_must_fit(self):
        _, msg = error_line(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [nodes]
            n0 = payload=250
            [security]
            n0 = level=2
            """
        )
        assert "security bytes" in msg
        # the same payload is fine without the envelope
        scn("[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[nodes]\nn0 = payload=250\n")

    def test_scheduled_needs_geometry(self):
        _, msg = error_line(
            "[superframe]\ntype_a_slots = 256\nmode = nonbeacon\n[nodes]\nn0 = access=scheduled\n"
        )
        assert "slot_start" in msg

    def test_scheduled_must_stay_inside_the_superframe(self):
        _, msg = error_line(
            """
            [superframe]
            mode = nonbeacon
            type_a_slots = 256
            [nodes]
            n0 = access=scheduled, slot_start=250, slot_len=10
            """
        )
        assert "past the superframe" in msg

    def test_scheduled_refused_in_contention_phases(self):
        _, msg = error_line(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 124
            type_a_slots = 128
            [nodes]
            n0 = access=scheduled, slot_start=10, slot_len=10
            """
        )
        assert "no scheduled traffic" in msg

    def test_scheduled_conflict_found_before_running(self):
        _, msg = error_line(
            """
            [superframe]
            mode = nonbeacon
            type_a_slots = 256
            [nodes]
            a = access=scheduled, slot_start=10, slot_len=10
            b = access=scheduled, slot_start=15, slot_len=10
            """
        )
        assert "a vs b" in msg

    def test_staggered_periodic_allocations_coexist(self):
        sc = scn(
            """
            [superframe]
            mode = nonbeacon
            type_a_slots = 256
            [nodes]
            a = access=scheduled, slot_start=10, slot_len=10, period=2, offset=0
            b = access=scheduled, slot_start=10, slot_len=10, period=2, offset=1
            """
        )
        assert len(sc.nodes) == 2

    def test_security_for_unknown_node(self):
        _, msg = error_line(
            "[superframe]\nbeacon_slots = 4\nrap1_slots = 252\n[security]\nghost = level=1\n"
        )
        assert "unknown node" in msg

    def test_group_membership_needs_a_secured_level(self):
        _, msg = error_line(
            """
            [superframe]
            beacon_slots = 4
            rap1_slots = 252
            [nodes]
            n0 = payload=10
            [security]
            n0 = level=0, group=ward
            """
        )
        assert "group membership" in msg


class TestLoadScenario:
    def test_reads_from_a_file(self, tmp_path):
        path = tmp_path / "one.scn"
        path.write_text(BASIC)
        sc = load_scenario(path)
        assert sc.nodes[0].node_id == "n0"
