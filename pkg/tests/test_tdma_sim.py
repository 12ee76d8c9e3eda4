import random

import pytest

from loralink.core_types import CodingRate, RadioConfig
from loralink.phy_model import FrameParams, time_on_air
from loralink.tdma_sim import (
    InfeasibleSlotError,
    NodeSpec,
    ScheduleConflictError,
    SlotSchedule,
    build_schedule,
    default_slot_duration,
    drop_model_from_table,
    format_sync_word,
    parse_report,
    parse_sync_word,
    run_simulation,
    serialize_report,
)

FAST_CONFIG = RadioConfig(sf=7, bw_hz=500000, cr=CodingRate(4, 8), tx_power_dbm=20.0, freq_hz=433e6)
FRAME = FrameParams(payload_bytes=2)


def make_nodes(count, config=FAST_CONFIG, frame=FRAME):
    return [NodeSpec(sync_word=0xA001 + i, config=config, frame=frame) for i in range(count)]


class TestSyncWords:
    def test_render_and_parse(self):
        assert format_sync_word(0x1A2B) == "1A2B"
        assert format_sync_word(7) == "0007"
        assert parse_sync_word("1A2B") == 0x1A2B
        assert parse_sync_word("a001") == 0xA001

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            format_sync_word(0x10000)
        with pytest.raises(ValueError):
            parse_sync_word("12345")
        with pytest.raises(ValueError):
            parse_sync_word("XYZ!")
        with pytest.raises(ValueError):
            NodeSpec(sync_word=-1, config=FAST_CONFIG, frame=FRAME)


class TestSchedule:
    def test_round_robin_period(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 1.0, 0.1)
        assert schedule.order == (0xA001, 0xA002)
        assert schedule.period_s == pytest.approx(2.2)
        single = build_schedule(make_nodes(1), 0.5, 0.0)
        assert single.period_s == pytest.approx(0.5)

    def test_duplicate_sync_word_conflict(self):
        nodes = [
            NodeSpec(sync_word=0x1A2B, config=FAST_CONFIG, frame=FRAME),
            NodeSpec(sync_word=0x1A2B, config=FAST_CONFIG, frame=FRAME),
        ]
        with pytest.raises(ScheduleConflictError) as excinfo:
            build_schedule(nodes, 1.0, 0.0)
        assert "1A2B" in str(excinfo.value)

    def test_slot_shorter_than_airtime_names_the_node(self):
        slow = RadioConfig(sf=12, bw_hz=10400, cr=CodingRate(4, 8), tx_power_dbm=20, freq_hz=433e6)
        nodes = [NodeSpec(sync_word=0xBEEF, config=slow, frame=FRAME)]
        with pytest.raises(InfeasibleSlotError) as excinfo:
            build_schedule(nodes, 1.0, 0.0)  # airtime is ~11.1 s
        assert "BEEF" in str(excinfo.value)

    def test_default_slot_duration(self):
        nodes = make_nodes(2)
        airtime = time_on_air(FAST_CONFIG, FRAME)
        slot = default_slot_duration(nodes)
        assert slot >= 2 * airtime
        assert slot * 1000 == int(slot * 1000)  # whole milliseconds

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            SlotSchedule(0.0, 0.0, (1,))
        with pytest.raises(ValueError):
            SlotSchedule(1.0, -0.1, (1,))
        with pytest.raises(ScheduleConflictError):
            SlotSchedule(1.0, 0.0, (1, 1))


class TestRunSimulation:
    def test_two_nodes_five_rounds_each(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 1.0, 0.0)
        report = run_simulation(nodes, schedule, {}, 10.0, seed=7)
        for sync in (0xA001, 0xA002):
            stats = report.node_stats(sync)
            assert stats.packets_sent == 5
            assert stats.packets_received == 5
            assert stats.packets_lost == 0

    def test_certain_loss(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 1.0, 0.0)
        report = run_simulation(nodes, schedule, {0xA001: 1.0}, 10.0, seed=7)
        lossy = report.node_stats(0xA001)
        assert lossy.packets_received == 0
        assert lossy.packets_lost == lossy.packets_sent == 5
        assert report.node_stats(0xA002).packets_received == 5

    def test_conservation_and_timeline_monotonicity(self):
        nodes = make_nodes(3)
        schedule = build_schedule(nodes, 0.5, 0.02)
        report = run_simulation(nodes, schedule, {s: 0.3 for s in schedule.order}, 30.0, seed=3)
        for _, stats in report.stats:
            assert stats.packets_sent == stats.packets_received + stats.packets_lost
        times = [event.t_ns for event in report.timeline]
        assert times == sorted(times)

    def test_fairness_after_whole_periods(self):
        nodes = make_nodes(4)
        schedule = build_schedule(nodes, 0.25, 0.01)
        report = run_simulation(nodes, schedule, {}, schedule.period_s * 6, seed=1)
        sent = [stats.packets_sent for _, stats in report.stats]
        assert len(set(sent)) == 1 and sent[0] == 6

    def test_mid_period_fairness_gap_at_most_one(self):
        nodes = make_nodes(3)
        schedule = build_schedule(nodes, 0.4, 0.0)
        report = run_simulation(nodes, schedule, {}, schedule.period_s * 2.5, seed=1)
        sent = [stats.packets_sent for _, stats in report.stats]
        assert max(sent) - min(sent) <= 1

    def test_determinism_byte_identical(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 0.1, 0.005)
        kwargs = dict(drop_model={0xA001: 0.25, 0xA002: 0.5}, duration_s=20.0, seed=99)
        first = serialize_report(run_simulation(nodes, schedule, **kwargs))
        second = serialize_report(run_simulation(nodes, schedule, **kwargs))
        assert first == second

    def test_seed_changes_drops_but_not_transmission_times(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 0.1, 0.0)
        reports = [
            run_simulation(nodes, schedule, {s: 0.5 for s in schedule.order}, 30.0, seed=s)
            for s in (1, 2)
        ]
        tx = [
            [(e.t_ns, e.kind, e.sync_word) for e in r.timeline if e.kind in ("tx_start", "tx_end")]
            for r in reports
        ]
        assert [t[:2] != [] for t in tx]
        assert [(t, k, s) for t, k, s in tx[0]] == [(t, k, s) for t, k, s in tx[1]]
        outcomes = [
            tuple(e.kind for e in r.timeline if e.kind in ("rx_ok", "rx_drop")) for r in reports
        ]
        assert outcomes[0] != outcomes[1]

    def test_mutual_exclusion_randomized(self):
        rng = random.Random(2718)
        for _ in range(25):
            n = rng.randint(2, 6)
            nodes = make_nodes(n)
            airtime = time_on_air(FAST_CONFIG, FRAME)
            slot = airtime * rng.uniform(1.0, 3.0)
            guard = rng.uniform(0.0, 0.05)
            schedule = build_schedule(nodes, slot, guard)
            drop = {s: rng.random() for s in schedule.order}
            report = run_simulation(
                nodes, schedule, drop, schedule.period_s * rng.uniform(1.0, 4.0),
                seed=rng.randint(0, 2**32),
            )
            intervals = []
            open_tx = {}
            for event in report.timeline:
                if event.kind == "tx_start":
                    open_tx[event.sync_word] = event.t_ns
                elif event.kind == "tx_end":
                    intervals.append((open_tx.pop(event.sync_word), event.t_ns, event.sync_word))
            intervals.sort()
            for (s1, e1, w1), (s2, e2, w2) in zip(intervals, intervals[1:]):
                if w1 != w2:
                    assert s2 >= e1

    def test_handshake_and_frames_per_slot(self):
        nodes = make_nodes(1)
        airtime = time_on_air(FAST_CONFIG, FRAME)
        schedule = build_schedule(nodes, airtime * 4 + 0.01, 0.0)
        report = run_simulation(
            nodes, schedule, {}, schedule.period_s * 2, seed=5,
            frames_per_slot=3, handshake_s=0.001,
        )
        assert report.node_stats(0xA001).packets_sent == 6
        first_tx = next(e for e in report.timeline if e.kind == "tx_start")
        assert first_tx.t_ns == 1_000_000  # handshake delay
        with pytest.raises(InfeasibleSlotError):
            run_simulation(nodes, schedule, {}, 1.0, seed=5, frames_per_slot=50)

    def test_input_validation(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 1.0, 0.0)
        with pytest.raises(ValueError):
            run_simulation(nodes, schedule, {0xA001: 1.5}, 10.0, seed=0)
        with pytest.raises(ValueError):
            run_simulation(nodes, schedule, {}, 0.0, seed=0)
        with pytest.raises(ValueError):
            run_simulation(nodes[:1], schedule, {}, 10.0, seed=0)

    def test_custom_payload_source(self):
        nodes = [
            NodeSpec(sync_word=0xC0DE, config=FAST_CONFIG, frame=FRAME,
                     payload_source=lambda i: 100 + i)
        ]
        schedule = build_schedule(nodes, 0.1, 0.0)
        # slots open at 0, 0.1 and 0.2; the next would open exactly at the horizon
        report = run_simulation(nodes, schedule, {}, 0.3, seed=0)
        payloads = [e.detail for e in report.timeline if e.kind == "rx_ok"]
        assert payloads == [100, 101, 102]

    def test_default_payloads_are_sensor_like(self):
        nodes = make_nodes(1)
        schedule = build_schedule(nodes, 0.1, 0.0)
        report = run_simulation(nodes, schedule, {}, 5.0, seed=42)
        payloads = [e.detail for e in report.timeline if e.kind == "tx_start"]
        assert all(2 <= p <= 400 for p in payloads)
        assert len(set(payloads)) > 1


class TestDropModelFromTable:
    def test_published_cells(self, field_table):
        def node(sf, bw):
            config = RadioConfig(sf=sf, bw_hz=bw, cr=CodingRate(4, 8),
                                 tx_power_dbm=20.0, freq_hz=433e6)
            return NodeSpec(sync_word=0x0001, config=config, frame=FRAME)

        assert drop_model_from_table(field_table, node(7, 10400)) == pytest.approx(0.54)
        assert drop_model_from_table(field_table, node(9, 125000)) == 0.0
        assert drop_model_from_table(field_table, node(7, 62500)) == pytest.approx(0.285)

    def test_missing_cell(self, field_table):
        config = RadioConfig(sf=6, bw_hz=125000, cr=CodingRate(4, 8),
                             tx_power_dbm=20.0, freq_hz=433e6)
        node = NodeSpec(sync_word=0x0001, config=config, frame=FRAME)
        with pytest.raises(LookupError):
            drop_model_from_table(field_table, node)


class TestSerialization:
    def test_round_trip(self):
        nodes = make_nodes(2)
        schedule = build_schedule(nodes, 0.1, 0.001)
        report = run_simulation(nodes, schedule, {0xA001: 0.4}, 3.0, seed=21)
        text = serialize_report(report)
        parsed = parse_report(text)
        assert parsed.timeline == report.timeline
        assert parsed.stats == report.stats
        assert serialize_report(parsed) == text

    def test_event_line_shape(self):
        nodes = make_nodes(1)
        schedule = build_schedule(nodes, 0.1, 0.0)
        report = run_simulation(nodes, schedule, {}, 0.15, seed=0)
        lines = serialize_report(report).splitlines()
        assert lines[0].split()[1] == "slot_open"
        assert lines[0].split()[2] == "A001"
        assert lines[-1].startswith("node A001 sent=2 received=2 lost=0 loss_pct=0")

    def test_parse_skips_comments_and_rejects_garbage(self):
        assert parse_report("# comment\n\n").timeline == ()
        with pytest.raises(ValueError):
            parse_report("12 warp A001\n")
        with pytest.raises(ValueError):
            parse_report("notanumber slot_open A001\n")
        with pytest.raises(ValueError):
            parse_report("node A001 sent=1\n")
