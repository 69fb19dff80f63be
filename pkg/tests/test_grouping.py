import json
import numpy as np
import pytest
from oracles import grouped_components
from src.config.detector_config import load_config
from src.core.datatypes import BinActivity, Warmup
from src.core.errors import TimestampMismatch
from src.detection.pipeline_bank import VerdictColumns
from src.grouping.frequency_grouping import group_frequency, group_frequency_columns
from src.grouping.notifications import NotificationKind, channel_frequencies, gen_notification, summary_record
from src.grouping.time_grouping import OpenEvent, TimeGrouper, group_time, match_groups


def activities(t, active_bins, bin_count=16, value=-60.0, hot=(), onset=None):
    out = []
    for b in range(bin_count):
        is_hot = b in hot
        out.append(BinActivity(bin_index=b, timestamp=t, active=b in active_bins, value=value, hot=is_hot,
                               onset_timestamp=onset if is_hot else None))
    return out


def spans(groups):
    return [(g.start_bin, g.stop_bin) for g in groups]


@pytest.mark.parametrize("freq_gap, expected", [
    (0, [(3, 5), (9, 10)]),
    (2, [(3, 5), (9, 10)]),
    (3, [(3, 10)]),
    (4, [(3, 10)]),
])
def test_frequency_groups_bridge_small_gaps(freq_gap, expected):
    assert spans(group_frequency(activities(0, {3, 4, 5, 9, 10}), freq_gap)) == expected


def test_frequency_groups_are_gap_components_of_random_masks():
    rng = np.random.default_rng(31)
    for trial in range(1000):
        bins, freq_gap = int(rng.integers(1, 257)), int(rng.integers(0, 9))
        row = rng.random(bins) < rng.uniform(0.0, 1.0)
        groups = group_frequency(activities(0, set(np.flatnonzero(row).tolist()), bin_count=bins), freq_gap)
        expected = [(f0, f1, cells) for _, _, f0, f1, cells in grouped_components(row[None, :], freq_gap, 0)]
        assert [(g.start_bin, g.stop_bin, g.cell_count) for g in groups] == expected, "trial {0}".format(trial)
        for g in groups:
            assert g.member_bins == tuple(int(b) for b in np.flatnonzero(row[:g.stop_bin + 1]) if b >= g.start_bin)


def test_single_inactive_bin_needs_gap_of_one():
    assert spans(group_frequency(activities(0, {3, 5}), 0)) == [(3, 3), (5, 5)]
    assert spans(group_frequency(activities(0, {3, 5}), 1)) == [(3, 5)]


def test_group_members_and_power():
    group = group_frequency(activities(0, {3, 5}, value=-70.0), 1)[0]
    assert group.member_bins == (3, 5)
    assert group.cell_count == 2
    assert group.width == 3
    assert group.mean_power_dbm == pytest.approx(-70.0)


def test_no_active_bins_no_groups():
    assert group_frequency(activities(0, set()), 1) == []
    assert group_frequency([], 1) == []
    assert group_frequency([Warmup(bin_index=b, timestamp=0) for b in range(4)], 1) == []


def test_mixed_timestamps_are_rejected():
    acts = activities(0, {1}) + [BinActivity(bin_index=20, timestamp=100, active=True)]
    with pytest.raises(TimestampMismatch):
        group_frequency(acts, 1)


def test_hot_members_carry_the_earliest_onset():
    acts = activities(500, {2, 3, 4}, hot={3}, onset=300)
    group = group_frequency(acts, 1)[0]
    assert group.hot_count == 1
    assert group.onset_timestamp == 300


def test_columns_group_like_records():
    values = np.array([-90.0, -60.0, -61.0, -90.0, -90.0, -59.0])
    columns = VerdictColumns.warming_up(700, 10, values)
    columns.warmup = False
    columns.active = np.array([False, True, True, False, False, True])
    records = [BinActivity(bin_index=10 + k, timestamp=700, active=bool(a), value=float(v))
               for k, (a, v) in enumerate(zip(columns.active, values))]
    assert group_frequency_columns(columns, 1) == group_frequency(records, 1)
    assert spans(group_frequency_columns(columns, 1)) == [(11, 12), (15, 15)]


def test_columns_in_warmup_have_no_groups():
    assert group_frequency_columns(VerdictColumns.warming_up(0, 0, np.zeros(4)), 1) == []


def test_open_event_is_continued(plan, make_group):
    event = OpenEvent.start(0, make_group(0, 2, 3))
    step = group_time([event], [make_group(100, 3, 4)], time_gap=2, t=100, freq_gap=1, plan=plan, next_id=1)
    assert step.continued == [event]
    assert not step.started and not step.closed
    assert (event.start_bin, event.stop_bin) == (2, 4)
    assert event.last_seen == 100


def test_silence_up_to_the_gap_keeps_the_event(plan, make_group):
    event = OpenEvent.start(0, make_group(0, 2, 3))
    open_events = [event]
    for k in range(1, 3):
        step = group_time(open_events, [], time_gap=2, t=100 * k, freq_gap=1, plan=plan, next_id=1)
        open_events = step.still_open
        assert open_events == [event]
    step = group_time(open_events, [], time_gap=2, t=300, freq_gap=1, plan=plan, next_id=1)
    assert step.still_open == []
    assert len(step.closed) == 1
    closed = step.closed[0]
    assert (closed.t_start, closed.t_stop) == (0, 0)
    assert (closed.f_start_bin, closed.f_stop_bin) == (2, 3)


def test_other_event_continues_while_first_closes(plan, make_group):
    a = OpenEvent.start(0, make_group(0, 0, 2))
    b = OpenEvent.start(1, make_group(0, 10, 12))
    step = group_time([a, b], [make_group(100, 11, 12)], time_gap=0, t=100, freq_gap=1, plan=plan, next_id=2)
    assert step.continued == [b]
    assert [e.id for e in step.closed] == [0]
    assert step.still_open == [b]
    assert step.next_id == 2


def test_unmatched_group_starts_event(plan, make_group):
    a = OpenEvent.start(0, make_group(0, 0, 1))
    step = group_time([a], [make_group(100, 0, 1), make_group(100, 6, 7)], time_gap=2, t=100, freq_gap=1,
                      plan=plan, next_id=5)
    assert [e.id for e in step.started] == [5]
    assert step.started[0].t_start == 100
    assert step.next_id == 6
    assert [e.id for e in step.still_open] == [0, 5]


def test_matching_is_one_to_one_and_largest_overlap_first(make_group):
    wide = OpenEvent.start(0, make_group(0, 0, 5))
    narrow = OpenEvent.start(1, make_group(0, 6, 6))
    group = make_group(100, 4, 6)
    pairs = match_groups([wide, narrow], [group], freq_gap=1)
    # 3 shared bins with the widened wide event, 2 with the narrow one
    assert len(pairs) == 1
    assert pairs[0][0] is wide
    split = match_groups([wide], [make_group(100, 0, 1), make_group(100, 3, 5)], freq_gap=0)
    assert [(e.id, g.start_bin) for e, g in split] == [(0, 3)]


def test_overlap_uses_the_widened_range(make_group):
    event = OpenEvent.start(0, make_group(0, 4, 5))
    assert event.overlap(make_group(0, 7, 8), freq_gap=1) == 0
    assert event.overlap(make_group(0, 6, 8), freq_gap=1) == 1
    assert event.overlap(make_group(0, 6, 8), freq_gap=2) == 2


def test_refinement_uses_onset_and_last_hot_tick(plan, make_group):
    event = OpenEvent.start(3, make_group(1000, 2, 2, hot=True, onset=700), refine=True)
    assert event.t_start == 700
    event.absorb(make_group(1100, 2, 2, hot=True, onset=700))
    event.absorb(make_group(1200, 2, 2))
    assert event.t_stop(refine=True) == 1100
    assert event.t_stop(refine=False) == 1200
    assert event.finalize(plan, refine=True).t_stop == 1100
    plain = OpenEvent.start(4, make_group(1000, 2, 2, hot=True, onset=700))
    assert plain.t_start == 1000


def test_mean_power_over_all_cells(plan, make_group):
    event = OpenEvent.start(0, make_group(0, 0, 0, dbm=-60.0))
    event.absorb(make_group(100, 0, 0, dbm=-60.0))
    assert event.finalize(plan).mean_power_dbm == pytest.approx(-60.0)
    assert event.cell_count == 2


def test_channel_of_a_range(plan):
    channel, lchannel, rchannel = channel_frequencies(4, 8, plan)
    assert channel == plan.frequency_of(5)
    assert lchannel == plan.frequency_of(4)
    assert rchannel == plan.frequency_of(7)
    assert channel_frequencies(3, 4, plan)[0] == plan.frequency_of(3)


def test_start_notification(plan, make_group):
    event = OpenEvent.start(9, make_group(1500, 4, 7, dbm=-65.0))
    record = gen_notification(event, NotificationKind.TX_START, plan).to_record()
    assert record["kind"] == "TxStart"
    assert record["description"] == "Tx start"
    assert record["type"] == "info"
    assert record["time"] == record["tStart"] == 1500
    assert "tStop" not in record
    assert record["channelHz"] == plan.frequency_of(5)
    assert (record["fStartBin"], record["fStopBin"]) == (4, 7)
    assert record["meanPowerDbm"] == pytest.approx(-65.0)
    assert "location" not in record


def test_stop_notification(plan, make_event):
    event = make_event(2, 100, 900, 0, 1, location=(46.0, 14.5))
    note = gen_notification(event, NotificationKind.TX_STOP, plan)
    record = json.loads(note.to_json())
    assert record["kind"] == "TxStop"
    assert record["description"] == "Tx stop"
    assert record["time"] == record["tStop"] == 900
    assert record["tStart"] == 100
    assert record["location"] == [46.0, 14.5]


def test_summary_record():
    assert summary_record(10, 2, 1) == {"type": "summary", "ticks": 10, "events": 2, "flushed": 1}


def test_grouper_orders_stops_before_starts(plan, make_group):
    grouper = TimeGrouper(plan, load_config({"timeGapT": 0}))
    notes, _ = grouper.step([make_group(0, 5, 6), make_group(0, 0, 1)], 0)
    assert [(n.kind, n.f_start_bin) for n in notes] == [(NotificationKind.TX_START, 0),
                                                         (NotificationKind.TX_START, 5)]
    notes, closed = grouper.step([make_group(100, 3, 3)], 100)
    assert [n.kind for n in notes] == [NotificationKind.TX_STOP, NotificationKind.TX_STOP,
                                       NotificationKind.TX_START]
    assert [e.id for e in closed] == [0, 1]
    assert grouper.next_id == 3


def test_grouper_needs_advancing_ticks(plan):
    grouper = TimeGrouper(plan, load_config({}))
    grouper.step([], 100)
    with pytest.raises(ValueError):
        grouper.step([], 100)


def test_flush_closes_everything(plan, make_group):
    grouper = TimeGrouper(plan, load_config({}), location=(1.0, 2.0))
    grouper.step([make_group(0, 1, 2)], 0)
    grouper.step([make_group(100, 1, 2)], 100)
    notes, closed = grouper.flush()
    assert [n.kind for n in notes] == [NotificationKind.TX_STOP]
    assert closed[0].t_stop == 100
    assert closed[0].location == (1.0, 2.0)
    assert grouper.open_events == []
    assert grouper.flush() == ([], [])


def test_every_start_gets_exactly_one_stop(plan, fast_cfg):
    rng = np.random.default_rng(21)
    grouper = TimeGrouper(plan, fast_cfg)
    starts, stops = [], []
    for k in range(300):
        active = set(np.flatnonzero(rng.random(plan.bin_count) < 0.15).tolist())
        groups = group_frequency(activities(100 * k, active, bin_count=plan.bin_count), fast_cfg.freq_gap_f)
        notes, _ = grouper.step(groups, 100 * k)
        starts += [n.event_id for n in notes if n.kind is NotificationKind.TX_START]
        stops += [n.event_id for n in notes if n.kind is NotificationKind.TX_STOP]
    notes, _ = grouper.flush()
    stops += [n.event_id for n in notes]
    assert sorted(starts) == sorted(stops) == list(range(len(starts)))
