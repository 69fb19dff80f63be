import io
import json
import math
import os
import numpy as np
import pandas as pd
import pytest
from src.config.eval_config import EvalConfig
from src.core.datatypes import BandPlan
from src.core.errors import ConfigParseError, EmptyTruth, InvariantViolation, MalformedRecord
from src.evaluation.benchmark import benchmark
from src.evaluation.labels_io import read_detections, read_events, read_truth
from src.evaluation.matching import (ConfusionMatrix, StartStopMatrix, confusion, match_events,
                                     start_stop_confusion)
from src.evaluation.slices import clip_to_slice, extract_slices, in_slices
from src.evaluation.sweep import evaluate, parse_grid, run_sweep, write_tables
from src.evaluation.synthetic import (GroundTruthLabel, SyntheticStream, dump_scenario, load_scenario,
                                      synth_generate, write_samples, write_truth)
from src.topology.codecs import iter_samples

DAY_MS = 24 * 3600 * 1000


def label(t_start, t_stop, f_start, f_stop):
    return GroundTruthLabel(t_start, t_stop, f_start, f_stop)


@pytest.fixture
def block_scenario():
    return load_scenario({
        "binCount": 8, "durationMs": 30000, "noiseFloorDbm": -102.5, "seed": 4,
        "forcedBlocks": [{"tStart": 15000, "tStop": 19900, "fStartBin": 2, "fStopBin": 4, "powerDbm": -60.0}],
    })


@pytest.fixture
def block_settings(make_settings):
    return make_settings(bin_count=8, recentWinSize=10, historicWinSize=50)


def test_no_transmitters_no_truth():
    stream = SyntheticStream(load_scenario({"binCount": 4, "durationMs": 5000}))
    assert stream.truth == []
    samples = list(stream.samples())
    assert len(samples) == len(stream) == 50
    assert [s.timestamp for s in samples[:3]] == [0, 100, 200]
    assert stream.duration_ms == 5000


def test_forced_block_is_one_label(block_scenario):
    samples, truth = synth_generate(block_scenario)
    assert truth == [label(15000, 19900, 2, 4)]
    samples = list(samples)
    inside = samples[160].values
    assert inside[2:5] == pytest.approx([-60.0] * 3, abs=0.01)
    assert inside[6] < -90.0


def test_same_seed_same_stream(block_scenario):
    first = list(SyntheticStream(block_scenario).samples())
    second = list(SyntheticStream(block_scenario).samples())
    assert first == second
    other = load_scenario(dict(block_scenario.to_document(), seed=5))
    assert list(SyntheticStream(other).samples()) != first


def test_transmitter_blocks_stay_in_band():
    scenario = load_scenario({
        "binCount": 16, "durationMs": 600000, "seed": 9,
        "transmitters": [{"kind": "narrowbandHopper", "bandwidthBins": 2, "meanDurationMs": 1000,
                          "meanIntervalMs": 5000},
                         {"kind": "widebandBurst", "bandwidthBins": 8, "startBin": 4, "meanDurationMs": 2000,
                          "meanIntervalMs": 20000, "minDurationMs": 500}],
    })
    truth = SyntheticStream(scenario).truth
    assert len(truth) > 10
    for item in truth:
        assert 0 <= item.f_start_bin <= item.f_stop_bin < 16
        assert 0 <= item.t_start <= item.t_stop < 600000
    wide = [item for item in truth if item.f_stop_bin - item.f_start_bin == 7]
    assert wide and all(item.f_start_bin == 4 for item in wide)
    # Blocks cut by the end of the stream may be shorter
    assert all(item.duration_ms >= 400 for item in wide if item.t_stop < 599900)
    assert [item.t_start for item in truth] == sorted(item.t_start for item in truth)


def test_presets():
    scenario = load_scenario("scenario1")
    assert scenario.duration_ms == DAY_MS
    assert len(scenario.transmitters) == 7
    short = load_scenario({"preset": "scenario1", "durationMs": 60000})
    assert short.duration_ms == 60000
    assert short.bin_count == 64
    assert load_scenario(dump_scenario(short)) == short


@pytest.mark.parametrize("document, field", [
    ({"binCount": 0}, "binCount"),
    ({"preset": "scenario9"}, "preset"),
    ({"transmitters": [{"kind": "widebandBurst", "bandwidthBins": 80}]}, "bandwidthBins"),
    ({"forcedBlocks": [{"tStart": 0, "tStop": 100, "fStartBin": 3, "fStopBin": 70}]}, "forcedBlocks"),
])
def test_bad_scenarios(document, field):
    with pytest.raises(InvariantViolation) as e:
        load_scenario(document)
    assert e.value.field == field


def test_unknown_scenario_key():
    with pytest.raises(InvariantViolation):
        load_scenario({"noiseFloor": -90})


def test_samples_and_truth_files(block_scenario):
    samples, truth = synth_generate(block_scenario)
    data, labels = io.BytesIO(), io.StringIO()
    assert write_samples(samples, data, 'csv') == 300
    assert write_truth(truth, labels) == 1
    data.seek(0)
    labels.seek(0)
    assert list(iter_samples(data, 'csv', 8)) == list(SyntheticStream(block_scenario).samples())
    assert read_truth(labels) == truth


def test_slices_stop_at_the_budget():
    slices = extract_slices(DAY_MS, 7500, 120000, seed=3, budget_ms=20 * 60 * 1000)
    assert len(slices) == 160
    assert all(b - a == 7500 for a, b in slices)
    assert all(prev[1] <= cur[0] for prev, cur in zip(slices[:-1], slices[1:]))


def test_slice_count_over_a_day():
    counts = [len(extract_slices(DAY_MS, 10000, 120000, seed=seed)) for seed in range(20)]
    assert np.mean(counts) == pytest.approx(720, rel=0.1)
    for seed in range(3):
        slices = extract_slices(DAY_MS, 10000, 120000, seed=seed, stream_start_ms=5000)
        assert slices[0][0] >= 5000
        assert slices[-1][1] <= 5000 + DAY_MS


def test_slices_of_a_short_stream():
    assert extract_slices(5000, 7500, 120000, seed=0) == []
    with pytest.raises(ValueError):
        extract_slices(DAY_MS, 7500, 7500, seed=0)
    assert extract_slices(DAY_MS, 7500, 120000, seed=11) == extract_slices(DAY_MS, 7500, 120000, seed=11)


def test_clip_to_slice():
    items = [label(0, 5000, 1, 2), label(7000, 8000, 0, 0), label(2000, 2000, 3, 3)]
    assert clip_to_slice(items, (1000, 3000), 100) == [label(1000, 2900, 1, 2), label(2000, 2000, 3, 3)]
    assert in_slices(items, [(6000, 7000), (7500, 9000)], 100) == [[], [label(7500, 8000, 0, 0)]]


def test_exact_detection_matches():
    truth = [label(0, 900, 3, 3)]
    matching = match_events([label(0, 900, 3, 3)], truth, 200, 1, 100)
    assert matching.pairs == [(0, 0)]
    assert confusion(matching) == ConfusionMatrix(1, 0, 0)


def test_far_detection_is_false_and_truth_is_missed():
    matching = match_events([label(5000, 5900, 3, 3)], [label(0, 900, 3, 3)], 200, 1, 100)
    assert matching.pairs == []
    assert confusion(matching) == ConfusionMatrix(0, 1, 1)


def test_tolerance_bridges_near_misses():
    truth = [label(0, 900, 3, 3)]
    assert match_events([label(1100, 1500, 5, 5)], truth, 200, 2, 100).pairs == [(0, 0)]
    assert match_events([label(1200, 1500, 3, 3)], truth, 200, 1, 100).pairs == []


def test_largest_overlap_wins():
    truth = [label(0, 1900, 2, 4)]
    detected = [label(0, 300, 2, 2), label(200, 1800, 2, 4)]
    matching = match_events(detected, truth, 200, 1, 100)
    assert matching.pairs == [(1, 0)]
    assert matching.unmatched_detected == [0]
    assert confusion(matching) == ConfusionMatrix(1, 0, 1)


def test_one_detection_per_truth():
    truth = [label(0, 900, 2, 2), label(2000, 2900, 2, 2)]
    detected = [label(0, 2900, 2, 2)]
    matching = match_events(detected, truth, 200, 1, 100)
    # Equal areas, the earlier truth wins
    assert matching.pairs == [(0, 0)]
    assert matching.unmatched_truth == [1]


def test_rates():
    table = ConfusionMatrix(1517, 225, 296)
    assert table.correct_rate == pytest.approx(0.87, abs=0.005)
    assert table.missed_rate == pytest.approx(0.13, abs=0.005)
    assert table.false_rate == pytest.approx(0.17, abs=0.005)
    assert table.to_record()["truthCount"] == 1742


def test_rates_need_truth():
    table = ConfusionMatrix(0, 0, 3)
    with pytest.raises(EmptyTruth):
        table.correct_rate
    record = table.to_record()
    assert record["correctRate"] is None and record["falseRate"] is None
    assert record["falselyDetected"] == 3


def test_boundaries_on_the_diagonal():
    truth = [label(0, 1000, 2, 2)]
    matching = match_events([label(100, 1100, 2, 2)], truth, 200, 1, 100)
    boundaries = start_stop_confusion(matching, 200)
    assert boundaries == StartStopMatrix(start_start=1, stop_stop=1)
    assert boundaries.accuracy == 1.0


def test_late_start_is_attributed_to_the_stop():
    truth = [label(0, 1000, 2, 2)]
    matching = match_events([label(900, 1900, 2, 2), label(8000, 8100, 6, 6)], truth, 200, 1, 100)
    boundaries = start_stop_confusion(matching, 200)
    assert (boundaries.start_stop, boundaries.stop_stop) == (1, 1)
    assert (boundaries.false_start, boundaries.false_stop) == (1, 0)
    assert boundaries.accuracy == 0.5
    with pytest.raises(EmptyTruth):
        StartStopMatrix().accuracy


def test_each_false_detection_counts_against_one_boundary():
    truth = [label(0, 1000, 2, 2), label(10000, 12000, 10, 12)]
    detected = [label(0, 1000, 2, 2), label(10000, 12000, 10, 12),
                # stops far from any truth stop
                label(3500, 5000, 2, 2), label(9000, 9700, 11, 11),
                # starts long after the truth start
                label(12600, 12900, 10, 10)]
    matching = match_events(detected, truth, 200, 1, 100)
    boundaries = start_stop_confusion(matching, 200)
    assert boundaries.false_start + boundaries.false_stop == confusion(matching).falsely_detected == 3
    assert (boundaries.false_start, boundaries.false_stop) == (1, 2)
    assert boundaries.diagonal == 4 and boundaries.total == 4
    assert start_stop_confusion(match_events(detected[2:], [], 200, 1, 100), 200).false_start == 3


def test_evaluate_over_slices():
    truth = [label(0, 900, 1, 1), label(50000, 50900, 2, 2)]
    detected = [label(100, 1000, 1, 1), label(30000, 30500, 4, 4)]
    cfg = EvalConfig(tick_interval_ms=100)
    whole, _ = evaluate(detected, truth, cfg)
    assert whole == ConfusionMatrix(1, 1, 1)
    sliced, boundaries = evaluate(detected, truth, cfg, slices=[(0, 10000), (45000, 55000)])
    assert sliced == ConfusionMatrix(1, 1, 0)
    assert boundaries.start_start == 1


def test_read_detections_keeps_stops_only():
    lines = [
        {"id": 0, "kind": "TxStart", "tStart": 0, "fStartBin": 1, "fStopBin": 2},
        {"id": 0, "kind": "TxStop", "tStart": 0, "tStop": 900, "fStartBin": 1, "fStopBin": 2,
         "meanPowerDbm": -61.0},
        {"type": "summary", "ticks": 10, "events": 1, "flushed": 0},
    ]
    text = "\n".join(json.dumps(line) for line in lines) + "\n"
    assert read_detections(io.StringIO(text)) == [label(0, 900, 1, 2)]
    plan = BandPlan(868.0e6, 1000.0, 8)
    events = read_events(io.StringIO(text), plan)
    assert len(events) == 1
    assert events[0].channel_hz == plan.frequency_of(1)
    assert events[0].mean_power_dbm == -61.0


def test_bad_label_lines_name_the_line():
    with pytest.raises(MalformedRecord) as e:
        read_truth(io.StringIO('{"tStart": 0, "tStop": 1, "fStartBin": 0, "fStopBin": 0}\n{"tStart": 0}\n'))
    assert e.value.record_index == 2
    with pytest.raises(MalformedRecord):
        read_detections(io.StringIO('[1, 2]\n'))


def test_parse_grid():
    grid = parse_grid('{"alpha": [0.01, 0.05], "freqGapF": [1, 2]}')
    assert grid == [{"alpha": 0.01, "freqGapF": 1}, {"alpha": 0.01, "freqGapF": 2},
                    {"alpha": 0.05, "freqGapF": 1}, {"alpha": 0.05, "freqGapF": 2}]
    assert parse_grid([{"timeGapT": 3}, {}]) == [{"timeGapT": 3}, {}]
    assert parse_grid({"alpha": 0.05}) == [{"alpha": 0.05}]
    for bad in ("[]", "3", "{oops"):
        with pytest.raises(ConfigParseError):
            parse_grid(bad)


def test_sweep_of_one(block_scenario, block_settings):
    stream = SyntheticStream(block_scenario)
    table = run_sweep(stream.samples, stream.truth, [{"alpha": 0.01}], block_settings)
    assert len(table) == 1
    row = table.iloc[0]
    assert row["config"] == 0
    assert row["alpha"] == 0.01
    assert row["truthCount"] == 1
    assert row["correctlyDetected"] == 1
    assert row["undetected"] == 0
    assert row["error"] is None


def test_sweep_rows_follow_the_grid(block_scenario, block_settings):
    stream = SyntheticStream(block_scenario)
    grid = [{"alpha": 0.05}, {"recentWinSize": 1}, {"alpha": 0.001, "timeGapT": 4}]
    serial = run_sweep(stream.samples, stream.truth, grid, block_settings)
    parallel = run_sweep(stream.samples, stream.truth, grid, block_settings, jobs=3)
    pd.testing.assert_frame_equal(serial, parallel)
    assert serial["config"].tolist() == [0, 1, 2]
    assert serial.iloc[1]["error"].startswith("invariant_violation")
    assert serial.iloc[0]["error"] is None


def test_sweep_over_an_empty_stream(block_settings):
    table = run_sweep([], [], [{}], block_settings)
    row = table.iloc[0]
    assert row["events"] == 0
    assert row["truthCount"] == 0
    assert row["correctRate"] is None or (isinstance(row["correctRate"], float) and math.isnan(row["correctRate"]))


def test_write_tables(tmp_path, block_settings):
    table = run_sweep([], [], [{"alpha": 0.05}], block_settings)
    csv_path, json_path = write_tables(table, str(tmp_path / "out"))
    assert os.path.exists(csv_path) and os.path.exists(json_path)
    assert pd.read_csv(csv_path)["alpha"].tolist() == [0.05]


def test_benchmark(block_scenario, block_settings):
    result = benchmark(SyntheticStream(block_scenario).samples(), block_settings)
    assert result.samples == 300
    assert result.stream_duration_ms == 30000
    assert result.samples_per_second > 0
    assert math.isfinite(result.realtime_factor) and result.realtime_factor > 0
    assert result.peak_memory_bytes > 0
    assert result.events >= 1
    assert set(result.to_record()) >= {"samplesPerSecond", "realtimeFactor", "peakMemoryBytes"}


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_looser_alpha_never_lowers_false_detections(make_settings, seed):
    # 3 dB noise clears the rising-mean margin often, so the chi-square test decides
    scenario = load_scenario({"binCount": 16, "durationMs": 100000, "noiseFloorDbm": -100.0,
                              "noiseSigmaDb": 3.0, "seed": seed})
    stream = SyntheticStream(scenario)
    assert stream.truth == []
    settings = make_settings(bin_count=16, recentWinSize=10, historicWinSize=50)
    table = run_sweep(stream.samples, stream.truth, [{"alpha": 0.001}, {"alpha": 0.05}], settings)
    strict, loose = table.iloc[0], table.iloc[1]
    assert strict["error"] is None and loose["error"] is None
    assert loose["falselyDetected"] >= strict["falselyDetected"]
    assert loose["falselyDetected"] > 0


@pytest.mark.slow
def test_benchmark_memory_does_not_grow_with_the_stream(make_settings):
    settings = make_settings(bin_count=256)

    def stream(duration_ms):
        return SyntheticStream(load_scenario({
            "binCount": 256, "durationMs": duration_ms, "noiseFloorDbm": -100.0, "seed": 6,
            "transmitters": [{"kind": "narrowbandHopper", "powerDbm": -70.0, "bandwidthBins": 2,
                              "meanDurationMs": 2000.0, "meanIntervalMs": 3000.0}]})).samples()

    # a first run settles allocator and import state
    benchmark(stream(20000), settings)
    single = benchmark(stream(300000), settings)
    double = benchmark(stream(600000), settings)
    assert double.samples == 2 * single.samples == 6000
    assert double.events > single.events
    assert double.peak_memory_bytes < 1.1 * single.peak_memory_bytes
