import numpy as np
import pytest
from oracles import chi2_upper_tail
from src.config.detector_config import DetectorConfig, load_config
from src.core.datatypes import BinActivity, Direction, Warmup
from src.core.errors import EmptyHistogram, EmptyWindow, NegativeCount
from src.detection.bin_pipeline import BinPipeline, classify_direction, detect, trailing_hot_run
from src.detection.chi_square import chi_square_cells, chi_square_pvalue, chi_square_statistic
from src.detection.histogram import OnlineHistogram, bin_index, bin_indices, histogram_update
from src.detection.pipeline_bank import PipelineBank, VerdictColumns
from src.detection.windows import DelayedWindow, SlidingWindow, moving_average, window_push


def test_window_evicts_oldest():
    window = SlidingWindow(3)
    evictions = [window_push(window, v, t) for t, v in enumerate([1.0, 2.0, 3.0, 4.0])]
    assert window.values() == [2.0, 3.0, 4.0]
    assert evictions[:3] == [[], [], []]
    assert evictions[3] == [(0, 1.0)]


def test_window_not_full_keeps_everything():
    window = SlidingWindow(3)
    assert window.push(1.0, 0) == []
    assert window.push(2.0, 1) == []
    assert window.values() == [1.0, 2.0]
    assert not window.is_full()


def test_window_of_one():
    window = SlidingWindow(1)
    out = [window.push(v, t) for t, v in enumerate([-90.0, -80.0, -70.0])]
    assert out == [[], [(0, -90.0)], [(1, -80.0)]]
    assert window.newest() == (2, -70.0)


def test_window_capacity_must_be_positive():
    with pytest.raises(ValueError):
        SlidingWindow(0)


def test_delayed_window_takes_what_the_recent_window_drops():
    recent, historic = SlidingWindow(3), DelayedWindow(delay=3, capacity=2)
    for t in range(6):
        aged = historic.push_evicted(recent.push(float(t), t), recent)
        assert aged == ([(0, 0.0)] if t == 5 else [])
    assert historic.timestamps() == [1, 2]
    assert recent.timestamps() == [3, 4, 5]
    assert historic.push_evicted([], recent) == []


def test_delayed_window_rejects_values_still_in_the_recent_window():
    recent, historic = SlidingWindow(3), DelayedWindow(delay=3, capacity=5)
    recent.push(0.0, 0)
    recent.push(1.0, 1)
    with pytest.raises(ValueError):
        historic.push_evicted([(0, 0.0)], recent)
    recent.push(2.0, 2)
    with pytest.raises(ValueError):
        historic.push_evicted([(2, 2.0)], recent)
    assert len(historic) == 0


def test_moving_average():
    window = SlidingWindow(4)
    window.push(-100.0, 0)
    assert moving_average(window) == -100.0
    window.push(-80.0, 1)
    assert moving_average(window) == -90.0
    constant = SlidingWindow(5)
    for t in range(12):
        constant.push(-73.25, t)
    assert moving_average(constant) == pytest.approx(-73.25, rel=1e-12)
    with pytest.raises(EmptyWindow):
        moving_average(SlidingWindow(3))


def test_moving_average_stays_accurate_over_long_runs():
    rng = np.random.default_rng(3)
    window = SlidingWindow(20)
    for t, v in enumerate(rng.normal(-100.0, 5.0, 10000)):
        window.push(float(v), t)
    assert moving_average(window) == pytest.approx(np.mean(window.values()), rel=1e-12)


def test_histogram_regular_bin():
    hist = OnlineHistogram(-120.0, -20.0, 10)
    histogram_update(hist, added=[-115.0], removed=[])
    assert hist.counts[0] == 1
    assert hist.total == 1
    # Cell 0 is the underflow cell
    assert hist.cells[1] == 1


def test_histogram_underflow_and_overflow():
    hist = OnlineHistogram(-120.0, -20.0, 10, overflow_bins=True)
    hist.update(added=[-125.0, -20.0, -5.0])
    assert hist.underflow_count == 1
    assert hist.overflow_count == 2
    assert hist.counts.sum() == 0


def test_histogram_clamps_without_overflow_bins():
    hist = OnlineHistogram(-120.0, -20.0, 10, overflow_bins=False)
    hist.update(added=[-125.0, -5.0, np.nextafter(-20.0, -30.0)])
    assert hist.counts[0] == 1
    assert hist.counts[9] == 2
    assert hist.underflow_count == 0
    assert hist.overflow_count == 0
    assert hist.counts.sum() == hist.total == 3


def test_histogram_add_then_remove():
    hist = OnlineHistogram(-120.0, -20.0, 10)
    hist.update(added=[-60.0]).update(removed=[-60.0])
    assert hist.total == 0
    assert not hist.cells.any()
    with pytest.raises(NegativeCount):
        hist.remove(-60.0)


@pytest.mark.parametrize("overflow", [True, False])
def test_vectorised_binning_matches_scalar(overflow):
    values = np.random.default_rng(0).uniform(-140.0, 0.0, 2000)
    values = np.concatenate([values, [-120.0, -20.0, -70.0, np.nextafter(-20.0, -30.0)]])
    expected = [bin_index(v, -120.0, -20.0, 20, overflow) for v in values]
    assert bin_indices(values, -120.0, -20.0, 20, overflow).tolist() == expected


def _hist(values, lower, upper, bins):
    return OnlineHistogram.from_values(values, lower, upper, bins)


def test_chi_square_identical_histograms():
    values = [-100.0, -99.0, -97.0, -60.0, -101.0]
    stat, dof = chi_square_statistic(_hist(values, -120, -20, 20), _hist(values, -120, -20, 20))
    assert stat == 0.0
    assert dof >= 1


def test_chi_square_two_bins():
    observed = _hist([0.5] * 10, 0.0, 2.0, 2)
    expected = _hist([0.5] * 5 + [1.5] * 5, 0.0, 2.0, 2)
    assert chi_square_statistic(observed, expected) == (pytest.approx(10.0), 1)


def test_chi_square_skips_cells_empty_on_both_sides():
    observed = _hist([0.5] * 8, 0.0, 3.0, 3)
    expected = _hist([0.5] * 4 + [1.5] * 4, 0.0, 3.0, 3)
    assert chi_square_statistic(observed, expected) == (pytest.approx(8.0), 1)


def test_chi_square_scales_expected_to_observed_total():
    stat, dof = chi_square_cells(np.array([[10, 0]]), np.array([[10, 10]]), 1)
    assert stat[0] == pytest.approx(10.0)
    assert dof[0] == 1


def test_chi_square_unseen_cell_uses_pseudocount():
    # Historic never saw cell 1: expected becomes 0.5 there
    stat, _ = chi_square_cells(np.array([[4, 1]]), np.array([[5, 0]]), 1)
    assert stat[0] == pytest.approx((4 - 5) ** 2 / 5 + (1 - 0.5) ** 2 / 0.5)


def test_chi_square_needs_data_on_both_sides():
    with pytest.raises(EmptyHistogram):
        chi_square_statistic(_hist([], -120, -20, 20), _hist([-100.0], -120, -20, 20))
    with pytest.raises(ValueError):
        chi_square_statistic(_hist([-100.0], -120, -20, 20), _hist([-100.0], -120, -20, 10))


def test_pvalue_examples():
    assert chi_square_pvalue(0.0, 1) == 1.0
    assert chi_square_pvalue(0.0, 17) == 1.0
    assert chi_square_pvalue(3.841, 1) == pytest.approx(0.05, abs=1e-4)
    assert chi_square_pvalue(16.919, 9) == pytest.approx(0.05, abs=1e-4)


@pytest.mark.parametrize("stat, dof", [(0.5, 1), (3.841, 1), (10.0, 5), (16.919, 9), (40.0, 19), (75.5, 50)])
def test_pvalue_against_quadrature(stat, dof):
    assert abs(chi_square_pvalue(stat, dof) - chi2_upper_tail(stat, dof)) <= 1e-10


def test_pvalue_is_vectorised():
    p = chi_square_pvalue(np.array([0.0, 3.841]), np.array([1, 1]))
    assert p.shape == (2,)
    assert p[0] == 1.0


def test_pvalue_never_rises_with_the_statistic():
    stats = np.linspace(0.0, 250.0, 5001)
    for dof in range(1, 51):
        p = chi_square_pvalue(stats, np.full(stats.shape, dof))
        assert np.all(np.diff(p) <= 0.0), "dof {0}".format(dof)
        assert p[0] == 1.0 and np.all(p >= 0.0)


def test_direction_gate():
    assert classify_direction(-90.0, -100.0, 1.0) is Direction.RISING
    assert classify_direction(-99.5, -100.0, 1.0) is Direction.FLAT
    assert classify_direction(-110.0, -100.0, 1.0) is Direction.FALLING


def test_trailing_hot_run():
    recent = [(0, -100.0), (1, -60.0), (2, -100.0), (3, -60.0), (4, -61.0)]
    assert trailing_hot_run(recent, -90.0) == 3
    assert trailing_hot_run(recent[:3], -90.0) is None


def _drive(pipeline: BinPipeline, values, t0: int = 0, tick: int = 100):
    return [pipeline.detect(float(v), t0 + k * tick) for k, v in enumerate(values)]


def test_warmup_markers(fast_cfg):
    pipeline = BinPipeline(3, fast_cfg)
    verdicts = _drive(pipeline, np.full(fast_cfg.warmup_samples + 5, -100.0))
    assert all(isinstance(v, Warmup) and not v.active for v in verdicts[:fast_cfg.warmup_samples - 1])
    assert all(isinstance(v, BinActivity) for v in verdicts[fast_cfg.warmup_samples - 1:])
    assert verdicts[0].bin_index == 3


def test_noise_is_not_activity(noise):
    cfg = DetectorConfig()
    pipeline = BinPipeline(0, cfg)
    verdicts = _drive(pipeline, noise(301, 1, seed=11)[:, 0])
    last = verdicts[-1]
    assert isinstance(last, BinActivity)
    assert not last.active
    assert not last.hot
    assert last.onset_timestamp is None


def test_strong_burst_is_rising_activity(noise):
    cfg = DetectorConfig()
    pipeline = BinPipeline(0, cfg)
    values = np.concatenate([noise(cfg.warmup_samples, 1, seed=5)[:, 0], np.full(20, -55.0)])
    verdicts = _drive(pipeline, values)
    last = verdicts[-1]
    assert last.active
    assert last.direction is Direction.RISING
    assert last.p_value < cfg.alpha
    assert last.recent_mean == pytest.approx(-55.0)
    # The whole recent window is hot, the run starts at the first burst sample
    assert last.hot
    assert last.onset_timestamp == cfg.warmup_samples * 100
    assert pipeline.frozen


def test_historic_side_is_frozen_while_active(noise):
    cfg = load_config({"recentWinSize": 10, "historicWinSize": 50})
    pipeline = BinPipeline(0, cfg)
    _drive(pipeline, noise(cfg.warmup_samples, 1, seed=2)[:, 0])
    before = list(pipeline.historic.values())
    verdicts = _drive(pipeline, np.full(30, -50.0), t0=10 ** 6)
    assert verdicts[-1].active
    # Nothing of the burst reached the historic window
    assert min(pipeline.historic.values()) < -90.0
    assert max(pipeline.historic.values()) < -80.0
    assert len(pipeline.historic) == len(before)


def test_detect_checks_the_config(fast_cfg):
    pipeline = BinPipeline(0, fast_cfg)
    assert isinstance(detect(pipeline, -100.0, 0, fast_cfg), Warmup)
    with pytest.raises(ValueError):
        detect(pipeline, -100.0, 1, DetectorConfig())


def test_incremental_state_matches_rebuilt_state(fast_cfg, noise):
    values = noise(400, 1, seed=8)[:, 0]
    values[120:170] += 40.0
    values[300:305] -= 30.0
    pipeline = BinPipeline(0, fast_cfg)
    args = (fast_cfg.hist_lower_bound, fast_cfg.hist_upper_bound, fast_cfg.num_hist_bins)
    for k, v in enumerate(values):
        pipeline.detect(float(v), k)
        rebuilt_recent = OnlineHistogram.from_values(pipeline.recent.values(), *args)
        assert np.array_equal(pipeline.recent_hist.cells, rebuilt_recent.cells)
        assert moving_average(pipeline.recent) == pytest.approx(np.mean(pipeline.recent.values()), rel=1e-9)
        if len(pipeline.historic):
            rebuilt_historic = OnlineHistogram.from_values(pipeline.historic.values(), *args)
            assert np.array_equal(pipeline.historic_hist.cells, rebuilt_historic.cells)
            assert moving_average(pipeline.historic) == pytest.approx(np.mean(pipeline.historic.values()),
                                                                      rel=1e-9)
            # Recent and historic windows never share a sample
            assert max(pipeline.historic.timestamps()) < min(pipeline.recent.timestamps())


def _bursty(noise, ticks: int, bins: int, seed: int) -> np.ndarray:
    values = noise(ticks, bins, seed=seed)
    values[150:200, 2:4] = 10.0 * np.log10(10.0 ** (values[150:200, 2:4] / 10.0) + 1e-6)
    values[300:330, 5] = 10.0 * np.log10(10.0 ** (values[300:330, 5] / 10.0) + 1e-7)
    return values


def test_bank_matches_scalar_pipelines(fast_cfg, noise):
    bins = 6
    values = _bursty(noise, 400, bins, seed=4)
    bank = PipelineBank(0, bins, fast_cfg)
    scalars = [BinPipeline(b, fast_cfg) for b in range(bins)]
    saw_active = False
    for k, row in enumerate(values):
        t = 1000 + 100 * k
        columns = bank.step(row, t)
        expected = [p.detect(float(v), t) for p, v in zip(scalars, row)]
        activities = columns.activities()
        assert [type(a) for a in activities] == [type(e) for e in expected]
        if columns.warmup:
            continue
        for got, want in zip(activities, expected):
            assert got.bin_index == want.bin_index
            assert got.active == want.active
            assert got.direction is want.direction
            assert got.hot == want.hot
            assert got.onset_timestamp == want.onset_timestamp
            assert got.p_value == pytest.approx(want.p_value, rel=1e-12, abs=1e-300)
            assert got.chi_square_stat == pytest.approx(want.chi_square_stat, rel=1e-12)
            assert got.recent_mean == pytest.approx(want.recent_mean, rel=1e-9)
            assert got.historic_mean == pytest.approx(want.historic_mean, rel=1e-9)
        saw_active = saw_active or bool(columns.active.any())
    assert saw_active


def test_bank_ranges_concatenate(fast_cfg, noise):
    values = _bursty(noise, 200, 6, seed=9)
    whole = PipelineBank(0, 6, fast_cfg)
    left, right = PipelineBank(0, 2, fast_cfg), PipelineBank(2, 6, fast_cfg)
    for k, row in enumerate(values):
        joined = VerdictColumns.concat([left.step(row[:2], k), right.step(row[2:], k)])
        full = whole.step(row, k)
        assert joined.warmup == full.warmup
        assert joined.bin_start == 0 and joined.bin_stop == 6
        assert np.array_equal(joined.active, full.active)
        assert np.array_equal(joined.onset, full.onset)
        assert np.allclose(joined.p_value, full.p_value, rtol=1e-12, atol=0.0)


def test_bank_rejects_bad_input(fast_cfg):
    with pytest.raises(ValueError):
        PipelineBank(4, 4, fast_cfg)
    bank = PipelineBank(0, 3, fast_cfg)
    with pytest.raises(ValueError):
        bank.step(np.zeros(4), 0)


def test_concat_needs_contiguous_ranges():
    a = VerdictColumns.warming_up(0, 0, np.zeros(2))
    b = VerdictColumns.warming_up(0, 3, np.zeros(2))
    with pytest.raises(ValueError):
        VerdictColumns.concat([a, b])


def test_bin_verdict_ignores_the_other_bins(fast_cfg, noise):
    values = _bursty(noise, 400, 6, seed=12)
    # bin 2 stays in place, the others trade streams and bin 0 gets a fresh one
    order = [5, 3, 2, 0, 4, 1]
    shuffled = values[:, order]
    shuffled[:, 0] = noise(400, 1, seed=13)[:, 0]
    bank, other = PipelineBank(0, 6, fast_cfg), PipelineBank(0, 6, fast_cfg)
    saw_active = False
    for k in range(len(values)):
        a, b = bank.step(values[k], 100 * k), other.step(shuffled[k], 100 * k)
        assert a.warmup == b.warmup
        if a.warmup:
            continue
        assert a.active[2] == b.active[2]
        assert a.hot[2] == b.hot[2]
        assert a.onset[2] == b.onset[2]
        assert a.p_value[2] == pytest.approx(b.p_value[2], rel=1e-12, abs=1e-300)
        saw_active = saw_active or bool(a.active[2])
    assert saw_active
