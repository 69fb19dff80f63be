import numpy as np
import pytest
from src.config.detector_config import DetectorConfig, load_config
from src.config.stream_settings import StreamSettings
from src.core.datatypes import BandPlan, SpectrumEvent
from src.grouping.frequency_grouping import FrequencyGroup


@pytest.fixture
def plan() -> BandPlan:
    # 868.0 MHz, 1 kHz bins
    return BandPlan(start_frequency_hz=868.0e6, bin_width_hz=1000.0, bin_count=8)


@pytest.fixture
def fast_cfg() -> DetectorConfig:
    # Short windows keep the warmup at 60 ticks
    return load_config({"recentWinSize": 10, "historicWinSize": 50})


@pytest.fixture
def make_settings():
    def _make(bin_count: int = 16, tick_interval_ms: int = 100, location=None, **detector) -> StreamSettings:
        plan = BandPlan(start_frequency_hz=868.0e6, bin_width_hz=3125.0, bin_count=bin_count)
        return StreamSettings(plan=plan, detector=load_config(detector), tick_interval_ms=tick_interval_ms,
                              location=location)
    return _make


@pytest.fixture
def make_group():
    def _make(t: int, start: int, stop: int, dbm: float = -60.0, hot: bool = False, onset: int = None):
        members = tuple(range(start, stop + 1))
        return FrequencyGroup(timestamp=t, start_bin=start, stop_bin=stop, member_bins=members,
                              power_mw=float(len(members) * 10.0 ** (dbm / 10.0)),
                              hot_count=len(members) if hot else 0, onset_timestamp=onset)
    return _make


@pytest.fixture
def make_event(plan):
    def _make(event_id: int, t_start: int, t_stop: int, f_start: int, f_stop: int, dbm: float = -60.0,
              cell_count: int = 0, location=None) -> SpectrumEvent:
        return SpectrumEvent.from_bins(event_id, t_start, t_stop, f_start, f_stop, plan, dbm,
                                       cell_count=cell_count, location=location)
    return _make


@pytest.fixture
def noise():
    def _noise(ticks: int, bins: int, seed: int = 0, floor: float = -100.0, sigma: float = 1.0) -> np.ndarray:
        return floor + sigma * np.random.default_rng(seed).standard_normal((ticks, bins))
    return _noise
