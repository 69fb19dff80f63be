import json
import pytest
from src.config.detector_config import DetectorConfig, dump_config, load_config
from src.config.eval_config import EvalConfig
from src.config.stream_settings import StreamSettings, dump_settings, load_settings
from src.core.errors import ConfigParseError, InvariantViolation


@pytest.mark.parametrize("document", ["", "   ", "{}", b"{}", {}])
def test_empty_document_gives_defaults(document):
    cfg = load_config(document)
    assert cfg.recent_win_size == 20
    assert cfg.historic_win_size == 200
    assert cfg.num_hist_bins == 20
    assert cfg.alpha == 0.01
    assert cfg.freq_gap_f == 1
    assert cfg.time_gap_t == 2
    assert cfg.warmup_samples == 220
    assert cfg.add_overflow_bins
    assert not cfg.refine_boundaries


def test_recent_longer_than_historic_is_rejected():
    with pytest.raises(InvariantViolation) as e:
        load_config('{"recentWinSize": 500, "historicWinSize": 100}')
    assert e.value.field == "historicWinSize"


def test_values_are_passed_through():
    cfg = load_config('{"alpha": 0.05, "freqGapF": 3}')
    assert cfg.alpha == 0.05
    assert cfg.freq_gap_f == 3
    assert cfg.time_gap_t == 2


def test_warmup_follows_window_sizes():
    assert load_config({"recentWinSize": 10, "historicWinSize": 50}).warmup_samples == 60
    assert load_config({"recentWinSize": 10, "historicWinSize": 50, "warmupSamples": 100}).warmup_samples == 100


@pytest.mark.parametrize("document, field", [
    ({"recentWinSize": 1}, "recentWinSize"),
    ({"histLowerBound": -20.0, "histUpperBound": -120.0}, "histUpperBound"),
    ({"numHistBins": 1}, "numHistBins"),
    ({"alpha": 0.0}, "alpha"),
    ({"alpha": 1.5}, "alpha"),
    ({"marginDb": -1.0}, "marginDb"),
    ({"freqGapF": -1}, "freqGapF"),
    ({"timeGapT": -2}, "timeGapT"),
    ({"warmupSamples": 10}, "warmupSamples"),
    ({"alpha": "often"}, "alpha"),
    ({"noSuchField": 1}, "noSuchField"),
])
def test_invariant_violations_name_the_field(document, field):
    with pytest.raises(InvariantViolation) as e:
        load_config(document)
    assert e.value.field == field


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", "3"])
def test_unparseable_documents(text):
    with pytest.raises(ConfigParseError):
        load_config(text)


def test_dump_then_load_is_identity():
    cfg = load_config({"recentWinSize": 15, "historicWinSize": 120, "alpha": 0.001, "refineBoundaries": True,
                       "addOverflowBins": False, "marginDb": 2.5})
    assert load_config(dump_config(cfg)) == cfg
    assert json.loads(dump_config(cfg))["recentWinSize"] == 15


def test_replace_accepts_both_spellings():
    cfg = DetectorConfig()
    assert cfg.replace(alpha=0.05).alpha == 0.05
    assert cfg.replace(freqGapF=4).freq_gap_f == 4
    changed = cfg.replace(recentWinSize=30)
    assert changed.warmup_samples == 230
    with pytest.raises(InvariantViolation):
        cfg.replace(historicWinSize=5)


def test_config_is_frozen():
    cfg = DetectorConfig()
    with pytest.raises(Exception):
        cfg.alpha = 0.5


SETTINGS = {"startFrequencyHz": 868.0e6, "binWidthHz": 3125.0, "binCount": 64, "tickIntervalMs": 100,
            "latitude": 46.05, "longitude": 14.5, "alpha": 0.05}


def test_settings_document_is_flat():
    settings = load_settings(json.dumps(SETTINGS))
    assert settings.plan.bin_count == 64
    assert settings.plan.bin_width_hz == 3125.0
    assert settings.tick_interval_ms == 100
    assert settings.location == (46.05, 14.5)
    assert settings.detector.alpha == 0.05


def test_settings_round_trip():
    settings = load_settings(SETTINGS)
    assert load_settings(dump_settings(settings)) == settings


def test_settings_defaults():
    settings = load_settings({"startFrequencyHz": 868.0e6, "binWidthHz": 1000.0, "binCount": 8})
    assert settings.tick_interval_ms == 100
    assert settings.location is None
    assert settings.detector == DetectorConfig()


@pytest.mark.parametrize("change, field", [
    ({"binCount": None}, "binCount"),
    ({"binCount": 2.5}, "binCount"),
    ({"tickIntervalMs": 0}, "tickIntervalMs"),
    ({"longitude": None}, "longitude"),
    ({"latitude": 91.0}, "latitude"),
    ({"binWidthHz": "wide"}, "binWidthHz"),
])
def test_settings_errors(change, field):
    document = dict(SETTINGS)
    for key, value in change.items():
        if value is None:
            document.pop(key)
        else:
            document[key] = value
    with pytest.raises(InvariantViolation) as e:
        load_settings(document)
    assert e.value.field == field


def test_with_detector_keeps_the_plan():
    settings = load_settings(SETTINGS)
    other = settings.with_detector(DetectorConfig())
    assert isinstance(other, StreamSettings)
    assert other.plan == settings.plan
    assert other.detector.alpha == 0.01


def test_eval_tolerances_scale_with_the_tick():
    cfg = EvalConfig(tick_interval_ms=250)
    assert cfg.tol_time_ms == 500
    assert cfg.boundary_tol_ms == 500
    assert cfg.tol_freq_bins == 1
