"""
Everything needed to run one stream: band plan, tick interval, sensor location and detector parameters
All of it lives in one flat JSON document
"""
from dataclasses import dataclass
import json
from src.config.detector_config import DetectorConfig, load_config, parse_document
from src.core.datatypes import BandPlan
from src.core.errors import InvariantViolation
from typing import Any, Dict, Optional, Tuple, Union

# Document keys owned by the stream settings rather than by DetectorConfig
SETTINGS_KEYS = ('startFrequencyHz', 'binWidthHz', 'binCount', 'tickIntervalMs', 'latitude', 'longitude')


@dataclass(frozen=True)
class StreamSettings:
    plan: BandPlan
    detector: DetectorConfig
    # Nominal spacing of consecutive samples
    tick_interval_ms: int = 100
    # Sensor position, attached to every event when present
    location: Optional[Tuple[float, float]] = None

    def with_detector(self, detector: DetectorConfig) -> "StreamSettings":
        return StreamSettings(plan=self.plan, detector=detector, tick_interval_ms=self.tick_interval_ms,
                              location=self.location)

    def to_document(self) -> Dict[str, Any]:
        doc = {
            'startFrequencyHz': self.plan.start_frequency_hz,
            'binWidthHz': self.plan.bin_width_hz,
            'binCount': self.plan.bin_count,
            'tickIntervalMs': self.tick_interval_ms,
        }
        if self.location is not None:
            doc['latitude'], doc['longitude'] = self.location
        doc.update(self.detector.to_document())
        return doc


def _number(mapping: Dict[str, Any], key: str, kind=float, required: bool = True, default=None):
    if key not in mapping:
        if required:
            raise InvariantViolation(key, 'required field is missing')
        return default
    try:
        value = kind(mapping[key])
    except (TypeError, ValueError):
        raise InvariantViolation(key, 'expected a number, got {0!r}'.format(mapping[key])) from None
    if isinstance(mapping[key], bool) or (kind is int and float(mapping[key]) != value):
        raise InvariantViolation(key, 'expected an integer, got {0!r}'.format(mapping[key]))
    return value


def load_settings(document: Union[str, bytes, Dict[str, Any]]) -> StreamSettings:
    mapping = parse_document(document)
    plan = BandPlan(start_frequency_hz=_number(mapping, 'startFrequencyHz'),
                    bin_width_hz=_number(mapping, 'binWidthHz'),
                    bin_count=_number(mapping, 'binCount', kind=int))
    tick = _number(mapping, 'tickIntervalMs', kind=int, required=False, default=100)
    if tick < 1:
        raise InvariantViolation('tickIntervalMs', 'must be >= 1, got {0}'.format(tick))
    lat = _number(mapping, 'latitude', required=False)
    lon = _number(mapping, 'longitude', required=False)
    if (lat is None) != (lon is None):
        raise InvariantViolation('latitude' if lat is None else 'longitude',
                                 'latitude and longitude must be given together')
    location = None
    if lat is not None:
        if not -90.0 <= lat <= 90.0:
            raise InvariantViolation('latitude', 'must lie in [-90, 90], got {0}'.format(lat))
        location = (lat, lon)
    detector = load_config(mapping, ignore=SETTINGS_KEYS)
    return StreamSettings(plan=plan, detector=detector, tick_interval_ms=tick, location=location)


def dump_settings(settings: StreamSettings) -> str:
    return json.dumps(settings.to_document(), indent=2, sort_keys=True)
