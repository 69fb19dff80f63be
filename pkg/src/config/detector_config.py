"""
Parameters of the per-bin detection pipelines and of the frequency/time grouping
Loaded from a flat JSON document whose keys are the camelCase names below
"""
import json
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from src.core.errors import ConfigParseError, InvariantViolation
from typing import Any, Dict, Union


class DetectorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    # Length of the recent window W_r in samples
    recent_win_size: int = Field(20, alias='recentWinSize')
    # Length of the historic window W_h in samples, significantly longer than W_r
    historic_win_size: int = Field(200, alias='historicWinSize')

    # Online histogram range (dBm) and number of regular bins B
    hist_lower_bound: float = Field(-120.0, alias='histLowerBound')
    hist_upper_bound: float = Field(-20.0, alias='histUpperBound')
    num_hist_bins: int = Field(20, alias='numHistBins')
    # Whether values outside the range are counted in -inf/+inf bins instead of the edge bins
    add_overflow_bins: bool = Field(True, alias='addOverflowBins')

    # Significance level of the chi-square test
    alpha: float = Field(0.01, alias='alpha')
    # Recent mean must exceed the historic mean by this much for a rising verdict
    margin_db: float = Field(1.0, alias='marginDb')

    # Max inactive bins bridged inside one event
    freq_gap_f: int = Field(1, alias='freqGapF')
    # Max silent ticks bridged inside one event
    time_gap_t: int = Field(2, alias='timeGapT')

    # Ticks consumed before verdicts are emitted, defaults to recentWinSize + historicWinSize
    warmup_samples: int = Field(220, alias='warmupSamples')

    # Back-date event starts and pull in event stops to the hot cells of the event
    refine_boundaries: bool = Field(False, alias='refineBoundaries')
    # A cell is hot above historicMean + max(marginDb, hotSigma * historicStd)
    hot_sigma: float = Field(4.0, alias='hotSigma')

    @model_validator(mode='before')
    @classmethod
    def _default_warmup(cls, data: Any):
        if isinstance(data, dict) and 'warmupSamples' not in data and 'warmup_samples' not in data:
            data = dict(data)
            recent = data.get('recentWinSize', data.get('recent_win_size', 20))
            historic = data.get('historicWinSize', data.get('historic_win_size', 200))
            try:
                data['warmupSamples'] = int(recent) + int(historic)
            except (TypeError, ValueError):
                # Type errors on the window sizes are reported by field validation
                pass
        return data

    @model_validator(mode='after')
    def _check_invariants(self):
        if self.recent_win_size < 2:
            raise InvariantViolation('recentWinSize', 'must be >= 2, got {0}'.format(self.recent_win_size))
        if self.historic_win_size <= self.recent_win_size:
            raise InvariantViolation('historicWinSize', 'must be > recentWinSize ({0}), got {1}'.format(
                self.recent_win_size, self.historic_win_size))
        if not self.hist_upper_bound > self.hist_lower_bound:
            raise InvariantViolation('histUpperBound', 'must be > histLowerBound ({0}), got {1}'.format(
                self.hist_lower_bound, self.hist_upper_bound))
        if self.num_hist_bins < 2:
            raise InvariantViolation('numHistBins', 'must be >= 2, got {0}'.format(self.num_hist_bins))
        if not 0.0 < self.alpha < 1.0:
            raise InvariantViolation('alpha', 'must lie in (0, 1), got {0}'.format(self.alpha))
        if self.margin_db < 0:
            raise InvariantViolation('marginDb', 'must be >= 0, got {0}'.format(self.margin_db))
        if self.freq_gap_f < 0:
            raise InvariantViolation('freqGapF', 'must be >= 0, got {0}'.format(self.freq_gap_f))
        if self.time_gap_t < 0:
            raise InvariantViolation('timeGapT', 'must be >= 0, got {0}'.format(self.time_gap_t))
        if self.warmup_samples < self.recent_win_size + self.historic_win_size:
            raise InvariantViolation('warmupSamples', 'must be >= recentWinSize + historicWinSize ({0}), '
                                                      'got {1}'.format(self.recent_win_size +
                                                                       self.historic_win_size,
                                                                       self.warmup_samples))
        if self.hot_sigma < 0:
            raise InvariantViolation('hotSigma', 'must be >= 0, got {0}'.format(self.hot_sigma))
        return self

    @property
    def hist_bin_width(self) -> float:
        return (self.hist_upper_bound - self.hist_lower_bound) / self.num_hist_bins

    def replace(self, **changes) -> "DetectorConfig":
        """
        Copy with some fields changed, changes may use field names or document names
        """
        doc = self.to_document()
        aliases = {name: info.alias for name, info in DetectorConfig.model_fields.items()}
        changes = {aliases.get(key, key): value for key, value in changes.items()}
        # A derived warmup follows the new window sizes unless set explicitly
        if 'warmupSamples' not in changes and \
                self.warmup_samples == self.recent_win_size + self.historic_win_size:
            doc.pop('warmupSamples')
        doc.update(changes)
        return config_from_mapping(doc)

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)


def _field_of_error(error: Dict) -> str:
    loc = error.get('loc') or ()
    return str(loc[0]) if len(loc) > 0 else '<document>'


def config_from_mapping(mapping: Dict[str, Any]) -> DetectorConfig:
    """
    Build a DetectorConfig from an already parsed document, unspecified fields take their defaults
    """
    try:
        return DetectorConfig.model_validate(mapping)
    except ValidationError as e:
        first = e.errors()[0]
        if first.get('type') == 'extra_forbidden':
            raise InvariantViolation(_field_of_error(first), 'unknown field') from None
        raise InvariantViolation(_field_of_error(first), first.get('msg', 'invalid value')) from None


def parse_document(document: Union[str, bytes, Dict[str, Any]]) -> Dict[str, Any]:
    """
    Parse a flat JSON config document, an empty document is an empty mapping
    """
    if isinstance(document, dict):
        return dict(document)
    if isinstance(document, bytes):
        document = document.decode('utf-8')
    if document is None or document.strip() == '':
        return {}
    try:
        parsed = json.loads(document)
    except json.JSONDecodeError as e:
        raise ConfigParseError("config document is not valid JSON: {0}".format(e)) from None
    if not isinstance(parsed, dict):
        raise ConfigParseError("config document must be a JSON object, got {0}".format(type(parsed).__name__))
    return parsed


def load_config(document: Union[str, bytes, Dict[str, Any]], ignore: tuple = ()) -> DetectorConfig:
    """
    :param document: flat JSON text (or an already parsed mapping)
    :param ignore: document keys that belong to another config section and are skipped here
    :return: validated DetectorConfig
    """
    mapping = parse_document(document)
    for key in ignore:
        mapping.pop(key, None)
    return config_from_mapping(mapping)


def dump_config(config: DetectorConfig) -> str:
    return json.dumps(config.to_document(), indent=2, sort_keys=True)
