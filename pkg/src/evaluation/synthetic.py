"""
Synthetic spectrum with machine-generated ground truth
A Gaussian noise floor everywhere plus rectangular time-frequency blocks from a set of transmitters,
overlapping blocks add up in linear power
"""
from dataclasses import dataclass
import json
import logging
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from src.config.detector_config import parse_document
from src.core.datatypes import BandPlan, PsdSample
from src.core.errors import InvariantViolation
from src.topology.codecs import encode_sample
from typing import Any, Dict, IO, Iterable, Iterator, List, Literal, Optional, Tuple, Union

TRANSMITTER_KINDS = ('narrowbandHopper', 'widebandBurst')


@dataclass(frozen=True)
class GroundTruthLabel:
    """
    One emitted block, bin range inclusive, tStop is the timestamp of the last tick the block covers
    """
    t_start: int
    t_stop: int
    f_start_bin: int
    f_stop_bin: int

    def __post_init__(self):
        if self.t_stop < self.t_start:
            raise ValueError("label tStop {0} < tStart {1}".format(self.t_stop, self.t_start))
        if self.f_stop_bin < self.f_start_bin:
            raise ValueError("label fStopBin {0} < fStartBin {1}".format(self.f_stop_bin, self.f_start_bin))

    @property
    def duration_ms(self) -> int:
        return self.t_stop - self.t_start

    def to_record(self) -> Dict[str, int]:
        return {"tStart": self.t_start, "tStop": self.t_stop, "fStartBin": self.f_start_bin,
                "fStopBin": self.f_stop_bin}

    @classmethod
    def from_record(cls, record: Dict) -> "GroundTruthLabel":
        return cls(t_start=int(record["tStart"]), t_stop=int(record["tStop"]),
                   f_start_bin=int(record["fStartBin"]), f_stop_bin=int(record["fStopBin"]))


class TransmitterSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    # narrowbandHopper picks a new start bin for every block, widebandBurst always uses the same bins
    kind: Literal['narrowbandHopper', 'widebandBurst']
    power_dbm: float = Field(-70.0, alias='powerDbm')
    bandwidth_bins: int = Field(1, alias='bandwidthBins')
    # Block durations are exponential with this mean, but never shorter than minDurationMs nor one tick
    mean_duration_ms: float = Field(2000.0, alias='meanDurationMs')
    min_duration_ms: float = Field(0.0, alias='minDurationMs')
    # Mean silent time between the end of one block and the start of the next
    mean_interval_ms: float = Field(10000.0, alias='meanIntervalMs')
    # First bin of a widebandBurst, centred in the band when absent
    start_bin: Optional[int] = Field(None, alias='startBin')


class ForcedBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    t_start: int = Field(alias='tStart')
    t_stop: int = Field(alias='tStop')
    f_start_bin: int = Field(alias='fStartBin')
    f_stop_bin: int = Field(alias='fStopBin')
    power_dbm: float = Field(-70.0, alias='powerDbm')


class SyntheticScenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    start_frequency_hz: float = Field(868.0e6, alias='startFrequencyHz')
    bin_width_hz: float = Field(3125.0, alias='binWidthHz')
    bin_count: int = Field(64, alias='binCount')

    # Timestamp of the first sample
    start_time_ms: int = Field(0, alias='startTimeMs')
    duration_ms: int = Field(60000, alias='durationMs')
    tick_interval_ms: int = Field(100, alias='tickIntervalMs')

    noise_floor_dbm: float = Field(-100.0, alias='noiseFloorDbm')
    noise_sigma_db: float = Field(1.0, alias='noiseSigmaDb')

    transmitters: Tuple[TransmitterSpec, ...] = ()
    forced_blocks: Tuple[ForcedBlock, ...] = Field((), alias='forcedBlocks')
    seed: int = 0

    # Labelling slices taken from this stream, the evaluation defaults apply when absent
    slice_duration_ms: Optional[int] = Field(None, alias='sliceDurationMs')
    slice_spacing_ms: Optional[int] = Field(None, alias='sliceSpacingMs')
    slice_budget_ms: Optional[int] = Field(None, alias='sliceBudgetMs')

    @model_validator(mode='after')
    def _check_invariants(self):
        if self.bin_count < 1:
            raise InvariantViolation('binCount', 'must be >= 1, got {0}'.format(self.bin_count))
        if self.duration_ms < 0:
            raise InvariantViolation('durationMs', 'must be >= 0, got {0}'.format(self.duration_ms))
        if self.tick_interval_ms < 1:
            raise InvariantViolation('tickIntervalMs', 'must be >= 1, got {0}'.format(self.tick_interval_ms))
        if self.noise_sigma_db < 0:
            raise InvariantViolation('noiseSigmaDb', 'must be >= 0, got {0}'.format(self.noise_sigma_db))
        for tx in self.transmitters:
            if not 1 <= tx.bandwidth_bins <= self.bin_count:
                raise InvariantViolation('bandwidthBins', 'must lie in [1, {0}], got {1}'.format(
                    self.bin_count, tx.bandwidth_bins))
            if tx.mean_duration_ms <= 0 or tx.mean_interval_ms <= 0:
                raise InvariantViolation('meanDurationMs' if tx.mean_duration_ms <= 0 else 'meanIntervalMs',
                                         'must be > 0')
            if tx.start_bin is not None and not 0 <= tx.start_bin <= self.bin_count - tx.bandwidth_bins:
                raise InvariantViolation('startBin', 'block of {0} bins starting at {1} leaves the band'.format(
                    tx.bandwidth_bins, tx.start_bin))
        for block in self.forced_blocks:
            if not 0 <= block.f_start_bin <= block.f_stop_bin < self.bin_count:
                raise InvariantViolation('forcedBlocks', 'bins {0}..{1} outside the band'.format(
                    block.f_start_bin, block.f_stop_bin))
            if block.t_stop < block.t_start:
                raise InvariantViolation('forcedBlocks', 'tStop {0} < tStart {1}'.format(block.t_stop,
                                                                                        block.t_start))
        return self

    @property
    def plan(self) -> BandPlan:
        return BandPlan(start_frequency_hz=self.start_frequency_hz, bin_width_hz=self.bin_width_hz,
                        bin_count=self.bin_count)

    @property
    def tick_count(self) -> int:
        return self.duration_ms // self.tick_interval_ms

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=True)


PRESETS = {
    # Dense ultra-narrowband IoT traffic in a 200 kHz band plus one 802.15.4-like wideband user
    'scenario1': {
        'startFrequencyHz': 868.0e6, 'binWidthHz': 3125.0, 'binCount': 64,
        'durationMs': 24 * 3600 * 1000, 'tickIntervalMs': 100,
        'noiseFloorDbm': -100.0, 'noiseSigmaDb': 1.0,
        'transmitters': [
            {'kind': 'narrowbandHopper', 'powerDbm': -75.0, 'bandwidthBins': 1, 'meanDurationMs': 2000.0,
             'minDurationMs': 500.0, 'meanIntervalMs': 15000.0}
            for _ in range(6)
        ] + [
            {'kind': 'widebandBurst', 'powerDbm': -70.0, 'bandwidthBins': 16, 'meanDurationMs': 3000.0,
             'minDurationMs': 1000.0, 'meanIntervalMs': 60000.0}
        ],
        'seed': 1,
        'sliceDurationMs': 7500, 'sliceSpacingMs': 120000, 'sliceBudgetMs': 20 * 60 * 1000,
    },
}


def scenario_from_mapping(mapping: Dict[str, Any]) -> SyntheticScenario:
    try:
        return SyntheticScenario.model_validate(mapping)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get('loc') or ('<document>',)
        raise InvariantViolation('.'.join(str(part) for part in loc), first.get('msg', 'invalid value')) from None


def load_scenario(document: Union[str, bytes, Dict[str, Any]]) -> SyntheticScenario:
    """
    :param document: flat JSON scenario document, or the name of a preset
    """
    if isinstance(document, str) and document.strip() in PRESETS:
        return scenario_from_mapping(PRESETS[document.strip()])
    mapping = parse_document(document)
    preset = mapping.pop('preset', None)
    if preset is not None:
        if preset not in PRESETS:
            raise InvariantViolation('preset', 'unknown preset {0!r}, expected one of {1}'.format(
                preset, sorted(PRESETS)))
        base = dict(PRESETS[preset])
        base.update(mapping)
        mapping = base
    return scenario_from_mapping(mapping)


def dump_scenario(scenario: SyntheticScenario) -> str:
    return json.dumps(scenario.to_document(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class _Block:
    # Tick indices, both inclusive
    k_start: int
    k_stop: int
    f_start_bin: int
    f_stop_bin: int
    power_mw: float


def _duration_ticks(rng: np.random.Generator, tx: TransmitterSpec, tick: int) -> int:
    floor_ticks = max(1, int(np.ceil(tx.min_duration_ms / tick)))
    return max(floor_ticks, int(round(rng.exponential(tx.mean_duration_ms) / tick)))


def _schedule(scenario: SyntheticScenario) -> List[_Block]:
    """
    Every transmitter draws from its own generator so adding one does not move the blocks of the others
    """
    tick = scenario.tick_interval_ms
    n = scenario.tick_count
    blocks = []
    for idx, tx in enumerate(scenario.transmitters):
        rng = np.random.default_rng([scenario.seed, idx + 1])
        width = tx.bandwidth_bins
        fixed_start = tx.start_bin if tx.start_bin is not None else (scenario.bin_count - width) // 2
        power_mw = float(10.0 ** (tx.power_dbm / 10.0))
        k = int(round(rng.exponential(tx.mean_interval_ms) / tick))
        while k < n:
            length = _duration_ticks(rng, tx, tick)
            if tx.kind == 'narrowbandHopper':
                f0 = int(rng.integers(0, scenario.bin_count - width + 1))
            else:
                f0 = fixed_start
            k_stop = min(k + length - 1, n - 1)
            blocks.append(_Block(k, k_stop, f0, f0 + width - 1, power_mw))
            # At least one silent tick before the next block of the same transmitter
            k = k + length + max(1, int(round(rng.exponential(tx.mean_interval_ms) / tick)))

    for block in scenario.forced_blocks:
        k_start = -(-(block.t_start - scenario.start_time_ms) // tick)
        k_stop = min((block.t_stop - scenario.start_time_ms) // tick, n - 1)
        if k_start < 0 or k_start > k_stop:
            logging.warning("forced block {0}..{1} ms holds no tick of the stream, skipped".format(
                block.t_start, block.t_stop))
            continue
        blocks.append(_Block(k_start, k_stop, block.f_start_bin, block.f_stop_bin,
                             float(10.0 ** (block.power_dbm / 10.0))))
    blocks.sort(key=lambda b: (b.k_start, b.f_start_bin, b.k_stop, b.f_stop_bin))
    return blocks


class SyntheticStream:
    """
    Lazily generated samples and the truth labels of one scenario
    Iterating twice yields bit-identical samples
    """
    def __init__(self, scenario: SyntheticScenario):
        self.scenario = scenario
        self.plan = scenario.plan
        self._blocks = _schedule(scenario)
        tick, t0 = scenario.tick_interval_ms, scenario.start_time_ms
        self.truth = [GroundTruthLabel(t0 + b.k_start * tick, t0 + b.k_stop * tick, b.f_start_bin, b.f_stop_bin)
                      for b in self._blocks]
        logging.debug("Scenario with {0} ticks and {1} truth blocks".format(scenario.tick_count, len(self.truth)))

    def __len__(self) -> int:
        return self.scenario.tick_count

    def __iter__(self) -> Iterator[PsdSample]:
        return self.samples()

    def samples(self) -> Iterator[PsdSample]:
        sc = self.scenario
        rng = np.random.default_rng(sc.seed)
        nxt = 0
        active = []  # type: List[_Block]
        for k in range(sc.tick_count):
            values = sc.noise_floor_dbm + sc.noise_sigma_db * rng.standard_normal(sc.bin_count)
            while nxt < len(self._blocks) and self._blocks[nxt].k_start == k:
                active.append(self._blocks[nxt])
                nxt += 1
            if active:
                active = [b for b in active if b.k_stop >= k]
            if active:
                power_mw = np.power(10.0, values / 10.0)
                for b in active:
                    power_mw[b.f_start_bin:b.f_stop_bin + 1] += b.power_mw
                values = 10.0 * np.log10(power_mw)
            yield PsdSample(sc.start_time_ms + k * sc.tick_interval_ms, values)

    @property
    def duration_ms(self) -> int:
        return self.scenario.tick_count * self.scenario.tick_interval_ms


def synth_generate(scenario: SyntheticScenario) -> Tuple[Iterator[PsdSample], List[GroundTruthLabel]]:
    stream = SyntheticStream(scenario)
    return stream.samples(), list(stream.truth)


def write_samples(samples: Iterable[PsdSample], stream: IO[bytes], fmt: str) -> int:
    count = 0
    for sample in samples:
        stream.write(encode_sample(sample, fmt))
        count += 1
    return count


def write_truth(labels: Iterable[GroundTruthLabel], stream: IO[str]) -> int:
    count = 0
    for label in labels:
        stream.write(json.dumps(label.to_record(), separators=(',', ':')) + "\n")
        count += 1
    return count
