"""
Domain types shared by the detector, grouping, store, reporting and evaluation code
"""
from dataclasses import dataclass, field
from enum import Enum
import math
import numpy as np
from src.core.errors import InvariantViolation
from typing import Dict, Optional, Sequence, Tuple


class PsdSample:
    """
    One timestamped vector of energy readings, one reading per frequency bin
    Values are held as a read-only float64 array so a sample can be shared between threads
    """
    __slots__ = ("timestamp", "values")

    def __init__(self, timestamp: int, values: Sequence[float]):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1:
            arr = arr.reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "timestamp", int(timestamp))
        object.__setattr__(self, "values", arr)

    def __setattr__(self, key, value):
        raise AttributeError("PsdSample is immutable")

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PsdSample):
            return NotImplemented
        return self.timestamp == other.timestamp and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.timestamp, self.values.tobytes()))

    def __repr__(self) -> str:
        return "PsdSample(t={0}, n={1})".format(self.timestamp, len(self))


@dataclass(frozen=True)
class BandPlan:
    """
    Maps bin indices of the monitored band to frequencies
    frequency_of(i) is the centre of bin i
    """
    start_frequency_hz: float
    bin_width_hz: float
    bin_count: int

    def __post_init__(self):
        if int(self.bin_count) != self.bin_count or self.bin_count < 1:
            raise InvariantViolation("binCount", "must be an integer >= 1, got {0}".format(self.bin_count))
        if not self.bin_width_hz > 0:
            raise InvariantViolation("binWidthHz", "must be > 0, got {0}".format(self.bin_width_hz))
        if not math.isfinite(self.start_frequency_hz):
            raise InvariantViolation("startFrequencyHz", "must be finite")

    def frequency_of(self, index: int) -> float:
        return self.start_frequency_hz + (index + 0.5) * self.bin_width_hz

    def lower_edge_of(self, index: int) -> float:
        return self.start_frequency_hz + index * self.bin_width_hz

    def frequencies(self) -> np.ndarray:
        return self.start_frequency_hz + (np.arange(self.bin_count) + 0.5) * self.bin_width_hz

    def contains_range(self, start_bin: int, stop_bin: int) -> bool:
        return 0 <= start_bin <= stop_bin < self.bin_count


class Direction(str, Enum):
    RISING = "rising"
    FALLING = "falling"
    FLAT = "flat"


@dataclass(frozen=True)
class BinActivity:
    """
    Per-bin, per-tick detection verdict T_x(t, f)
    `hot` and `onset_timestamp` feed the optional boundary refinement of the time grouping
    """
    bin_index: int
    timestamp: int
    active: bool
    p_value: float = 1.0
    chi_square_stat: float = 0.0
    recent_mean: float = float("nan")
    historic_mean: float = float("nan")
    direction: Direction = Direction.FLAT
    # Raw reading of this bin at this tick
    value: float = float("nan")
    hot: bool = False
    onset_timestamp: Optional[int] = None


@dataclass(frozen=True)
class Warmup:
    """
    Returned by a pipeline while its windows are still filling
    """
    bin_index: int
    timestamp: int
    active: bool = field(default=False, init=False)


@dataclass(frozen=True)
class SpectrumEvent:
    """
    The <E, t_start, t_stop, f_start, f_stop> tuple plus power and location metadata
    Bin ranges are inclusive, fStartHz/fStopHz are the outer band edges of the range
    """
    id: int
    t_start: int
    t_stop: int
    f_start_bin: int
    f_stop_bin: int
    f_start_hz: float
    f_stop_hz: float
    channel_hz: float
    mean_power_dbm: float
    cell_count: int = 0
    location: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.t_stop < self.t_start:
            raise ValueError("event {0}: tStop {1} < tStart {2}".format(self.id, self.t_stop, self.t_start))
        if self.f_stop_bin < self.f_start_bin:
            raise ValueError("event {0}: fStopBin {1} < fStartBin {2}".format(self.id, self.f_stop_bin,
                                                                            self.f_start_bin))

    @classmethod
    def from_bins(cls, event_id: int, t_start: int, t_stop: int, f_start_bin: int, f_stop_bin: int,
                  plan: BandPlan, mean_power_dbm: float, cell_count: int = 0,
                  location: Optional[Tuple[float, float]] = None) -> "SpectrumEvent":
        # Channel index follows floor((startFq + stopFq - 1) / 2) with stopFq exclusive
        stop_exclusive = f_stop_bin + 1
        channel_index = (f_start_bin + stop_exclusive - 1) // 2
        return cls(id=event_id, t_start=int(t_start), t_stop=int(t_stop),
                   f_start_bin=int(f_start_bin), f_stop_bin=int(f_stop_bin),
                   f_start_hz=plan.lower_edge_of(f_start_bin), f_stop_hz=plan.lower_edge_of(stop_exclusive),
                   channel_hz=plan.frequency_of(channel_index), mean_power_dbm=float(mean_power_dbm),
                   cell_count=int(cell_count), location=None if location is None else tuple(location))

    @property
    def duration_ms(self) -> int:
        return self.t_stop - self.t_start

    @property
    def bin_span(self) -> int:
        return self.f_stop_bin - self.f_start_bin + 1

    def to_record(self) -> Dict:
        record = {
            "id": self.id,
            "tStart": self.t_start,
            "tStop": self.t_stop,
            "fStartBin": self.f_start_bin,
            "fStopBin": self.f_stop_bin,
            "fStartHz": self.f_start_hz,
            "fStopHz": self.f_stop_hz,
            "channelHz": self.channel_hz,
            "meanPowerDbm": self.mean_power_dbm,
            "cellCount": self.cell_count,
        }
        if self.location is not None:
            record["location"] = [self.location[0], self.location[1]]
        return record

    @classmethod
    def from_record(cls, record: Dict) -> "SpectrumEvent":
        location = record.get("location")
        return cls(id=int(record["id"]), t_start=int(record["tStart"]), t_stop=int(record["tStop"]),
                   f_start_bin=int(record["fStartBin"]), f_stop_bin=int(record["fStopBin"]),
                   f_start_hz=float(record["fStartHz"]), f_stop_hz=float(record["fStopHz"]),
                   channel_hz=float(record["channelHz"]), mean_power_dbm=float(record["meanPowerDbm"]),
                   cell_count=int(record.get("cellCount", 0)),
                   location=None if location is None else (float(location[0]), float(location[1])))
