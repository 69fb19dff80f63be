"""
Per-tick grouping of active bins into frequency groups
Two active bins belong to the same group when at most F inactive bins separate them
"""
from dataclasses import dataclass
import numpy as np
from src.core.datatypes import BinActivity, Warmup
from src.core.errors import TimestampMismatch
from src.detection.pipeline_bank import NO_ONSET, VerdictColumns
from typing import List, Optional, Sequence, Tuple, Union


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=np.float64) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


@dataclass(frozen=True)
class FrequencyGroup:
    timestamp: int
    start_bin: int
    stop_bin: int
    member_bins: Tuple[int, ...]
    # Linear power summed over the member cells
    power_mw: float
    # Hot members and the earliest onset among them, both only used by boundary refinement
    hot_count: int = 0
    onset_timestamp: Optional[int] = None

    @property
    def cell_count(self) -> int:
        return len(self.member_bins)

    @property
    def mean_power_dbm(self) -> float:
        return float(mw_to_dbm(self.power_mw / self.cell_count))

    @property
    def width(self) -> int:
        return self.stop_bin - self.start_bin + 1


def _split_runs(active_bins: np.ndarray, freq_gap: int) -> List[np.ndarray]:
    if active_bins.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(active_bins) > freq_gap + 1) + 1
    return np.split(active_bins, breaks)


def _make_groups(timestamp: int, active_bins: np.ndarray, values: np.ndarray, hot: np.ndarray,
                 onset: np.ndarray, freq_gap: int) -> List[FrequencyGroup]:
    """
    :param active_bins: ascending absolute bin indices
    :param values, hot, onset: aligned with active_bins
    """
    groups = []
    offset = 0
    for run in _split_runs(active_bins, freq_gap):
        sl = slice(offset, offset + run.size)
        offset += run.size
        run_hot = hot[sl]
        run_onset = onset[sl][run_hot]
        groups.append(FrequencyGroup(timestamp=int(timestamp), start_bin=int(run[0]), stop_bin=int(run[-1]),
                                     member_bins=tuple(int(b) for b in run),
                                     power_mw=float(dbm_to_mw(values[sl]).sum()),
                                     hot_count=int(run_hot.sum()),
                                     onset_timestamp=int(run_onset.min()) if run_onset.size else None))
    return groups


def group_frequency(activities: Sequence[Union[BinActivity, Warmup]], freq_gap: int) -> List[FrequencyGroup]:
    """
    Partition the active bins of one tick into maximal runs, ordered by start bin
    :param activities: one verdict per bin, all with the same timestamp
    :param freq_gap: F, number of inactive bins that may be bridged
    """
    if not activities:
        return []
    timestamp = activities[0].timestamp
    for activity in activities:
        if activity.timestamp != timestamp:
            raise TimestampMismatch("bin {0} stamped {1}, expected {2}".format(activity.bin_index,
                                                                               activity.timestamp, timestamp))
    active = sorted((a for a in activities if a.active), key=lambda a: a.bin_index)
    if not active:
        return []
    bins = np.array([a.bin_index for a in active], dtype=np.int64)
    values = np.array([a.value for a in active], dtype=np.float64)
    hot = np.array([a.hot for a in active], dtype=bool)
    onset = np.array([NO_ONSET if a.onset_timestamp is None else a.onset_timestamp for a in active],
                     dtype=np.int64)
    return _make_groups(timestamp, bins, values, hot, onset, freq_gap)


def group_frequency_columns(columns: VerdictColumns, freq_gap: int) -> List[FrequencyGroup]:
    """
    group_frequency over a columnar verdict vector
    """
    if columns.warmup:
        return []
    rows = np.flatnonzero(columns.active)
    return _make_groups(columns.timestamp, rows + columns.bin_start, columns.values[rows], columns.hot[rows],
                        columns.onset[rows], freq_gap)
