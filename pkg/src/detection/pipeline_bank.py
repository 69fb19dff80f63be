"""
Vectorised bank of per-bin pipelines over a contiguous bin range
Each row of every array belongs to one bin, the bank behaves as if one BinPipeline were driven per bin
"""
from dataclasses import dataclass
import numpy as np
from scipy.special import gammaincc
from src.config.detector_config import DetectorConfig
from src.core.datatypes import BinActivity, Direction, Warmup
from src.detection.chi_square import chi_square_cells
from src.detection.histogram import bin_indices
from typing import List, Optional, Sequence, Union

# Direction codes of the columnar verdicts
RISING, FLAT, FALLING = 1, 0, -1
_DIRECTIONS = {RISING: Direction.RISING, FLAT: Direction.FLAT, FALLING: Direction.FALLING}
# Onset column value of verdicts that are not hot
NO_ONSET = -1


@dataclass
class VerdictColumns:
    """
    Verdicts of one tick for the bins [bin_start, bin_start + len) stored column-wise
    """
    timestamp: int
    bin_start: int
    warmup: bool
    active: np.ndarray
    p_value: np.ndarray
    chi_square_stat: np.ndarray
    recent_mean: np.ndarray
    historic_mean: np.ndarray
    direction: np.ndarray
    values: np.ndarray
    hot: np.ndarray
    onset: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def bin_stop(self) -> int:
        return self.bin_start + len(self.values)

    @classmethod
    def warming_up(cls, timestamp: int, bin_start: int, values: np.ndarray) -> "VerdictColumns":
        n = len(values)
        return cls(timestamp=timestamp, bin_start=bin_start, warmup=True,
                   active=np.zeros(n, dtype=bool), p_value=np.ones(n), chi_square_stat=np.zeros(n),
                   recent_mean=np.full(n, np.nan), historic_mean=np.full(n, np.nan),
                   direction=np.zeros(n, dtype=np.int8), values=np.asarray(values, dtype=np.float64),
                   hot=np.zeros(n, dtype=bool), onset=np.full(n, NO_ONSET, dtype=np.int64))

    @classmethod
    def concat(cls, parts: Sequence["VerdictColumns"]) -> "VerdictColumns":
        """
        Join the verdicts of contiguous bin ranges of the same tick, parts ordered by bin_start
        """
        if len(parts) == 1:
            return parts[0]
        for left, right in zip(parts[:-1], parts[1:]):
            if left.bin_stop != right.bin_start:
                raise ValueError("verdict ranges [{0}, {1}) and [{2}, {3}) are not contiguous".format(
                    left.bin_start, left.bin_stop, right.bin_start, right.bin_stop))
        columns = {}
        for name in ('active', 'p_value', 'chi_square_stat', 'recent_mean', 'historic_mean',
                     'direction', 'values', 'hot', 'onset'):
            columns[name] = np.concatenate([getattr(part, name) for part in parts])
        return cls(timestamp=parts[0].timestamp, bin_start=parts[0].bin_start,
                   warmup=any(part.warmup for part in parts), **columns)

    def activities(self) -> List[Union[BinActivity, Warmup]]:
        """
        Row-wise view as BinActivity / Warmup records
        """
        if self.warmup:
            return [Warmup(bin_index=self.bin_start + k, timestamp=self.timestamp) for k in range(len(self))]
        out = []
        for k in range(len(self)):
            onset = int(self.onset[k])
            out.append(BinActivity(bin_index=self.bin_start + k, timestamp=self.timestamp,
                                   active=bool(self.active[k]), p_value=float(self.p_value[k]),
                                   chi_square_stat=float(self.chi_square_stat[k]),
                                   recent_mean=float(self.recent_mean[k]),
                                   historic_mean=float(self.historic_mean[k]),
                                   direction=_DIRECTIONS[int(self.direction[k])], value=float(self.values[k]),
                                   hot=bool(self.hot[k]), onset_timestamp=None if onset == NO_ONSET else onset))
        return out


class PipelineBank:
    def __init__(self, bin_start: int, bin_stop: int, cfg: DetectorConfig):
        if bin_stop <= bin_start:
            raise ValueError("empty bin range [{0}, {1})".format(bin_start, bin_stop))
        self.bin_start = bin_start
        self.bin_stop = bin_stop
        self.cfg = cfg
        n = bin_stop - bin_start
        r, h = cfg.recent_win_size, cfg.historic_win_size
        cells = cfg.num_hist_bins + 2
        self._rows = np.arange(n)

        # Recent windows advance in lock step, so the write position is shared
        self.recent_buf = np.zeros((n, r), dtype=np.float64)
        self.recent_ts = np.zeros(r, dtype=np.int64)
        self.recent_pos = 0
        self.recent_len = 0
        self.recent_cells = np.zeros((n, cells), dtype=np.int64)

        # Historic windows stall independently while frozen
        self.hist_buf = np.zeros((n, h), dtype=np.float64)
        self.hist_pos = np.zeros(n, dtype=np.int64)
        self.hist_len = np.zeros(n, dtype=np.int64)
        self.hist_cells = np.zeros((n, cells), dtype=np.int64)

        self.frozen = np.zeros(n, dtype=bool)
        self.ticks = 0

    def __len__(self) -> int:
        return self.bin_stop - self.bin_start

    def _cells_of(self, values: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        return bin_indices(values, cfg.hist_lower_bound, cfg.hist_upper_bound, cfg.num_hist_bins,
                           cfg.add_overflow_bins)

    def _push_recent(self, values: np.ndarray, t: int) -> Optional[np.ndarray]:
        r = self.cfg.recent_win_size
        evicted = None
        if self.recent_len == r:
            evicted = self.recent_buf[:, self.recent_pos].copy()
            self.recent_cells[self._rows, self._cells_of(evicted)] -= 1
        self.recent_buf[:, self.recent_pos] = values
        self.recent_ts[self.recent_pos] = t
        self.recent_cells[self._rows, self._cells_of(values)] += 1
        self.recent_pos = (self.recent_pos + 1) % r
        self.recent_len = min(r, self.recent_len + 1)
        return evicted

    def _push_historic(self, evicted: np.ndarray):
        h = self.cfg.historic_win_size
        rows = self._rows[~self.frozen]
        if rows.size == 0:
            return
        pos = self.hist_pos[rows]
        full = rows[self.hist_len[rows] == h]
        if full.size:
            aged = self.hist_buf[full, self.hist_pos[full]]
            self.hist_cells[full, self._cells_of(aged)] -= 1
        incoming = evicted[rows]
        self.hist_buf[rows, pos] = incoming
        self.hist_cells[rows, self._cells_of(incoming)] += 1
        self.hist_pos[rows] = (pos + 1) % h
        self.hist_len[rows] = np.minimum(h, self.hist_len[rows] + 1)

    def _hot_onsets(self, rows: np.ndarray, historic_mean: np.ndarray):
        cfg = self.cfg
        r = cfg.recent_win_size
        spread = self.hist_buf[rows].std(axis=1)
        threshold = historic_mean[rows] + np.maximum(cfg.margin_db, cfg.hot_sigma * spread)
        # recent_pos now points at the oldest sample
        order = (self.recent_pos + np.arange(r)) % r
        hot_cells = self.recent_buf[rows][:, order] > threshold[:, np.newaxis]
        newest_first = hot_cells[:, ::-1]
        run = np.where(newest_first.all(axis=1), r, newest_first.argmin(axis=1))
        hot = run > 0
        ts = self.recent_ts[order]
        onset = np.where(hot, ts[np.clip(r - run, 0, r - 1)], NO_ONSET)
        return hot, onset

    def step(self, values: np.ndarray, t: int) -> VerdictColumns:
        """
        Consume one tick for every bin of the bank
        :param values: shape (len(self),), bins bin_start..bin_stop-1
        :param t: tick timestamp
        """
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(self),):
            raise ValueError("expected {0} values, got shape {1}".format(len(self), values.shape))
        cfg = self.cfg
        self.ticks += 1
        evicted = self._push_recent(values, t)
        if evicted is not None:
            self._push_historic(evicted)

        if self.ticks < cfg.warmup_samples:
            return VerdictColumns.warming_up(t, self.bin_start, values)

        stat, dof = chi_square_cells(self.recent_cells, self.hist_cells, cfg.num_hist_bins - 1)
        p_value = gammaincc(dof / 2.0, stat / 2.0)
        recent_mean = self.recent_buf.mean(axis=1)
        historic_mean = self.hist_buf.mean(axis=1)
        rising = recent_mean > historic_mean + cfg.margin_db
        falling = recent_mean < historic_mean - cfg.margin_db
        direction = np.where(rising, RISING, np.where(falling, FALLING, FLAT)).astype(np.int8)
        active = (p_value < cfg.alpha) & rising

        hot = np.zeros(len(self), dtype=bool)
        onset = np.full(len(self), NO_ONSET, dtype=np.int64)
        rows = np.flatnonzero(active)
        if rows.size:
            hot[rows], onset[rows] = self._hot_onsets(rows, historic_mean)

        self.frozen = active.copy()
        return VerdictColumns(timestamp=t, bin_start=self.bin_start, warmup=False, active=active,
                              p_value=p_value, chi_square_stat=stat, recent_mean=recent_mean,
                              historic_mean=historic_mean, direction=direction, values=values,
                              hot=hot, onset=onset)
