import numpy as np
from src.config.detector_config import DetectorConfig
from src.core.datatypes import BinActivity, Direction, Warmup
from src.detection.chi_square import chi_square_pvalue, chi_square_statistic
from src.detection.histogram import OnlineHistogram
from src.detection.windows import DelayedWindow, SlidingWindow, moving_average
from typing import List, Optional, Tuple, Union


def classify_direction(recent_mean: float, historic_mean: float, margin_db: float) -> Direction:
    if recent_mean > historic_mean + margin_db:
        return Direction.RISING
    if recent_mean < historic_mean - margin_db:
        return Direction.FALLING
    return Direction.FLAT


def hot_threshold(historic_mean: float, historic_std: float, cfg: DetectorConfig) -> float:
    return historic_mean + max(cfg.margin_db, cfg.hot_sigma * historic_std)


def trailing_hot_run(recent: List[Tuple[int, float]], threshold: float) -> Optional[int]:
    """
    Timestamp of the oldest sample of the run of above-threshold samples ending at the newest one
    :return: None when the newest sample is not above the threshold
    """
    onset = None
    for t, value in reversed(recent):
        if value > threshold:
            onset = t
        else:
            break
    return onset


class BinPipeline:
    """
    Detection pipeline of a single frequency bin: recent window chained into a delayed historic window,
    one online histogram and one moving average on each, chi-square comparison and the direction gate
    """
    def __init__(self, bin_index: int, cfg: DetectorConfig):
        self.bin_index = bin_index
        self.cfg = cfg

        self.recent = SlidingWindow(cfg.recent_win_size)
        self.historic = DelayedWindow(delay=cfg.recent_win_size, capacity=cfg.historic_win_size)

        hist_args = (cfg.hist_lower_bound, cfg.hist_upper_bound, cfg.num_hist_bins, cfg.add_overflow_bins)
        self.recent_hist = OnlineHistogram(*hist_args)
        self.historic_hist = OnlineHistogram(*hist_args)

        # Ticks consumed so far
        self.ticks = 0
        # Historic side stops learning while the bin is active
        self.frozen = False

    def detect(self, value: float, t: int) -> Union[BinActivity, Warmup]:
        self.ticks += 1
        evicted = self.recent.push(value, t)
        self.recent_hist.update(added=(value,), removed=[v for _, v in evicted])
        if not self.frozen:
            aged = self.historic.push_evicted(evicted, self.recent)
            self.historic_hist.update(added=[v for _, v in evicted], removed=[v for _, v in aged])

        if self.ticks < self.cfg.warmup_samples:
            return Warmup(bin_index=self.bin_index, timestamp=t)

        stat, dof = chi_square_statistic(self.recent_hist, self.historic_hist)
        p_value = chi_square_pvalue(stat, dof)
        recent_mean = moving_average(self.recent)
        historic_mean = moving_average(self.historic)
        direction = classify_direction(recent_mean, historic_mean, self.cfg.margin_db)
        active = p_value < self.cfg.alpha and direction is Direction.RISING

        hot, onset = False, None
        if active:
            threshold = hot_threshold(historic_mean, float(np.std(self.historic.values())), self.cfg)
            onset = trailing_hot_run(list(self.recent), threshold)
            hot = onset is not None

        self.frozen = active
        return BinActivity(bin_index=self.bin_index, timestamp=t, active=active, p_value=p_value,
                           chi_square_stat=stat, recent_mean=recent_mean, historic_mean=historic_mean,
                           direction=direction, value=value, hot=hot, onset_timestamp=onset)


def detect(bin_state: BinPipeline, value: float, t: int, cfg: DetectorConfig = None) -> Union[BinActivity, Warmup]:
    if cfg is not None and cfg is not bin_state.cfg:
        raise ValueError("pipeline for bin {0} was built with another config".format(bin_state.bin_index))
    return bin_state.detect(value, t)
