"""
Random labelling slices of a long stream and the clipping of labels and detections to them
"""
import numpy as np
from src.evaluation.synthetic import GroundTruthLabel
from typing import List, Optional, Sequence, Tuple

Slice = Tuple[int, int]


def extract_slices(stream_length_ms: int, d: int, st: int, seed: int, budget_ms: Optional[int] = None,
                   stream_start_ms: int = 0) -> List[Slice]:
    """
    Non-overlapping [start, start + d) intervals whose starts are on average st apart
    The silent gap between consecutive slices is exponential with mean st - d
    :param stream_length_ms: slices never reach past stream_start_ms + stream_length_ms
    :param budget_ms: stop once the slices total this much
    :return: half-open intervals in stream time, sorted
    """
    if d <= 0:
        raise ValueError("slice duration must be > 0, got {0}".format(d))
    if st <= d:
        raise ValueError("mean slice spacing {0} must exceed the slice duration {1}".format(st, d))
    rng = np.random.default_rng(seed)
    end = stream_start_ms + stream_length_ms
    slices = []
    total = 0
    t = stream_start_ms + int(round(rng.exponential(st - d)))
    while t + d <= end:
        if budget_ms is not None and total + d > budget_ms:
            break
        slices.append((t, t + d))
        total += d
        t += d + int(round(rng.exponential(st - d)))
    return slices


def clip_to_slice(items: Sequence, window: Slice, tick_interval_ms: int) -> list:
    """
    Items overlapping the half-open window, with their time span cut to the ticks inside it
    Works on anything with t_start, t_stop, f_start_bin and f_stop_bin
    """
    lo, hi = window
    last_tick = hi - tick_interval_ms
    clipped = []
    for item in items:
        if item.t_stop < lo or item.t_start >= hi:
            continue
        t_start = max(item.t_start, lo)
        t_stop = min(item.t_stop, max(last_tick, t_start))
        clipped.append(GroundTruthLabel(t_start, t_stop, item.f_start_bin, item.f_stop_bin))
    return clipped


def in_slices(items: Sequence, slices: Sequence[Slice], tick_interval_ms: int) -> List[List]:
    """
    Per slice, the clipped items overlapping it
    """
    return [clip_to_slice(items, window, tick_interval_ms) for window in slices]
