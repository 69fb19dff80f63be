"""
Spectrogram images of labelling slices with truth boxes and detections drawn on top
"""
import logging
import os
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle
import numpy as np
from src.core.datatypes import BandPlan, PsdSample
from src.evaluation.slices import Slice
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple


class SliceCollector:
    """
    Passes samples through unchanged and keeps the rows that fall inside one of the slices
    """
    def __init__(self, slices: Sequence[Slice]):
        self.slices = sorted(slices)
        self.frames = {s: ([], []) for s in self.slices}  # type: Dict[Slice, Tuple[List[int], List[np.ndarray]]]
        self._next = 0

    def wrap(self, samples: Iterable[PsdSample]) -> Iterator[PsdSample]:
        for sample in samples:
            t = sample.timestamp
            while self._next < len(self.slices) and t >= self.slices[self._next][1]:
                self._next += 1
            if self._next < len(self.slices) and t >= self.slices[self._next][0]:
                timestamps, rows = self.frames[self.slices[self._next]]
                timestamps.append(t)
                rows.append(np.array(sample.values))
            yield sample

    def matrix(self, window: Slice) -> Tuple[np.ndarray, np.ndarray]:
        timestamps, rows = self.frames[window]
        if not rows:
            return np.zeros(0, dtype=np.int64), np.zeros((0, 0))
        return np.asarray(timestamps), np.vstack(rows)


def _draw_boxes(ax, boxes: Sequence, plan: BandPlan, tick_interval_ms: int, color: str, linestyle: str,
                label: str):
    for i, box in enumerate(boxes):
        f_lo = plan.lower_edge_of(box.f_start_bin) / 1e6
        f_hi = plan.lower_edge_of(box.f_stop_bin + 1) / 1e6
        t_lo = box.t_start / 1000.0
        t_hi = (box.t_stop + tick_interval_ms) / 1000.0
        ax.add_patch(Rectangle((f_lo, t_lo), f_hi - f_lo, t_hi - t_lo, fill=False, edgecolor=color,
                               linestyle=linestyle, linewidth=1.5, label=label if i == 0 else None))


def plot_slice(timestamps: np.ndarray, matrix: np.ndarray, plan: BandPlan, tick_interval_ms: int,
               truth: Sequence, detections: Sequence, path: str, title: str = None):
    """
    Frequency on the horizontal axis, time growing downwards, colour is the reading in dBm
    Truth boxes are solid black, detections dashed red
    """
    fig = plt.figure(figsize=(8, 6))
    ax = fig.subplots(1, 1)
    f_lo = plan.lower_edge_of(0) / 1e6
    f_hi = plan.lower_edge_of(plan.bin_count) / 1e6
    t_lo = timestamps[0] / 1000.0
    t_hi = (timestamps[-1] + tick_interval_ms) / 1000.0
    image = ax.imshow(matrix, aspect='auto', cmap='jet', interpolation='nearest', extent=[f_lo, f_hi, t_hi, t_lo])
    fig.colorbar(image, ax=ax, label='dBm')
    _draw_boxes(ax, truth, plan, tick_interval_ms, 'black', '-', 'truth')
    _draw_boxes(ax, detections, plan, tick_interval_ms, 'red', '--', 'detected')
    ax.set_xlabel('Frequency (MHz)')
    ax.set_ylabel('Time (s)')
    if title is not None:
        ax.set_title(title)
    if len(truth) + len(detections) > 0:
        ax.legend(loc='upper right')
    fig.savefig(path)
    fig.clear()
    plt.close(fig)


def save_slice_plots(collector: SliceCollector, truth_per_slice: Sequence[Sequence],
                     detections_per_slice: Sequence[Sequence], plan: BandPlan, tick_interval_ms: int,
                     out_dir: str) -> List[str]:
    """
    One PNG per slice that holds samples, named slice-<n>.png in slice order
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for idx, window in enumerate(collector.slices):
        timestamps, matrix = collector.matrix(window)
        if matrix.shape[0] == 0:
            continue
        path = os.path.join(out_dir, "slice-{0:04d}.png".format(idx + 1))
        plot_slice(timestamps, matrix, plan, tick_interval_ms, truth_per_slice[idx], detections_per_slice[idx],
                   path, title="{0} ms .. {1} ms".format(window[0], window[1]))
        paths.append(path)
    logging.info("Wrote {0} slice spectrograms to {1}".format(len(paths), out_dir))
    return paths
