"""
Matching of detected events to truth labels and the two confusion tables built on it
"""
from dataclasses import dataclass, field
from src.core.errors import EmptyTruth
from typing import Dict, List, Sequence, Tuple


@dataclass
class Matching:
    detected: Sequence
    truth: Sequence
    # (detected index, truth index)
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_detected: List[int] = field(default_factory=list)
    unmatched_truth: List[int] = field(default_factory=list)


def _overlap(lo_a: int, hi_a: int, lo_b: int, hi_b: int) -> Tuple[int, int]:
    return max(lo_a, lo_b), min(hi_a, hi_b)


def match_events(detected: Sequence, truth: Sequence, tol_time_ms: int, tol_freq_bins: int,
                 tick_interval_ms: int = 1) -> Matching:
    """
    Greedy one-to-one matching by time-frequency intersection area with the dilated truth box
    Candidates overlap the dilated truth by at least one tick and one bin
    Ties go to the earlier truth tStart, then to the lower indices
    """
    if tol_time_ms < 0 or tol_freq_bins < 0:
        raise ValueError("tolerances must be >= 0, got {0} ms and {1} bins".format(tol_time_ms, tol_freq_bins))
    candidates = []
    for ti, label in enumerate(truth):
        t_lo, t_hi = label.t_start - tol_time_ms, label.t_stop + tol_time_ms
        f_lo, f_hi = label.f_start_bin - tol_freq_bins, label.f_stop_bin + tol_freq_bins
        for di, event in enumerate(detected):
            ot_lo, ot_hi = _overlap(t_lo, t_hi, event.t_start, event.t_stop)
            of_lo, of_hi = _overlap(f_lo, f_hi, event.f_start_bin, event.f_stop_bin)
            if ot_lo > ot_hi or of_lo > of_hi:
                continue
            area = ((ot_hi - ot_lo) // tick_interval_ms + 1) * (of_hi - of_lo + 1)
            candidates.append((-area, label.t_start, ti, di))
    candidates.sort()

    matching = Matching(detected=detected, truth=truth)
    used_d, used_t = set(), set()
    for _, _, ti, di in candidates:
        if ti in used_t or di in used_d:
            continue
        used_t.add(ti)
        used_d.add(di)
        matching.pairs.append((di, ti))
    matching.pairs.sort(key=lambda p: p[1])
    matching.unmatched_truth = [i for i in range(len(truth)) if i not in used_t]
    matching.unmatched_detected = [i for i in range(len(detected)) if i not in used_d]
    return matching


@dataclass(frozen=True)
class ConfusionMatrix:
    correctly_detected: int
    undetected: int
    falsely_detected: int

    @property
    def truth_count(self) -> int:
        return self.correctly_detected + self.undetected

    @property
    def detected_count(self) -> int:
        return self.correctly_detected + self.falsely_detected

    def _rate(self, count: int) -> float:
        if self.truth_count == 0:
            raise EmptyTruth("rates need at least one truth label")
        return count / self.truth_count

    @property
    def correct_rate(self) -> float:
        return self._rate(self.correctly_detected)

    @property
    def missed_rate(self) -> float:
        return self._rate(self.undetected)

    @property
    def false_rate(self) -> float:
        # Relative to the truth count, so it may exceed 1
        return self._rate(self.falsely_detected)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.correctly_detected + other.correctly_detected,
                               self.undetected + other.undetected,
                               self.falsely_detected + other.falsely_detected)

    def to_record(self) -> Dict:
        record = {"correctlyDetected": self.correctly_detected, "undetected": self.undetected,
                  "falselyDetected": self.falsely_detected, "truthCount": self.truth_count}
        if self.truth_count > 0:
            record.update(correctRate=self.correct_rate, missedRate=self.missed_rate, falseRate=self.false_rate)
        else:
            record.update(correctRate=None, missedRate=None, falseRate=None)
        return record


def confusion(matching: Matching) -> ConfusionMatrix:
    return ConfusionMatrix(correctly_detected=len(matching.pairs), undetected=len(matching.unmatched_truth),
                           falsely_detected=len(matching.unmatched_detected))


@dataclass(frozen=True)
class StartStopMatrix:
    """
    Rows are the automatic boundary label, columns the truth boundary it was attributed to
    """
    start_start: int = 0
    start_stop: int = 0
    stop_start: int = 0
    stop_stop: int = 0
    # Boundaries of detections with no truth counterpart
    false_start: int = 0
    false_stop: int = 0

    @property
    def diagonal(self) -> int:
        return self.start_start + self.stop_stop

    @property
    def total(self) -> int:
        return self.start_start + self.start_stop + self.stop_start + self.stop_stop

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            raise EmptyTruth("no matched boundaries")
        return self.diagonal / self.total

    def __add__(self, other: "StartStopMatrix") -> "StartStopMatrix":
        return StartStopMatrix(self.start_start + other.start_start, self.start_stop + other.start_stop,
                               self.stop_start + other.stop_start, self.stop_stop + other.stop_stop,
                               self.false_start + other.false_start, self.false_stop + other.false_stop)

    def to_record(self) -> Dict[str, int]:
        return {"startStart": self.start_start, "startStop": self.start_stop, "stopStart": self.stop_start,
                "stopStop": self.stop_stop, "falseStart": self.false_start, "falseStop": self.false_stop}


def _false_boundary(event, truth: Sequence) -> str:
    """
    Boundary kind charged for a detection without truth counterpart: the one lying farther from the nearest
    truth boundary of its kind, among labels sharing a bin with the detection when there are any
    """
    near = [label for label in truth
            if label.f_start_bin <= event.f_stop_bin and event.f_start_bin <= label.f_stop_bin] or list(truth)
    if not near:
        return "false_start"
    to_start = min(abs(event.t_start - label.t_start) for label in near)
    to_stop = min(abs(event.t_stop - label.t_stop) for label in near)
    return "false_start" if to_start >= to_stop else "false_stop"


def start_stop_confusion(matching: Matching, boundary_tol_ms: int) -> StartStopMatrix:
    """
    A detected boundary keeps its own kind when it lies within boundary_tol_ms of the truth boundary of that
    kind or at least as close to it as to the other one, otherwise it is attributed to the other kind
    Every unmatched detection counts once, as a false TxStart or a false TxStop
    """
    counts = {"start_start": 0, "start_stop": 0, "stop_start": 0, "stop_stop": 0, "false_start": 0, "false_stop": 0}
    for di, ti in matching.pairs:
        event, label = matching.detected[di], matching.truth[ti]
        to_start, to_stop = abs(event.t_start - label.t_start), abs(event.t_start - label.t_stop)
        if to_start <= boundary_tol_ms or to_start <= to_stop:
            counts["start_start"] += 1
        else:
            counts["start_stop"] += 1
        to_start, to_stop = abs(event.t_stop - label.t_start), abs(event.t_stop - label.t_stop)
        if to_stop <= boundary_tol_ms or to_stop <= to_start:
            counts["stop_stop"] += 1
        else:
            counts["stop_start"] += 1
    for di in matching.unmatched_detected:
        counts[_false_boundary(matching.detected[di], matching.truth)] += 1
    return StartStopMatrix(**counts)
