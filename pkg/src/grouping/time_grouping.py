"""
Cross-tick grouping of frequency groups into open events and finalized spectrum events
"""
from dataclasses import dataclass
import logging
from src.config.detector_config import DetectorConfig
from src.core.datatypes import BandPlan, SpectrumEvent
from src.grouping.frequency_grouping import FrequencyGroup, mw_to_dbm
from src.grouping.notifications import EventNotification, NotificationKind, gen_notification
from typing import List, NamedTuple, Optional, Sequence, Tuple


@dataclass
class OpenEvent:
    id: int
    t_start: int
    last_seen: int
    start_bin: int
    stop_bin: int
    silent_ticks: int = 0
    power_mw: float = 0.0
    cell_count: int = 0
    # Last tick with a hot supporting cell
    last_hot: Optional[int] = None

    @classmethod
    def start(cls, event_id: int, group: FrequencyGroup, refine: bool = False) -> "OpenEvent":
        t_start = group.timestamp
        if refine and group.onset_timestamp is not None:
            t_start = min(group.onset_timestamp, group.timestamp)
        event = cls(id=event_id, t_start=t_start, last_seen=group.timestamp, start_bin=group.start_bin,
                    stop_bin=group.stop_bin)
        event._add_cells(group)
        return event

    def _add_cells(self, group: FrequencyGroup):
        self.power_mw += group.power_mw
        self.cell_count += group.cell_count
        if group.hot_count:
            self.last_hot = group.timestamp

    def absorb(self, group: FrequencyGroup):
        self.last_seen = group.timestamp
        self.start_bin = min(self.start_bin, group.start_bin)
        self.stop_bin = max(self.stop_bin, group.stop_bin)
        self.silent_ticks = 0
        self._add_cells(group)

    @property
    def mean_power_dbm(self) -> float:
        return float(mw_to_dbm(self.power_mw / self.cell_count))

    def t_stop(self, refine: bool = False) -> int:
        if refine and self.last_hot is not None:
            return max(self.last_hot, self.t_start)
        return self.last_seen

    def overlap(self, group: FrequencyGroup, freq_gap: int) -> int:
        """
        Bins shared by the group and this event's range widened by F on both sides
        """
        lo = max(self.start_bin - freq_gap, group.start_bin)
        hi = min(self.stop_bin + freq_gap, group.stop_bin)
        return max(0, hi - lo + 1)

    def finalize(self, plan: BandPlan, refine: bool = False, location: Tuple[float, float] = None) -> SpectrumEvent:
        return SpectrumEvent.from_bins(self.id, self.t_start, self.t_stop(refine), self.start_bin, self.stop_bin,
                                       plan, self.mean_power_dbm, cell_count=self.cell_count, location=location)


class TimeStep(NamedTuple):
    started: List[OpenEvent]
    continued: List[OpenEvent]
    closed: List[SpectrumEvent]
    # Events still open after this tick, ordered by id
    still_open: List[OpenEvent]
    next_id: int


def match_groups(open_events: Sequence[OpenEvent], groups: Sequence[FrequencyGroup],
                 freq_gap: int) -> List[Tuple[OpenEvent, FrequencyGroup]]:
    """
    One-to-one greedy matching, largest overlap first, then lower group start bin, then lower event start bin
    """
    candidates = []
    for event in open_events:
        for g_idx, group in enumerate(groups):
            ov = event.overlap(group, freq_gap)
            if ov > 0:
                candidates.append((-ov, group.start_bin, event.start_bin, event.id, g_idx, event))
    candidates.sort(key=lambda c: c[:5])
    taken_events, taken_groups = set(), set()
    pairs = []
    for _, _, _, event_id, g_idx, event in candidates:
        if event_id in taken_events or g_idx in taken_groups:
            continue
        taken_events.add(event_id)
        taken_groups.add(g_idx)
        pairs.append((event, groups[g_idx]))
    return pairs


def group_time(open_events: Sequence[OpenEvent], groups: Sequence[FrequencyGroup], time_gap: int, t: int,
               freq_gap: int, plan: BandPlan, next_id: int = 0, refine: bool = False,
               location: Tuple[float, float] = None) -> TimeStep:
    """
    Advance the open events by one tick
    :param open_events: events open before tick t
    :param groups: frequency groups of tick t, ordered by start bin
    :param time_gap: T, an event closes after more than T ticks without a supporting group
    :param next_id: id handed to the first event started at this tick
    """
    pairs = match_groups(open_events, groups, freq_gap)
    matched_groups = set()
    continued = []
    for event, group in pairs:
        event.absorb(group)
        continued.append(event)
        matched_groups.add(id(group))

    started = []
    for group in groups:
        if id(group) not in matched_groups:
            started.append(OpenEvent.start(next_id, group, refine))
            next_id += 1

    continued_ids = {event.id for event in continued}
    closed, still_open = [], []
    for event in open_events:
        if event.id in continued_ids:
            still_open.append(event)
            continue
        event.silent_ticks += 1
        if event.silent_ticks > time_gap:
            closed.append(event.finalize(plan, refine, location))
        else:
            still_open.append(event)
    still_open.extend(started)
    still_open.sort(key=lambda e: e.id)
    closed.sort(key=lambda e: e.id)
    continued.sort(key=lambda e: e.id)
    return TimeStep(started=started, continued=continued, closed=closed, still_open=still_open, next_id=next_id)


class TimeGrouper:
    """
    Holds the open events of a stream and turns each tick's frequency groups into notifications
    """
    def __init__(self, plan: BandPlan, cfg: DetectorConfig, location: Tuple[float, float] = None):
        self.plan = plan
        self.cfg = cfg
        self.location = location
        self.open_events = []  # type: List[OpenEvent]
        self.next_id = 0
        self.ticks = 0
        self.last_timestamp = None

    def _notify(self, started: Sequence[OpenEvent], closed: Sequence[SpectrumEvent]) -> List[EventNotification]:
        # Stops go out before the starts of the same tick
        out = [gen_notification(event, NotificationKind.TX_STOP, self.plan, self.location) for event in closed]
        for event in sorted(started, key=lambda e: (e.start_bin, e.id)):
            out.append(gen_notification(event, NotificationKind.TX_START, self.plan, self.location))
        return out

    def step(self, groups: Sequence[FrequencyGroup], t: int) -> Tuple[List[EventNotification], List[SpectrumEvent]]:
        """
        :return: (notifications of this tick, events closed at this tick)
        """
        if self.last_timestamp is not None and t <= self.last_timestamp:
            raise ValueError("tick {0} does not advance past {1}".format(t, self.last_timestamp))
        self.last_timestamp = t
        self.ticks += 1
        step = group_time(self.open_events, groups, self.cfg.time_gap_t, t, self.cfg.freq_gap_f, self.plan,
                          next_id=self.next_id, refine=self.cfg.refine_boundaries, location=self.location)
        self.open_events = step.still_open
        self.next_id = step.next_id
        for event in step.started:
            logging.debug("event {0} started at {1} on bins [{2}, {3}]".format(event.id, event.t_start,
                                                                                event.start_bin, event.stop_bin))
        return self._notify(step.started, step.closed), step.closed

    def flush(self) -> Tuple[List[EventNotification], List[SpectrumEvent]]:
        """
        Close every open event, tStop taken from its last supporting tick
        """
        closed = [event.finalize(self.plan, self.cfg.refine_boundaries, self.location)
                  for event in sorted(self.open_events, key=lambda e: e.id)]
        self.open_events = []
        if closed:
            logging.debug("flushed {0} open events".format(len(closed)))
        return self._notify((), closed), closed
