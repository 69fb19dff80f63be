"""
Statistical report over the events of a period: global metrics, then per bin and per channel breakdowns
Power is averaged in the linear (mW) domain and converted back to dBm
"""
import bisect
from dataclasses import dataclass
import json
import math
import numpy as np
from src.core.datatypes import BandPlan, SpectrumEvent
from src.core.errors import InvariantViolation, OutOfPeriod
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union


class ExactSum:
    """
    Float sum kept as non-overlapping partials, the total does not depend on the order of the terms
    """
    __slots__ = ("partials",)

    def __init__(self):
        self.partials = []

    def add(self, x: float) -> "ExactSum":
        i = 0
        for y in self.partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                self.partials[i] = lo
                i += 1
            x = hi
        self.partials[i:] = [x]
        return self

    def merge(self, other: "ExactSum") -> "ExactSum":
        for x in other.partials:
            self.add(x)
        return self

    def copy(self) -> "ExactSum":
        out = ExactSum()
        out.partials = list(self.partials)
        return out

    @property
    def value(self) -> float:
        return math.fsum(self.partials)


class TickUnion:
    """
    Union of inclusive tick ranges kept as sorted, disjoint, non-adjacent runs
    """
    __slots__ = ("starts", "stops", "covered")

    def __init__(self):
        self.starts = []  # type: List[int]
        self.stops = []  # type: List[int]
        # Ticks inside the union
        self.covered = 0

    def add(self, lo: int, hi: int) -> "TickUnion":
        i = bisect.bisect_left(self.stops, lo - 1)
        j = bisect.bisect_right(self.starts, hi + 1)
        if i < j:
            lo, hi = min(lo, self.starts[i]), max(hi, self.stops[j - 1])
            self.covered -= sum(b - a + 1 for a, b in zip(self.starts[i:j], self.stops[i:j]))
        self.starts[i:j] = [lo]
        self.stops[i:j] = [hi]
        self.covered += hi - lo + 1
        return self

    def copy(self) -> "TickUnion":
        out = TickUnion()
        out.starts, out.stops, out.covered = list(self.starts), list(self.stops), self.covered
        return out

    def merge(self, other: "TickUnion") -> "TickUnion":
        for lo, hi in zip(other.starts, other.stops):
            self.add(lo, hi)
        return self


@dataclass(frozen=True)
class Channel:
    name: str
    start_bin: int
    stop_bin: int

    @property
    def width(self) -> int:
        return self.stop_bin - self.start_bin + 1


class ChannelTable:
    """
    User declared channels as inclusive bin ranges, each bin is its own channel when none are declared
    """
    def __init__(self, channels: Sequence[Channel]):
        self.channels = sorted(channels, key=lambda c: (c.start_bin, c.stop_bin, c.name))

    @classmethod
    def per_bin(cls, plan: BandPlan) -> "ChannelTable":
        return cls([Channel(name=str(b), start_bin=b, stop_bin=b) for b in range(plan.bin_count)])

    @classmethod
    def from_document(cls, document: Union[str, List[Dict[str, Any]]], plan: BandPlan) -> "ChannelTable":
        """
        :param document: JSON list of {"name", "startBin", "stopBin"}
        """
        if isinstance(document, (str, bytes)):
            document = json.loads(document)
        if not isinstance(document, list):
            raise InvariantViolation('channels', 'channel table must be a JSON list')
        channels = []
        for entry in document:
            try:
                channel = Channel(name=str(entry['name']), start_bin=int(entry['startBin']),
                                  stop_bin=int(entry['stopBin']))
            except (KeyError, TypeError, ValueError):
                raise InvariantViolation('channels', 'bad channel entry {0!r}'.format(entry)) from None
            if not plan.contains_range(channel.start_bin, channel.stop_bin):
                raise InvariantViolation('channels', 'channel {0} [{1}, {2}] outside the band plan'.format(
                    channel.name, channel.start_bin, channel.stop_bin))
            channels.append(channel)
        return cls(channels)

    def __len__(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class BandStats:
    name: str
    start_bin: int
    stop_bin: int
    frequency_hz: float
    tx_count: int
    occupancy_fraction: float
    avg_power_dbm: Optional[float]


@dataclass(frozen=True)
class SpectrumReport:
    period_start: int
    period_end: int
    total_transmissions: int
    avg_duration_ms: Optional[float]
    avg_power_dbm: Optional[float]
    occupancy_fraction: float
    per_bin: List[BandStats]
    per_channel: List[BandStats]


def _mean_dbm(power: ExactSum, weight: int) -> Optional[float]:
    if weight == 0:
        return None
    return 10.0 * math.log10(power.value / weight)


def _fraction(cells: int, span: int) -> float:
    if span == 0:
        return 0.0
    # A period not aligned to the tick grid can hold one partial tick more than it counts
    return min(1.0, cells / span)


class ReportState:
    """
    Streaming accumulator of a report over the period [period_start, period_end)
    """
    def __init__(self, plan: BandPlan, period_start: int, period_end: int, tick_interval_ms: int,
                 channels: ChannelTable = None):
        if period_end <= period_start:
            raise ValueError("empty report period [{0}, {1})".format(period_start, period_end))
        self.plan = plan
        self.period_start = int(period_start)
        self.period_end = int(period_end)
        self.tick_interval_ms = tick_interval_ms
        self.channels = channels if channels is not None else ChannelTable.per_bin(plan)

        self.count = 0
        self.duration_sum = 0
        # Linear power weighted by cells, and the cell weights
        self.power = ExactSum()
        self.power_weight = 0
        # Ticks covered by at least one event, per bin
        self.bin_cover = [TickUnion() for _ in range(plan.bin_count)]

        n = plan.bin_count
        self.bin_tx = np.zeros(n, dtype=np.int64)
        # Power weights, every event counts all of its cells
        self.bin_cells = np.zeros(n, dtype=np.int64)
        self.bin_power = [ExactSum() for _ in range(n)]

        c = len(self.channels)
        self.channel_tx = np.zeros(c, dtype=np.int64)
        self.channel_cells = np.zeros(c, dtype=np.int64)
        self.channel_power = [ExactSum() for _ in range(c)]

    @property
    def period_ticks(self) -> int:
        return (self.period_end - self.period_start) // self.tick_interval_ms

    def event_ticks(self, event: SpectrumEvent) -> int:
        return (event.t_stop - event.t_start) // self.tick_interval_ms + 1

    def accumulate(self, event: SpectrumEvent) -> "ReportState":
        if event.t_start < self.period_start or event.t_stop >= self.period_end:
            raise OutOfPeriod("event {0} [{1}, {2}] outside period [{3}, {4})".format(
                event.id, event.t_start, event.t_stop, self.period_start, self.period_end))
        if not self.plan.contains_range(event.f_start_bin, event.f_stop_bin):
            raise OutOfPeriod("event {0} bins [{1}, {2}] outside the band plan".format(
                event.id, event.f_start_bin, event.f_stop_bin))
        ticks = self.event_ticks(event)
        rect_cells = ticks * event.bin_span
        mw = 10.0 ** (event.mean_power_dbm / 10.0)

        self.count += 1
        self.duration_sum += event.duration_ms
        weight = event.cell_count if event.cell_count > 0 else rect_cells
        self.power.add(mw * weight)
        self.power_weight += weight

        first_tick = event.t_start // self.tick_interval_ms
        for b in range(event.f_start_bin, event.f_stop_bin + 1):
            self.bin_cover[b].add(first_tick, first_tick + ticks - 1)
            self.bin_tx[b] += 1
            self.bin_cells[b] += ticks
            self.bin_power[b].add(mw * ticks)
        for k, channel in enumerate(self.channels.channels):
            lo = max(channel.start_bin, event.f_start_bin)
            hi = min(channel.stop_bin, event.f_stop_bin)
            if hi < lo:
                continue
            cells = ticks * (hi - lo + 1)
            self.channel_tx[k] += 1
            self.channel_cells[k] += cells
            self.channel_power[k].add(mw * cells)
        return self

    def merge(self, other: "ReportState") -> "ReportState":
        """
        State over the union of two adjacent, disjoint periods
        """
        if other.plan != self.plan or other.tick_interval_ms != self.tick_interval_ms:
            raise ValueError("reports over different band plans or tick intervals")
        if other.channels.channels != self.channels.channels:
            raise ValueError("reports over different channel tables")
        if not (self.period_end == other.period_start or other.period_end == self.period_start):
            raise ValueError("periods [{0}, {1}) and [{2}, {3}) are not adjacent".format(
                self.period_start, self.period_end, other.period_start, other.period_end))
        out = ReportState(self.plan, min(self.period_start, other.period_start),
                          max(self.period_end, other.period_end), self.tick_interval_ms, self.channels)
        out.count = self.count + other.count
        out.duration_sum = self.duration_sum + other.duration_sum
        out.power = self.power.copy().merge(other.power)
        out.power_weight = self.power_weight + other.power_weight
        out.bin_cover = [a.copy().merge(b) for a, b in zip(self.bin_cover, other.bin_cover)]
        out.bin_tx = self.bin_tx + other.bin_tx
        out.bin_cells = self.bin_cells + other.bin_cells
        out.bin_power = [a.copy().merge(b) for a, b in zip(self.bin_power, other.bin_power)]
        out.channel_tx = self.channel_tx + other.channel_tx
        out.channel_cells = self.channel_cells + other.channel_cells
        out.channel_power = [a.copy().merge(b) for a, b in zip(self.channel_power, other.channel_power)]
        return out

    def snapshot(self) -> SpectrumReport:
        ticks = self.period_ticks
        n = self.plan.bin_count
        total_cells = ticks * n
        covered = [union.covered for union in self.bin_cover]

        per_bin = []
        for b in range(n):
            per_bin.append(BandStats(name=str(b), start_bin=b, stop_bin=b, frequency_hz=self.plan.frequency_of(b),
                                     tx_count=int(self.bin_tx[b]),
                                     occupancy_fraction=_fraction(covered[b], ticks),
                                     avg_power_dbm=_mean_dbm(self.bin_power[b], int(self.bin_cells[b]))))
        per_channel = []
        for k, channel in enumerate(self.channels.channels):
            span = ticks * channel.width
            cells = int(self.channel_cells[k])
            centre = 0.5 * (self.plan.lower_edge_of(channel.start_bin) +
                            self.plan.lower_edge_of(channel.stop_bin + 1))
            per_channel.append(BandStats(name=channel.name, start_bin=channel.start_bin, stop_bin=channel.stop_bin,
                                         frequency_hz=centre, tx_count=int(self.channel_tx[k]),
                                         occupancy_fraction=_fraction(
                                             sum(covered[channel.start_bin:channel.stop_bin + 1]), span),
                                         avg_power_dbm=_mean_dbm(self.channel_power[k], cells)))
        per_channel.sort(key=lambda s: (s.frequency_hz, s.start_bin, s.name))

        return SpectrumReport(period_start=self.period_start, period_end=self.period_end,
                              total_transmissions=self.count,
                              avg_duration_ms=self.duration_sum / self.count if self.count else None,
                              avg_power_dbm=_mean_dbm(self.power, self.power_weight),
                              occupancy_fraction=_fraction(sum(covered), total_cells),
                              per_bin=per_bin, per_channel=per_channel)


def accumulate(state: ReportState, event: SpectrumEvent, plan: BandPlan = None) -> ReportState:
    if plan is not None and plan != state.plan:
        raise ValueError("event band plan differs from the report band plan")
    return state.accumulate(event)


def merge(a: ReportState, b: ReportState) -> ReportState:
    return a.merge(b)


def build_report(events: Iterable[SpectrumEvent], plan: BandPlan, period_start: int, period_end: int,
                 tick_interval_ms: int, channels: ChannelTable = None) -> ReportState:
    state = ReportState(plan, period_start, period_end, tick_interval_ms, channels)
    for event in events:
        state.accumulate(event)
    return state


def _band_record(stats: BandStats, with_name: bool) -> Dict[str, Any]:
    record = {}
    if with_name:
        record["name"] = stats.name
    record.update({
        "startBin": stats.start_bin,
        "stopBin": stats.stop_bin,
        "frequencyHz": stats.frequency_hz,
        "txCount": stats.tx_count,
        "occupancyFraction": stats.occupancy_fraction,
        "avgPowerDbm": stats.avg_power_dbm,
    })
    return record


def report_document(report: SpectrumReport) -> Dict[str, Any]:
    return {
        "periodStart": report.period_start,
        "periodEnd": report.period_end,
        "totalTransmissions": report.total_transmissions,
        "avgDurationMs": report.avg_duration_ms,
        "avgPowerDbm": report.avg_power_dbm,
        "occupancyFraction": report.occupancy_fraction,
        "perBin": [_band_record(s, False) for s in report.per_bin],
        "perChannel": [_band_record(s, True) for s in report.per_channel],
    }


def _value(v) -> str:
    # Same spelling as the JSON rendering
    return json.dumps(v)


def _render_text(report: SpectrumReport) -> str:
    lines = [
        "period: {0} .. {1}".format(report.period_start, report.period_end),
        "transmissions: {0}".format(report.total_transmissions),
        "avg duration ms: {0}".format(_value(report.avg_duration_ms)),
        "avg power dbm: {0}".format(_value(report.avg_power_dbm)),
        "occupancy: {0}".format(_value(report.occupancy_fraction)),
        "",
        "per bin:",
    ]
    for s in report.per_bin:
        lines.append("  bin {0} @ {1} Hz: tx {2}, occupancy {3}, avg power {4}".format(
            s.start_bin, _value(s.frequency_hz), s.tx_count, _value(s.occupancy_fraction),
            _value(s.avg_power_dbm)))
    lines.append("")
    lines.append("per channel:")
    for s in report.per_channel:
        lines.append("  {0} [{1}..{2}] @ {3} Hz: tx {4}, occupancy {5}, avg power {6}".format(
            s.name, s.start_bin, s.stop_bin, _value(s.frequency_hz), s.tx_count, _value(s.occupancy_fraction),
            _value(s.avg_power_dbm)))
    return "\n".join(lines) + "\n"


def render(state: Union[ReportState, SpectrumReport], fmt: str = 'json') -> str:
    report = state.snapshot() if isinstance(state, ReportState) else state
    if fmt == 'json':
        return json.dumps(report_document(report), indent=2) + "\n"
    if fmt == 'text':
        return _render_text(report)
    raise ValueError("unknown report format {0!r}, expected 'json' or 'text'".format(fmt))
