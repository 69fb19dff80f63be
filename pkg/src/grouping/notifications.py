"""
Tx start / Tx stop notifications, one JSON object per line on the wire
"""
from dataclasses import dataclass
from enum import Enum
import json
from src.core.datatypes import BandPlan, SpectrumEvent
from typing import Any, Dict, Optional, Tuple

# Keys every notification carries, tStop and location only when known
NOTIFICATION_KEYS = ('id', 'kind', 'description', 'type', 'time', 'tStart', 'channelHz', 'lchannelHz', 'rchannelHz',
                     'fStartBin', 'fStopBin', 'meanPowerDbm')


class NotificationKind(str, Enum):
    TX_START = "TxStart"
    TX_STOP = "TxStop"


_DESCRIPTIONS = {
    NotificationKind.TX_START: "Tx start",
    NotificationKind.TX_STOP: "Tx stop",
}


@dataclass(frozen=True)
class EventNotification:
    kind: NotificationKind
    event_id: int
    time: int
    t_start: int
    t_stop: Optional[int]
    channel_hz: float
    lchannel_hz: float
    rchannel_hz: float
    f_start_bin: int
    f_stop_bin: int
    mean_power_dbm: float
    description: str
    type: str = "info"
    location: Optional[Tuple[float, float]] = None

    def to_record(self) -> Dict[str, Any]:
        record = {
            "id": self.event_id,
            "kind": self.kind.value,
            "description": self.description,
            "type": self.type,
            "time": self.time,
            "tStart": self.t_start,
        }
        if self.t_stop is not None:
            record["tStop"] = self.t_stop
        record.update({
            "channelHz": self.channel_hz,
            "lchannelHz": self.lchannel_hz,
            "rchannelHz": self.rchannel_hz,
            "fStartBin": self.f_start_bin,
            "fStopBin": self.f_stop_bin,
            "meanPowerDbm": round(self.mean_power_dbm, 6),
        })
        if self.location is not None:
            record["location"] = [self.location[0], self.location[1]]
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_record(), separators=(',', ':'))


def channel_frequencies(start_fq: int, stop_fq: int, plan: BandPlan) -> Tuple[float, float, float]:
    """
    (channel, lchannel, rchannel) of the bin range [start_fq, stop_fq), stop exclusive
    """
    channel = plan.frequency_of((start_fq + stop_fq - 1) // 2)
    return channel, plan.frequency_of(start_fq), plan.frequency_of(stop_fq - 1)


def gen_notification(event, kind: NotificationKind, plan: BandPlan,
                     location: Tuple[float, float] = None) -> EventNotification:
    """
    :param event: an open event (TxStart) or a finalized SpectrumEvent
    :param kind: TxStart reports the event start, TxStop its stop
    """
    if isinstance(event, SpectrumEvent):
        start_bin, stop_bin, t_stop = event.f_start_bin, event.f_stop_bin, event.t_stop
        power = event.mean_power_dbm
        location = event.location if event.location is not None else location
    else:
        start_bin, stop_bin, t_stop = event.start_bin, event.stop_bin, event.t_stop()
        power = event.mean_power_dbm
    if kind is NotificationKind.TX_START:
        t_stop = None
    # Inclusive bin ranges become exclusive at this boundary
    channel, lchannel, rchannel = channel_frequencies(start_bin, stop_bin + 1, plan)
    return EventNotification(kind=kind, event_id=event.id, time=event.t_start if t_stop is None else t_stop,
                             t_start=event.t_start, t_stop=t_stop, channel_hz=channel, lchannel_hz=lchannel,
                             rchannel_hz=rchannel, f_start_bin=start_bin, f_stop_bin=stop_bin,
                             mean_power_dbm=power, description=_DESCRIPTIONS[kind], location=location)


def summary_record(ticks: int, events: int, open_at_end: int = 0) -> Dict[str, Any]:
    """
    Closing line of a detect/replay run
    """
    return {"type": "summary", "ticks": ticks, "events": events, "flushed": open_at_end}
