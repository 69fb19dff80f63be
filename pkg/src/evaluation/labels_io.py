"""
Newline-delimited JSON files of truth labels and detections
"""
import json
from src.core.datatypes import BandPlan, SpectrumEvent
from src.core.errors import MalformedRecord
from src.evaluation.synthetic import GroundTruthLabel
from typing import Dict, IO, Iterator, List


def _records(stream: IO[str]) -> Iterator[Dict]:
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord("not valid JSON: {0}".format(e), line_no) from None
        if not isinstance(record, dict):
            raise MalformedRecord("expected a JSON object", line_no)
        yield line_no, record


def read_truth(stream: IO[str]) -> List[GroundTruthLabel]:
    labels = []
    for line_no, record in _records(stream):
        try:
            labels.append(GroundTruthLabel.from_record(record))
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedRecord("bad truth label: {0}".format(e), line_no) from None
    return labels


def read_detections(stream: IO[str]) -> List[GroundTruthLabel]:
    """
    Detected time-frequency boxes from a notification stream or a dump of stored events
    Of a notification stream only the TxStop lines count, they carry the final boundaries
    """
    boxes = []
    for line_no, record in _records(stream):
        kind = record.get("kind")
        if record.get("type") == "summary" or kind == "TxStart":
            continue
        try:
            boxes.append(GroundTruthLabel.from_record(record))
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedRecord("bad detection record: {0}".format(e), line_no) from None
    return boxes


def read_events(stream: IO[str], plan: BandPlan) -> List[SpectrumEvent]:
    """
    Closed events from a dump of stored events or from the TxStop lines of a notification stream
    Notifications carry no cell count, reporting then weighs them by their rectangle
    """
    events = []
    for line_no, record in _records(stream):
        kind = record.get("kind")
        if record.get("type") == "summary" or kind == "TxStart":
            continue
        try:
            if kind is None:
                events.append(SpectrumEvent.from_record(record))
                continue
            location = record.get("location")
            events.append(SpectrumEvent.from_bins(int(record["id"]), int(record["tStart"]), int(record["tStop"]),
                                                  int(record["fStartBin"]), int(record["fStopBin"]), plan,
                                                  float(record["meanPowerDbm"]),
                                                  location=None if location is None else tuple(location)))
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedRecord("bad event record: {0}".format(e), line_no) from None
    return events
