"""
The spectrum streamer: spout -> partitioned detection workers -> tick barrier -> grouping -> sinks and stores
"""
from dataclasses import dataclass
import logging
import queue
import threading
from src.config.stream_settings import StreamSettings
from src.config.topology_config import TopologyConfig
from src.core.datatypes import PsdSample, SpectrumEvent
from src.core.validation import SampleValidator
from src.detection.pipeline_bank import PipelineBank, VerdictColumns
from src.grouping.frequency_grouping import group_frequency_columns
from src.grouping.notifications import summary_record
from src.grouping.time_grouping import TimeGrouper
from src.reporting.spectrum_report import ReportState
from src.store.event_store import SpectrumDatabase
from src.topology.barrier import TickBarrier
from src.topology.partitioning import partition
from src.topology.remote import SocketWorkers
from src.topology.workers import InprocWorkers
from typing import Iterable, List, Sequence

MODES = ('inproc', 'socket')


@dataclass
class StreamSummary:
    ticks: int = 0
    # Events closed while streaming plus the ones closed by the final flush
    events: int = 0
    flushed: int = 0
    notifications: int = 0
    stopped_early: bool = False

    def to_record(self):
        record = summary_record(self.ticks, self.events, self.flushed)
        record["notifications"] = self.notifications
        return record


class SpectrumStreamer:
    def __init__(self, settings: StreamSettings, topology: TopologyConfig = None, sinks: Sequence = (),
                 database: SpectrumDatabase = None, report: ReportState = None, keep_events: bool = True):
        """
        :param settings: band plan, tick interval, location and detector config of the stream
        :param topology: worker count and mode, defaults to one in-process worker
        :param sinks: receive every notification in emission order, then the summary line
        :param database: frequency groups go to its Transmissions store, closed events to MergedTx
        :param report: closed events inside its period are accumulated into it
        :param keep_events: keep closed events in self.events
        """
        self.settings = settings
        self.topology = topology if topology is not None else TopologyConfig()
        if self.topology.mode not in MODES:
            raise ValueError("unknown topology mode {0!r}, expected one of {1}".format(self.topology.mode, MODES))
        self.partitioning = partition(settings.plan.bin_count, self.topology.workers)
        self.sinks = list(sinks)
        self.database = database
        self.report = report
        self.keep_events = keep_events

        self.grouper = TimeGrouper(settings.plan, settings.detector, settings.location)
        self.events = []  # type: List[SpectrumEvent]
        self.summary = StreamSummary()
        self._stop = threading.Event()
        self._spout_error = None
        self._transmission_id = 0

    @property
    def stop_event(self) -> threading.Event:
        return self._stop

    def request_stop(self):
        """
        Stop reading the source, everything read so far is still processed and flushed
        """
        self._stop.set()

    def _emit(self, notifications):
        for notification in notifications:
            for sink in self.sinks:
                sink.emit(notification)
        self.summary.notifications += len(notifications)

    def _finish(self, closed: Sequence[SpectrumEvent]):
        for event in closed:
            if self.keep_events:
                self.events.append(event)
            if self.database is not None:
                self.database.merged.insert(event)
            if self.report is not None:
                if self.report.period_start <= event.t_start and event.t_stop < self.report.period_end:
                    self.report.accumulate(event)
                else:
                    logging.debug("event {0} outside the report period".format(event.id))
        self.summary.events += len(closed)

    def on_tick(self, columns: VerdictColumns):
        """
        Grouping stage, fed with the complete verdict vector of every tick in tick order
        """
        cfg = self.settings.detector
        groups = group_frequency_columns(columns, cfg.freq_gap_f)
        if self.database is not None:
            for group in groups:
                self.database.transmissions.insert(SpectrumEvent.from_bins(
                    self._transmission_id, group.timestamp, group.timestamp, group.start_bin, group.stop_bin,
                    self.settings.plan, group.mean_power_dbm, cell_count=group.cell_count,
                    location=self.settings.location))
                self._transmission_id += 1
        notifications, closed = self.grouper.step(groups, columns.timestamp)
        self._finish(closed)
        self._emit(notifications)
        self.summary.ticks += 1

    def _close(self) -> StreamSummary:
        notifications, closed = self.grouper.flush()
        self._finish(closed)
        self.summary.flushed = len(closed)
        self._emit(notifications)
        for sink in self.sinks:
            sink.summary(self.summary.to_record())
        logging.info("Stream done: {0} ticks, {1} events, {2} notifications".format(
            self.summary.ticks, self.summary.events, self.summary.notifications))
        return self.summary

    def run_direct(self, samples: Iterable[PsdSample]) -> StreamSummary:
        """
        Single-threaded run with one pipeline bank over the whole band
        """
        validator = SampleValidator(self.settings.plan)
        bank = PipelineBank(0, self.settings.plan.bin_count, self.settings.detector)
        for sample in samples:
            if self._stop.is_set():
                self.summary.stopped_early = True
                break
            validator(sample)
            self.on_tick(bank.step(sample.values, sample.timestamp))
        return self._close()

    def _make_workers(self):
        if self.topology.mode == 'socket':
            return SocketWorkers(self.partitioning, self.settings.detector, self.topology)
        return InprocWorkers(self.partitioning, self.settings.detector, self.topology)

    def _spout(self, samples: Iterable[PsdSample], workers):
        validator = SampleValidator(self.settings.plan)
        tick = 0
        try:
            for sample in samples:
                if self._stop.is_set():
                    self.summary.stopped_early = True
                    break
                validator(sample)
                workers.send(tick, sample.timestamp, sample.values)
                tick += 1
        except Exception as e:
            self._spout_error = e
        finally:
            workers.end(tick)

    def run(self, samples: Iterable[PsdSample]) -> StreamSummary:
        """
        Stream through the worker topology until the source ends
        Source and validation errors are raised after the ticks read before them were processed
        """
        inbox = queue.Queue(maxsize=self.topology.barrier_queue_size)
        workers = self._make_workers()
        workers.start(inbox)
        spout = threading.Thread(target=self._spout, args=(samples, workers), name="spout", daemon=True)
        spout.start()
        barrier = TickBarrier(self.partitioning.worker_count, self.topology.barrier_high_watermark)
        try:
            for _, columns in barrier.collect(inbox, self.topology.stall_timeout_s):
                self.on_tick(columns)
        except BaseException:
            self._stop.set()
            workers.stop()
            raise
        spout.join()
        workers.stop()
        workers.join(timeout=5.0)
        if self._spout_error is not None:
            raise self._spout_error
        return self._close()


def detect_stream(samples: Iterable[PsdSample], settings: StreamSettings, topology: TopologyConfig = None,
                  sinks: Sequence = ()) -> List[SpectrumEvent]:
    """
    Events of a finite stream, flushed at the end
    """
    streamer = SpectrumStreamer(settings, topology=topology, sinks=sinks)
    if topology is None:
        streamer.run_direct(samples)
    else:
        streamer.run(samples)
    return streamer.events
