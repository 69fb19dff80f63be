"""
Per-tick barrier between the detection workers and the single grouping stage
"""
from dataclasses import dataclass
import logging
import queue
import time
from src.core.errors import BufferOverflow, StallTimeout
from src.detection.pipeline_bank import VerdictColumns
from typing import Dict, Iterable, Iterator, List, Tuple


@dataclass(frozen=True)
class VerdictBatch:
    # Position of the sample in the stream, 0 based
    tick: int
    timestamp: int
    worker_id: int
    verdicts: VerdictColumns


@dataclass(frozen=True)
class WorkerEnd:
    worker_id: int
    ticks: int


@dataclass(frozen=True)
class WorkerFailure:
    worker_id: int
    error: BaseException


class TickBarrier:
    """
    Buffers batches until every worker delivered a tick, releases complete ticks strictly in tick order
    """
    def __init__(self, worker_count: int, high_watermark: int = 4096):
        self.worker_count = worker_count
        self.high_watermark = high_watermark
        self.next_tick = 0
        self._pending = {}  # type: Dict[int, Dict[int, VerdictBatch]]
        self._buffered = 0

    @property
    def buffered(self) -> int:
        return self._buffered

    def missing_workers(self) -> List[int]:
        have = self._pending.get(self.next_tick, {})
        return [w for w in range(self.worker_count) if w not in have]

    def offer(self, batch: VerdictBatch) -> List[Tuple[int, VerdictColumns]]:
        """
        :return: (tick, full verdict vector) for every tick completed by this batch, in order
        """
        if batch.tick < self.next_tick:
            raise ValueError("worker {0} sent tick {1} after it was released".format(batch.worker_id, batch.tick))
        slot = self._pending.setdefault(batch.tick, {})
        if batch.worker_id in slot:
            raise ValueError("worker {0} sent tick {1} twice".format(batch.worker_id, batch.tick))
        slot[batch.worker_id] = batch
        self._buffered += 1
        if self._buffered > self.high_watermark:
            raise BufferOverflow("{0} batches buffered waiting on workers {1} for tick {2}".format(
                self._buffered, self.missing_workers(), self.next_tick))

        released = []
        while len(self._pending.get(self.next_tick, ())) == self.worker_count:
            slot = self._pending.pop(self.next_tick)
            self._buffered -= self.worker_count
            parts = [slot[w].verdicts for w in range(self.worker_count)]
            released.append((self.next_tick, VerdictColumns.concat(parts)))
            self.next_tick += 1
        return released

    def collect(self, inbox: "queue.Queue", stall_timeout_s: float) -> Iterator[Tuple[int, VerdictColumns]]:
        """
        Drain an inbox of VerdictBatch / WorkerEnd / WorkerFailure messages until every worker ended
        A partially delivered tick may wait at most stall_timeout_s for its missing batches
        """
        ended = set()
        last_progress = time.monotonic()
        while len(ended) < self.worker_count:
            try:
                message = inbox.get(timeout=min(1.0, stall_timeout_s))
            except queue.Empty:
                if self._buffered and time.monotonic() - last_progress > stall_timeout_s:
                    raise StallTimeout("no batch for tick {0} from workers {1} within {2} s".format(
                        self.next_tick, self.missing_workers(), stall_timeout_s)) from None
                continue
            if isinstance(message, WorkerFailure):
                raise message.error
            if isinstance(message, WorkerEnd):
                ended.add(message.worker_id)
                logging.debug("worker {0} ended after {1} ticks".format(message.worker_id, message.ticks))
                continue
            if not self._buffered:
                last_progress = time.monotonic()
            released = self.offer(message)
            if released:
                last_progress = time.monotonic()
            elif time.monotonic() - last_progress > stall_timeout_s:
                raise StallTimeout("no batch for tick {0} from workers {1} within {2} s".format(
                    self.next_tick, self.missing_workers(), stall_timeout_s))
            for item in released:
                yield item
        if self._buffered:
            raise StallTimeout("workers ended with tick {0} incomplete, missing {1}".format(
                self.next_tick, self.missing_workers()))


def barrier_collect(batches: Iterable[VerdictBatch], worker_count: int,
                    high_watermark: int = 4096) -> Iterator[Tuple[int, VerdictColumns]]:
    """
    Release complete ticks of a finite batch sequence
    """
    barrier = TickBarrier(worker_count, high_watermark)
    for batch in batches:
        for released in barrier.offer(batch):
            yield released
    if barrier.buffered:
        raise StallTimeout("stream ended with tick {0} incomplete, missing workers {1}".format(
            barrier.next_tick, barrier.missing_workers()))
