"""
In-process detection workers: one thread per bin partition, bounded FIFOs on both sides
"""
import logging
import queue
import threading
import numpy as np
from src.config.detector_config import DetectorConfig
from src.config.topology_config import TopologyConfig
from src.detection.pipeline_bank import PipelineBank
from src.topology.barrier import VerdictBatch, WorkerEnd, WorkerFailure
from src.topology.partitioning import Partitioning

# Seconds between checks of the stop flag while blocked on a full queue
_POLL_S = 0.2


def blocking_put(q: "queue.Queue", item, stop: threading.Event) -> bool:
    """
    Put that blocks while the queue is full, gives up once stop is set
    :return: False when abandoned
    """
    while not stop.is_set():
        try:
            q.put(item, timeout=_POLL_S)
            return True
        except queue.Full:
            continue
    return False


def _run_worker(worker_id: int, bank: PipelineBank, samples: "queue.Queue", inbox: "queue.Queue",
                stop: threading.Event):
    ticks = 0
    try:
        while not stop.is_set():
            try:
                item = samples.get(timeout=_POLL_S)
            except queue.Empty:
                continue
            if item is None:
                blocking_put(inbox, WorkerEnd(worker_id, ticks), stop)
                return
            tick, timestamp, values = item
            verdicts = bank.step(values, timestamp)
            ticks += 1
            if not blocking_put(inbox, VerdictBatch(tick, timestamp, worker_id, verdicts), stop):
                return
    except Exception as e:
        logging.error("worker {0} failed at tick {1}: {2}".format(worker_id, ticks, e))
        blocking_put(inbox, WorkerFailure(worker_id, e), stop)


class InprocWorkers:
    def __init__(self, partitioning: Partitioning, cfg: DetectorConfig, topology: TopologyConfig):
        self.partitioning = partitioning
        self.cfg = cfg
        self.topology = topology
        self.stop_event = threading.Event()
        self._queues = []
        self._threads = []

    def start(self, inbox: "queue.Queue"):
        for w, (start, stop) in enumerate(self.partitioning.ranges):
            q = queue.Queue(maxsize=self.topology.worker_queue_size)
            bank = PipelineBank(start, stop, self.cfg)
            thread = threading.Thread(target=_run_worker, args=(w, bank, q, inbox, self.stop_event),
                                      name="worker-{0}".format(w), daemon=True)
            self._queues.append(q)
            self._threads.append(thread)
            thread.start()
        logging.debug("started {0} in-process workers".format(len(self._threads)))

    def send(self, tick: int, timestamp: int, values: np.ndarray):
        for q, (start, stop) in zip(self._queues, self.partitioning.ranges):
            blocking_put(q, (tick, timestamp, values[start:stop]), self.stop_event)

    def end(self, ticks: int):
        for q in self._queues:
            blocking_put(q, None, self.stop_event)

    def stop(self):
        self.stop_event.set()

    def join(self, timeout: float = None):
        for thread in self._threads:
            thread.join(timeout)
