"""
Socket mode: every bin partition runs in its own process and talks to the coordinator over one TCP connection
"""
import logging
import multiprocessing
import queue
import socket
import threading
import numpy as np
from src.config.detector_config import DetectorConfig, config_from_mapping
from src.config.topology_config import TopologyConfig
from src.core.errors import StallTimeout, TruncatedRecord
from src.detection.pipeline_bank import PipelineBank
from src.topology.barrier import VerdictBatch, WorkerEnd, WorkerFailure
from src.topology.partitioning import Partitioning
from src.topology.wire import (END, ERROR, HELLO, SAMPLE, VERDICT, decode_end, decode_hello, decode_sample_slice,
                               decode_verdicts, encode_end, encode_error, encode_hello, encode_sample_slice,
                               encode_verdicts, message_type, read_frame, send_frame)
from src.topology.workers import blocking_put
from typing import Dict


def run_socket_worker(host: str, port: int, worker_id: int, bin_start: int, bin_stop: int, cfg_document: Dict):
    """
    Worker process entry point
    """
    cfg = config_from_mapping(cfg_document)
    bank = PipelineBank(bin_start, bin_stop, cfg)
    ticks = 0
    with socket.create_connection((host, port)) as sock:
        send_frame(sock, encode_hello(worker_id))
        try:
            while True:
                payload = read_frame(sock)
                if payload is None or message_type(payload) == END:
                    send_frame(sock, encode_end(ticks))
                    return
                if message_type(payload) != SAMPLE:
                    raise ValueError("unexpected frame type {0!r}".format(message_type(payload)))
                tick, timestamp, values = decode_sample_slice(payload)
                verdicts = bank.step(values, timestamp)
                ticks += 1
                send_frame(sock, encode_verdicts(VerdictBatch(tick, timestamp, worker_id, verdicts)))
        except Exception as e:
            send_frame(sock, encode_error("{0}: {1}".format(type(e).__name__, e)))


class SocketWorkers:
    def __init__(self, partitioning: Partitioning, cfg: DetectorConfig, topology: TopologyConfig):
        self.partitioning = partitioning
        self.cfg = cfg
        self.topology = topology
        self.stop_event = threading.Event()
        self._processes = []
        self._sockets = {}  # type: Dict[int, socket.socket]
        self._readers = []

    def start(self, inbox: "queue.Queue"):
        topo = self.topology
        server = socket.create_server((topo.wire_host, topo.wire_port))
        host, port = server.getsockname()[:2]
        ctx = multiprocessing.get_context('spawn')
        for w, (start, stop) in enumerate(self.partitioning.ranges):
            process = ctx.Process(target=run_socket_worker, name="worker-{0}".format(w),
                                  args=(host, port, w, start, stop, self.cfg.to_document()), daemon=True)
            process.start()
            self._processes.append(process)

        server.settimeout(topo.connect_timeout_s)
        try:
            while len(self._sockets) < len(self._processes):
                try:
                    conn, _ = server.accept()
                except socket.timeout:
                    raise StallTimeout("{0} of {1} workers connected within {2} s".format(
                        len(self._sockets), len(self._processes), topo.connect_timeout_s)) from None
                conn.settimeout(None)
                hello = read_frame(conn)
                if hello is None or message_type(hello) != HELLO:
                    conn.close()
                    raise TruncatedRecord("worker connection closed before its hello frame")
                self._sockets[decode_hello(hello)] = conn
        finally:
            server.close()
        logging.info("{0} worker processes connected on {1}:{2}".format(len(self._sockets), host, port))

        for w, conn in sorted(self._sockets.items()):
            reader = threading.Thread(target=self._read_worker, args=(w, conn, inbox), name="reader-{0}".format(w),
                                      daemon=True)
            self._readers.append(reader)
            reader.start()

    def _read_worker(self, worker_id: int, conn: socket.socket, inbox: "queue.Queue"):
        try:
            while not self.stop_event.is_set():
                payload = read_frame(conn)
                if payload is None:
                    raise TruncatedRecord("worker {0} closed its connection".format(worker_id))
                kind = message_type(payload)
                if kind == VERDICT:
                    message = decode_verdicts(payload)
                elif kind == END:
                    blocking_put(inbox, WorkerEnd(worker_id, decode_end(payload)), self.stop_event)
                    return
                elif kind == ERROR:
                    message = WorkerFailure(worker_id, RuntimeError("worker {0}: {1}".format(
                        worker_id, payload[1:].decode('utf-8', 'replace'))))
                else:
                    raise ValueError("unexpected frame type {0!r} from worker {1}".format(kind, worker_id))
                if not blocking_put(inbox, message, self.stop_event) or isinstance(message, WorkerFailure):
                    return
        except (OSError, ValueError, TruncatedRecord) as e:
            if not self.stop_event.is_set():
                blocking_put(inbox, WorkerFailure(worker_id, e), self.stop_event)

    def send(self, tick: int, timestamp: int, values: np.ndarray):
        for w, (start, stop) in enumerate(self.partitioning.ranges):
            send_frame(self._sockets[w], encode_sample_slice(tick, timestamp, values[start:stop]))

    def end(self, ticks: int):
        for w in sorted(self._sockets):
            try:
                send_frame(self._sockets[w], encode_end(ticks))
            except OSError as e:
                logging.warning("could not send end of stream to worker {0}: {1}".format(w, e))

    def stop(self):
        self.stop_event.set()

    def join(self, timeout: float = None):
        for reader in self._readers:
            reader.join(timeout)
        for conn in self._sockets.values():
            conn.close()
        for process in self._processes:
            process.join(timeout)
            if process.is_alive():
                process.terminate()
