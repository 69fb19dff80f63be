"""
Notification sinks, every notification is one JSON line
"""
import json
import logging
import socket
import threading
from src.grouping.notifications import EventNotification
from typing import Any, Dict, IO, List


class NdjsonSink:
    def __init__(self, stream: IO[str]):
        self.stream = stream

    def emit(self, notification: EventNotification):
        self.stream.write(notification.to_json() + "\n")
        self.stream.flush()

    def summary(self, record: Dict[str, Any]):
        self.stream.write(json.dumps(record, separators=(',', ':')) + "\n")
        self.stream.flush()

    def close(self):
        self.stream.flush()


class CollectingSink:
    """
    Keeps the emitted lines in memory
    """
    def __init__(self):
        self.notifications = []  # type: List[EventNotification]
        self.lines = []  # type: List[str]

    def emit(self, notification: EventNotification):
        self.notifications.append(notification)
        self.lines.append(notification.to_json())

    def summary(self, record: Dict[str, Any]):
        self.lines.append(json.dumps(record, separators=(',', ':')))

    def close(self):
        pass


class TcpNdjsonSink:
    """
    Listens on host:port and sends every line to all connected clients
    Clients that disconnect are dropped, nothing is replayed to late joiners
    """
    def __init__(self, host: str, port: int):
        self._server = socket.create_server((host, port))
        self.address = self._server.getsockname()[:2]
        self._clients = []  # type: List[socket.socket]
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self._acceptor = threading.Thread(target=self._accept, name="sink-accept", daemon=True)
        self._acceptor.start()
        logging.info("Serving notifications on {0}:{1}".format(*self.address))

    def _accept(self):
        while not self._closed.is_set():
            try:
                conn, peer = self._server.accept()
            except OSError:
                return
            logging.info("Notification client connected from {0}:{1}".format(*peer[:2]))
            with self._lock:
                self._clients.append(conn)

    def _send(self, line: str):
        data = (line + "\n").encode('utf-8')
        with self._lock:
            alive = []
            for conn in self._clients:
                try:
                    conn.sendall(data)
                    alive.append(conn)
                except OSError:
                    conn.close()
            self._clients = alive

    def emit(self, notification: EventNotification):
        self._send(notification.to_json())

    def summary(self, record: Dict[str, Any]):
        self._send(json.dumps(record, separators=(',', ':')))

    def close(self):
        self._closed.set()
        self._server.close()
        with self._lock:
            for conn in self._clients:
                conn.close()
            self._clients = []
