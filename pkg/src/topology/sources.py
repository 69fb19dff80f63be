"""
Spout sources: file replay and a single-client TCP listener, both yielding decoded samples
"""
import logging
import socket
import threading
import time
from src.core.datatypes import PsdSample
from src.topology.codecs import iter_samples
from typing import Iterator, Optional, Tuple


def parse_endpoint(text: str) -> Tuple[str, int]:
    """
    "host:port" or ":port" (all interfaces)
    """
    host, sep, port = text.rpartition(':')
    if not sep:
        raise ValueError("expected host:port, got {0!r}".format(text))
    try:
        port_no = int(port)
    except ValueError:
        raise ValueError("bad port in {0!r}".format(text)) from None
    return (host or '0.0.0.0'), port_no


def paced(samples: Iterator[PsdSample], stop: Optional[threading.Event] = None) -> Iterator[PsdSample]:
    """
    Replay at the pace of the sample timestamps
    """
    first_t = None
    started = None
    for sample in samples:
        if first_t is None:
            first_t, started = sample.timestamp, time.monotonic()
        else:
            delay = (sample.timestamp - first_t) / 1000.0 - (time.monotonic() - started)
            if delay > 0:
                if stop is not None:
                    if stop.wait(delay):
                        return
                else:
                    time.sleep(delay)
        yield sample


def file_source(path: str, fmt: str, bin_count: int, realtime: bool = False,
                stop: Optional[threading.Event] = None) -> Iterator[PsdSample]:
    with open(path, 'rb') as f:
        samples = iter_samples(f, fmt, bin_count)
        if realtime:
            samples = paced(samples, stop)
        for sample in samples:
            yield sample


def socket_source(host: str, port: int, fmt: str, bin_count: int,
                  accept_timeout_s: Optional[float] = None) -> Iterator[PsdSample]:
    """
    Listen on host:port, accept one sensor connection and read records until it disconnects
    """
    with socket.create_server((host, port)) as server:
        server.settimeout(accept_timeout_s)
        logging.info("Waiting for a sample stream on {0}:{1}".format(*server.getsockname()[:2]))
        conn, peer = server.accept()
    with conn:
        logging.info("Sample stream connected from {0}:{1}".format(*peer[:2]))
        with conn.makefile('rb') as stream:
            for sample in iter_samples(stream, fmt, bin_count):
                yield sample
