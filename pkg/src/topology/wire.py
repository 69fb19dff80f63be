"""
Frames exchanged with worker processes: u32 little-endian payload length, then the payload
The first payload byte tells the message type
    H  hello, worker id
    S  sample slice, tick, timestamp and the worker's float64 values
    V  verdict batch, tick, timestamp, worker id and the verdict columns
    E  end of stream, ticks processed
    X  worker error, utf-8 text
"""
import socket
import struct
import numpy as np
from src.core.errors import TruncatedRecord
from src.detection.pipeline_bank import VerdictColumns
from src.topology.barrier import VerdictBatch
from typing import Optional, Tuple

_LENGTH = struct.Struct('<I')
_HELLO = struct.Struct('<cI')
_SAMPLE = struct.Struct('<cQqI')
_VERDICT = struct.Struct('<cQqIIIB')
_END = struct.Struct('<cQ')

HELLO, SAMPLE, VERDICT, END, ERROR = b'H', b'S', b'V', b'E', b'X'

# Column name and wire dtype of the verdict columns, in frame order
_COLUMNS = (
    ('active', np.dtype('u1')),
    ('p_value', np.dtype('<f8')),
    ('chi_square_stat', np.dtype('<f8')),
    ('recent_mean', np.dtype('<f8')),
    ('historic_mean', np.dtype('<f8')),
    ('direction', np.dtype('i1')),
    ('values', np.dtype('<f8')),
    ('hot', np.dtype('u1')),
    ('onset', np.dtype('<i8')),
)


def _recv_exact(sock: socket.socket, size: int) -> bytes:
    chunks = []
    remaining = size
    while remaining:
        chunk = sock.recv(min(remaining, 1 << 20))
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b''.join(chunks)


def send_frame(sock: socket.socket, payload: bytes):
    sock.sendall(_LENGTH.pack(len(payload)) + payload)


def read_frame(sock: socket.socket) -> Optional[bytes]:
    """
    :return: payload, None when the peer closed cleanly between frames
    """
    header = _recv_exact(sock, _LENGTH.size)
    if not header:
        return None
    if len(header) < _LENGTH.size:
        raise TruncatedRecord("connection closed inside a frame header")
    (size,) = _LENGTH.unpack(header)
    payload = _recv_exact(sock, size)
    if len(payload) < size:
        raise TruncatedRecord("connection closed after {0} of {1} payload bytes".format(len(payload), size))
    return payload


def encode_hello(worker_id: int) -> bytes:
    return _HELLO.pack(HELLO, worker_id)


def decode_hello(payload: bytes) -> int:
    return _HELLO.unpack(payload)[1]


def encode_sample_slice(tick: int, timestamp: int, values: np.ndarray) -> bytes:
    values = np.ascontiguousarray(values, dtype='<f8')
    return _SAMPLE.pack(SAMPLE, tick, timestamp, values.shape[0]) + values.tobytes()


def decode_sample_slice(payload: bytes) -> Tuple[int, int, np.ndarray]:
    _, tick, timestamp, n = _SAMPLE.unpack_from(payload, 0)
    values = np.frombuffer(payload, dtype='<f8', count=n, offset=_SAMPLE.size).astype(np.float64)
    return tick, timestamp, values


def encode_verdicts(batch: VerdictBatch) -> bytes:
    v = batch.verdicts
    head = _VERDICT.pack(VERDICT, batch.tick, batch.timestamp, batch.worker_id, v.bin_start, len(v),
                         1 if v.warmup else 0)
    body = [np.ascontiguousarray(getattr(v, name), dtype=dtype).tobytes() for name, dtype in _COLUMNS]
    return head + b''.join(body)


def decode_verdicts(payload: bytes) -> VerdictBatch:
    _, tick, timestamp, worker_id, bin_start, n, warmup = _VERDICT.unpack_from(payload, 0)
    offset = _VERDICT.size
    columns = {}
    for name, dtype in _COLUMNS:
        columns[name] = np.frombuffer(payload, dtype=dtype, count=n, offset=offset).copy()
        offset += n * dtype.itemsize
    columns['active'] = columns['active'].astype(bool)
    columns['hot'] = columns['hot'].astype(bool)
    columns['direction'] = columns['direction'].astype(np.int8)
    columns['onset'] = columns['onset'].astype(np.int64)
    verdicts = VerdictColumns(timestamp=timestamp, bin_start=bin_start, warmup=bool(warmup), **columns)
    return VerdictBatch(tick=tick, timestamp=timestamp, worker_id=worker_id, verdicts=verdicts)


def encode_end(ticks: int) -> bytes:
    return _END.pack(END, ticks)


def decode_end(payload: bytes) -> int:
    return _END.unpack(payload)[1]


def encode_error(message: str) -> bytes:
    return ERROR + message.encode('utf-8')


def message_type(payload: bytes) -> bytes:
    return payload[:1]
