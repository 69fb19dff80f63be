"""
Sample record formats read by the spouts

csv:    "timestamp_ms,v0,v1,...,vN-1" one record per line
binary: little-endian u64 timestamp followed by N little-endian float32 values, records back to back
"""
import struct
import numpy as np
from src.core.datatypes import PsdSample
from src.core.errors import MalformedRecord, TruncatedRecord
from typing import BinaryIO, Iterator, Union

FORMATS = ('csv', 'binary')
_TIMESTAMP = struct.Struct('<Q')
_F32 = np.dtype('<f4')


def binary_record_size(bin_count: int) -> int:
    return _TIMESTAMP.size + bin_count * _F32.itemsize


def _decode_csv(record: Union[bytes, str], bin_count: int, record_index: int) -> PsdSample:
    if isinstance(record, bytes):
        try:
            record = record.decode('ascii')
        except UnicodeDecodeError:
            raise MalformedRecord("csv record is not ASCII text", record_index) from None
    fields = record.strip().split(',')
    if len(fields) != bin_count + 1:
        raise MalformedRecord("expected timestamp and {0} values, got {1} fields".format(bin_count, len(fields)),
                              record_index)
    try:
        timestamp = int(fields[0])
    except ValueError:
        raise MalformedRecord("bad timestamp {0!r}".format(fields[0]), record_index) from None
    if timestamp < 0:
        raise MalformedRecord("negative timestamp {0}".format(timestamp), record_index)
    try:
        values = [float(v) for v in fields[1:]]
    except ValueError as e:
        raise MalformedRecord("bad value ({0})".format(e), record_index) from None
    return PsdSample(timestamp, values)


def _decode_binary(record: bytes, bin_count: int, record_index: int) -> PsdSample:
    size = binary_record_size(bin_count)
    if len(record) < size:
        raise TruncatedRecord("binary record holds {0} of {1} bytes".format(len(record), size), record_index)
    if len(record) > size:
        raise MalformedRecord("binary record holds {0} bytes, expected {1}".format(len(record), size),
                              record_index)
    (timestamp,) = _TIMESTAMP.unpack_from(record, 0)
    values = np.frombuffer(record, dtype=_F32, count=bin_count, offset=_TIMESTAMP.size)
    return PsdSample(timestamp, values.astype(np.float64))


def decode_sample(record: Union[bytes, str], fmt: str, bin_count: int, record_index: int = None) -> PsdSample:
    """
    :param record: one complete record
    :param fmt: 'csv' or 'binary'
    :param bin_count: N of the stream
    :param record_index: position in the stream, reported by decoding errors
    """
    if fmt == 'csv':
        return _decode_csv(record, bin_count, record_index)
    if fmt == 'binary':
        return _decode_binary(bytes(record), bin_count, record_index)
    raise ValueError("unknown sample format {0!r}, expected one of {1}".format(fmt, FORMATS))


def encode_sample(sample: PsdSample, fmt: str) -> bytes:
    if fmt == 'csv':
        # repr keeps float64 values exact through the text round trip
        return (",".join([str(sample.timestamp)] + [repr(float(v)) for v in sample.values]) + "\n").encode('ascii')
    if fmt == 'binary':
        return _TIMESTAMP.pack(sample.timestamp) + sample.values.astype(_F32).tobytes()
    raise ValueError("unknown sample format {0!r}, expected one of {1}".format(fmt, FORMATS))


def iter_records(stream: BinaryIO, fmt: str, bin_count: int) -> Iterator[bytes]:
    """
    Split a byte stream into records, csv lines that are blank or start with '#' are skipped
    """
    if fmt == 'csv':
        for line in stream:
            stripped = line.strip()
            if stripped and not stripped.startswith(b'#'):
                yield stripped
        return
    size = binary_record_size(bin_count)
    index = 0
    while True:
        record = stream.read(size)
        if not record:
            return
        while len(record) < size:
            more = stream.read(size - len(record))
            if not more:
                raise TruncatedRecord("stream ends inside a record ({0} of {1} bytes)".format(len(record), size),
                                      index)
            record += more
        yield record
        index += 1


def iter_samples(stream: BinaryIO, fmt: str, bin_count: int) -> Iterator[PsdSample]:
    for index, record in enumerate(iter_records(stream, fmt, bin_count)):
        yield decode_sample(record, fmt, bin_count, record_index=index)
