"""
Exception hierarchy shared by every spectrum streamer module
Every error carries a short machine readable `reason` next to the human readable message
"""


class SpecstreamError(Exception):
    reason = "error"

    def __init__(self, message: str = None):
        super(SpecstreamError, self).__init__(message if message is not None else self.reason)


# Sample validation
class SampleRejected(SpecstreamError):
    reason = "sample_rejected"

    def __init__(self, message: str, record_index: int = None):
        self.record_index = record_index
        if record_index is not None:
            message = "record {0}: {1}".format(record_index, message)
        super(SampleRejected, self).__init__(message)


class LengthMismatch(SampleRejected):
    reason = "length_mismatch"


class NonMonotonicTime(SampleRejected):
    reason = "non_monotonic_time"


class NonFiniteValue(SampleRejected):
    reason = "non_finite_value"


# Configuration documents
class ConfigError(SpecstreamError):
    reason = "config_error"


class ConfigParseError(ConfigError):
    reason = "parse_error"


class InvariantViolation(ConfigError):
    reason = "invariant_violation"

    def __init__(self, field: str, message: str):
        # Name of the offending field as spelled in the config document
        self.field = field
        super(InvariantViolation, self).__init__("{0}: {1}".format(field, message))


# Detection building blocks, these signal caller bugs
class NegativeCount(SpecstreamError):
    reason = "negative_count"


class EmptyHistogram(SpecstreamError):
    reason = "empty_histogram"


class EmptyWindow(SpecstreamError):
    reason = "empty_window"


class TimestampMismatch(SpecstreamError):
    reason = "timestamp_mismatch"


# Event store
class DuplicateId(SpecstreamError):
    reason = "duplicate_id"


class UnknownField(SpecstreamError):
    reason = "unknown_field"


class QueryError(SpecstreamError):
    reason = "query_error"


# Reporting
class OutOfPeriod(SpecstreamError):
    reason = "out_of_period"


# Stream decoding
class RecordError(SpecstreamError):
    reason = "record_error"

    def __init__(self, message: str, record_index: int = None):
        self.record_index = record_index
        if record_index is not None:
            message = "record {0}: {1}".format(record_index, message)
        super(RecordError, self).__init__(message)


class MalformedRecord(RecordError):
    reason = "malformed_record"


class TruncatedRecord(RecordError):
    reason = "truncated_record"


# Topology
class InvalidWorkerCount(SpecstreamError):
    reason = "invalid_worker_count"


class StallTimeout(SpecstreamError):
    reason = "stall_timeout"


class BufferOverflow(SpecstreamError):
    reason = "buffer_overflow"


# Evaluation
class EmptyTruth(SpecstreamError):
    reason = "empty_truth"
