import numpy as np
from src.core.datatypes import BandPlan, PsdSample
from src.core.errors import LengthMismatch, NonFiniteValue, NonMonotonicTime
from typing import Optional


def validate_sample(sample: PsdSample, plan: BandPlan, last_timestamp: Optional[int],
                    record_index: int = None) -> PsdSample:
    """
    Accept a sample iff its length matches the band plan, all values are finite and its timestamp advances
    :param sample: candidate sample
    :param plan: band plan fixed for the stream
    :param last_timestamp: timestamp of the previously accepted sample, None for the first sample
    :param record_index: position of the sample in its stream, named by the rejection message
    :return: the sample itself when accepted, raises a SampleRejected subclass otherwise
    """
    if len(sample) != plan.bin_count:
        raise LengthMismatch("expected {0} values, got {1}".format(plan.bin_count, len(sample)), record_index)
    if not np.isfinite(sample.values).all():
        bad = int(np.flatnonzero(~np.isfinite(sample.values))[0])
        raise NonFiniteValue("value at bin {0} is {1}".format(bad, sample.values[bad]), record_index)
    # Ties are rejected, the pipeline is defined on a strictly increasing time series
    if last_timestamp is not None and sample.timestamp <= last_timestamp:
        raise NonMonotonicTime("timestamp {0} does not advance past {1}".format(sample.timestamp, last_timestamp),
                               record_index)
    return sample


class SampleValidator:
    """
    Stateful wrapper remembering the last accepted timestamp of one stream
    """
    def __init__(self, plan: BandPlan):
        self.plan = plan
        self.last_timestamp = None
        # Number of samples accepted so far, also the index of the next one
        self.accepted = 0

    def __call__(self, sample: PsdSample) -> PsdSample:
        validate_sample(sample, self.plan, self.last_timestamp, record_index=self.accepted)
        self.last_timestamp = sample.timestamp
        self.accepted += 1
        return sample
