from dataclasses import dataclass
from src.core.errors import InvalidWorkerCount
from typing import Tuple


@dataclass(frozen=True)
class Partitioning:
    bin_count: int
    worker_count: int
    # Half-open [start, stop) bin range per worker, ascending
    ranges: Tuple[Tuple[int, int], ...]

    def range_of(self, worker_id: int) -> Tuple[int, int]:
        return self.ranges[worker_id]

    def sizes(self) -> Tuple[int, ...]:
        return tuple(stop - start for start, stop in self.ranges)


def partition(bin_count: int, worker_count: int) -> Partitioning:
    """
    Contiguous balanced split of [0, bin_count), the first bin_count % worker_count ranges get one extra bin
    """
    if not 1 <= worker_count <= bin_count:
        raise InvalidWorkerCount("worker count must lie in [1, {0}], got {1}".format(bin_count, worker_count))
    base, extra = divmod(bin_count, worker_count)
    ranges = []
    start = 0
    for w in range(worker_count):
        stop = start + base + (1 if w < extra else 0)
        ranges.append((start, stop))
        start = stop
    return Partitioning(bin_count=bin_count, worker_count=worker_count, ranges=tuple(ranges))
