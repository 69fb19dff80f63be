"""
FIFO sample windows feeding the recent (W_r) and historic (W_h) distributions
"""
from collections import deque
import math
from src.core.errors import EmptyWindow
from typing import Iterator, List, Tuple

# The running sum is re-anchored with an exact sum after this many pushes
_RESYNC_EVERY = 4096


class SlidingWindow:
    """
    Bounded FIFO of (timestamp, value) pairs that hands back what it evicts
    """
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1, got {0}".format(capacity))
        self.capacity = capacity
        self._items = deque()
        # Running sum of the values for the moving average
        self._total = 0.0
        self._pushes = 0

    def push(self, value: float, t: int) -> List[Tuple[int, float]]:
        """
        :return: evicted (timestamp, value) pairs, oldest first, empty while not full
        """
        self._items.append((t, value))
        self._total += value
        evicted = []
        while len(self._items) > self.capacity:
            old = self._items.popleft()
            self._total -= old[1]
            evicted.append(old)
        self._pushes += 1
        if self._pushes % _RESYNC_EVERY == 0:
            self._total = math.fsum(self.values())
        return evicted

    def values(self) -> List[float]:
        return [v for _, v in self._items]

    def timestamps(self) -> List[int]:
        return [t for t, _ in self._items]

    @property
    def total(self) -> float:
        return self._total

    def newest(self) -> Tuple[int, float]:
        return self._items[-1]

    def oldest(self) -> Tuple[int, float]:
        return self._items[0]

    def is_full(self) -> bool:
        return len(self._items) == self.capacity

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return iter(self._items)


class DelayedWindow(SlidingWindow):
    """
    Historic window fed only by values that left the recent window
    Its delay equals the recent capacity, so it never shares a value with the recent window
    """
    def __init__(self, delay: int, capacity: int):
        super(DelayedWindow, self).__init__(capacity)
        self.delay = delay

    def push_evicted(self, evicted: List[Tuple[int, float]], recent: SlidingWindow) -> List[Tuple[int, float]]:
        """
        Append the pairs that just left `recent`, which must then hold exactly `delay` newer pairs
        :return: pairs aged out of this window, oldest first
        """
        if not evicted:
            return []
        if len(recent) != self.delay or recent.oldest()[0] <= evicted[-1][0]:
            raise ValueError("historic window takes only values that left a full recent window of {0}".format(
                self.delay))
        aged = []
        for t, value in evicted:
            aged.extend(self.push(value, t))
        return aged


def window_push(window: SlidingWindow, value: float, t: int) -> List[Tuple[int, float]]:
    return window.push(value, t)


def moving_average(window: SlidingWindow) -> float:
    if len(window) == 0:
        raise EmptyWindow("moving average of an empty window")
    return window.total / len(window)
