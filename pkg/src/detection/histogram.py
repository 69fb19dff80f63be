import math
import numpy as np
from src.core.errors import NegativeCount
from typing import Iterable


def bin_index(value: float, lower: float, upper: float, nbins: int, overflow: bool) -> int:
    """
    Cell index in the (nbins + 2) cell layout [underflow, regular 0..nbins-1, overflow]
    Without overflow cells out-of-range values are clamped into the edge bins
    """
    if value < lower:
        return 0 if overflow else 1
    if value >= upper:
        return nbins + 1 if overflow else nbins
    width = (upper - lower) / nbins
    # Rounding can push values just below the upper bound onto nbins
    return min(int(math.floor((value - lower) / width)), nbins - 1) + 1


def bin_indices(values: np.ndarray, lower: float, upper: float, nbins: int, overflow: bool) -> np.ndarray:
    """
    Vectorised bin_index, same cell layout
    """
    width = (upper - lower) / nbins
    regular = np.floor((values - lower) / width)
    cells = np.clip(regular, 0, nbins - 1).astype(np.int64) + 1
    if overflow:
        cells = np.where(values < lower, 0, cells)
        cells = np.where(values >= upper, nbins + 1, cells)
    return cells


class OnlineHistogram:
    """
    Bounded-range histogram over the current contents of a feeding window
    counts holds the B regular bins, underflow/overflow the -inf/+inf cells
    """
    def __init__(self, lower_bound: float, upper_bound: float, bin_count: int, overflow_bins: bool = True):
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound
        self.bin_count = bin_count
        self.overflow_bins = overflow_bins
        self._cells = np.zeros(bin_count + 2, dtype=np.int64)

    @property
    def bin_width(self) -> float:
        return (self.upper_bound - self.lower_bound) / self.bin_count

    @property
    def counts(self) -> np.ndarray:
        return self._cells[1:-1]

    @property
    def underflow_count(self) -> int:
        return int(self._cells[0])

    @property
    def overflow_count(self) -> int:
        return int(self._cells[-1])

    @property
    def cells(self) -> np.ndarray:
        """
        All B + 2 cells, the outer two are always zero without overflow bins
        """
        return self._cells

    @property
    def total(self) -> int:
        return int(self._cells.sum())

    def cell_of(self, value: float) -> int:
        return bin_index(value, self.lower_bound, self.upper_bound, self.bin_count, self.overflow_bins)

    def add(self, value: float):
        self._cells[self.cell_of(value)] += 1

    def remove(self, value: float):
        cell = self.cell_of(value)
        if self._cells[cell] == 0:
            raise NegativeCount("removing {0} from an empty histogram cell {1}".format(value, cell))
        self._cells[cell] -= 1

    def update(self, added: Iterable[float] = (), removed: Iterable[float] = ()) -> "OnlineHistogram":
        for value in added:
            self.add(value)
        for value in removed:
            self.remove(value)
        return self

    def same_layout(self, other: "OnlineHistogram") -> bool:
        return (self.lower_bound == other.lower_bound and self.upper_bound == other.upper_bound and
                self.bin_count == other.bin_count and self.overflow_bins == other.overflow_bins)

    @classmethod
    def from_values(cls, values: Iterable[float], lower_bound: float, upper_bound: float, bin_count: int,
                    overflow_bins: bool = True) -> "OnlineHistogram":
        return cls(lower_bound, upper_bound, bin_count, overflow_bins).update(added=values)


def histogram_update(hist: OnlineHistogram, added: Iterable[float], removed: Iterable[float]) -> OnlineHistogram:
    return hist.update(added=added, removed=removed)
