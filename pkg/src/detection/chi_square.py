"""
Chi-square comparison of the recent histogram (observed) against the historic one (expected)
"""
import numpy as np
from scipy.special import gammaincc
from src.core.errors import EmptyHistogram
from src.detection.histogram import OnlineHistogram
from typing import Tuple, Union

# Stand-in expected count for cells the historic window has never seen
PSEUDOCOUNT = 0.5


def chi_square_cells(observed: np.ndarray, expected: np.ndarray, nominal_dof: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-wise statistic over count matrices of shape (rows, cells)
    Expected counts are scaled to the observed total, cells empty on both sides are skipped and
    the degrees of freedom shrink with them from the nominal value (floor 1)
    :return: (stat, dof) arrays of shape (rows,)
    """
    observed = np.asarray(observed, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    obs_total = observed.sum(axis=-1, keepdims=True)
    exp_total = expected.sum(axis=-1, keepdims=True)
    scaled = expected * (obs_total / np.where(exp_total > 0, exp_total, 1.0))

    both_empty = (observed == 0) & (expected == 0)
    unseen = (expected == 0) & (observed > 0)
    scaled = np.where(unseen, PSEUDOCOUNT, scaled)
    safe = np.where(both_empty, 1.0, scaled)
    terms = np.where(both_empty, 0.0, (observed - scaled) ** 2 / safe)

    stat = terms.sum(axis=-1)
    contributing = (~both_empty).sum(axis=-1)
    dof = np.clip(contributing - 1, 1, max(nominal_dof, 1))
    return stat, dof


def chi_square_statistic(observed: OnlineHistogram, expected: OnlineHistogram) -> Tuple[float, int]:
    """
    :param observed: recent histogram
    :param expected: historic histogram with the same bounds and bin count
    :return: (statistic, effective degrees of freedom)
    """
    if not observed.same_layout(expected):
        raise ValueError("histograms differ in bounds or bin count")
    if observed.total == 0 or expected.total == 0:
        raise EmptyHistogram("observed total {0}, expected total {1}".format(observed.total, expected.total))
    stat, dof = chi_square_cells(observed.cells[np.newaxis, :], expected.cells[np.newaxis, :],
                                 observed.bin_count - 1)
    return float(stat[0]), int(dof[0])


def chi_square_pvalue(stat: Union[float, np.ndarray], dof: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Upper tail of the chi-square distribution, Q(dof/2, stat/2)
    """
    p = gammaincc(np.asarray(dof, dtype=np.float64) / 2.0, np.asarray(stat, dtype=np.float64) / 2.0)
    if np.ndim(p) == 0:
        return float(p)
    return p
