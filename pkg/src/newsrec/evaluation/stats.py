"""Paired significance testing with multiple-comparison correction."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as sp_stats

from ..errors import DataError

SIGNIFICANCE_ALPHA = 0.001


def paired_ttest(
    series_a: np.ndarray, series_b: np.ndarray, n_comparisons: int = 1
) -> tuple[float, float]:
    """Two-sided paired Student's t-test with Bonferroni adjustment.

    Returns (t, p_adjusted). Degenerate zero-variance differences map to
    p = 1 when the mean difference is zero and p = 0 otherwise.
    """
    a = np.asarray(series_a, dtype=np.float64)
    b = np.asarray(series_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("paired series must be 1-d and equally long")
    n = a.size
    if n < 2:
        raise DataError("paired t-test needs at least 2 pairs")
    d = a - b
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * sp_stats.t.sf(abs(t), df=n - 1)
    return t, min(1.0, p * n_comparisons)
