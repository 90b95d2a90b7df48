"""Two-sample fidelity statistics and the paired t-test used for reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaincc

from .data import Dataset
from .errors import DataError


def ks_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_x - ECDF_y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise DataError("ks_statistic needs nonempty samples")
    xs = np.sort(x)
    ys = np.sort(y)
    pooled = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, pooled, side="right") / xs.size
    cdf_y = np.searchsorted(ys, pooled, side="right") / ys.size
    return float(np.abs(cdf_x - cdf_y).max())


def cs_statistic(x: np.ndarray, y: np.ndarray, n_categories: int | None = None) -> tuple[float, float]:
    """Chi-squared comparison of two categorical samples.

    Expected counts come from x's category proportions scaled to |y|;
    categories with zero expected count are pooled into the smallest nonzero
    cell. Returns (chi2, p) with p from the chi-square survival function at
    (cells - 1) degrees of freedom.
    """
    x = np.asarray(x).astype(int)
    y = np.asarray(y).astype(int)
    if x.size == 0 or y.size == 0:
        raise DataError("cs_statistic needs nonempty samples")
    k = n_categories if n_categories is not None else int(max(x.max(), y.max())) + 1
    expected = np.bincount(x, minlength=k) / x.size * y.size
    observed = np.bincount(y, minlength=k).astype(float)

    zero = expected == 0
    if zero.any():
        nonzero = np.flatnonzero(~zero)
        if nonzero.size == 0:
            raise DataError("all categories have zero expected count")
        sink = nonzero[np.argmin(expected[nonzero])]
        observed[sink] += observed[zero].sum()
        expected = expected[~zero]
        observed = observed[~zero]
    if expected.size < 2:
        raise DataError("chi-squared test needs at least 2 cells (0 degrees of freedom)")

    chi2 = float(((observed - expected) ** 2 / expected).sum())
    df = expected.size - 1
    p = float(gammaincc(df / 2.0, chi2 / 2.0))
    return chi2, p


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int


def paired_t_test(a: np.ndarray, b: np.ndarray) -> TTestResult:
    """One-sided paired t-test of mean(a - b) > 0.

    t = mean(d) / (sd(d) / sqrt(n)) with the n-1 sample deviation, and the
    one-sided p = P(T_{n-1} > t) computed through the regularized incomplete
    beta function. Zero-variance differences degenerate to t = 0, p = 0.5
    when the mean is zero and to an infinite sentinel otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("paired_t_test needs two equal-length vectors")
    n = a.size
    if n < 2:
        raise DataError("paired_t_test needs n >= 2")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p=0.5, df=df)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p=0.0 if mean > 0 else 1.0, df=df)
    t = mean / (sd / math.sqrt(n))
    p = t_sf(t, df)
    return TTestResult(t=t, p=p, df=df)


def t_sf(t: float, df: int) -> float:
    """Survival function P(T_df > t) via the regularized incomplete beta."""
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return tail if t >= 0 else 1.0 - tail


def class_share_report(d: Dataset) -> dict[int, float]:
    """Fraction of rows per label class, keyed by class index."""
    if d.n == 0:
        raise DataError("empty dataset has no class shares")
    counts = d.class_counts()
    return {cls: float(c) / d.n for cls, c in enumerate(counts)}
