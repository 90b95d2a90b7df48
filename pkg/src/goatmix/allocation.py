"""Integer row allocation from fractional weights."""

from __future__ import annotations

import numpy as np


def largest_remainder_allocation(weights: np.ndarray, n: int) -> np.ndarray:
    """Closest-integer allocation of n rows proportional to weights.

    Starts from round-half-to-even of w_i * n, then corrects by +-1 until the
    total matches: deficits go to the entries with the largest fractional
    remainders (ties to the lower index), surpluses are taken back from the
    smallest remainders (ties to the higher index). Entries never go negative
    and the result always sums to n.
    """
    weights = np.asarray(weights, dtype=float)
    if n < 0:
        raise ValueError("n must be non-negative")
    exact = weights * n
    out = np.rint(exact).astype(int)
    frac = exact - np.floor(exact)
    diff = n - int(out.sum())
    if diff > 0:
        order = sorted(range(weights.size), key=lambda i: (-frac[i], i))
        k = 0
        while diff > 0:
            out[order[k % weights.size]] += 1
            diff -= 1
            k += 1
    elif diff < 0:
        order = sorted(range(weights.size), key=lambda i: (frac[i], -i))
        k = 0
        while diff < 0:
            i = order[k % weights.size]
            if out[i] > 0:
                out[i] -= 1
                diff += 1
            k += 1
    return out
