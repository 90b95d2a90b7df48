"""Seed derivation helpers: every random stream is a pure function of the
base seed plus integer context keys, so reruns reproduce bit-for-bit."""

from __future__ import annotations

import numpy as np


def child_seed(base: int, *keys: int) -> int:
    """Derive an independent integer seed from a base seed and context keys."""
    ss = np.random.SeedSequence([int(base), *[int(k) for k in keys]])
    return int(ss.generate_state(1)[0])


def child_rng(base: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(base), *[int(k) for k in keys]]))
