"""Row-resampling synthesizer with Gaussian perturbation.

Draws whole training rows with replacement, then jitters continuous cells
with bandwidth-scaled noise and flips categorical cells with a small
probability. At tiny bandwidth and zero flip probability this is a near-copy
of the training data, which makes it the high-fidelity (and low-privacy) end
of the family.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..data import Dataset
from ..tpe import LogUniformParam, SearchSpace, UniformParam
from .base import BaseSynthesizer


class KdePerturbSynthesizer(BaseSynthesizer):
    method = "kde_perturb"

    def __init__(
        self,
        bandwidth_scale: float = 0.1,
        flip_prob: float = 0.02,
        random_state: int = 0,
        conditional: bool = False,
    ):
        super().__init__(random_state=random_state, conditional=conditional)
        self.bandwidth_scale = bandwidth_scale
        self.flip_prob = flip_prob

    @classmethod
    def search_space(cls, frozen: bool = False) -> SearchSpace:
        return SearchSpace(
            params=(
                LogUniformParam("bandwidth_scale", 0.01, 1.0),
                UniformParam("flip_prob", 0.0, 0.2),
            )
        )

    @classmethod
    def default_theta(cls) -> dict[str, Any]:
        return {"bandwidth_scale": 0.1, "flip_prob": 0.02}

    def _fit_state(self, data: Dataset, rng: np.random.Generator) -> dict:
        stds = np.zeros(len(data.schema))
        kinds = []
        n_cats = []
        for j, col in enumerate(data.schema):
            kinds.append("cat" if col.is_categorical else "num")
            n_cats.append(col.n_categories)
            if not col.is_categorical:
                stds[j] = float(data.values[:, j].std())
        return {
            "rows": np.array(data.values),
            "stds": stds,
            "kinds": kinds,
            "n_categories": n_cats,
        }

    def _sample_state(self, state: dict, n: int, rng: np.random.Generator) -> np.ndarray:
        rows = np.asarray(state["rows"], dtype=float)
        stds = np.asarray(state["stds"], dtype=float)
        out = np.array(rows[rng.integers(0, rows.shape[0], size=n)])
        for j, kind in enumerate(state["kinds"]):
            if kind == "num":
                scale = self.bandwidth_scale * stds[j]
                if scale > 0:
                    out[:, j] += rng.normal(0.0, scale, size=n)
            else:
                k = int(state["n_categories"][j])
                if k < 2 or self.flip_prob == 0.0:
                    continue
                flip = rng.uniform(size=n) < self.flip_prob
                # shift by 1..k-1 modulo k: uniform over the other categories
                shift = rng.integers(1, k, size=n)
                out[flip, j] = (out[flip, j] + shift[flip]) % k
        return out
