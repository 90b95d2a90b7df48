"""Independent per-column histogram synthesizer.

Deliberately the weakest family member: it models every column marginal on
its own, so cross-column structure is lost unless per-class sub-models are
fitted. Bin count is the single hyperparameter.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..data import Dataset
from ..tpe import IntParam, SearchSpace
from .base import BaseSynthesizer


class HistogramSynthesizer(BaseSynthesizer):
    method = "histogram"

    def __init__(self, bins: int = 32, random_state: int = 0, conditional: bool = False):
        super().__init__(random_state=random_state, conditional=conditional)
        self.bins = bins

    @classmethod
    def search_space(cls, frozen: bool = False) -> SearchSpace:
        return SearchSpace(params=(IntParam("bins", 5, 128, log=True),))

    @classmethod
    def default_theta(cls) -> dict[str, Any]:
        return {"bins": 32}

    def _fit_state(self, data: Dataset, rng: np.random.Generator) -> dict:
        columns = []
        for j, col in enumerate(data.schema):
            x = data.values[:, j]
            if col.is_categorical:
                masses = np.bincount(x.astype(int), minlength=col.n_categories) / data.n
                columns.append({"type": "table", "masses": masses})
            else:
                lo, hi = float(x.min()), float(x.max())
                if lo == hi:
                    columns.append({"type": "hist", "edges": np.array([lo, hi]), "masses": np.array([1.0])})
                else:
                    counts, edges = np.histogram(x, bins=self.bins, range=(lo, hi))
                    columns.append({"type": "hist", "edges": edges, "masses": counts / data.n})
        return {"columns": columns}

    def _sample_state(self, state: dict, n: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((n, len(state["columns"])))
        for j, col in enumerate(state["columns"]):
            masses = np.asarray(col["masses"], dtype=float)
            masses = masses / masses.sum()
            picks = rng.choice(masses.size, size=n, p=masses)
            if col["type"] == "table":
                out[:, j] = picks
            else:
                edges = np.asarray(col["edges"], dtype=float)
                width = edges[picks + 1] - edges[picks]
                out[:, j] = edges[picks] + rng.uniform(0.0, 1.0, size=n) * width
        return out
