"""Joint full-covariance Gaussian mixture over all columns at once.

Categorical columns enter as one-hot blocks (a continuous relaxation); on
sampling each block collapses back to the argmax category. Capacity, ridge
regularization, and EM budget are the tunable hyperparameters. The default
ridge is deliberately large: near-singular one-hot dimensions otherwise eat
all mixture capacity before the continuous shapes get any.
"""

from __future__ import annotations

import warnings
from typing import Any

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from ..data import Dataset
from ..tpe import CategoricalParam, IntParam, LogUniformParam, SearchSpace
from .base import BaseSynthesizer

_EM_TOL = 1e-6


class JointMixtureSynthesizer(BaseSynthesizer):
    method = "joint_mixture"

    def __init__(
        self,
        n_components: int = 5,
        reg_covar: float = 1e-2,
        em_iterations: int = 200,
        random_state: int = 0,
        conditional: bool = False,
    ):
        super().__init__(random_state=random_state, conditional=conditional)
        self.n_components = n_components
        self.reg_covar = reg_covar
        self.em_iterations = em_iterations

    @classmethod
    def search_space(cls, frozen: bool = False) -> SearchSpace:
        return SearchSpace(
            params=(
                IntParam("n_components", 1, 30, log=True),
                LogUniformParam("reg_covar", 1e-6, 1e-1),
                CategoricalParam("em_iterations", (50, 100, 200)),
            )
        )

    @classmethod
    def default_theta(cls) -> dict[str, Any]:
        return {"n_components": 5, "reg_covar": 1e-2, "em_iterations": 200}

    def _fit_state(self, data: Dataset, rng: np.random.Generator) -> dict:
        encoded, layout = _one_hot_encode(data)
        k = min(self.n_components, data.n)
        gm = GaussianMixture(
            n_components=k,
            covariance_type="full",
            reg_covar=self.reg_covar,
            max_iter=self.em_iterations,
            tol=_EM_TOL,
            init_params="k-means++",
            random_state=int(rng.integers(2**31 - 1)),
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            gm.fit(encoded)
            if any(issubclass(w.category, ConvergenceWarning) for w in caught):
                self.warning_flag_ = True
        return {
            "weights": np.asarray(gm.weights_),
            "means": np.asarray(gm.means_),
            "covariances": np.asarray(gm.covariances_),
            "layout": layout,
        }

    def _sample_state(self, state: dict, n: int, rng: np.random.Generator) -> np.ndarray:
        weights = np.asarray(state["weights"], dtype=float)
        means = np.asarray(state["means"], dtype=float)
        covs = np.asarray(state["covariances"], dtype=float)
        chols = [_jittered_cholesky(covs[c]) for c in range(covs.shape[0])]
        comp = rng.choice(weights.size, size=n, p=weights / weights.sum())
        out = np.empty((n, means.shape[1]))
        for c in range(weights.size):
            rows = np.flatnonzero(comp == c)
            if rows.size == 0:
                continue
            normals = rng.standard_normal((rows.size, means.shape[1]))
            out[rows] = means[c] + normals @ chols[c].T
        return _one_hot_decode(out, state["layout"])


def _one_hot_encode(data: Dataset) -> tuple[np.ndarray, list]:
    """Layout entries: ("num", src_col) or ("cat", src_col, n_categories)."""
    blocks = []
    layout: list = []
    for j, col in enumerate(data.schema):
        x = data.values[:, j]
        if col.is_categorical:
            k = col.n_categories
            hot = np.zeros((data.n, k))
            hot[np.arange(data.n), x.astype(int)] = 1.0
            blocks.append(hot)
            layout.append(["cat", j, k])
        else:
            blocks.append(x[:, None])
            layout.append(["num", j])
    return np.hstack(blocks), layout


def _one_hot_decode(encoded: np.ndarray, layout: list) -> np.ndarray:
    n_cols = len(layout)
    out = np.empty((encoded.shape[0], n_cols))
    pos = 0
    for entry in layout:
        if entry[0] == "num":
            out[:, int(entry[1])] = encoded[:, pos]
            pos += 1
        else:
            k = int(entry[2])
            out[:, int(entry[1])] = encoded[:, pos : pos + k].argmax(axis=1)
            pos += k
    return out


def _jittered_cholesky(cov: np.ndarray) -> np.ndarray:
    jitter = 0.0
    for _ in range(8):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10.0, 1e-10)
    # last resort: eigenvalue clipping
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, 1e-10)
    return vecs * np.sqrt(vals)
