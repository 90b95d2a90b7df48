"""Gaussian copula synthesizer: per-column marginals + Gaussian dependence.

Continuous marginals are univariate Gaussian mixtures (component count picked
by BIC unless fixed through the hyperparameter); categorical columns map onto
[0, 1] through frequency-ordered contiguous intervals with uniform jitter
inside the interval. Columns are probit-transformed, the correlation matrix
is the MLE on the transformed scores, and sampling inverts the pipeline.
"""

from __future__ import annotations

import warnings
from typing import Any

import numpy as np
from scipy.special import ndtr, ndtri
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from ..data import Dataset
from ..errors import ConfigError
from ..rngs import child_seed
from ..tpe import IntParam, SearchSpace
from .base import BaseSynthesizer

_U_EPS = 1e-9
_EIG_FLOOR = 1e-8
_BIC_RANGE = (1, 5)
_MAX_EM_ITER = 200
_EM_TOL = 1e-6


class GaussianCopulaSynthesizer(BaseSynthesizer):
    method = "gaussian_copula"

    def __init__(
        self,
        marginal_components: int | None = None,
        random_state: int = 0,
        conditional: bool = False,
    ):
        super().__init__(random_state=random_state, conditional=conditional)
        self.marginal_components = marginal_components

    @classmethod
    def search_space(cls, frozen: bool = False) -> SearchSpace:
        if frozen:
            return SearchSpace(params=())
        return SearchSpace(params=(IntParam("marginal_components", *_BIC_RANGE),))

    @classmethod
    def default_theta(cls) -> dict[str, Any]:
        return {}

    def _fit_state(self, data: Dataset, rng: np.random.Generator) -> dict:
        marginals = []
        z_cols = []
        informative = []
        for j, col in enumerate(data.schema):
            x = data.values[:, j]
            if col.is_categorical:
                marginal = _fit_interval_marginal(x.astype(int), col.n_categories)
                u = _interval_transform(marginal, x.astype(int), rng)
            elif np.unique(x).size == 1:
                marginal = {"type": "constant", "value": float(x[0])}
                u = None
            else:
                marginal = _fit_gmm_marginal(x, self.marginal_components, rng, self)
                u = _gmm_cdf(marginal, x)
            marginals.append(marginal)
            if u is None:
                z_cols.append(np.zeros(data.n))
                informative.append(False)
            else:
                z_cols.append(ndtri(np.clip(u, _U_EPS, 1.0 - _U_EPS)))
                informative.append(True)

        z = np.column_stack(z_cols)
        corr = np.eye(len(data.schema))
        live = np.flatnonzero(informative)
        if live.size >= 2:
            sub = np.corrcoef(z[:, live], rowvar=False)
            sub = np.nan_to_num(sub, nan=0.0)
            np.fill_diagonal(sub, 1.0)
            corr[np.ix_(live, live)] = _nearest_psd(sub)
        return {"marginals": marginals, "correlation": corr}

    def _sample_state(self, state: dict, n: int, rng: np.random.Generator) -> np.ndarray:
        corr = np.asarray(state["correlation"], dtype=float)
        chol = _safe_cholesky(corr)
        z = rng.standard_normal((n, corr.shape[0])) @ chol.T
        u = ndtr(z)
        out = np.empty_like(u)
        for j, marginal in enumerate(state["marginals"]):
            kind = marginal["type"]
            if kind == "constant":
                out[:, j] = marginal["value"]
            elif kind == "intervals":
                out[:, j] = _interval_inverse(marginal, u[:, j])
            else:
                out[:, j] = _gmm_inverse_cdf(marginal, np.clip(u[:, j], _U_EPS, 1.0 - _U_EPS))
        return out


def _fit_gmm_marginal(
    x: np.ndarray,
    n_components: int | None,
    rng: np.random.Generator,
    owner: GaussianCopulaSynthesizer,
) -> dict:
    seed = int(rng.integers(2**31 - 1))
    candidates = range(_BIC_RANGE[0], _BIC_RANGE[1] + 1) if n_components is None else [n_components]
    best = None
    best_bic = np.inf
    xs = x.reshape(-1, 1)
    for k in candidates:
        k = min(k, np.unique(x).size)
        gm = GaussianMixture(
            n_components=k,
            covariance_type="diag",
            max_iter=_MAX_EM_ITER,
            tol=_EM_TOL,
            init_params="k-means++",
            random_state=child_seed(seed, k),
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            gm.fit(xs)
            if any(issubclass(w.category, ConvergenceWarning) for w in caught):
                owner.warning_flag_ = True
        bic = gm.bic(xs)
        if bic < best_bic:
            best_bic = bic
            best = gm
    return {
        "type": "gmm",
        "weights": np.asarray(best.weights_),
        "means": np.asarray(best.means_).ravel(),
        "stds": np.sqrt(np.asarray(best.covariances_)).ravel(),
    }


def _gmm_cdf(marginal: dict, x: np.ndarray) -> np.ndarray:
    w = marginal["weights"]
    m = marginal["means"]
    s = np.maximum(marginal["stds"], 1e-12)
    return (ndtr((x[:, None] - m[None, :]) / s[None, :]) * w[None, :]).sum(axis=1)


def _gmm_inverse_cdf(marginal: dict, u: np.ndarray) -> np.ndarray:
    m = marginal["means"]
    s = np.maximum(marginal["stds"], 1e-12)
    lo = np.full(u.shape, (m - 10.0 * s.max()).min())
    hi = np.full(u.shape, (m + 10.0 * s.max()).max())
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = _gmm_cdf(marginal, mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _fit_interval_marginal(codes: np.ndarray, n_categories: int) -> dict:
    freqs = np.bincount(codes, minlength=n_categories) / codes.size
    order = sorted(range(n_categories), key=lambda c: (-freqs[c], c))
    ordered_freqs = freqs[order]
    uppers = np.cumsum(ordered_freqs)
    uppers[-1] = 1.0
    return {
        "type": "intervals",
        "order": list(order),
        "uppers": uppers,
        "freqs": ordered_freqs,
    }


def _interval_transform(marginal: dict, codes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    position = np.empty(len(marginal["order"]), dtype=int)
    position[np.asarray(marginal["order"], dtype=int)] = np.arange(len(marginal["order"]))
    pos = position[codes]
    uppers = np.asarray(marginal["uppers"])
    freqs = np.asarray(marginal["freqs"])
    lowers = uppers - freqs
    return lowers[pos] + rng.uniform(0.0, 1.0, size=codes.size) * freqs[pos]


def _interval_inverse(marginal: dict, u: np.ndarray) -> np.ndarray:
    uppers = np.asarray(marginal["uppers"])
    order = np.asarray(marginal["order"], dtype=int)
    pos = np.minimum(np.searchsorted(uppers, u, side="right"), len(order) - 1)
    return order[pos].astype(float)


def _nearest_psd(corr: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(corr)
    if vals.min() >= _EIG_FLOOR:
        return corr
    vals = np.maximum(vals, _EIG_FLOOR)
    fixed = (vecs * vals) @ vecs.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    np.fill_diagonal(fixed, 1.0)
    return fixed


def _safe_cholesky(corr: np.ndarray) -> np.ndarray:
    jitter = 0.0
    for _ in range(6):
        try:
            return np.linalg.cholesky(corr + jitter * np.eye(corr.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10.0, 1e-10)
    raise ConfigError("correlation matrix is not positive definite after jitter")
