"""Gradient-boosted decision trees for binary classification on logistic loss.

Trees are grown greedily with second-order gradient statistics; split
candidates are capped at per-feature quantile thresholds so training stays
fast at desk scale. The trained model is an ordered list of regression trees
whose leaf values are log-odds increments on top of a prior log-odds base
score.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .errors import DataError, SingleClassError

_MIN_GAIN = 1e-12
_PROB_EPS = 1e-15


@dataclass(frozen=True)
class GbdtConfig:
    """Training configuration; defaults mirror a stock boosted-trees setup."""

    n_rounds: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    max_bins: int = 256

    def fingerprint(self) -> str:
        """Stable digest used to assert one config is shared across a comparison."""
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@dataclass
class Tree:
    """One regression tree as parallel node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] < self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.value[node]


@dataclass
class GbdtModel:
    """Fitted booster: ``base_score`` is prior log-odds, trees add to it."""

    trees: list[Tree]
    learning_rate: float
    base_score: float
    n_features: int
    config: GbdtConfig = field(default_factory=GbdtConfig)
    train_losses: np.ndarray | None = None

    def margins(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(
                f"feature matrix has {X.shape[1] if X.ndim == 2 else '?'} columns, model expects {self.n_features}"
            )
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.margins(X))


def predict_proba(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    """Positive-class scores in (0, 1), one per input row."""
    return model.predict_proba(X)


def train_classifier(train: Dataset, config: GbdtConfig = GbdtConfig()) -> GbdtModel:
    """Fit the downstream boosted-trees classifier on a dataset's features."""
    y = train.labels()
    if np.unique(y).size < 2:
        raise SingleClassError("training data contains a single class")
    X = train.features()
    return fit_gbdt(X, y.astype(float), config)


def fit_gbdt(X: np.ndarray, y: np.ndarray, config: GbdtConfig = GbdtConfig()) -> GbdtModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.unique(y).size < 2:
        raise SingleClassError("training data contains a single class")
    n, n_features = X.shape

    cuts = [_make_cuts(X[:, j], config.max_bins) for j in range(n_features)]
    codes = np.empty((n, n_features), dtype=np.int32)
    for j in range(n_features):
        codes[:, j] = np.searchsorted(cuts[j], X[:, j], side="right")

    p0 = min(max(float(y.mean()), _PROB_EPS), 1.0 - _PROB_EPS)
    base = float(np.log(p0 / (1.0 - p0)))
    margin = np.full(n, base)

    trees: list[Tree] = []
    losses = np.empty(config.n_rounds)
    for t in range(config.n_rounds):
        p = _sigmoid(margin)
        grad = p - y
        hess = p * (1.0 - p)
        tree = _grow_tree(codes, cuts, grad, hess, config)
        trees.append(tree)
        margin += config.learning_rate * tree.predict(X)
        losses[t] = float(np.mean(np.logaddexp(0.0, margin) - y * margin))
    return GbdtModel(
        trees=trees,
        learning_rate=config.learning_rate,
        base_score=base,
        n_features=n_features,
        config=config,
        train_losses=losses,
    )


def _sigmoid(margin: np.ndarray) -> np.ndarray:
    p = 1.0 / (1.0 + np.exp(-margin))
    return np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)


def _make_cuts(x: np.ndarray, max_bins: int) -> np.ndarray:
    uniq = np.unique(x)
    if uniq.size <= 1:
        return np.empty(0)
    if uniq.size <= max_bins:
        return (uniq[1:] + uniq[:-1]) / 2.0
    qs = np.quantile(x, np.linspace(0.0, 1.0, max_bins + 1)[1:-1])
    return np.unique(qs)


def _grow_tree(
    codes: np.ndarray,
    cuts: list[np.ndarray],
    grad: np.ndarray,
    hess: np.ndarray,
    config: GbdtConfig,
) -> Tree:
    n_features = codes.shape[1]
    lam = config.reg_lambda
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(codes.shape[0]), 0)]
    while stack:
        node_id, idx, depth = stack.pop()
        g_sum = float(grad[idx].sum())
        h_sum = float(hess[idx].sum())
        if depth >= config.max_depth or idx.size < 2:
            value[node_id] = -g_sum / (h_sum + lam)
            continue

        best_gain = _MIN_GAIN
        best = None
        parent_score = g_sum * g_sum / (h_sum + lam)
        for j in range(n_features):
            m = cuts[j].size
            if m == 0:
                continue
            col = codes[idx, j]
            gb = np.bincount(col, weights=grad[idx], minlength=m + 1)
            hb = np.bincount(col, weights=hess[idx], minlength=m + 1)
            cb = np.bincount(col, minlength=m + 1)
            gl = np.cumsum(gb)[:m]
            hl = np.cumsum(hb)[:m]
            cl = np.cumsum(cb)[:m]
            gr = g_sum - gl
            hr = h_sum - hl
            cr = idx.size - cl
            ok = (
                (cl > 0)
                & (cr > 0)
                & (hl >= config.min_child_weight)
                & (hr >= config.min_child_weight)
            )
            if not ok.any():
                continue
            gains = np.where(
                ok,
                0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score),
                -np.inf,
            )
            t = int(np.argmax(gains))
            if gains[t] > best_gain:
                best_gain = float(gains[t])
                best = (j, t)

        if best is None:
            value[node_id] = -g_sum / (h_sum + lam)
            continue
        j, t = best
        go_left = codes[idx, j] <= t
        l_id, r_id = new_node(), new_node()
        feature[node_id] = j
        threshold[node_id] = float(cuts[j][t])
        left[node_id] = l_id
        right[node_id] = r_id
        stack.append((l_id, idx[go_left], depth + 1))
        stack.append((r_id, idx[~go_left], depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )


class GbdtClassifier:
    """Estimator-style wrapper: ``fit(X, y)`` then ``predict_proba(X)``.

    ``predict_proba`` returns the usual (n, 2) column layout so the model can
    slot into pipelines expecting that shape.
    """

    def __init__(
        self,
        n_rounds: int = 100,
        max_depth: int = 6,
        learning_rate: float = 0.3,
        min_child_weight: float = 1.0,
        reg_lambda: float = 1.0,
        max_bins: int = 256,
    ):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_child_weight = min_child_weight
        self.reg_lambda = reg_lambda
        self.max_bins = max_bins

    def get_params(self, deep: bool = True) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "min_child_weight": self.min_child_weight,
            "reg_lambda": self.reg_lambda,
            "max_bins": self.max_bins,
        }

    def set_params(self, **params) -> "GbdtClassifier":
        for key, val in params.items():
            if not hasattr(self, key):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, val)
        return self

    def _config(self) -> GbdtConfig:
        return GbdtConfig(**self.get_params())

    def fit(self, X, y) -> "GbdtClassifier":
        self.model_ = fit_gbdt(np.asarray(X, dtype=float), np.asarray(y, dtype=float), self._config())
        return self

    def predict_proba(self, X) -> np.ndarray:
        scores = self.model_.predict_proba(np.asarray(X, dtype=float))
        return np.column_stack([1.0 - scores, scores])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)
