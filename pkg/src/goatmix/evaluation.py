"""Downstream-utility scoring: AUC and the train-on-synthetic evaluation pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DataError, SingleClassError
from .gbdt import GbdtConfig, GbdtModel, train_classifier

DEGENERATE_AUC = 0.5


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties at 1/2.

    Computed from average ranks (the Mann-Whitney statistic), which equals
    brute-force counting over all positive/negative pairs.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DataError("scores and labels must be equal-length vectors")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("AUC needs both classes present")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=float)
    sorted_scores = scores[order]
    # average ranks within tied groups, 1-based
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [scores.size]])
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = 0.5 * (s + 1 + e)
    rank_sum_pos = float(ranks[labels == 1].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class EvalResult:
    """Validation-style score of one model on one labelled dataset."""

    auc: float
    n_pos: int
    n_neg: int
    degenerate: bool = False

    @property
    def loss(self) -> float:
        return -self.auc


def score_model(model: GbdtModel, data: Dataset) -> EvalResult:
    scores = model.predict_proba(data.features())
    labels = data.labels()
    value = auc(scores, labels)
    return EvalResult(auc=value, n_pos=int(labels.sum()), n_neg=int(data.n - labels.sum()))


def evaluate_synthetic(
    synthetic: Dataset, eval_on: Dataset, config: GbdtConfig = GbdtConfig()
) -> EvalResult:
    """Train the downstream classifier on synthetic rows, score AUC on eval_on.

    Synthetic data that collapsed to a single class cannot train a classifier;
    that case is reported as the coin-flip AUC 0.5 with a degenerate flag
    rather than raised, so optimization loops keep going.
    """
    if synthetic.n == 0:
        return _degenerate(eval_on)
    try:
        model = train_classifier(synthetic, config)
        return score_model(model, eval_on)
    except SingleClassError:
        return _degenerate(eval_on)


def _degenerate(eval_on: Dataset) -> EvalResult:
    labels = eval_on.labels()
    return EvalResult(
        auc=DEGENERATE_AUC,
        n_pos=int(labels.sum()),
        n_neg=int(eval_on.n - labels.sum()),
        degenerate=True,
    )
