"""Feature preprocessing: smoothed target encoding and minority-class balancing."""

from __future__ import annotations

import numpy as np
from sklearn.neighbors import NearestNeighbors

from .data import CONTINUOUS, ColumnSchema, Dataset
from .errors import DataError

DEFAULT_SMOOTHING = 10.0
DEFAULT_K_NEIGHBORS = 5
DEFAULT_TARGET_RATIO = 0.5


def target_encode(train: Dataset, apply_to: Dataset, smoothing: float = DEFAULT_SMOOTHING) -> Dataset:
    """Replace categorical non-label columns by smoothed per-category label means.

    Category c with n_c training rows and in-category label mean m_c encodes to
    (n_c * m_c + smoothing * g) / (n_c + smoothing) where g is the global
    training label mean; categories unseen in training encode to g. Statistics
    come from ``train`` only; the encoded columns become continuous.
    """
    if smoothing <= 0:
        raise DataError(f"smoothing must be positive, got {smoothing}")
    if tuple(c.name for c in train.schema) != tuple(c.name for c in apply_to.schema):
        raise DataError("train and apply_to must share the schema")
    y = train.labels().astype(float)
    g = float(y.mean())

    new_schema: list[ColumnSchema] = []
    new_values = np.array(apply_to.values, dtype=float)
    for j, col in enumerate(train.schema):
        if col.name == train.label or not col.is_categorical:
            new_schema.append(col)
            continue
        encoding = np.full(col.n_categories, g)
        train_codes = train.values[:, j].astype(int)
        for c in range(col.n_categories):
            mask = train_codes == c
            n_c = int(mask.sum())
            if n_c:
                m_c = float(y[mask].mean())
                encoding[c] = (n_c * m_c + smoothing * g) / (n_c + smoothing)
        new_values[:, j] = encoding[apply_to.values[:, j].astype(int)]
        new_schema.append(ColumnSchema(col.name, CONTINUOUS))
    return Dataset(tuple(new_schema), apply_to.label, new_values)


def smote_balance(
    d: Dataset,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
    target_ratio: float = DEFAULT_TARGET_RATIO,
    seed: int = 0,
) -> Dataset:
    """Rebalance classes to minority/majority = target_ratio at constant row count.

    Minority rows are augmented with interpolated points x + lam * (x_nn - x),
    lam ~ Uniform(0, 1), x_nn one of the k nearest minority neighbours in
    Euclidean feature distance; majority rows are undersampled without
    replacement. All feature columns must already be continuous.
    """
    if not 0 < target_ratio <= 1:
        raise DataError(f"target_ratio must lie in (0, 1], got {target_ratio}")
    for col in d.feature_columns():
        if col.is_categorical:
            raise DataError(f"categorical feature column {col.name!r}; encode before balancing")
    y = d.labels()
    counts = np.bincount(y, minlength=2)
    if counts.min() == 0:
        raise DataError("both classes required for balancing")
    minority = int(np.argmin(counts))
    if counts[minority] < 2:
        raise DataError("minority class needs at least 2 rows to interpolate")
    if k_neighbors >= counts[minority]:
        raise DataError(
            f"k_neighbors={k_neighbors} must be below the minority count {counts[minority]}"
        )

    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    min_idx = np.flatnonzero(y == minority)
    maj_idx = np.flatnonzero(y != minority)
    feat_j = [j for j in range(len(d.schema)) if j != d.label_index]

    # Growing the minority share keeps the total row count and undersamples the
    # majority; shrinking it keeps the majority intact and thins the minority.
    n_min_out = round(d.n * target_ratio / (1.0 + target_ratio))
    if n_min_out >= len(min_idx):
        base = d.values[min_idx]
        nn = NearestNeighbors(n_neighbors=k_neighbors + 1).fit(base[:, feat_j])
        neighbors = nn.kneighbors(base[:, feat_j], return_distance=False)[:, 1:]
        n_synth = n_min_out - len(min_idx)
        anchors = rng.integers(0, len(min_idx), size=n_synth)
        picks = neighbors[anchors, rng.integers(0, k_neighbors, size=n_synth)]
        lam = rng.uniform(0.0, 1.0, size=n_synth)
        synth = np.array(base[anchors])
        delta = base[picks][:, feat_j] - base[anchors][:, feat_j]
        synth[:, feat_j] = base[anchors][:, feat_j] + lam[:, None] * delta
        min_rows = np.vstack([base, synth])
        n_maj_out = d.n - n_min_out
    else:
        n_min_out = round(target_ratio * len(maj_idx))
        min_rows = d.values[rng.choice(min_idx, size=n_min_out, replace=False)]
        n_maj_out = len(maj_idx)

    maj_rows = d.values[rng.choice(maj_idx, size=n_maj_out, replace=False)]
    return d.with_values(np.vstack([min_rows, maj_rows]))
