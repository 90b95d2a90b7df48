"""Bundled dataset generators and benchmark constructions.

Real census/fraud files may be absent in CI, so the harness ships seeded
generators producing stand-ins with the same shape: column-kind counts, label
shares, and a learnable signal calibrated so the downstream classifier lands
in a realistic AUC band. The benchmark constructions at the bottom build the
controlled landscapes the verification suite optimizes over.
"""

from __future__ import annotations

import numpy as np

from .data import BINARY, CONTINUOUS, MULTICLASS, ColumnSchema, Dataset
from .errors import ConfigError
from .rngs import child_rng

ADULT_N = 48842
ADULT_POSITIVE_SHARE = 0.2393
CREDIT_N = 50000
CREDIT_FRAUD_SHARE = 0.0018
CREDIT_BALANCED_RATIO = 0.5

BUILTIN_DATASETS = ("adult", "credit_imbalanced", "credit_balanced")


def make_builtin(name: str, n: int | None = None, seed: int = 0) -> Dataset:
    if name == "adult":
        return make_adult_like(n or ADULT_N, seed)
    if name == "credit_imbalanced":
        return make_credit_like(n or CREDIT_N, seed)
    if name == "credit_balanced":
        return make_credit_balanced(n or CREDIT_N, seed)
    raise ConfigError(f"unknown builtin dataset {name!r}; known: {BUILTIN_DATASETS}")


def make_adult_like(n: int = ADULT_N, seed: int = 0) -> Dataset:
    """Census-style table: 6 continuous, 2 binary, 7 multiclass columns.

    The income label marks the top round(0.2393 n) rows of a noisy latent
    score, reproducing the 76.07/23.93 class shares.
    """
    rng = child_rng(seed, 101)
    age = np.clip(17 + rng.gamma(shape=5.0, scale=4.6, size=n), 17, 90)
    education_years = np.clip(np.round(rng.normal(10.2, 2.6, n)), 1, 16)
    hours_per_week = np.clip(np.round(rng.normal(40.5, 11.0, n)), 1, 99)
    weight = np.round(rng.lognormal(11.0, 0.7, n))
    has_gain = rng.uniform(size=n) < 0.085
    capital_gain = np.where(has_gain, np.round(rng.lognormal(8.1, 1.1, n)), 0.0)
    has_loss = rng.uniform(size=n) < 0.047
    capital_loss = np.where(has_loss, np.round(rng.lognormal(7.4, 0.4, n)), 0.0)

    sex = (rng.uniform(size=n) < 0.669).astype(float)
    married_p = np.clip((age - 18.0) / 60.0, 0.05, 0.75)
    married = (rng.uniform(size=n) < married_p).astype(int)
    marital = np.where(
        married == 1, 0, rng.choice([1, 2, 3, 4], size=n, p=[0.55, 0.2, 0.15, 0.1])
    ).astype(float)

    skill = np.clip((education_years - 1) / 15.0 + rng.normal(0, 0.18, n), 0, 1)
    occupation = np.minimum((skill * 8).astype(int), 7).astype(float)
    workclass = rng.choice(5, size=n, p=[0.69, 0.13, 0.08, 0.06, 0.04]).astype(float)
    education_level = np.clip(((education_years - 1) // 3) + rng.integers(-1, 2, size=n), 0, 5).astype(float)
    relationship = np.where(
        married == 1,
        rng.choice([0, 1], size=n, p=[0.8, 0.2]),
        rng.choice([2, 3, 4, 5], size=n),
    ).astype(float)
    race = rng.choice(5, size=n, p=[0.855, 0.096, 0.031, 0.01, 0.008]).astype(float)
    country = rng.choice(10, size=n, p=[0.9, 0.02, 0.018, 0.012, 0.01, 0.01, 0.01, 0.01, 0.005, 0.005]).astype(float)

    score = (
        0.16 * education_years
        + 0.030 * hours_per_week
        + 0.024 * age
        + 1.15 * married
        + 0.30 * occupation
        + 0.55 * np.log1p(capital_gain)
        + 0.35 * sex
        + 0.09 * education_years * married
    )
    noisy = score + rng.logistic(0.0, 0.8, n)
    n_pos = round(ADULT_POSITIVE_SHARE * n)
    threshold_idx = np.argsort(-noisy)[:n_pos]
    income = np.zeros(n)
    income[threshold_idx] = 1.0

    schema = (
        ColumnSchema("age", CONTINUOUS),
        ColumnSchema("weight", CONTINUOUS),
        ColumnSchema("education_years", CONTINUOUS),
        ColumnSchema("capital_gain", CONTINUOUS),
        ColumnSchema("capital_loss", CONTINUOUS),
        ColumnSchema("hours_per_week", CONTINUOUS),
        ColumnSchema("sex", BINARY, ("female", "male")),
        ColumnSchema("income", BINARY, ("<=50k", ">50k")),
        ColumnSchema("workclass", MULTICLASS, tuple(f"workclass_{i}" for i in range(5))),
        ColumnSchema("education_level", MULTICLASS, tuple(f"level_{i}" for i in range(6))),
        ColumnSchema("marital_status", MULTICLASS, tuple(f"marital_{i}" for i in range(5))),
        ColumnSchema("occupation", MULTICLASS, tuple(f"occupation_{i}" for i in range(8))),
        ColumnSchema("relationship", MULTICLASS, tuple(f"relationship_{i}" for i in range(6))),
        ColumnSchema("race", MULTICLASS, tuple(f"race_{i}" for i in range(5))),
        ColumnSchema("native_country", MULTICLASS, tuple(f"country_{i}" for i in range(10))),
    )
    values = np.column_stack(
        [
            age,
            weight,
            education_years,
            capital_gain,
            capital_loss,
            hours_per_week,
            sex,
            income,
            workclass,
            education_level,
            marital,
            occupation,
            relationship,
            race,
            country,
        ]
    )
    return Dataset(schema, "income", values)


def make_credit_like(n: int = CREDIT_N, seed: int = 0, fraud_share: float = CREDIT_FRAUD_SHARE) -> Dataset:
    """Fraud-style table: 30 continuous columns and a highly imbalanced label."""
    rng = child_rng(seed, 202)
    n_fraud = max(int(round(fraud_share * n)), 2)
    labels = np.zeros(n)
    fraud_idx = rng.choice(n, size=n_fraud, replace=False)
    labels[fraud_idx] = 1.0

    components = rng.normal(0.0, 1.0, size=(n, 28))
    shift = np.zeros(28)
    shift[:8] = np.array([1.6, -1.4, 1.25, -1.1, 0.95, -0.8, 0.6, -0.5])
    components[fraud_idx] += shift + rng.normal(0.0, 0.9, size=(n_fraud, 28))
    seconds = np.sort(rng.uniform(0, 172800, n))
    amount = rng.lognormal(3.4, 1.1, n)
    amount[fraud_idx] = rng.lognormal(4.1, 1.5, n_fraud)

    schema = [ColumnSchema("time", CONTINUOUS)]
    schema += [ColumnSchema(f"v{i + 1}", CONTINUOUS) for i in range(28)]
    schema += [ColumnSchema("amount", CONTINUOUS), ColumnSchema("class", BINARY, ("0", "1"))]
    values = np.column_stack([seconds, components, amount, labels])
    return Dataset(tuple(schema), "class", values)


def make_credit_balanced(n: int = CREDIT_N, seed: int = 0) -> Dataset:
    """The rebalanced variant: the imbalanced table run through minority
    oversampling plus majority undersampling at a 1:2 ratio, which lands the
    class shares at 33.3/66.7 while keeping the row count."""
    from .preprocess import smote_balance

    fraud_share = max(CREDIT_FRAUD_SHARE, 8.0 / n)  # enough minority rows to interpolate
    raw = make_credit_like(n, seed, fraud_share=fraud_share)
    return smote_balance(raw, target_ratio=CREDIT_BALANCED_RATIO, seed=seed)


# --- benchmark constructions -------------------------------------------------


def make_piecewise(n: int = 3000, seed: int = 0, segments: int = 10, p_high: float = 0.92) -> Dataset:
    """Label probability alternates between p_high and 1-p_high across
    equal-width segments of one feature; a second feature is pure noise."""
    rng = child_rng(seed, 303)
    x = rng.uniform(0.0, 1.0, n)
    z = rng.uniform(0.0, 1.0, n)
    segment = np.minimum((x * segments).astype(int), segments - 1)
    p = np.where(segment % 2 == 0, p_high, 1.0 - p_high)
    y = (rng.uniform(size=n) < p).astype(float)
    schema = (
        ColumnSchema("x", CONTINUOUS),
        ColumnSchema("z", CONTINUOUS),
        ColumnSchema("y", BINARY, ("0", "1")),
    )
    return Dataset(schema, "y", np.column_stack([x, z, y]))


def make_two_regime(n: int = 2000, seed: int = 0, flip: float = 0.04) -> Dataset:
    """The label rule switches with the sign of a gate feature: one regime is
    decided by x1, the other by x2."""
    rng = child_rng(seed, 404)
    gate = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0) + rng.normal(0, 0.1, n)
    x1 = rng.normal(0.0, 1.0, n)
    x2 = rng.normal(0.0, 1.0, n)
    rule = np.where(gate < 0, x1 > 0, x2 > 0)
    noise = rng.uniform(size=n) < flip
    y = np.where(noise, ~rule, rule).astype(float)
    schema = (
        ColumnSchema("gate", CONTINUOUS),
        ColumnSchema("x1", CONTINUOUS),
        ColumnSchema("x2", CONTINUOUS),
        ColumnSchema("y", BINARY, ("0", "1")),
    )
    return Dataset(schema, "y", np.column_stack([gate, x1, x2, y]))


def make_two_cluster(n: int = 1200, seed: int = 0, separation: float = 2.4, positive_share: float = 0.35) -> Dataset:
    """Two Gaussian clusters, one per class, with tunable overlap."""
    rng = child_rng(seed, 505)
    y = (rng.uniform(size=n) < positive_share).astype(float)
    x = rng.normal(0.0, 1.0, size=(n, 4))
    x[y == 1, :2] += separation
    schema = tuple(ColumnSchema(f"f{i}", CONTINUOUS) for i in range(4)) + (
        ColumnSchema("y", BINARY, ("0", "1")),
    )
    return Dataset(schema, "y", np.column_stack([x, y]))


def make_xor(n: int = 2000, seed: int = 0, flip: float = 0.03) -> Dataset:
    """Label is the XOR of two feature signs: marginals carry no signal."""
    rng = child_rng(seed, 606)
    x1 = rng.normal(0.0, 1.0, n)
    x2 = rng.normal(0.0, 1.0, n)
    rule = (x1 > 0) ^ (x2 > 0)
    noise = rng.uniform(size=n) < flip
    y = np.where(noise, ~rule, rule).astype(float)
    schema = (
        ColumnSchema("x1", CONTINUOUS),
        ColumnSchema("x2", CONTINUOUS),
        ColumnSchema("y", BINARY, ("0", "1")),
    )
    return Dataset(schema, "y", np.column_stack([x1, x2, y]))


def shuffle_labels(d: Dataset, seed: int = 0) -> Dataset:
    """Detach the label from the features by permuting the label column."""
    rng = child_rng(seed, 707)
    values = np.array(d.values)
    j = d.label_index
    values[:, j] = values[rng.permutation(d.n), j]
    return d.with_values(values)
