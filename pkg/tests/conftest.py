import numpy as np
import pytest

from goatmix.data import BINARY, CONTINUOUS, ColumnSchema, Dataset, split
from goatmix.gbdt import GbdtConfig


@pytest.fixture(scope="session")
def fast_clf():
    """Small classifier config shared by loop tests; fairness only requires
    one config within a comparison, not the full-size default."""
    return GbdtConfig(n_rounds=30, max_depth=4)


def make_numeric_dataset(n=400, seed=0, n_features=2, signal=1.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n_features))
    y = (signal * x[:, 0] + rng.normal(0, 0.5, n) > 0).astype(float)
    schema = tuple(ColumnSchema(f"f{i}", CONTINUOUS) for i in range(n_features)) + (
        ColumnSchema("y", BINARY, ("0", "1")),
    )
    return Dataset(schema, "y", np.column_stack([x, y]))


@pytest.fixture()
def numeric_dataset():
    return make_numeric_dataset()


@pytest.fixture()
def numeric_partition():
    return split(make_numeric_dataset(n=600, seed=3), seed=3)
