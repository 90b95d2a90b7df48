"""Common fit/sample surface of the synthesizer family.

Every synthesizer is an estimator: hyperparameters go into ``__init__`` (so
``get_params`` round-trips them), ``fit(dataset)`` learns state into
trailing-underscore attributes, and ``sample(n, seed)`` draws a new Dataset
matching the training schema. Fitting with ``conditional=True`` additionally
fits one sub-model per label class so ``sample_conditional`` can target exact
class shares.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
from sklearn.base import BaseEstimator

from ..allocation import largest_remainder_allocation
from ..data import ColumnSchema, Dataset, concat
from ..errors import ConfigError, DataError
from ..rngs import child_rng
from ..tpe import SearchSpace

SERIALIZATION_VERSION = 1


class BaseSynthesizer(BaseEstimator):
    """Shared plumbing; subclasses implement _fit_state and _sample_state."""

    method: str = ""

    def __init__(self, random_state: int = 0, conditional: bool = False):
        self.random_state = random_state
        self.conditional = conditional

    # subclass API ---------------------------------------------------------
    @classmethod
    def search_space(cls, frozen: bool = False) -> SearchSpace:
        raise NotImplementedError

    @classmethod
    def default_theta(cls) -> dict[str, Any]:
        raise NotImplementedError

    def _fit_state(self, data: Dataset, rng: np.random.Generator) -> dict:
        raise NotImplementedError

    def _sample_state(self, state: dict, n: int, rng: np.random.Generator) -> np.ndarray:
        """Return an (n, n_columns) cell matrix drawn from the fitted state."""
        raise NotImplementedError

    # shared behaviour ------------------------------------------------------
    def theta(self) -> dict[str, Any]:
        params = self.get_params()
        params.pop("random_state", None)
        params.pop("conditional", None)
        return params

    def _validate_theta(self) -> None:
        # None means "unset" (e.g. the copula's component count in frozen
        # mode); every set value must lie in its declared domain
        space = self.search_space(frozen=False)
        theta = self.theta()
        for p in space.params:
            if theta.get(p.name) is not None:
                SearchSpace(params=(p,)).validate_point({p.name: theta[p.name]})

    def fit(self, data: Dataset) -> "BaseSynthesizer":
        if data.n < 2:
            raise DataError(f"{self.method}: need at least 2 training rows, got {data.n}")
        self._validate_theta()
        self.schema_ = data.schema
        self.label_ = data.label
        self.n_train_ = data.n
        self.warning_flag_ = False
        self.state_ = self._fit_state(data, child_rng(self.random_state, 0))
        self.class_states_ = None
        if self.conditional:
            labels = data.labels()
            self.class_states_ = {}
            for cls in (0, 1):
                idx = np.flatnonzero(labels == cls)
                if idx.size >= 1:
                    self.class_states_[cls] = self._fit_state(
                        data.take(idx), child_rng(self.random_state, 1 + cls)
                    )
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "state_"):
            raise ConfigError(f"{self.method}: sample before fit")

    def sample(self, n: int, seed: int = 0) -> Dataset:
        self._check_fitted()
        if n < 0:
            raise ConfigError("sample size must be >= 0")
        if n == 0:
            values = np.empty((0, len(self.schema_)))
        else:
            values = self._sample_state(self.state_, n, child_rng(seed, 0))
        return Dataset(self.schema_, self.label_, values)

    def sample_conditional(self, n: int, class_shares: dict[int, float], seed: int = 0) -> Dataset:
        """Draw with exact per-class row counts from the per-class sub-models."""
        self._check_fitted()
        if self.class_states_ is None:
            raise ConfigError(f"{self.method}: fit with conditional=True to sample conditionally")
        shares = {int(k): float(v) for k, v in class_shares.items()}
        if abs(sum(shares.values()) - 1.0) > 1e-9:
            raise ConfigError(f"class shares must sum to 1, got {sum(shares.values())}")
        for cls, share in shares.items():
            if share > 0 and cls not in self.class_states_:
                raise DataError(f"class {cls} absent from training data")
        classes = sorted(shares)
        counts = largest_remainder_allocation(np.array([shares[c] for c in classes]), n)
        label_j = [c.name for c in self.schema_].index(self.label_)
        blocks = []
        for cls, cnt in zip(classes, counts):
            if cnt == 0:
                continue
            values = self._sample_state(self.class_states_[cls], int(cnt), child_rng(seed, 1 + cls))
            values[:, label_j] = cls
            blocks.append(Dataset(self.schema_, self.label_, values))
        if not blocks:
            return Dataset(self.schema_, self.label_, np.empty((0, len(self.schema_))))
        return concat(blocks)

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        self._check_fitted()
        doc = {
            "version": SERIALIZATION_VERSION,
            "method": self.method,
            "params": _jsonable(self.get_params()),
            "label": self.label_,
            "n_train": self.n_train_,
            "warning_flag": self.warning_flag_,
            "schema": [
                {"name": c.name, "kind": c.kind, "categories": list(c.categories) if c.categories else None}
                for c in self.schema_
            ],
            "state": _jsonable(self.state_),
            "class_states": None
            if self.class_states_ is None
            else {str(k): _jsonable(v) for k, v in self.class_states_.items()},
        }
        return doc

    @classmethod
    def _restore(cls, doc: dict) -> "BaseSynthesizer":
        if doc.get("version") != SERIALIZATION_VERSION:
            raise ConfigError(f"unsupported synthesizer format version {doc.get('version')!r}")
        inst = cls(**doc["params"])
        inst.schema_ = tuple(
            ColumnSchema(c["name"], c["kind"], tuple(c["categories"]) if c["categories"] else None)
            for c in doc["schema"]
        )
        inst.label_ = doc["label"]
        inst.n_train_ = doc["n_train"]
        inst.warning_flag_ = doc.get("warning_flag", False)
        inst.state_ = inst._state_from_dict(doc["state"])
        raw = doc.get("class_states")
        inst.class_states_ = (
            None if raw is None else {int(k): inst._state_from_dict(v) for k, v in raw.items()}
        )
        return inst

    def _state_from_dict(self, state: dict) -> dict:
        """Hook for subclasses whose state holds numpy arrays."""
        return _arrays_from_lists(state)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "shape": list(obj.shape)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _arrays_from_lists(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=float).reshape(obj["shape"])
        return {k: _arrays_from_lists(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_arrays_from_lists(v) for v in obj]
    return obj
