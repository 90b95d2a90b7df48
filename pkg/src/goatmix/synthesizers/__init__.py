"""The synthesizer family: four methods behind one fit/sample surface."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..data import Dataset
from ..errors import ConfigError
from ..tpe import SearchSpace
from .base import BaseSynthesizer
from .copula import GaussianCopulaSynthesizer
from .histogram import HistogramSynthesizer
from .kde import KdePerturbSynthesizer
from .mixture import JointMixtureSynthesizer

METHODS: tuple[str, ...] = (
    GaussianCopulaSynthesizer.method,
    JointMixtureSynthesizer.method,
    HistogramSynthesizer.method,
    KdePerturbSynthesizer.method,
)

_CLASSES: dict[str, type[BaseSynthesizer]] = {
    cls.method: cls
    for cls in (
        GaussianCopulaSynthesizer,
        JointMixtureSynthesizer,
        HistogramSynthesizer,
        KdePerturbSynthesizer,
    )
}


def synthesizer_class(method: str) -> type[BaseSynthesizer]:
    try:
        return _CLASSES[method]
    except KeyError:
        raise ConfigError(f"unknown synthesizer method {method!r}; known: {METHODS}") from None


def make_synthesizer(
    method: str,
    theta: dict[str, Any] | None = None,
    seed: int = 0,
    conditional: bool = False,
) -> BaseSynthesizer:
    cls = synthesizer_class(method)
    kwargs = dict(theta or {})
    allowed = set(cls().get_params()) - {"random_state", "conditional"}
    unknown = set(kwargs) - allowed
    if unknown:
        raise ConfigError(f"{method}: unknown hyperparameters {sorted(unknown)}")
    return cls(**kwargs, random_state=seed, conditional=conditional)


def fit(
    method: str,
    train: Dataset,
    theta: dict[str, Any] | None = None,
    seed: int = 0,
    conditional: bool = False,
) -> BaseSynthesizer:
    """Fit one family member on training data; returns the fitted instance."""
    return make_synthesizer(method, theta, seed, conditional).fit(train)


def sample(synth: BaseSynthesizer, n: int, seed: int = 0) -> Dataset:
    return synth.sample(n, seed)


def sample_conditional(
    synth: BaseSynthesizer, n: int, class_shares: dict[int, float], seed: int = 0
) -> Dataset:
    return synth.sample_conditional(n, class_shares, seed)


def search_space(method: str, frozen: bool = True) -> SearchSpace:
    """Tunable hyperparameter domains of a method.

    ``frozen`` only affects the Gaussian copula, whose space collapses to
    empty in that mode (its marginals then pick their own component count).
    """
    cls = synthesizer_class(method)
    if method == GaussianCopulaSynthesizer.method:
        return cls.search_space(frozen=frozen)
    return cls.search_space()


def default_theta(method: str) -> dict[str, Any]:
    return synthesizer_class(method).default_theta()


def from_dict(doc: dict) -> BaseSynthesizer:
    method = doc.get("method")
    return synthesizer_class(method)._restore(doc)


def from_json(text: str) -> BaseSynthesizer:
    return from_dict(json.loads(text))


def load_synthesizer(path: str | Path) -> BaseSynthesizer:
    return from_json(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "METHODS",
    "BaseSynthesizer",
    "GaussianCopulaSynthesizer",
    "JointMixtureSynthesizer",
    "HistogramSynthesizer",
    "KdePerturbSynthesizer",
    "synthesizer_class",
    "make_synthesizer",
    "fit",
    "sample",
    "sample_conditional",
    "search_space",
    "default_theta",
    "from_dict",
    "from_json",
    "load_synthesizer",
]
