"""Tree-structured Parzen Estimator optimization over mixed search spaces.

The sampler is fully factorized: each parameter gets its own univariate
density pair. Past trials are split at the gamma-quantile of losses into a
good and a bad set; candidates are drawn from the good-set density l(x) and
ranked by the density ratio l(x)/g(x). Numeric kernels are Gaussians
truncated to the (transformed) domain with bandwidths set from adjacent-point
spacing; categorical densities are add-one smoothed counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError

GAMMA = 0.25
N_STARTUP = 10
N_CANDIDATES = 24

WARM_START = "warm_start"
SUGGESTED = "suggested"

_SIGMA_FLOOR_DIVISOR = 100.0
_TRUNC_DRAW_RETRIES = 100


@dataclass(frozen=True)
class UniformParam:
    name: str
    lo: float
    hi: float

    log = False
    integer = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigError(f"{self.name}: lo must be below hi")


@dataclass(frozen=True)
class LogUniformParam:
    name: str
    lo: float
    hi: float

    log = True
    integer = False

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ConfigError(f"{self.name}: need 0 < lo < hi for a log scale")


@dataclass(frozen=True)
class IntParam:
    name: str
    lo: int
    hi: int
    log: bool = False

    integer = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigError(f"{self.name}: lo must be below hi")
        if self.log and self.lo < 1:
            raise ConfigError(f"{self.name}: log-scaled integers need lo >= 1")


@dataclass(frozen=True)
class CategoricalParam:
    name: str
    choices: tuple[Any, ...]

    def __post_init__(self):
        if not self.choices:
            raise ConfigError(f"{self.name}: choices must be nonempty")


NumericParam = UniformParam | LogUniformParam | IntParam
ParamSpec = NumericParam | CategoricalParam


def simplex_params(name: str, dim: int) -> list[UniformParam]:
    """Expand a simplex(dim) into dim independent Uniform(0,1) coordinates.

    The drawn coordinates are turned into mixture weights by normalize_simplex
    after suggestion; the optimizer itself only ever sees the raw uniforms.
    """
    if dim < 2:
        raise ConfigError("simplex needs dim >= 2")
    return [UniformParam(f"{name}_{i}", 0.0, 1.0) for i in range(dim)]


def normalize_simplex(raw: Iterable[float]) -> np.ndarray:
    """Scale raw non-negative coordinates to sum to one."""
    vec = np.asarray(list(raw), dtype=float)
    if vec.ndim != 1 or vec.size < 2:
        raise ConfigError("simplex vector needs at least 2 coordinates")
    if (vec < 0).any():
        raise ConfigError("simplex coordinates must be non-negative")
    total = vec.sum()
    if total == 0.0:
        return np.full(vec.size, 1.0 / vec.size)
    return vec / total


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate parameter names in search space")

    def __len__(self) -> int:
        return len(self.params)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def validate_point(self, point: dict[str, Any]) -> None:
        if set(point) != set(self.names):
            raise ConfigError(f"point keys {sorted(point)} != space params {sorted(self.names)}")
        for p in self.params:
            v = point[p.name]
            if isinstance(p, CategoricalParam):
                if v not in p.choices:
                    raise ConfigError(f"{p.name}: {v!r} not among choices")
            else:
                if p.integer and v != int(v):
                    raise ConfigError(f"{p.name}: expected integer, got {v!r}")
                if not (p.lo <= v <= p.hi):
                    raise ConfigError(f"{p.name}: {v!r} outside [{p.lo}, {p.hi}]")

    def prior_sample(self, rng: np.random.Generator) -> dict[str, Any]:
        return {p.name: _prior_draw(p, rng) for p in self.params}


@dataclass(frozen=True)
class Trial:
    point: dict[str, Any]
    loss: float
    tag: str
    iteration: int


@dataclass
class TrialHistory:
    """Append-only log of evaluated points over one search space."""

    space: SearchSpace
    seed: int = 0
    trials: list[Trial] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trials)

    def record(self, point: dict[str, Any], loss: float, tag: str = SUGGESTED) -> Trial:
        self.space.validate_point(point)
        if not math.isfinite(loss):
            raise ValueError(f"loss must be finite, got {loss}")
        trial = Trial(point=dict(point), loss=float(loss), tag=tag, iteration=len(self.trials))
        self.trials.append(trial)
        return trial

    def losses(self) -> np.ndarray:
        return np.array([t.loss for t in self.trials])

    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("history is empty")
        idx = int(np.argmin(self.losses()))  # argmin takes the earliest on ties
        return self.trials[idx]

    def should_stop(self, patience: int) -> bool:
        """True iff the running best has not strictly improved in the last
        `patience` trials."""
        if patience < 1:
            raise ValueError("patience must be >= 1")
        if not self.trials:
            return False
        losses = self.losses()
        best = math.inf
        last_improvement = 0
        for i, loss in enumerate(losses):
            if loss < best:
                best = loss
                last_improvement = i
        return len(losses) - 1 - last_improvement >= patience

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"iteration": t.iteration, "point": t.point, "loss": t.loss, "tag": t.tag},
                sort_keys=True,
            )
            for t in self.trials
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str, space: SearchSpace, seed: int = 0) -> "TrialHistory":
        history = cls(space=space, seed=seed)
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            history.record(rec["point"], rec["loss"], rec["tag"])
        return history


class TPEOptimizer:
    """Sequential suggest/record loop holding its own trial history."""

    def __init__(
        self,
        space: SearchSpace,
        seed: int = 0,
        gamma: float = GAMMA,
        n_startup: int = N_STARTUP,
        n_candidates: int = N_CANDIDATES,
    ):
        self.space = space
        self.seed = seed
        self.gamma = gamma
        self.n_startup = n_startup
        self.n_candidates = n_candidates
        self.history = TrialHistory(space=space, seed=seed)

    def record(self, point: dict[str, Any], loss: float, tag: str = SUGGESTED) -> Trial:
        return self.history.record(point, loss, tag)

    def best(self) -> Trial:
        return self.history.best()

    def should_stop(self, patience: int) -> bool:
        return self.history.should_stop(patience)

    def suggest(self) -> dict[str, Any]:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, len(self.history)]))
        trials = self.history.trials
        if len(trials) < self.n_startup:
            return self.space.prior_sample(rng)

        order = sorted(range(len(trials)), key=lambda i: (trials[i].loss, i))
        n_good = max(1, math.ceil(self.gamma * len(trials)))
        good = [trials[i] for i in order[:n_good]]
        bad = [trials[i] for i in order[n_good:]]
        if not bad:
            return self.space.prior_sample(rng)

        candidates: list[dict[str, Any]] = []
        scores = np.zeros(self.n_candidates)
        for p in self.space.params:
            good_vals = [t.point[p.name] for t in good]
            bad_vals = [t.point[p.name] for t in bad]
            if isinstance(p, CategoricalParam):
                drawn, delta = _categorical_candidates(p, good_vals, bad_vals, self.n_candidates, rng)
            else:
                drawn, delta = _numeric_candidates(p, good_vals, bad_vals, self.n_candidates, rng)
            scores += delta
            for i, v in enumerate(drawn):
                if len(candidates) <= i:
                    candidates.append({})
                candidates[i][p.name] = v
        winner = candidates[int(np.argmax(scores))]
        self.space.validate_point(winner)
        return winner


def _prior_draw(p: ParamSpec, rng: np.random.Generator) -> Any:
    if isinstance(p, CategoricalParam):
        return p.choices[int(rng.integers(len(p.choices)))]
    a, b = _domain(p)
    v = _from_transformed(p, rng.uniform(a, b))
    return v


def _domain(p: NumericParam) -> tuple[float, float]:
    if p.log:
        return math.log(p.lo), math.log(p.hi)
    return float(p.lo), float(p.hi)


def _to_transformed(p: NumericParam, v: float) -> float:
    return math.log(v) if p.log else float(v)


def _from_transformed(p: NumericParam, x: float) -> Any:
    v = math.exp(x) if p.log else x
    if p.integer:
        return int(min(max(round(v), p.lo), p.hi))
    return float(min(max(v, p.lo), p.hi))


def _bandwidths(points: np.ndarray, a: float, b: float) -> np.ndarray:
    """Per-kernel widths from adjacent spacing, domain edges as neighbours."""
    order = np.argsort(points)
    srt = points[order]
    padded = np.concatenate([[a], srt, [b]])
    gaps_left = srt - padded[:-2]
    gaps_right = padded[2:] - srt
    sigma = np.maximum(gaps_left, gaps_right)
    width = b - a
    floor = width / min(_SIGMA_FLOOR_DIVISOR, 1.0 + points.size)
    sigma = np.clip(sigma, floor, width)
    out = np.empty_like(sigma)
    out[order] = sigma
    return out


def _trunc_normal_draw(rng: np.random.Generator, mu: float, sigma: float, a: float, b: float) -> float:
    for _ in range(_TRUNC_DRAW_RETRIES):
        x = rng.normal(mu, sigma)
        if a <= x <= b:
            return x
    return float(min(max(mu, a), b))


def _trunc_mixture_logpdf(x: np.ndarray, mus: np.ndarray, sigmas: np.ndarray, a: float, b: float) -> np.ndarray:
    z = (x[:, None] - mus[None, :]) / sigmas[None, :]
    log_phi = -0.5 * z * z - 0.5 * math.log(2 * math.pi) - np.log(sigmas)[None, :]
    mass = ndtr((b - mus) / sigmas) - ndtr((a - mus) / sigmas)
    mass = np.maximum(mass, 1e-300)
    comp = log_phi - np.log(mass)[None, :]
    m = comp.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(comp - m).sum(axis=1, keepdims=True))).ravel() - math.log(len(mus))


def _numeric_candidates(
    p: NumericParam,
    good_vals: list[float],
    bad_vals: list[float],
    n_candidates: int,
    rng: np.random.Generator,
) -> tuple[list[Any], np.ndarray]:
    a, b = _domain(p)
    good = np.array([_to_transformed(p, v) for v in good_vals])
    bad = np.array([_to_transformed(p, v) for v in bad_vals])
    sig_good = _bandwidths(good, a, b)
    sig_bad = _bandwidths(bad, a, b)

    idx = rng.integers(0, good.size, size=n_candidates)
    xs = np.array([_trunc_normal_draw(rng, good[i], sig_good[i], a, b) for i in idx])
    values = [_from_transformed(p, x) for x in xs]
    # integers snap to the grid; score the snapped position so the ratio
    # matches the value actually proposed
    xs_eval = np.array([_to_transformed(p, v) for v in values]) if p.integer else xs
    delta = _trunc_mixture_logpdf(xs_eval, good, sig_good, a, b) - _trunc_mixture_logpdf(
        xs_eval, bad, sig_bad, a, b
    )
    return values, delta


def _categorical_candidates(
    p: CategoricalParam,
    good_vals: list[Any],
    bad_vals: list[Any],
    n_candidates: int,
    rng: np.random.Generator,
) -> tuple[list[Any], np.ndarray]:
    k = len(p.choices)
    index = {c: i for i, c in enumerate(p.choices)}
    good_counts = np.bincount([index[v] for v in good_vals], minlength=k).astype(float)
    bad_counts = np.bincount([index[v] for v in bad_vals], minlength=k).astype(float)
    p_good = (good_counts + 1.0) / (good_counts.sum() + k)
    p_bad = (bad_counts + 1.0) / (bad_counts.sum() + k)
    drawn_idx = rng.choice(k, size=n_candidates, p=p_good)
    delta = np.log(p_good[drawn_idx]) - np.log(p_bad[drawn_idx])
    return [p.choices[i] for i in drawn_idx], delta
