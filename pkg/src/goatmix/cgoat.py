"""Mixture composition over fitted synthesizers.

The composer searches the weight simplex: each trial allocates the synthetic
row budget across the family proportionally to a weight vector, stacks the
per-method samples into one dataset, trains the downstream classifier on the
stack, and scores negative validation AUC. Five warm starts are evaluated
before any suggestion: one corner per synthesizer plus a point proportional
to the individual validation AUCs above their minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import largest_remainder_allocation
from .data import Dataset, Partition, concat
from .errors import ConfigError
from .evaluation import evaluate_synthetic
from .gbdt import GbdtConfig
from .rngs import child_seed
from .synthesizers.base import BaseSynthesizer
from .tpe import (
    SearchSpace,
    TPEOptimizer,
    TrialHistory,
    WARM_START,
    normalize_simplex,
    simplex_params,
)

DEFAULT_K_CGOAT = 150
DEFAULT_PATIENCE_CGOAT = 15


def warm_starts(val_aucs: list[float]) -> list[np.ndarray]:
    """Corner points for each member, then the AUC-proportional point.

    The proportional point weights each member by its validation AUC above
    the family minimum; when all AUCs tie it degenerates to uniform weights.
    """
    aucs = np.asarray(val_aucs, dtype=float)
    if aucs.ndim != 1 or aucs.size < 2:
        raise ConfigError("need one validation AUC per synthesizer (>= 2)")
    if (aucs < 0).any() or (aucs > 1).any():
        raise ConfigError("validation AUCs must lie in [0, 1]")
    points = [np.eye(aucs.size)[m] for m in range(aucs.size)]
    lifted = aucs - aucs.min()
    if lifted.sum() == 0.0:
        points.append(np.full(aucs.size, 1.0 / aucs.size))
    else:
        points.append(lifted / lifted.sum())
    return points


def allocate_rows(alpha: np.ndarray, n: int) -> np.ndarray:
    """Integer rows per member: closest-integer start, remainder-corrected."""
    alpha = np.asarray(alpha, dtype=float)
    if (alpha < 0).any() or abs(alpha.sum() - 1.0) > 1e-9:
        raise ConfigError("alpha must be non-negative and sum to 1")
    return largest_remainder_allocation(alpha, n)


def compose(
    synths: list[BaseSynthesizer],
    alpha: np.ndarray,
    n: int,
    seed: int = 0,
    class_shares: dict[int, float] | None = None,
) -> Dataset:
    """Stack per-member samples, in fixed member order, sized by allocation.

    With ``class_shares`` given, members draw through their per-class
    conditional sub-models so every block honours those label shares.
    """
    counts = allocate_rows(alpha, n)
    blocks = []
    for m, (synth, cnt) in enumerate(zip(synths, counts)):
        if cnt > 0:
            if class_shares is None:
                blocks.append(synth.sample(int(cnt), seed=child_seed(seed, m)))
            else:
                blocks.append(synth.sample_conditional(int(cnt), class_shares, seed=child_seed(seed, m)))
    if not blocks:
        schema, label = synths[0].schema_, synths[0].label_
        return Dataset(schema, label, np.empty((0, len(schema))))
    return concat(blocks)


@dataclass(frozen=True)
class CgoatResult:
    member_names: tuple[str, ...]
    best_alpha: np.ndarray
    best_synthetic: Dataset
    best_val_loss: float
    history: TrialHistory
    warm_start_losses: tuple[float, ...]
    iterations_run: int
    degenerate: bool

    def alpha_record(self) -> dict[str, float]:
        """Member name -> weight, the shape reports print."""
        return {name: float(a) for name, a in zip(self.member_names, self.best_alpha)}


class MixtureComposer:
    """Searches mixture weights over already-fitted synthesizers."""

    def __init__(
        self,
        synths: list[BaseSynthesizer],
        val_aucs: list[float],
        k: int = DEFAULT_K_CGOAT,
        patience: int = DEFAULT_PATIENCE_CGOAT,
        n_rows: int | None = None,
        seed: int = 0,
        classifier_config: GbdtConfig = GbdtConfig(),
        conditional_shares: dict[int, float] | None = None,
    ):
        if len(synths) < 2:
            raise ConfigError("composition needs at least 2 synthesizers")
        if len(val_aucs) != len(synths):
            raise ConfigError("need exactly one validation AUC per synthesizer")
        if k < 1 or patience < 1:
            raise ConfigError("k and patience must be >= 1")
        for s in synths:
            if not hasattr(s, "state_"):
                raise ConfigError("all synthesizers must be fitted before composing")
        first = synths[0]
        for s in synths[1:]:
            if s.schema_ != first.schema_ or s.label_ != first.label_:
                raise ConfigError("synthesizers must share one schema")
        self.synths = synths
        self.val_aucs = list(val_aucs)
        self.k = k
        self.patience = patience
        self.n_rows = n_rows
        self.seed = seed
        self.classifier_config = classifier_config
        self.conditional_shares = conditional_shares

    @property
    def member_names(self) -> tuple[str, ...]:
        names = []
        seen: dict[str, int] = {}
        for s in self.synths:
            count = seen.get(s.method, 0)
            names.append(s.method if count == 0 else f"{s.method}#{count + 1}")
            seen[s.method] = count + 1
        return tuple(names)

    def fit(self, part: Partition) -> "MixtureComposer":
        n_members = len(self.synths)
        n = part.train.n if self.n_rows is None else self.n_rows
        space = SearchSpace(params=tuple(simplex_params("alpha", n_members)))
        optimizer = TPEOptimizer(space, seed=child_seed(self.seed, 202))

        best_loss = np.inf
        best_alpha: np.ndarray | None = None
        best_data: Dataset | None = None
        degenerate_flags: list[bool] = []

        def run_trial(alpha: np.ndarray) -> float:
            nonlocal best_loss, best_alpha, best_data
            trial_idx = len(optimizer.history)
            data = compose(
                self.synths,
                alpha,
                n,
                seed=child_seed(self.seed, 1000 + trial_idx),
                class_shares=self.conditional_shares,
            )
            result = evaluate_synthetic(data, part.val, self.classifier_config)
            degenerate_flags.append(result.degenerate)
            if result.loss < best_loss:
                best_loss = result.loss
                best_alpha = alpha
                best_data = data
            return result.loss

        starts = warm_starts(self.val_aucs)
        warm_losses = []
        for alpha in starts:
            point = {f"alpha_{i}": float(a) for i, a in enumerate(alpha)}
            loss = run_trial(alpha)
            warm_losses.append(loss)
            optimizer.record(point, loss, tag=WARM_START)

        iterations = 0
        for k in range(1, self.k + 1):
            point = optimizer.suggest()
            alpha = normalize_simplex([point[f"alpha_{i}"] for i in range(n_members)])
            optimizer.record(point, run_trial(alpha))
            iterations = k
            if len(optimizer.history) > optimizer.n_startup and optimizer.should_stop(self.patience):
                break

        self.history_ = optimizer.history
        self.best_alpha_ = best_alpha
        self.best_synthetic_ = best_data
        self.best_val_loss_ = float(best_loss)
        self.iterations_run_ = iterations
        self.degenerate_ = all(degenerate_flags)
        self.result_ = CgoatResult(
            member_names=self.member_names,
            best_alpha=self.best_alpha_,
            best_synthetic=self.best_synthetic_,
            best_val_loss=self.best_val_loss_,
            history=self.history_,
            warm_start_losses=tuple(warm_losses),
            iterations_run=self.iterations_run_,
            degenerate=self.degenerate_,
        )
        return self

    def resample_best(self, n: int, seed: int = 0) -> Dataset:
        """Fresh draw from the winning weights, for unbiased test-time use."""
        if not hasattr(self, "best_alpha_"):
            raise ConfigError("fit the composer before resampling")
        return compose(
            self.synths,
            self.best_alpha_,
            n,
            seed=child_seed(self.seed, 5000 + seed),
            class_shares=self.conditional_shares,
        )


def run_cgoat(composer: MixtureComposer, part: Partition) -> CgoatResult:
    return composer.fit(part).result_
