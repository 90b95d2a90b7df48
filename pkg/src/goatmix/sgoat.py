"""Supervised hyperparameter tuning of one synthesizer.

Each trial fits the synthesizer on the training split with a candidate theta,
samples a synthetic dataset, trains the downstream classifier on it, and
scores negative AUC on the validation split. The sampler proposes the next
theta from the trial history; the method's default theta is injected as trial
zero so tuning can never lose to the untuned setup on validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from . import synthesizers
from .data import Partition
from .errors import ConfigError
from .evaluation import EvalResult, evaluate_synthetic
from .gbdt import GbdtConfig
from .rngs import child_seed
from .tpe import (
    CategoricalParam,
    SearchSpace,
    TPEOptimizer,
    TrialHistory,
    WARM_START,
)

DEFAULT_K_SGOAT = 350
DEFAULT_PATIENCE_SGOAT = 10


@dataclass(frozen=True)
class SgoatResult:
    method: str
    best_theta: dict[str, Any]
    best_val_loss: float
    history: TrialHistory
    iterations_run: int
    degenerate: bool


def evaluate_theta(
    method: str,
    theta: dict[str, Any],
    part: Partition,
    n_rows: int | None = None,
    seed: int = 0,
    conditional: bool = False,
    classifier_config: GbdtConfig = GbdtConfig(),
) -> EvalResult:
    """One fit -> sample -> train -> score pass; returns the validation result.

    Synthetic data without both classes scores the degenerate 0.5 AUC instead
    of raising, so a tuning loop can keep moving.
    """
    n = part.train.n if n_rows is None else n_rows
    synth = synthesizers.fit(
        method, part.train, theta, seed=child_seed(seed, 0), conditional=conditional
    )
    if conditional:
        counts = part.train.class_counts()
        shares = {cls: float(c) / part.train.n for cls, c in enumerate(counts)}
        synthetic = synth.sample_conditional(n, shares, seed=child_seed(seed, 1))
    else:
        synthetic = synth.sample(n, seed=child_seed(seed, 1))
    return evaluate_synthetic(synthetic, part.val, classifier_config)


class SupervisedTuner:
    """Estimator-style wrapper: configure in __init__, then fit(partition)."""

    def __init__(
        self,
        method: str,
        k: int = DEFAULT_K_SGOAT,
        patience: int = DEFAULT_PATIENCE_SGOAT,
        n_rows: int | None = None,
        seed: int = 0,
        conditional: bool = False,
        classifier_config: GbdtConfig = GbdtConfig(),
        gc_frozen: bool = True,
    ):
        if k < 1:
            raise ConfigError("k must be >= 1")
        if patience < 1:
            raise ConfigError("patience must be >= 1")
        if n_rows is not None and n_rows < 1:
            raise ConfigError("n_rows must be >= 1")
        self.method = method
        self.k = k
        self.patience = patience
        self.n_rows = n_rows
        self.seed = seed
        self.conditional = conditional
        self.classifier_config = classifier_config
        self.gc_frozen = gc_frozen

    def fit(self, part: Partition) -> "SupervisedTuner":
        space = synthesizers.search_space(self.method, frozen=self.gc_frozen)
        if len(space) == 0:
            raise ConfigError(
                f"{self.method} has no tunable hyperparameters in frozen mode; "
                "evaluate it once directly instead of tuning"
            )
        self.part_ = part
        optimizer = TPEOptimizer(space, seed=child_seed(self.seed, 101))

        degenerate_flags: list[bool] = []

        def run_trial(theta: dict[str, Any], trial_seed: int) -> float:
            result = evaluate_theta(
                self.method,
                theta,
                part,
                n_rows=self.n_rows,
                seed=trial_seed,
                conditional=self.conditional,
                classifier_config=self.classifier_config,
            )
            degenerate_flags.append(result.degenerate)
            return result.loss

        default = _default_point(space, synthesizers.default_theta(self.method))
        optimizer.record(default, run_trial(default, child_seed(self.seed, 0)), tag=WARM_START)

        iterations = 0
        for k in range(1, self.k + 1):
            point = optimizer.suggest()
            optimizer.record(point, run_trial(point, child_seed(self.seed, k)))
            iterations = k
            if len(optimizer.history) > optimizer.n_startup and optimizer.should_stop(self.patience):
                break

        best = optimizer.best()
        self.history_ = optimizer.history
        self.best_theta_ = dict(best.point)
        self.best_val_loss_ = best.loss
        self.iterations_run_ = iterations
        self.degenerate_ = all(degenerate_flags)
        self.result_ = SgoatResult(
            method=self.method,
            best_theta=self.best_theta_,
            best_val_loss=self.best_val_loss_,
            history=self.history_,
            iterations_run=self.iterations_run_,
            degenerate=self.degenerate_,
        )
        return self


def run_sgoat(tuner: SupervisedTuner, part: Partition) -> SgoatResult:
    return tuner.fit(part).result_


def _default_point(space: SearchSpace, theta: dict[str, Any]) -> dict[str, Any]:
    """Fill a method's default theta up to a full point of the space."""
    point = {}
    for p in space.params:
        if p.name in theta:
            point[p.name] = theta[p.name]
        elif isinstance(p, CategoricalParam):
            point[p.name] = p.choices[0]
        elif p.integer:
            point[p.name] = int(round((p.lo + p.hi) / 2))
        else:
            point[p.name] = (p.lo + p.hi) / 2.0
    return point
