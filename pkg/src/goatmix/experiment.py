"""End-to-end experiment protocol: baseline, per-method untuned/tuned
evaluation, mixture composition in both setups, repeats, and the aggregated
report with paired significance tests and fidelity tables."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import synthesizers
from .cgoat import MixtureComposer
from .data import Dataset, Partition, load_csv, SchemaConfig, split
from .datasets import BUILTIN_DATASETS, make_builtin
from .errors import ConfigError, DataError
from .evaluation import evaluate_synthetic, score_model
from .gbdt import GbdtConfig, train_classifier
from .preprocess import smote_balance, target_encode
from .rngs import child_rng, child_seed
from .sgoat import SupervisedTuner
from .stats import class_share_report, cs_statistic, ks_statistic, paired_t_test

THREADS_ENV = "GOATMIX_THREADS"
OURS = "composed"
SETUPS = ("untuned", "tuned")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    schema: str | None = None
    label: str | None = None
    repeats: int = 10
    seed: int = 0
    k_sgoat: int = 350
    k_cgoat: int = 150
    patience_sgoat: int = 10
    patience_cgoat: int = 15
    n_rows: int | None = None
    encode: str = "none"
    balance: str = "none"
    conditional: bool = False
    tune: bool = True
    sample_cap: int = 50000
    dataset_rows: int | None = None
    classifier: GbdtConfig = field(default_factory=GbdtConfig)

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.encode not in ("target", "none"):
            raise ConfigError(f"encode must be 'target' or 'none', got {self.encode!r}")
        if self.balance not in ("smote", "none"):
            raise ConfigError(f"balance must be 'smote' or 'none', got {self.balance!r}")

    def to_jsonable(self) -> dict:
        doc = asdict(self)
        doc["classifier"] = asdict(self.classifier)
        return doc


def load_experiment_data(cfg: ExperimentConfig) -> Dataset:
    """Resolve the config's dataset: a builtin generator name or a CSV path."""
    if cfg.dataset in BUILTIN_DATASETS:
        data = make_builtin(cfg.dataset, n=cfg.dataset_rows, seed=cfg.seed)
    else:
        path = Path(cfg.dataset)
        if not path.exists():
            raise DataError(f"dataset {cfg.dataset!r} is neither a builtin name nor a file")
        hint = SchemaConfig.from_file(cfg.schema) if cfg.schema else None
        data = load_csv(path, schema_hint=hint, label=cfg.label)
    if data.n > cfg.sample_cap:
        rng = child_rng(cfg.seed, 11)
        data = data.take(np.sort(rng.choice(data.n, size=cfg.sample_cap, replace=False)))
    return data


def preprocess_partition(part: Partition, cfg: ExperimentConfig) -> Partition:
    train, val, test = part.train, part.val, part.test
    if cfg.encode == "target":
        encoded_train = target_encode(train, train)
        val = target_encode(train, val)
        test = target_encode(train, test)
        train = encoded_train
    if cfg.balance == "smote":
        if any(c.is_categorical for c in train.feature_columns()):
            raise ConfigError("balance=smote needs continuous features; use --encode=target first")
        train = smote_balance(train, seed=child_seed(part.seed, 17))
    return Partition(train, val, test, seed=part.seed)


@dataclass
class MethodRun:
    """One method's evaluation inside one repeat and setup."""

    theta: dict
    val_auc: float
    test_auc: float
    degenerate: bool


@dataclass
class ComposedRun:
    alpha: dict[str, float]
    val_auc: float
    test_auc: float
    degenerate: bool


def run_experiment(cfg: ExperimentConfig) -> "ExperimentReport":
    data = load_experiment_data(cfg)
    workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
    repeat_ids = list(range(cfg.repeats))
    if workers == 1:
        repeat_results = [_run_repeat(cfg, data, r) for r in repeat_ids]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            repeat_results = list(pool.map(lambda r: _run_repeat(cfg, data, r), repeat_ids))
    fidelity, shares = _fidelity_and_shares(cfg, data)
    return ExperimentReport.build(cfg, repeat_results, fidelity, shares)


def _run_repeat(cfg: ExperimentConfig, data: Dataset, repeat: int) -> dict:
    seed = child_seed(cfg.seed, 1 + repeat)
    part = preprocess_partition(split(data, seed=seed), cfg)
    n_rows = cfg.n_rows or part.train.n
    shares = _train_shares(part) if cfg.conditional else None

    baseline_model = train_classifier(part.train, cfg.classifier)
    baseline = {
        "val_auc": score_model(baseline_model, part.val).auc,
        "test_auc": score_model(baseline_model, part.test).auc,
    }

    out: dict = {
        "repeat": repeat,
        "baseline": baseline,
        "setups": {},
        # fairness contract: every evaluation in this repeat used this config
        "classifier_fingerprint": cfg.classifier.fingerprint(),
    }
    tuned_thetas: dict[str, dict] = {}
    for si, setup in enumerate(_active_setups(cfg)):
        methods: dict[str, MethodRun] = {}
        fitted = []
        for mi, method in enumerate(synthesizers.METHODS):
            theta = synthesizers.default_theta(method)
            if setup == "tuned":
                theta = _tuned_theta(cfg, part, method, seed, tuned_thetas)
            synth = synthesizers.fit(
                method,
                part.train,
                theta,
                seed=child_seed(seed, 2, si, mi),
                conditional=cfg.conditional,
            )
            synthetic = (
                synth.sample(n_rows, seed=child_seed(seed, 3, si, mi))
                if shares is None
                else synth.sample_conditional(n_rows, shares, seed=child_seed(seed, 3, si, mi))
            )
            val_result = evaluate_synthetic(synthetic, part.val, cfg.classifier)
            test_result = evaluate_synthetic(synthetic, part.test, cfg.classifier)
            methods[method] = MethodRun(
                theta=theta,
                val_auc=val_result.auc,
                test_auc=test_result.auc,
                degenerate=val_result.degenerate or test_result.degenerate,
            )
            fitted.append(synth)

        composer = MixtureComposer(
            fitted,
            [methods[m].val_auc for m in synthesizers.METHODS],
            k=cfg.k_cgoat,
            patience=cfg.patience_cgoat,
            n_rows=n_rows,
            seed=child_seed(seed, 4, si),
            classifier_config=cfg.classifier,
            conditional_shares=shares,
        ).fit(part)
        composed_test = evaluate_synthetic(composer.best_synthetic_, part.test, cfg.classifier)
        out["setups"][setup] = {
            "methods": methods,
            OURS: ComposedRun(
                alpha=composer.result_.alpha_record(),
                val_auc=-composer.best_val_loss_,
                test_auc=composed_test.auc,
                degenerate=composer.degenerate_ or composed_test.degenerate,
            ),
        }
    return out


def _active_setups(cfg: ExperimentConfig) -> tuple[str, ...]:
    return SETUPS if cfg.tune else ("untuned",)


def _tuned_theta(
    cfg: ExperimentConfig,
    part: Partition,
    method: str,
    seed: int,
    cache: dict[str, dict],
) -> dict:
    if method in cache:
        return cache[method]
    space = synthesizers.search_space(method, frozen=True)
    if len(space) == 0:
        # frozen space: the method is evaluated once directly, untuned
        theta = synthesizers.default_theta(method)
    else:
        tuner = SupervisedTuner(
            method,
            k=cfg.k_sgoat,
            patience=cfg.patience_sgoat,
            n_rows=cfg.n_rows,
            seed=child_seed(seed, 5, synthesizers.METHODS.index(method)),
            conditional=cfg.conditional,
            classifier_config=cfg.classifier,
        ).fit(part)
        theta = tuner.best_theta_
    cache[method] = theta
    return theta


def _train_shares(part: Partition) -> dict[int, float]:
    counts = part.train.class_counts()
    return {cls: float(c) / part.train.n for cls, c in enumerate(counts)}


def _fidelity_and_shares(cfg: ExperimentConfig, data: Dataset) -> tuple[dict, dict]:
    """Per-column fidelity and class-share tables from a dedicated seeded draw."""
    seed = child_seed(cfg.seed, 999)
    part = preprocess_partition(split(data, seed=seed), cfg)
    n_rows = cfg.n_rows or part.train.n
    shares_cond = _train_shares(part) if cfg.conditional else None
    fidelity: dict = {}
    shares: dict = {"real_train": _str_keys(class_share_report(part.train))}
    for mi, method in enumerate(synthesizers.METHODS):
        synth = synthesizers.fit(
            method, part.train, synthesizers.default_theta(method),
            seed=child_seed(seed, 2, mi), conditional=cfg.conditional,
        )
        synthetic = (
            synth.sample(n_rows, seed=child_seed(seed, 3, mi))
            if shares_cond is None
            else synth.sample_conditional(n_rows, shares_cond, seed=child_seed(seed, 3, mi))
        )
        cols: dict = {}
        for j, col in enumerate(part.train.schema):
            real_col = part.train.values[:, j]
            synth_col = synthetic.values[:, j]
            if col.is_categorical:
                try:
                    chi2, p = cs_statistic(real_col, synth_col, n_categories=col.n_categories)
                    cols[col.name] = {"kind": "cs", "stat": chi2, "p": p}
                except DataError:
                    cols[col.name] = {"kind": "cs", "stat": None, "p": None}
            else:
                cols[col.name] = {"kind": "ks", "stat": ks_statistic(real_col, synth_col), "p": None}
        fidelity[method] = cols
        shares[method] = _str_keys(class_share_report(synthetic))
    return fidelity, shares


def _str_keys(d: dict) -> dict:
    return {str(k): v for k, v in d.items()}


@dataclass
class ExperimentReport:
    config: dict
    baseline: dict
    setups: dict
    fidelity: dict
    class_shares: dict
    degenerate: bool

    @classmethod
    def build(
        cls,
        cfg: ExperimentConfig,
        repeats: list[dict],
        fidelity: dict,
        shares: dict,
    ) -> "ExperimentReport":
        fingerprints = {r["classifier_fingerprint"] for r in repeats}
        if len(fingerprints) != 1 or cfg.classifier.fingerprint() not in fingerprints:
            raise ConfigError("classifier config drifted between evaluations")
        baseline_runs = [r["baseline"]["test_auc"] for r in repeats]
        baseline = {
            "runs": baseline_runs,
            "mean": float(np.mean(baseline_runs)),
            "std": float(np.std(baseline_runs, ddof=1)) if len(baseline_runs) > 1 else 0.0,
        }
        any_degenerate = False
        setups_doc: dict = {}
        for setup in _active_setups(cfg):
            ours_runs = [r["setups"][setup][OURS].test_auc for r in repeats]
            methods_doc: dict = {}
            for method in synthesizers.METHODS:
                runs = [r["setups"][setup]["methods"][method].test_auc for r in repeats]
                degenerate_runs = sum(
                    r["setups"][setup]["methods"][method].degenerate for r in repeats
                )
                any_degenerate |= degenerate_runs > 0
                methods_doc[method] = _aggregate(runs, ours_runs)
                methods_doc[method]["degenerate_runs"] = degenerate_runs
            ours_degenerate = sum(r["setups"][setup][OURS].degenerate for r in repeats)
            any_degenerate |= ours_degenerate > 0
            ours_doc = _aggregate(ours_runs, None)
            ours_doc["degenerate_runs"] = ours_degenerate
            ours_doc["alpha_per_run"] = [r["setups"][setup][OURS].alpha for r in repeats]
            ours_doc["alpha_mean"] = {
                name: float(np.mean([a[name] for a in ours_doc["alpha_per_run"]]))
                for name in ours_doc["alpha_per_run"][0]
            }
            setups_doc[setup] = {"methods": methods_doc, OURS: ours_doc}
        doc_cfg = cfg.to_jsonable()
        doc_cfg["classifier_fingerprint"] = cfg.classifier.fingerprint()
        return cls(
            config=doc_cfg,
            baseline=baseline,
            setups=setups_doc,
            fidelity=fidelity,
            class_shares=shares,
            degenerate=any_degenerate,
        )

    # --- serialization ------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "baseline": self.baseline,
            "setups": self.setups,
            "fidelity": self.fidelity,
            "class_shares": self.class_shares,
            "degenerate": self.degenerate,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        doc = json.loads(text)
        return cls(
            config=doc["config"],
            baseline=doc["baseline"],
            setups=doc["setups"],
            fidelity=doc["fidelity"],
            class_shares=doc["class_shares"],
            degenerate=doc["degenerate"],
        )

    def _setup_order(self) -> list[str]:
        return [s for s in SETUPS if s in self.setups]

    @staticmethod
    def _method_order(doc: dict) -> list[str]:
        from . import synthesizers

        declared = [m for m in synthesizers.METHODS if m in doc["methods"]]
        extras = sorted(set(doc["methods"]) - set(declared))
        return declared + extras

    def auc_runs_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["setup", "method", "run", "test_auc"])
        for r, value in enumerate(self.baseline["runs"]):
            writer.writerow(["baseline", "real", r, format(value, ".10g")])
        for setup in self._setup_order():
            doc = self.setups[setup]
            for method in self._method_order(doc):
                for r, value in enumerate(doc["methods"][method]["runs"]):
                    writer.writerow([setup, method, r, format(value, ".10g")])
            for r, value in enumerate(doc[OURS]["runs"]):
                writer.writerow([setup, OURS, r, format(value, ".10g")])
        return buf.getvalue()

    def render_text(self) -> str:
        lines: list[str] = []
        cfgd = self.config
        lines.append(f"dataset: {cfgd['dataset']}   repeats: {cfgd['repeats']}   seed: {cfgd['seed']}")
        lines.append(
            f"baseline on real data: mean test AUC {_pct(self.baseline['mean'])} "
            f"(std {self.baseline['std']:.4f})"
        )
        for setup in self._setup_order():
            doc = self.setups[setup]
            lines.append("")
            lines.append(f"== {setup} setup ==")
            lines.append(f"{'method':<18}{'mean AUC':>10}{'std':>8}{'t':>9}{'p':>9}{'degen':>7}")
            for method in self._method_order(doc):
                mdoc = doc["methods"][method]
                lines.append(
                    f"{method:<18}{_pct(mdoc['mean']):>10}{mdoc['std']:>8.4f}"
                    f"{_fmt_stat(mdoc['t']):>9}{_fmt_stat(mdoc['p']):>9}{mdoc['degenerate_runs']:>7}"
                )
            ours = doc[OURS]
            lines.append(
                f"{OURS:<18}{_pct(ours['mean']):>10}{ours['std']:>8.4f}{'-':>9}{'-':>9}"
                f"{ours['degenerate_runs']:>7}"
            )
            lines.append("mixture weights (mean over runs):")
            for name in sorted(ours["alpha_mean"]):
                lines.append(f"  {name:<18}{_pct(ours['alpha_mean'][name]):>9}")
        lines.append("")
        lines.append("== class shares ==")
        for name in sorted(self.class_shares):
            shares = self.class_shares[name]
            rendered = ", ".join(f"{cls}: {_pct(shares[cls])}" for cls in sorted(shares))
            lines.append(f"  {name:<18}{rendered}")
        lines.append("")
        lines.append("== fidelity vs real train (untuned defaults) ==")
        for method in sorted(self.fidelity):
            cols = self.fidelity[method]
            lines.append(f"  {method}:")
            for cname in sorted(cols):
                cell = cols[cname]
                if cell["kind"] == "ks":
                    lines.append(f"    {cname:<18} KS = {cell['stat']:.4f}")
                elif cell["stat"] is None:
                    lines.append(f"    {cname:<18} CS = n/a")
                else:
                    lines.append(f"    {cname:<18} CS = {cell['stat']:.4f} (p = {cell['p']:.4f})")
        lines.append("")
        lines.append(f"degenerate runs present: {'yes' if self.degenerate else 'no'}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "json": out / "report.json",
            "text": out / "report.txt",
            "csv": out / "auc_runs.csv",
        }
        paths["json"].write_text(self.to_json(), encoding="utf-8")
        paths["text"].write_text(self.render_text(), encoding="utf-8")
        paths["csv"].write_text(self.auc_runs_csv(), encoding="utf-8")
        return paths


def _aggregate(runs: list[float], ours_runs: list[float] | None) -> dict:
    doc: dict = {
        "runs": runs,
        "mean": float(np.mean(runs)),
        "std": float(np.std(runs, ddof=1)) if len(runs) > 1 else 0.0,
        "t": None,
        "p": None,
    }
    if ours_runs is not None and len(runs) >= 2:
        result = paired_t_test(np.array(ours_runs), np.array(runs))
        doc["t"] = result.t if math.isfinite(result.t) else ("inf" if result.t > 0 else "-inf")
        doc["p"] = result.p
    return doc


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def _fmt_stat(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, str):
        return x
    return f"{x:.4f}"
