"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 a degenerate
run occurred (the report is still written).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import yaml

from . import synthesizers
from .cgoat import MixtureComposer
from .data import SchemaConfig, load_csv, split
from .datasets import BUILTIN_DATASETS, make_builtin
from .errors import ConfigError, DataError
from .evaluation import evaluate_synthetic
from .experiment import ExperimentConfig, ExperimentReport, preprocess_partition, run_experiment
from .rngs import child_seed
from .sgoat import SupervisedTuner

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)

    return wrapper


def _data_options(fn):
    fn = click.option("--data", required=True, help=f"CSV path or builtin name {BUILTIN_DATASETS}")(fn)
    fn = click.option("--schema", default=None, help="schema config (YAML) for CSV data")(fn)
    fn = click.option("--label", default=None, help="label column for CSV data without a schema file")(fn)
    fn = click.option("--seed", default=0, show_default=True, type=int)(fn)
    return fn


def _prep_options(fn):
    fn = click.option("--rows", default=None, type=int, help="synthetic rows per evaluation (default |train|)")(fn)
    fn = click.option("--encode", default="none", show_default=True, type=click.Choice(["target", "none"]))(fn)
    fn = click.option("--balance", default="none", show_default=True, type=click.Choice(["smote", "none"]))(fn)
    fn = click.option("--conditional", is_flag=True, help="sample through per-class conditional sub-models")(fn)
    return fn


def _load_dataset(data: str, schema: str | None, label: str | None, seed: int):
    if data in BUILTIN_DATASETS:
        return make_builtin(data, seed=seed)
    path = Path(data)
    if not path.exists():
        raise DataError(f"dataset {data!r} is neither a builtin name nor a file")
    hint = SchemaConfig.from_file(schema) if schema else None
    return load_csv(path, schema_hint=hint, label=label)


def _prepared_partition(data, schema, label, seed, rows, encode, balance, conditional):
    dataset = _load_dataset(data, schema, label, seed)
    cfg = ExperimentConfig(
        dataset=data, schema=schema, label=label, seed=seed,
        encode=encode, balance=balance, conditional=conditional,
    )
    return preprocess_partition(split(dataset, seed=seed), cfg)


@click.group()
def main():
    """Synthetic-data tuning and composition driven by downstream AUC."""


@main.command()
@_data_options
@click.option("--out", required=True, type=click.Path(path_type=Path))
@_guarded
def ingest(data, schema, label, seed, out):
    """Validate a CSV (or materialize a builtin) into a dataset bundle."""
    dataset = _load_dataset(data, schema, label, seed)
    out.mkdir(parents=True, exist_ok=True)
    dataset.to_csv(out / "dataset.csv")
    schema_doc = {
        "label": dataset.label,
        "columns": {
            c.name: (c.kind if not c.is_categorical else {"kind": c.kind, "categories": list(c.categories)})
            for c in dataset.schema
        },
    }
    (out / "schema.yaml").write_text(yaml.safe_dump(schema_doc, sort_keys=False), encoding="utf-8")
    counts = dataset.class_counts()
    summary = {
        "n": dataset.n,
        "columns": len(dataset.schema),
        "continuous": sum(not c.is_categorical for c in dataset.schema),
        "binary": sum(c.kind == "binary" for c in dataset.schema),
        "multiclass": sum(c.kind == "multiclass" for c in dataset.schema),
        "label": dataset.label,
        "class_counts": {str(i): int(c) for i, c in enumerate(counts)},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"wrote bundle to {out} (n={dataset.n})")


@main.command()
@_data_options
@_prep_options
@click.option("--method", required=True, type=click.Choice(list(synthesizers.METHODS)))
@click.option("--k-sgoat", default=350, show_default=True, type=int)
@click.option("--patience-sgoat", default=10, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@_guarded
def sgoat(data, schema, label, seed, rows, encode, balance, conditional, method, k_sgoat, patience_sgoat, out):
    """Tune one synthesizer's hyperparameters against validation AUC."""
    part = _prepared_partition(data, schema, label, seed, rows, encode, balance, conditional)
    tuner = SupervisedTuner(
        method, k=k_sgoat, patience=patience_sgoat, n_rows=rows,
        seed=seed, conditional=conditional,
    ).fit(part)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.jsonl").write_text(tuner.history_.to_jsonl(), encoding="utf-8")
    result = {
        "method": method,
        "best_theta": tuner.best_theta_,
        "best_val_auc": -tuner.best_val_loss_,
        "iterations_run": tuner.iterations_run_,
        "degenerate": tuner.degenerate_,
    }
    (out / "result.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"best theta {tuner.best_theta_} val AUC {-tuner.best_val_loss_:.4f}")
    if tuner.degenerate_:
        sys.exit(EXIT_DEGENERATE)


@main.command()
@_data_options
@_prep_options
@click.option("--k-cgoat", default=150, show_default=True, type=int)
@click.option("--patience-cgoat", default=15, show_default=True, type=int)
@click.option("--k-sgoat", default=350, show_default=True, type=int)
@click.option("--patience-sgoat", default=10, show_default=True, type=int)
@click.option("--tuned", is_flag=True, help="tune each member first, then compose")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@_guarded
def cgoat(data, schema, label, seed, rows, encode, balance, conditional,
          k_cgoat, patience_cgoat, k_sgoat, patience_sgoat, tuned, out):
    """Search mixture weights over the synthesizer family."""
    part = _prepared_partition(data, schema, label, seed, rows, encode, balance, conditional)
    n_rows = rows or part.train.n
    shares = None
    if conditional:
        counts = part.train.class_counts()
        shares = {cls: float(c) / part.train.n for cls, c in enumerate(counts)}

    fitted = []
    val_aucs = []
    for mi, method in enumerate(synthesizers.METHODS):
        theta = synthesizers.default_theta(method)
        if tuned and len(synthesizers.search_space(method)) > 0:
            tuner = SupervisedTuner(
                method, k=k_sgoat, patience=patience_sgoat, n_rows=rows,
                seed=child_seed(seed, 5, mi), conditional=conditional,
            ).fit(part)
            theta = tuner.best_theta_
        synth = synthesizers.fit(method, part.train, theta, seed=child_seed(seed, 2, mi), conditional=conditional)
        synthetic = (
            synth.sample(n_rows, seed=child_seed(seed, 3, mi))
            if shares is None
            else synth.sample_conditional(n_rows, shares, seed=child_seed(seed, 3, mi))
        )
        val_aucs.append(evaluate_synthetic(synthetic, part.val).auc)
        fitted.append(synth)

    composer = MixtureComposer(
        fitted, val_aucs, k=k_cgoat, patience=patience_cgoat, n_rows=n_rows,
        seed=child_seed(seed, 4), conditional_shares=shares,
    ).fit(part)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.jsonl").write_text(composer.history_.to_jsonl(), encoding="utf-8")
    composer.best_synthetic_.to_csv(out / "synthetic.csv")
    record = {
        "weights": composer.result_.alpha_record(),
        "best_val_auc": -composer.best_val_loss_,
        "iterations_run": composer.iterations_run_,
        "degenerate": composer.degenerate_,
    }
    (out / "alpha.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo("weights: " + ", ".join(f"{k}={v:.3f}" for k, v in record["weights"].items()))
    if composer.degenerate_:
        sys.exit(EXIT_DEGENERATE)


@main.command()
@_data_options
@_prep_options
@click.option("--repeats", default=10, show_default=True, type=int)
@click.option("--k-sgoat", default=350, show_default=True, type=int)
@click.option("--k-cgoat", default=150, show_default=True, type=int)
@click.option("--patience-sgoat", default=10, show_default=True, type=int)
@click.option("--patience-cgoat", default=15, show_default=True, type=int)
@click.option("--no-tune", is_flag=True, help="skip the tuned setup")
@click.option("--dataset-rows", default=None, type=int, help="size override for builtin datasets")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@_guarded
def experiment(data, schema, label, seed, rows, encode, balance, conditional, repeats,
               k_sgoat, k_cgoat, patience_sgoat, patience_cgoat, no_tune, dataset_rows, out):
    """Run the full protocol and write report.json / report.txt / auc_runs.csv."""
    cfg = ExperimentConfig(
        dataset=data, schema=schema, label=label, repeats=repeats, seed=seed,
        k_sgoat=k_sgoat, k_cgoat=k_cgoat,
        patience_sgoat=patience_sgoat, patience_cgoat=patience_cgoat,
        n_rows=rows, encode=encode, balance=balance, conditional=conditional,
        tune=not no_tune, dataset_rows=dataset_rows,
    )
    report = run_experiment(cfg)
    paths = report.write(out)
    click.echo(report.render_text())
    click.echo(f"report written to {paths['json']}")
    if report.degenerate:
        sys.exit(EXIT_DEGENERATE)


@main.command(name="report")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", default=None, type=click.Path(path_type=Path))
@_guarded
def report_cmd(in_path, out):
    """Re-render a saved report.json as text."""
    report = ExperimentReport.from_json(Path(in_path).read_text(encoding="utf-8"))
    text = report.render_text()
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
