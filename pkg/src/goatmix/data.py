"""Tabular data model: typed columns, CSV ingestion, schema configs, splitting.

A ``Dataset`` stores every cell as a float in one row-major matrix: continuous
columns hold raw numbers, categorical columns hold the index of the category
in their schema's ordered category list. The label is a binary column whose
category indices are the class labels {0, 1}.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError

CONTINUOUS = "continuous"
BINARY = "binary"
MULTICLASS = "multiclass"
_KINDS = (CONTINUOUS, BINARY, MULTICLASS)

SPLIT_FRACTIONS = (0.7, 0.2, 0.1)
_STRATIFY_RETRIES = 100


@dataclass(frozen=True)
class ColumnSchema:
    """One column: a name, a kind, and (for categoricals) the category order."""

    name: str
    kind: str
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DataError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.kind == CONTINUOUS:
            if self.categories is not None:
                raise DataError(f"continuous column {self.name!r} must not list categories")
        else:
            cats = self.categories
            if cats is None:
                raise DataError(f"categorical column {self.name!r} needs categories")
            if len(set(cats)) != len(cats):
                raise DataError(f"duplicate categories in column {self.name!r}")
            if self.kind == BINARY and len(cats) != 2:
                raise DataError(f"binary column {self.name!r} must have exactly 2 categories, got {len(cats)}")
            if self.kind == MULTICLASS and len(cats) < 3:
                raise DataError(f"multiclass column {self.name!r} must have >= 3 categories, got {len(cats)}")

    @property
    def is_categorical(self) -> bool:
        return self.kind != CONTINUOUS

    @property
    def n_categories(self) -> int:
        return 0 if self.categories is None else len(self.categories)


@dataclass(frozen=True)
class Dataset:
    """Immutable typed table with a designated binary label column."""

    schema: tuple[ColumnSchema, ...]
    label: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        if self.label not in names:
            raise DataError(f"label column {self.label!r} not in schema")
        label_col = self.schema[names.index(self.label)]
        if label_col.kind != BINARY:
            raise DataError(f"label column {self.label!r} must be binary, is {label_col.kind}")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != len(self.schema):
            raise DataError(
                f"values must be (n, {len(self.schema)}) matrix, got shape {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise DataError("dataset contains non-finite values")
        for j, col in enumerate(self.schema):
            if col.is_categorical and vals.shape[0]:
                codes = vals[:, j]
                if not np.array_equal(codes, np.round(codes)):
                    raise DataError(f"non-integer category index in column {col.name!r}")
                if codes.min() < 0 or codes.max() >= col.n_categories:
                    raise DataError(f"category index out of range in column {col.name!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DataError(f"no column named {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    @property
    def label_index(self) -> int:
        return self.column_index(self.label)

    def labels(self) -> np.ndarray:
        """Class labels as an int array of 0/1."""
        return self.values[:, self.label_index].astype(int)

    def feature_columns(self) -> tuple[ColumnSchema, ...]:
        return tuple(c for c in self.schema if c.name != self.label)

    def features(self) -> np.ndarray:
        """All non-label columns, in schema order, as a float matrix."""
        idx = [j for j, c in enumerate(self.schema) if c.name != self.label]
        return self.values[:, idx]

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self.label, self.values[np.asarray(indices)])

    def with_values(self, values: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self.label, values)

    def matches_schema(self, other: "Dataset") -> bool:
        return self.schema == other.schema and self.label == other.label

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels(), minlength=2)

    def to_csv(self, path: str | Path) -> None:
        """Write as RFC-4180 CSV: raw numbers and category strings."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names)
            for row in self.values:
                out = []
                for cell, col in zip(row, self.schema):
                    if col.is_categorical:
                        out.append(col.categories[int(cell)])
                    else:
                        out.append(format(float(cell), ".12g"))
                writer.writerow(out)


def concat(datasets: list[Dataset]) -> Dataset:
    """Vertically stack datasets sharing one schema."""
    if not datasets:
        raise DataError("cannot concatenate an empty list of datasets")
    first = datasets[0]
    for d in datasets[1:]:
        if not first.matches_schema(d):
            raise DataError("schema mismatch in concat")
    return first.with_values(np.vstack([d.values for d in datasets]))


@dataclass(frozen=True)
class Partition:
    """A disjoint train/val/test split of one source dataset."""

    train: Dataset
    val: Dataset
    test: Dataset
    seed: int

    def __post_init__(self):
        if not (self.train.matches_schema(self.val) and self.train.matches_schema(self.test)):
            raise DataError("partition parts must share the source schema")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.train.n, self.val.n, self.test.n)


@dataclass(frozen=True)
class SchemaConfig:
    """Declared column kinds and the label name, as read from a config file.

    ``columns`` maps a column name to (kind, categories); categories may be
    None for categorical columns, in which case the order is collected from
    the file at load time.
    """

    label: str
    columns: dict[str, tuple[str, tuple[str, ...] | None]] = field(default_factory=dict)

    @classmethod
    def from_yaml(cls, text: str) -> "SchemaConfig":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise DataError(f"malformed schema config: {exc}") from exc
        if not isinstance(doc, dict) or "label" not in doc:
            raise DataError("schema config must be a mapping with a 'label' entry")
        columns: dict[str, tuple[str, tuple[str, ...] | None]] = {}
        for name, spec in (doc.get("columns") or {}).items():
            if isinstance(spec, str):
                kind, cats = spec, None
            elif isinstance(spec, dict):
                kind = spec.get("kind")
                cats = spec.get("categories")
                cats = tuple(str(c) for c in cats) if cats is not None else None
            else:
                raise DataError(f"bad column spec for {name!r}")
            if kind not in _KINDS:
                raise DataError(f"unknown kind {kind!r} for column {name!r}")
            if kind == CONTINUOUS and cats is not None:
                raise DataError(f"continuous column {name!r} must not list categories")
            columns[name] = (kind, cats)
        return cls(label=str(doc["label"]), columns=columns)

    @classmethod
    def from_file(cls, path: str | Path) -> "SchemaConfig":
        return cls.from_yaml(Path(path).read_text(encoding="utf-8"))


def load_csv(
    path: str | Path,
    schema_hint: SchemaConfig | None = None,
    label: str | None = None,
) -> Dataset:
    """Read an RFC-4180 CSV with header into a validated Dataset.

    Columns covered by ``schema_hint`` use the declared kind (and category
    order, when given); the rest are inferred: all-numeric means continuous,
    otherwise categorical with first-appearance category order, binary at 2
    distinct values and multiclass at 3 or more.
    """
    text = Path(path).read_text(encoding="utf-8")
    return _parse_csv(text, schema_hint=schema_hint, label=label)


def _parse_csv(text: str, schema_hint: SchemaConfig | None, label: str | None) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise DataError("empty file")
    header = rows[0]
    body = rows[1:]
    if not body:
        raise DataError("CSV has a header but no data rows")
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"row {i + 2} has {len(row)} fields, header has {len(header)}")
        for name, cell in zip(header, row):
            if cell == "":
                raise DataError(f"missing value in column {name!r}, row {i + 2}")

    hint_cols = schema_hint.columns if schema_hint is not None else {}
    label_name = label or (schema_hint.label if schema_hint is not None else None)
    if label_name is None:
        raise DataError("no label column given (pass label= or a schema config)")
    if label_name not in header:
        raise DataError(f"missing label column {label_name!r}")

    columns = [[row[j] for row in body] for j in range(len(header))]
    schema: list[ColumnSchema] = []
    codes = np.empty((len(body), len(header)), dtype=float)
    for j, name in enumerate(header):
        kind, declared_cats = hint_cols.get(name, (None, None))
        if kind == CONTINUOUS:
            schema.append(ColumnSchema(name, CONTINUOUS))
            codes[:, j] = _parse_continuous(name, columns[j])
        elif kind in (BINARY, MULTICLASS):
            col_schema, col_codes = _parse_categorical(name, columns[j], kind, declared_cats)
            schema.append(col_schema)
            codes[:, j] = col_codes
        else:
            col_schema, col_codes = _infer_column(name, columns[j])
            schema.append(col_schema)
            codes[:, j] = col_codes
    return Dataset(tuple(schema), label_name, codes)


def _parse_continuous(name: str, cells: list[str]) -> np.ndarray:
    try:
        return np.array([float(c) for c in cells])
    except ValueError:
        bad = next(c for c in cells if not _is_number(c))
        raise DataError(f"non-numeric value {bad!r} in continuous column {name!r}") from None


def _parse_categorical(
    name: str, cells: list[str], kind: str, declared: tuple[str, ...] | None
) -> tuple[ColumnSchema, np.ndarray]:
    if declared is None:
        declared = _first_appearance(cells)
    index = {c: i for i, c in enumerate(declared)}
    try:
        col_codes = np.array([index[c] for c in cells], dtype=float)
    except KeyError as exc:
        raise DataError(f"value {exc.args[0]!r} not among declared categories of {name!r}") from None
    seen = len(set(cells))
    if kind == BINARY and (len(declared) != 2 or seen > 2):
        raise DataError(f"column {name!r} declared binary but has {max(seen, len(declared))} categories")
    return ColumnSchema(name, kind, tuple(declared)), col_codes


def _infer_column(name: str, cells: list[str]) -> tuple[ColumnSchema, np.ndarray]:
    if all(_is_number(c) for c in cells):
        return ColumnSchema(name, CONTINUOUS), np.array([float(c) for c in cells])
    cats = _first_appearance(cells)
    if len(cats) < 2:
        raise DataError(f"non-numeric column {name!r} has a single distinct value")
    kind = BINARY if len(cats) == 2 else MULTICLASS
    index = {c: i for i, c in enumerate(cats)}
    return ColumnSchema(name, kind, cats), np.array([index[c] for c in cells], dtype=float)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _first_appearance(cells: list[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(cells))


def split(
    d: Dataset,
    fractions: tuple[float, float, float] = SPLIT_FRACTIONS,
    seed: int = 0,
) -> Partition:
    """Shuffle with a seeded PRNG, then cut contiguously into train/val/test.

    Sizes are round(f_train * n) and round(f_val * n); test takes the rest.
    The draw is retried with a derived seed (up to a bounded count) until
    train and val both contain both label classes; validation AUC is computed
    on every optimization step, so a one-class val would stall the loops.
    """
    if d.n < 10:
        raise DataError(f"dataset too small to split: n={d.n}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataError(f"fractions must sum to 1, got {fractions}")
    n_train = round(fractions[0] * d.n)
    n_val = round(fractions[1] * d.n)
    n_test = d.n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise DataError(f"split sizes ({n_train}, {n_val}, {n_test}) leave an empty part")
    counts = d.class_counts()
    if counts.min() == 0:
        raise DataError("single-class dataset cannot be stratified")

    for attempt in range(_STRATIFY_RETRIES):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        order = rng.permutation(d.n)
        parts = (
            d.take(order[:n_train]),
            d.take(order[n_train : n_train + n_val]),
            d.take(order[n_train + n_val :]),
        )
        if parts[0].class_counts().min() > 0 and parts[1].class_counts().min() > 0:
            return Partition(*parts, seed=seed)
    raise DataError(
        f"could not place both classes in train and val after {_STRATIFY_RETRIES} shuffles"
    )
