"""Tabular clinical records: CSV ingestion, z-score normalization, splitting."""
import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from ._fmt import fmt_float

# Column names of the five-row sample table the pipeline was designed around.
PAPER_FEATURES = ("Age", "Anaemia", "Diabetes", "High BP", "Platelets", "Sex", "Smoking", "Time")
PAPER_LABEL = "Death Event"


class DataError(ValueError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"missing column {column!r}")
        self.column = column


class MalformedNumber(DataError):
    def __init__(self, line, column, text):
        super().__init__(f"line {line}, column {column!r}: cannot parse {text!r} as a number")
        self.line = line
        self.column = column


class NonBinaryLabel(DataError):
    def __init__(self, line, value):
        super().__init__(f"line {line}: label {value!r} is not 0 or 1")
        self.line = line


class InsufficientClassMembers(DataError):
    pass


@dataclass(frozen=True)
class Schema:
    feature_columns: tuple
    label_column: str = None
    positive_label: int = 1

    def __post_init__(self):
        feats = tuple(self.feature_columns)
        object.__setattr__(self, "feature_columns", feats)
        if not feats:
            raise DataError("schema needs at least one feature column")
        if len(set(feats)) != len(feats):
            raise DataError("feature column names must be unique")
        if self.label_column is not None and self.label_column in feats:
            raise DataError(f"label column {self.label_column!r} is also a feature")


PAPER_SCHEMA = Schema(PAPER_FEATURES, PAPER_LABEL)


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    schema: Schema
    row_ids: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        y = self.y[idx] if self.y is not None else None
        return Dataset(self.X[idx], y, self.schema, self.row_ids[idx])


@dataclass(frozen=True)
class NormStats:
    features: tuple
    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    val_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        fr = self.fractions
        if not all(0.0 < f < 1.0 for f in fr):
            raise DataError(f"split fractions must lie in (0, 1), got {list(fr)}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(fr)!r}")

    @property
    def fractions(self):
        return (self.train_fraction, self.val_fraction, self.test_fraction)


def _parse_float(text, line, column):
    try:
        v = float(text)
    except ValueError:
        raise MalformedNumber(line, column, text) from None
    if not math.isfinite(v):
        raise MalformedNumber(line, column, text)
    return v


def read_header(path):
    with open(path, newline="", encoding="utf-8") as fh:
        row = next(csv.reader(fh), None)
    if row is None:
        raise DataError(f"{path}: empty file")
    return [c.strip() for c in row]


def load_csv(path, schema, require_label=True):
    """Read ``path`` into a Dataset, selecting schema columns by header name.

    Row ids are 1-based file line numbers (the header is line 1). With
    ``require_label=False`` an absent label column yields ``y = None``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [c.strip() for c in header]
        pos = {name: i for i, name in enumerate(header)}
        for name in schema.feature_columns:
            if name not in pos:
                raise MissingColumn(name)
        has_label = schema.label_column is not None and schema.label_column in pos
        if require_label and not has_label:
            raise MissingColumn(schema.label_column)
        cols = [pos[name] for name in schema.feature_columns]

        X, y, ids = [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"line {line}: expected {len(header)} fields, got {len(row)}")
            X.append([_parse_float(row[c].strip(), line, name)
                      for c, name in zip(cols, schema.feature_columns)])
            if has_label:
                v = _parse_float(row[pos[schema.label_column]].strip(), line, schema.label_column)
                if v not in (0.0, 1.0):
                    raise NonBinaryLabel(line, row[pos[schema.label_column]].strip())
                y.append(1.0 if v == schema.positive_label else 0.0)
            ids.append(line)

    X = np.array(X, dtype=np.float64).reshape(len(ids), len(schema.feature_columns))
    return Dataset(X, np.array(y) if has_label else None, schema, np.array(ids, dtype=int))


def write_csv(ds, path):
    """Write features (and label, if present) with 17 significant digits."""
    cols = list(ds.schema.feature_columns)
    with_label = ds.y is not None and ds.schema.label_column is not None
    if with_label:
        cols.append(ds.schema.label_column)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for i in range(len(ds)):
            row = [fmt_float(v) for v in ds.X[i]]
            if with_label:
                row.append(str(int(ds.y[i])))
            writer.writerow(row)


def fit_normalization(ds):
    if len(ds) == 0:
        raise DataError("cannot fit normalization on an empty dataset")
    return NormStats(ds.schema.feature_columns, ds.X.mean(axis=0), ds.X.std(axis=0))


def normalize_array(X, stats):
    std = np.where(stats.std == 0.0, 1.0, stats.std)
    return (X - stats.mean) / std


def apply_normalization(ds, stats):
    if tuple(stats.features) != tuple(ds.schema.feature_columns):
        raise DataError("normalization statistics were fitted on a different schema")
    return replace(ds, X=normalize_array(ds.X, stats))


def split_sizes(n, fractions):
    """Floor each share, then hand the remainder to val, then test, then train."""
    sizes = [int(math.floor(n * f + 1e-9)) for f in fractions]
    rem = n - sum(sizes)
    for k in (1, 2, 0):
        if rem <= 0:
            break
        sizes[k] += 1
        rem -= 1
    sizes[0] += rem
    return sizes


def split(ds, spec=SplitSpec()):
    """Seeded train/val/test partition; each part keeps the input row order."""
    n = len(ds)
    if n < 3:
        raise DataError(f"need at least 3 rows to split, got {n}")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        if ds.y is None:
            raise DataError("stratified split needs labels")
        groups = [np.flatnonzero(ds.y == c) for c in (0.0, 1.0)]
        for c, g in zip((0, 1), groups):
            if g.size == 0:
                raise InsufficientClassMembers(f"no rows with label {c}; stratified split impossible")
    else:
        groups = [np.arange(n)]

    parts = ([], [], [])
    for g in groups:
        perm = g[rng.permutation(g.size)]
        start = 0
        for k, size in enumerate(split_sizes(g.size, spec.fractions)):
            parts[k].extend(perm[start:start + size])
            start += size
    if not parts[0]:
        raise DataError("training split is empty")
    return tuple(ds.subset(np.sort(np.array(p, dtype=int))) for p in parts)
