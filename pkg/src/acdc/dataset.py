"""Columnar dataset, CSV ingestion, candidate-split enumeration, synthetic data.

A Dataset is immutable after construction: columns are numpy-backed, labels
are a 0/1 vector with 1 marking the positive (minority) class. Missing cells
are explicit (NaN for numeric columns, None for categorical ones) and every
predicate evaluates to False on a missing cell, so uncertain rows are never
carved out of the remaining pool.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Relation kinds. Candidate enumeration only ever emits LE and EQ; the
# complement forms GT and NE exist so a chain stage can carve the other side
# of a cut while missing cells still evaluate False.
LE = "le"
GT = "gt"
EQ = "eq"
NE = "ne"

_COMPLEMENT = {LE: GT, GT: LE, EQ: NE, NE: EQ}
_NUMERIC_RELATIONS = frozenset((LE, GT))
_CATEGORICAL_RELATIONS = frozenset((EQ, NE))
_RELATION_TEXT = {LE: "<=", GT: ">", EQ: "==", NE: "!="}


@dataclass
class FeatureColumn:
    """One feature column.

    Numeric columns hold float64 values with NaN as the missing marker;
    categorical columns hold str values with None as the missing marker.
    """

    name: str
    kind: str
    values: np.ndarray
    missing_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.name:
            raise DataError("column names must be non-empty")
        if self.kind == NUMERIC:
            self.values = np.asarray(self.values, dtype=np.float64)
            if np.isinf(self.values).any():
                raise DataError(f"column {self.name!r} has non-finite values")
            self.missing_mask = np.isnan(self.values)
        elif self.kind == CATEGORICAL:
            cells = [None if v is None else str(v) for v in self.values]
            self.values = np.array(cells, dtype=object)
            self.missing_mask = np.array([v is None for v in cells], dtype=bool)
        else:
            raise DataError(f"unknown column kind {self.kind!r}")


@dataclass(frozen=True)
class SplitPredicate:
    """A single-feature test. Missing cells always evaluate False."""

    feature: str
    relation: str  # le | gt | eq | ne
    value: float | str

    def __post_init__(self):
        if self.relation not in _COMPLEMENT:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.relation in _NUMERIC_RELATIONS:
            object.__setattr__(self, "value", float(self.value))
        else:
            object.__setattr__(self, "value", str(self.value))

    def complement(self) -> "SplitPredicate":
        """The same cut carving the other side (missing still maps to False)."""
        return SplitPredicate(self.feature, _COMPLEMENT[self.relation], self.value)

    def matches_kind(self, kind: str) -> bool:
        wanted = _NUMERIC_RELATIONS if kind == NUMERIC else _CATEGORICAL_RELATIONS
        return self.relation in wanted

    def evaluate(self, column: FeatureColumn) -> np.ndarray:
        """Boolean outcome per row; missing rows are False for every relation."""
        if not self.matches_kind(column.kind):
            raise ValueError(
                f"relation {self.relation!r} does not apply to {column.kind} "
                f"column {column.name!r}"
            )
        present = ~column.missing_mask
        vals = column.values
        if self.relation == LE:
            return present & (vals <= self.value)
        if self.relation == GT:
            return present & (vals > self.value)
        if self.relation == EQ:
            return present & (vals == self.value)
        return present & (vals != self.value)

    def evaluate_row(self, row) -> bool:
        """Outcome on a mapping of feature name -> value.

        Absent features, None, and NaN count as missing and evaluate False,
        as do values that cannot be coerced to the relation's kind.
        """
        value = row.get(self.feature)
        if value is None:
            return False
        if self.relation in _NUMERIC_RELATIONS:
            try:
                v = float(value)
            except (TypeError, ValueError):
                return False
            if math.isnan(v):
                return False
            return v <= self.value if self.relation == LE else v > self.value
        if isinstance(value, float) and math.isnan(value):
            return False
        text = str(value)
        return text == self.value if self.relation == EQ else text != self.value

    def describe(self) -> str:
        if self.relation in _NUMERIC_RELATIONS:
            return f"{self.feature} {_RELATION_TEXT[self.relation]} {self.value:.6g}"
        return f"{self.feature} {_RELATION_TEXT[self.relation]} {self.value}"


@dataclass(frozen=True)
class SplitStats:
    """2x2 contingency counts of a predicate against the label.

    n_xy counts rows with predicate outcome x and label y, after missing
    routing. The predicate-true side carries the PPV, the false side the NPV.
    """

    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self):
        if min(self.n11, self.n10, self.n01, self.n00) < 0:
            raise ValueError("contingency counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00

    @property
    def n_true(self) -> int:
        return self.n11 + self.n10

    @property
    def n_false(self) -> int:
        return self.n01 + self.n00

    @property
    def p_x1(self) -> float:
        return self.n_true / self.n

    @property
    def ppv(self) -> float:
        """Positive ratio of the predicate-true side."""
        return self.n11 / self.n_true

    @property
    def npv(self) -> float:
        """Negative ratio of the predicate-false side."""
        return self.n00 / self.n_false

    @property
    def true_positive_ratio(self) -> float:
        return self.n11 / self.n_true

    @property
    def false_positive_ratio(self) -> float:
        """Positive ratio of the predicate-false side."""
        return self.n01 / self.n_false

    def swapped(self) -> "SplitStats":
        """Counts for the complemented predicate."""
        return SplitStats(self.n01, self.n00, self.n11, self.n10)


@dataclass
class Dataset:
    """Immutable table of feature columns plus a binary label vector."""

    columns: list[FeatureColumn]
    labels: np.ndarray
    row_count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.labels.shape != (self.row_count,):
            raise DataError("labels length must equal row_count")
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must contain only 0 and 1")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        for col in self.columns:
            if len(col.values) != self.row_count:
                raise DataError(
                    f"column {col.name!r} has {len(col.values)} values, "
                    f"expected {self.row_count}"
                )
        self._by_name = {c.name: c for c in self.columns}

    def column(self, name: str) -> FeatureColumn:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"unknown feature {name!r}") from None

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    def full_mask(self) -> np.ndarray:
        return np.ones(self.row_count, dtype=bool)


def _parse_numeric(cell: str) -> float | None:
    """Finite float value of a cell, or None if it is not numeric."""
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _read_rows(path, missing_token: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, no header row") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} fields, "
                    f"expected {len(header)}"
                )
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, rows, missing_token


def _build_columns(header, rows, missing_token, skip=()):
    columns = []
    for j, name in enumerate(header):
        if name in skip:
            continue
        raw = [r[j] for r in rows]
        parsed = [None if c == missing_token else _parse_numeric(c) for c in raw]
        is_numeric = all(
            p is not None for p, c in zip(parsed, raw) if c != missing_token
        )
        if is_numeric:
            vals = np.array(
                [np.nan if p is None else p for p in parsed], dtype=np.float64
            )
            columns.append(FeatureColumn(name, NUMERIC, vals))
        else:
            cells = [None if c == missing_token else c for c in raw]
            columns.append(FeatureColumn(name, CATEGORICAL, cells))
    return columns


def map_labels(raw: list[str], positive_label: str | None = None) -> np.ndarray:
    """Map two raw label values onto {0, 1}.

    By default the rarer value becomes 1 (minority = positive); on an exact
    tie the lexicographically larger value is positive, so a balanced 0/1
    column keeps its natural meaning. positive_label overrides the choice.
    """
    distinct = sorted(set(raw))
    if len(distinct) != 2:
        raise DataError(
            f"label column must have exactly 2 distinct values, got {len(distinct)}"
        )
    if positive_label is not None:
        if positive_label not in distinct:
            raise DataError(
                f"positive label {positive_label!r} not found in label values {distinct}"
            )
        positive = positive_label
    else:
        lo, hi = distinct
        positive = hi if raw.count(hi) <= raw.count(lo) else lo
    return np.array([1 if c == positive else 0 for c in raw], dtype=np.int8)


def load_csv(
    path,
    label_column: str,
    missing_token: str = "",
    positive_label: str | None = None,
) -> Dataset:
    """Load a headered CSV into a Dataset.

    Columns whose non-missing cells all parse as finite numbers become
    numeric; everything else is categorical. The label column is removed from
    the features and mapped per map_labels.
    """
    header, rows, missing_token = _read_rows(path, missing_token)
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header")
    li = header.index(label_column)
    raw_labels = [r[li] for r in rows]
    for k, cell in enumerate(raw_labels):
        if cell == missing_token:
            raise DataError(f"{path}: missing label value at data row {k + 1}")
    labels = map_labels(raw_labels, positive_label)
    columns = _build_columns(header, rows, missing_token, skip={label_column})
    return Dataset(columns, labels, len(rows))


def load_features_csv(path, missing_token: str = "") -> Dataset:
    """Load a CSV with no designated label column, for scoring-only use.

    The returned Dataset carries an all-zero label vector as a placeholder.
    """
    header, rows, missing_token = _read_rows(path, missing_token)
    columns = _build_columns(header, rows, missing_token)
    return Dataset(columns, np.zeros(len(rows), dtype=np.int8), len(rows))


def _check_mask(dataset: Dataset, row_mask: np.ndarray) -> np.ndarray:
    row_mask = np.asarray(row_mask, dtype=bool)
    if row_mask.shape != (dataset.row_count,):
        raise ValueError("row_mask length must equal the dataset row count")
    if not row_mask.any():
        raise ValueError("row_mask selects no rows")
    return row_mask


def _numeric_thresholds(vals: np.ndarray, max_thresholds: int) -> np.ndarray:
    """Cut points for one numeric column: midpoints between consecutive
    distinct values, or max_thresholds equally-spaced quantiles above the cap."""
    distinct = np.unique(vals)
    if distinct.size < 2:
        return np.empty(0, dtype=np.float64)
    if distinct.size <= max_thresholds:
        return (distinct[:-1] + distinct[1:]) / 2.0
    levels = np.arange(1, max_thresholds + 1) / (max_thresholds + 1)
    return np.unique(np.quantile(vals, levels))


def _categorical_levels(vals: np.ndarray) -> list[str]:
    levels = sorted({str(v) for v in vals})
    if len(levels) < 2:
        return []
    return levels


def candidate_splits(
    dataset: Dataset, row_mask: np.ndarray, max_thresholds: int = 256
) -> list[SplitPredicate]:
    """Enumerate candidate predicates over the masked rows.

    Ordering is deterministic: dataset column order, then ascending threshold
    or level. Columns with a single distinct observed value contribute none.
    """
    if max_thresholds < 1:
        raise ValueError("max_thresholds must be positive")
    row_mask = _check_mask(dataset, row_mask)
    out: list[SplitPredicate] = []
    for col in dataset.columns:
        present = row_mask & ~col.missing_mask
        if not present.any():
            continue
        vals = col.values[present]
        if col.kind == NUMERIC:
            for t in _numeric_thresholds(vals, max_thresholds):
                out.append(SplitPredicate(col.name, LE, float(t)))
        else:
            for level in _categorical_levels(vals):
                out.append(SplitPredicate(col.name, EQ, level))
    return out


def tabulate(
    dataset: Dataset, row_mask: np.ndarray, predicate: SplitPredicate
) -> SplitStats:
    """Contingency counts of a predicate over the masked rows."""
    row_mask = _check_mask(dataset, row_mask)
    col = dataset.column(predicate.feature)
    outcome = predicate.evaluate(col)
    lab = dataset.labels.astype(bool)
    t = row_mask & outcome
    f = row_mask & ~outcome
    return SplitStats(
        int(np.count_nonzero(t & lab)),
        int(np.count_nonzero(t & ~lab)),
        int(np.count_nonzero(f & lab)),
        int(np.count_nonzero(f & ~lab)),
    )


def enumerate_split_stats(
    dataset: Dataset, row_mask: np.ndarray, max_thresholds: int = 256
) -> list[tuple[SplitPredicate, SplitStats]]:
    """candidate_splits plus tabulate in one vectorized pass per column.

    Output order and counts are identical to calling the two operations
    separately; this path just avoids a full scan per candidate.
    """
    if max_thresholds < 1:
        raise ValueError("max_thresholds must be positive")
    row_mask = _check_mask(dataset, row_mask)
    labels = dataset.labels
    n_sel = int(np.count_nonzero(row_mask))
    pos_sel = int(labels[row_mask].sum())
    out: list[tuple[SplitPredicate, SplitStats]] = []
    for col in dataset.columns:
        present = row_mask & ~col.missing_mask
        if not present.any():
            continue
        vals = col.values[present]
        labs = labels[present]
        if col.kind == NUMERIC:
            thresholds = _numeric_thresholds(vals, max_thresholds)
            if thresholds.size == 0:
                continue
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            cum_pos = np.cumsum(labs[order])
            idx = np.searchsorted(sv, thresholds, side="right")
            for t, i in zip(thresholds, idx):
                n_true = int(i)
                n11 = int(cum_pos[i - 1]) if i > 0 else 0
                stats = SplitStats(
                    n11, n_true - n11, pos_sel - n11, n_sel - n_true - (pos_sel - n11)
                )
                out.append((SplitPredicate(col.name, LE, float(t)), stats))
        else:
            for level in _categorical_levels(vals):
                hit = vals == level
                n_true = int(np.count_nonzero(hit))
                n11 = int(labs[hit].sum())
                stats = SplitStats(
                    n11, n_true - n11, pos_sel - n11, n_sel - n_true - (pos_sel - n11)
                )
                out.append((SplitPredicate(col.name, EQ, level), stats))
    return out


def generate_synthetic(
    n_rows: int,
    n_informative: int,
    n_noise: int,
    positive_rate: float,
    seed: int,
) -> Dataset:
    """Synthetic imbalanced table: informative numeric features carry a
    class-conditional mean shift, noise features are independent of the label.

    Deterministic for a fixed seed; the realized positive count is
    round(n_rows * positive_rate).
    """
    if n_rows <= 0:
        raise ValueError("n_rows must be positive")
    if not 0.0 < positive_rate < 1.0:
        raise ValueError("positive_rate must be in (0, 1)")
    rng = np.random.default_rng(seed)
    n_pos = int(round(n_rows * positive_rate))
    base = np.zeros(n_rows, dtype=np.int8)
    base[:n_pos] = 1
    labels = rng.permutation(base)
    columns = []
    for j in range(n_informative):
        if n_informative > 1:
            shift = 0.75 + 0.5 * j / (n_informative - 1)
        else:
            shift = 1.0
        x = rng.standard_normal(n_rows) + shift * labels
        columns.append(FeatureColumn(f"inf_{j}", NUMERIC, x))
    for j in range(n_noise):
        columns.append(FeatureColumn(f"noise_{j}", NUMERIC, rng.standard_normal(n_rows)))
    return Dataset(columns, labels, n_rows)
