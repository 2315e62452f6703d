"""Tabular dataset ingestion, filter predicates and histogramming.

Datasets are loaded from comma-separated files (first row headers, UTF-8,
empty fields as nulls). Columns are typed by inference: a column whose
non-empty values all parse as floats is numeric, anything else is
categorical. Numeric attributes are histogrammed into equal-width bins
whose edges come from the *whole* dataset, so filtered and unfiltered
histograms always share bin labels.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import IngestionError, SchemaError
from .stattests import Histogram

CATEGORICAL = "categorical"
NUMERIC = "numeric"

DEFAULT_BINS = 10


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # CATEGORICAL | NUMERIC
    values: tuple  # str | float | None per row


@dataclass(frozen=True)
class Dataset:
    name: str
    columns: tuple[Column, ...]
    row_count: int

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"unknown column {name!r}")

    def describe(self) -> dict:
        return {
            "name": self.name,
            "row_count": self.row_count,
            "columns": [{"name": c.name, "kind": c.kind} for c in self.columns],
        }


def _parse_cell(raw: str) -> Optional[str]:
    value = raw.strip()
    return value if value else None


def _infer_column(name: str, raw: list[Optional[str]]) -> Column:
    non_null = [v for v in raw if v is not None]
    numeric = bool(non_null)
    parsed: list[Optional[float]] = []
    for v in raw:
        if v is None:
            parsed.append(None)
            continue
        try:
            f = float(v)
            if not math.isfinite(f):
                numeric = False
                break
            parsed.append(f)
        except ValueError:
            numeric = False
            break
    if numeric:
        return Column(name=name, kind=NUMERIC, values=tuple(parsed))
    return Column(name=name, kind=CATEGORICAL, values=tuple(raw))


def load_dataset(source: Union[str, Path, io.TextIOBase], name: Optional[str] = None) -> Dataset:
    """Load a comma-separated file with a header row into a typed Dataset."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if name is None:
            name = path.stem
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IngestionError(f"cannot read {path}: {exc}") from exc
        return _load_from_text(text, name)
    return _load_from_text(source.read(), name or "dataset")


def _load_from_text(text: str, name: str) -> Dataset:
    try:
        rows = list(csv.reader(io.StringIO(text)))
    except csv.Error as exc:
        raise IngestionError(f"unparsable file: {exc}") from exc
    while rows and not rows[-1]:
        rows.pop()
    if not rows or not rows[0]:
        raise IngestionError("empty file")
    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise IngestionError("blank column name in header")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise IngestionError(f"duplicate headers: {dupes}")
    body = rows[1:]
    n_cols = len(header)
    cells: list[list[Optional[str]]] = [[] for _ in range(n_cols)]
    for line_no, row in enumerate(body, start=2):
        if not row:
            row = [""] * n_cols  # interior blank line: a row of nulls
        if len(row) != n_cols:
            raise IngestionError(
                f"row {line_no} has {len(row)} fields, expected {n_cols}"
            )
        for i, raw in enumerate(row):
            cells[i].append(_parse_cell(raw))
    columns = tuple(_infer_column(h, col) for h, col in zip(header, cells))
    return Dataset(name=name, columns=columns, row_count=len(body))


@dataclass(frozen=True)
class FilterPredicate:
    """One filter condition; ``negated`` inverts the selection.

    ``op`` is ``equals`` (operand ``value``), ``in_set`` (operand
    ``values``) or ``range`` (operands ``lo``/``hi``, inclusive, either
    side may be None for unbounded). Null cells match neither a predicate
    nor its negation.
    """

    column: str
    op: str
    value: Optional[object] = None
    values: Optional[tuple] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    negated: bool = False

    def __post_init__(self) -> None:
        if self.op not in ("equals", "in_set", "range"):
            raise SchemaError(f"unknown filter op {self.op!r}")
        if self.op == "equals" and self.value is None:
            raise SchemaError("equals filter needs a 'value'")
        if self.op == "in_set" and not self.values:
            raise SchemaError("in_set filter needs non-empty 'values'")
        if self.op == "range":
            if self.lo is None and self.hi is None:
                raise SchemaError("range filter needs 'lo' and/or 'hi'")
            if self.lo is not None and self.hi is not None and self.lo > self.hi:
                raise SchemaError(f"range lo {self.lo!r} > hi {self.hi!r}")

    def _base_match(self, cell, kind: str) -> bool:
        if self.op == "equals":
            if kind == NUMERIC:
                try:
                    return cell == float(self.value)  # type: ignore[arg-type]
                except (TypeError, ValueError):
                    return False
            return cell == str(self.value)
        if self.op == "in_set":
            if kind == NUMERIC:
                targets = set()
                for v in self.values or ():
                    try:
                        targets.add(float(v))
                    except (TypeError, ValueError):
                        pass
                return cell in targets
            return cell in {str(v) for v in self.values or ()}
        lo_ok = self.lo is None or cell >= self.lo
        hi_ok = self.hi is None or cell <= self.hi
        return lo_ok and hi_ok

    def matches(self, cell, kind: str) -> bool:
        if cell is None:
            return False
        hit = self._base_match(cell, kind)
        return (not hit) if self.negated else hit

    def same_condition(self, other: "FilterPredicate") -> bool:
        """True when only the negated flag may differ."""
        return (
            self.column == other.column
            and self.op == other.op
            and self.value == other.value
            and self.values == other.values
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def to_dict(self) -> dict:
        out: dict = {"column": self.column, "op": self.op, "negated": self.negated}
        if self.op == "equals":
            out["value"] = self.value
        elif self.op == "in_set":
            out["values"] = list(self.values or ())
        else:
            out["lo"] = self.lo
            out["hi"] = self.hi
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FilterPredicate":
        try:
            column = data["column"]
            op = data["op"]
        except (KeyError, TypeError):
            raise SchemaError(f"filter needs 'column' and 'op': {data!r}") from None
        values = data.get("values")
        return cls(
            column=column,
            op=op,
            value=data.get("value"),
            values=tuple(values) if values is not None else None,
            lo=data.get("lo"),
            hi=data.get("hi"),
            negated=bool(data.get("negated", False)),
        )


def complementary_filters(
    a: Sequence[FilterPredicate], b: Sequence[FilterPredicate]
) -> bool:
    """Identical ordered filter lists except exactly one flipped negation."""
    if len(a) != len(b):
        return False
    flipped = 0
    for fa, fb in zip(a, b):
        if not fa.same_condition(fb):
            return False
        if fa.negated != fb.negated:
            flipped += 1
    return flipped == 1


def filter_mask(dataset: Dataset, filters: Sequence[FilterPredicate]) -> list[bool]:
    """Row mask for the conjunction of all predicates."""
    mask = [True] * dataset.row_count
    for predicate in filters:
        column = dataset.column(predicate.column)
        for i, cell in enumerate(column.values):
            if mask[i] and not predicate.matches(cell, column.kind):
                mask[i] = False
    return mask


def numeric_bin_edges(dataset: Dataset, attribute: str, bins: int) -> list[float]:
    """Equal-width bin edges over the whole dataset's non-null values."""
    column = dataset.column(attribute)
    values = [v for v in column.values if v is not None]
    if not values:
        return []
    lo, hi = min(values), max(values)
    if lo == hi:
        return [lo, hi]
    width = (hi - lo) / bins
    return [lo + i * width for i in range(bins)] + [hi]


def _bin_label(lo: float, hi: float, last: bool) -> str:
    bracket = "]" if last else ")"
    return f"[{lo:g}, {hi:g}{bracket}"


def histogram_of(
    dataset: Dataset,
    attribute: str,
    filters: Sequence[FilterPredicate] = (),
    bins: int = DEFAULT_BINS,
) -> Histogram:
    """Counts of rows passing all filters, grouped by attribute value/bin.

    Bin labels depend only on the dataset and attribute, never on the
    filters, so any two histograms of the same attribute are comparable.
    """
    column = dataset.column(attribute)
    mask = filter_mask(dataset, filters)
    if column.kind == CATEGORICAL:
        labels = sorted({v for v in column.values if v is not None})
        counts = {label: 0 for label in labels}
        for selected, cell in zip(mask, column.values):
            if selected and cell is not None:
                counts[cell] += 1
        return Histogram.from_pairs((label, counts[label]) for label in labels)
    edges = numeric_bin_edges(dataset, attribute, bins)
    if not edges:
        return Histogram(())
    if len(edges) == 2 and edges[0] == edges[1]:
        count = sum(
            1 for selected, cell in zip(mask, column.values) if selected and cell is not None
        )
        return Histogram(((_bin_label(edges[0], edges[1], True), count),))
    n_bins = len(edges) - 1
    lo, hi = edges[0], edges[-1]
    width = (hi - lo) / n_bins
    counts_list = [0] * n_bins
    for selected, cell in zip(mask, column.values):
        if not selected or cell is None:
            continue
        idx = int((cell - lo) / width)
        if idx < 0:
            idx = 0
        elif idx >= n_bins:
            idx = n_bins - 1
        counts_list[idx] += 1
    return Histogram.from_pairs(
        (_bin_label(edges[i], edges[i + 1], i == n_bins - 1), counts_list[i])
        for i in range(n_bins)
    )


def group_values(
    dataset: Dataset, attribute: str, filters: Sequence[FilterPredicate] = ()
) -> list[float]:
    """Non-null numeric values of ``attribute`` among rows passing the filters."""
    column = dataset.column(attribute)
    if column.kind != NUMERIC:
        raise SchemaError(f"column {attribute!r} is not numeric")
    mask = filter_mask(dataset, filters)
    return [cell for selected, cell in zip(mask, column.values) if selected and cell is not None]


def sample_rows(dataset: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Deterministic uniform row subsample (without replacement)."""
    if not 0.0 < fraction <= 1.0:
        raise SchemaError(f"sample fraction must be in (0, 1], got {fraction!r}")
    if fraction == 1.0:
        return dataset
    keep = max(1, round(dataset.row_count * fraction))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xDA7A))))
    idx = sorted(rng.permutation(dataset.row_count)[:keep].tolist())
    columns = tuple(
        replace(c, values=tuple(c.values[i] for i in idx)) for c in dataset.columns
    )
    return Dataset(name=dataset.name, columns=columns, row_count=keep)
