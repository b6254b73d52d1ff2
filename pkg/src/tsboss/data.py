"""Time-series loading, window unrolling, and i.i.d.-window construction."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InsufficientDataError, InvalidInputError, ParseError
from .graphs import column_order


@dataclass(frozen=True)
class TimeSeriesDataset:
    """T x m matrix of observations, rows ordered by increasing time."""

    values: np.ndarray
    variable_names: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidInputError(f"expected a T x m matrix, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("dataset contains non-finite values")
        if len(self.variable_names) != values.shape[1]:
            raise InvalidInputError("variable_names length != number of columns")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    def standardized(self):
        """Per-column z-scoring (population std); constant columns are only
        centered to avoid division by zero."""
        centered = self.values - self.values.mean(axis=0)
        std = self.values.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return TimeSeriesDataset(centered / std, self.variable_names)


@dataclass(frozen=True)
class WindowDataset:
    """Lag-unrolled matrix; column c holds variable columns[c].var at lag
    columns[c].lag, blocks ordered lag tau_max first down to lag 0."""

    values: np.ndarray
    columns: tuple
    iid_flag: bool

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise InvalidInputError("values shape does not match columns")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def tau_max(self):
        return max(c.lag for c in self.columns)

    @property
    def m(self):
        return len(self.columns) // (self.tau_max + 1)


def _make_names(m):
    return tuple(f"X{j + 1}" for j in range(m))


def _parse_cell(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"non-numeric cell {text!r} at row {row}, column {col}", row, col
        ) from None
    if not math.isfinite(value):
        raise ParseError(
            f"non-finite cell {text!r} at row {row}, column {col}", row, col
        )
    return value


def load_csv(path):
    """Read a numeric CSV ('.' decimal separator, optional single header
    row); header names become variable names, else X1..Xm."""
    with open(path, newline="") as fh:
        raw = [row for row in csv.reader(fh) if row]
    if not raw:
        raise FormatError(f"{path}: empty file")
    names = None
    start = 0
    header_like = False
    for cell in raw[0]:
        try:
            float(cell)
        except ValueError:
            header_like = True
            break
    if header_like:
        names = tuple(cell.strip() for cell in raw[0])
        start = 1
        if not raw[start:]:
            raise FormatError(f"{path}: header but no data rows")
    width = len(raw[start])
    rows = []
    for r, row in enumerate(raw[start:]):
        if len(row) != width:
            raise FormatError(
                f"{path}: row {r} has {len(row)} cells, expected {width}"
            )
        rows.append([_parse_cell(cell, r, c) for c, cell in enumerate(row)])
    values = np.asarray(rows, dtype=np.float64)
    if names is None:
        names = _make_names(width)
    elif len(names) != width:
        raise FormatError(f"{path}: header width != data width")
    return TimeSeriesDataset(values, names)


def save_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.variable_names)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])


def unroll(dataset, tau_max):
    """Sliding-window unrolling: row r holds, for lag l from tau_max down
    to 0 and each variable j, the value at time r + tau_max - l."""
    if tau_max < 0:
        raise InvalidInputError("tau_max must be >= 0")
    T, m = dataset.values.shape
    if T <= tau_max:
        raise InsufficientDataError(
            f"need more than tau_max={tau_max} time points, have {T}"
        )
    n = T - tau_max
    blocks = [
        dataset.values[tau_max - lag : tau_max - lag + n, :]
        for lag in range(tau_max, -1, -1)
    ]
    return WindowDataset(
        np.hstack(blocks), column_order(m, tau_max), iid_flag=False
    )


def iid_windows(realizations, tau_max):
    """One row per realization: its final window of length tau_max + 1,
    flattened in the same column order as `unroll`."""
    if tau_max < 0:
        raise InvalidInputError("tau_max must be >= 0")
    if not realizations:
        raise InvalidInputError("need at least one realization")
    m = realizations[0].m
    rows = []
    for i, real in enumerate(realizations):
        if real.m != m:
            raise InvalidInputError(
                f"realization {i} has {real.m} variables, expected {m}"
            )
        if real.T < tau_max + 1:
            raise InsufficientDataError(
                f"realization {i} has {real.T} < tau_max + 1 time points"
            )
        window = real.values[real.T - (tau_max + 1) :, :]
        rows.append(window.reshape(-1))
    return WindowDataset(
        np.asarray(rows), column_order(m, tau_max), iid_flag=True
    )


def load_realizations_dir(path):
    """Load every *.csv in a directory as one realization (sorted order)."""
    files = sorted(
        os.path.join(path, f)
        for f in os.listdir(path)
        if f.lower().endswith(".csv")
    )
    if not files:
        raise FormatError(f"{path}: no CSV files found")
    return [load_csv(f) for f in files]


def load_realizations_grouped_csv(path):
    """Load realizations from one CSV whose first column is a realization
    id; groups keep their order of first appearance."""
    full = load_csv(path)
    ids = full.values[:, 0]
    names = full.variable_names[1:]
    if not names:
        raise FormatError(f"{path}: need data columns after the id column")
    groups = {}
    for r in range(full.T):
        groups.setdefault(ids[r], []).append(full.values[r, 1:])
    return [
        TimeSeriesDataset(np.asarray(rows), names) for rows in groups.values()
    ]
