"""Sample container with column roles, plus CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_samples


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass
class Dataset:
    """An ``(n, d + 2)`` sample matrix ordered as exposure, mediators, outcome.

    ``center`` holds the mean subtracted from ``values`` (``None`` when the
    matrix is raw).
    """

    values: np.ndarray
    columns: list = field(default=None)
    center: np.ndarray = None

    def __post_init__(self):
        self.values = check_samples(self.values)
        if self.columns is None:
            d = self.values.shape[1] - 2
            self.columns = ["E"] + [f"M{q}" for q in range(1, d + 1)] + ["Y"]
        self.columns = [str(c) for c in self.columns]
        if len(self.columns) != self.values.shape[1]:
            raise DataError("column names do not match the number of columns")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1] - 2

    @property
    def mediator_names(self):
        return self.columns[1:-1]

    @property
    def is_centered(self):
        return self.center is not None

    def centered(self):
        """Return a copy with the full-sample mean removed from every column."""
        if self.is_centered:
            return self
        mu = self.values.mean(axis=0)
        return Dataset(self.values - mu, list(self.columns), center=mu)

    def rows(self, idx):
        """View of a subset of samples, keeping roles and centering state."""
        return Dataset(self.values[np.asarray(idx)], list(self.columns), self.center)


def read_csv(path, exposure=None, outcome=None, mediators=None):
    """Read a headed CSV and order its columns as exposure, mediators, outcome.

    Without ``exposure``/``outcome`` the first and last columns take those
    roles. Without ``mediators`` every remaining column is a mediator.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path}: empty file")
            header = [h.strip() for h in header]
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
                    )
                parsed = []
                for name, cell in zip(header, row):
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"{path}: row {lineno}, column {name!r}: cannot parse {cell!r}"
                        ) from None
                rows.append(parsed)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names")
    exposure = header[0] if exposure is None else exposure
    outcome = header[-1] if outcome is None else outcome
    for role, name in (("exposure", exposure), ("outcome", outcome)):
        if name not in header:
            raise DataError(f"{path}: {role} column {name!r} not found")
    if exposure == outcome:
        raise DataError("exposure and outcome must be different columns")
    if mediators is None:
        mediators = [h for h in header if h not in (exposure, outcome)]
    else:
        missing = [m for m in mediators if m not in header]
        if missing:
            raise DataError(f"{path}: mediator columns not found: {missing}")
        if exposure in mediators or outcome in mediators:
            raise DataError("a column cannot be both a mediator and exposure/outcome")
    if not mediators:
        raise DataError("at least one mediator column is required")
    order = [exposure] + list(mediators) + [outcome]
    idx = [header.index(c) for c in order]
    values = np.array(rows, dtype=float).reshape(len(rows), len(header))[:, idx]
    if values.shape[0] < 4:
        raise DataError(f"{path}: need at least 4 data rows, got {values.shape[0]}")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite values present")
    return Dataset(values, order)


def write_csv(dataset, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.columns)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])
