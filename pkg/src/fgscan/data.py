"""Competing-risks dataset container, CSV ingestion, and standardization.

The canonical internal order is *descending* observed time: the forward
risk-set scan consumes it directly and the backward scan walks the same
index in reverse.  Subjects with equal times form tie groups that every
scan processes atomically (``>=`` membership for the forward set, strict
``<`` for the backward set).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import (
    DegenerateColumnError,
    EmptyDatasetError,
    ParseError,
    ValidationError,
)

CAUSE_CENSORED = 0
CAUSE_EVENT = 1
CAUSE_COMPETING = 2


@dataclass(frozen=True)
class SubjectRecord:
    """One subject: observed time, cause code (0/1/2), covariate vector."""

    time: float
    cause: int
    covariates: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.time) or self.time < 0:
            raise ValidationError(f"time must be finite and >= 0, got {self.time}")
        if self.cause not in (0, 1, 2):
            raise ValidationError(f"cause must be 0, 1 or 2, got {self.cause}")


@dataclass(frozen=True)
class CompetingRisksDataset:
    """Immutable competing-risks sample with precomputed sort/tie structure.

    Attributes
    ----------
    time : (n,) float64, observed times X_i = min(T_i, C_i) in file order.
    cause : (n,) int64, 0 = censored, 1 = event of interest, 2 = competing.
    covariates : (n, p) float64.
    sorted_index : permutation arranging ``time`` in descending order,
        stable among ties (original row order preserved).
    tie_groups : (g, 2) int64 ranges [start, stop) over ``sorted_index``
        covering maximal runs of equal times.
    tie_end : (n,) int64, for each sorted position the (exclusive) end of
        its tie group.
    """

    time: np.ndarray
    cause: np.ndarray
    covariates: np.ndarray
    sorted_index: np.ndarray
    tie_groups: np.ndarray
    tie_end: np.ndarray
    covariate_names: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.time.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def n_events(self) -> int:
        """Number of cause-1 events (terms in the pseudo-likelihood)."""
        return int(np.count_nonzero(self.cause == CAUSE_EVENT))

    @classmethod
    def from_arrays(
        cls,
        time,
        cause,
        covariates,
        covariate_names: Sequence[str] | None = None,
        collapse_competing: bool = False,
    ) -> "CompetingRisksDataset":
        """Build a dataset from raw arrays, validating every contract.

        ``collapse_competing`` maps any cause >= 2 to 2 (documented CLI
        flag); otherwise causes outside {0, 1, 2} are rejected.
        """
        time = np.ascontiguousarray(time, dtype=np.float64)
        covariates = np.ascontiguousarray(covariates, dtype=np.float64)
        if covariates.ndim == 1:
            covariates = covariates.reshape(-1, 1)
        cause_f = np.asarray(cause, dtype=np.float64)

        n = time.shape[0]
        if n == 0:
            raise EmptyDatasetError("dataset has zero rows")
        if covariates.shape[0] != n or cause_f.shape[0] != n:
            raise ValidationError(
                f"length mismatch: time {n}, cause {cause_f.shape[0]}, "
                f"covariates {covariates.shape[0]}"
            )
        if covariates.shape[1] < 1:
            raise ValidationError("at least one covariate column is required")

        bad = ~np.isfinite(time) | (time < 0)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValidationError(f"row {row}: time must be finite and >= 0, got {time[row]}")

        if not np.isfinite(covariates).all():
            row, col = np.argwhere(~np.isfinite(covariates))[0]
            name = covariate_names[col] if covariate_names else f"column {col}"
            raise ValidationError(f"row {int(row)}: covariate {name} is not finite")

        nonint = cause_f != np.floor(cause_f)
        if (~np.isfinite(cause_f)).any() or nonint.any():
            row = int(np.flatnonzero(~np.isfinite(cause_f) | nonint)[0])
            raise ValidationError(f"row {row}: cause must be an integer, got {cause_f[row]}")
        cause_i = cause_f.astype(np.int64)
        if collapse_competing:
            cause_i = np.minimum(cause_i, CAUSE_COMPETING)
        bad = (cause_i < 0) | (cause_i > 2)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"row {row}: cause must be in {{0, 1, 2}}, got {cause_i[row]} "
                "(use collapse_competing to fold higher codes into 2)"
            )

        sorted_index = np.argsort(-time, kind="stable")
        ts = time[sorted_index]
        # maximal runs of equal times in the descending order
        boundaries = np.flatnonzero(ts[1:] != ts[:-1]) + 1
        starts = np.concatenate(([0], boundaries))
        stops = np.concatenate((boundaries, [n]))
        tie_groups = np.stack([starts, stops], axis=1)
        tie_end = np.repeat(stops, stops - starts)

        names = tuple(covariate_names) if covariate_names else tuple(
            f"z{j + 1}" for j in range(covariates.shape[1])
        )
        if len(names) != covariates.shape[1]:
            raise ValidationError("covariate_names length does not match covariate count")

        ds = cls(
            time=time,
            cause=cause_i,
            covariates=covariates,
            sorted_index=sorted_index,
            tie_groups=tie_groups,
            tie_end=tie_end,
            covariate_names=names,
        )
        for arr in (ds.time, ds.cause, ds.covariates, ds.sorted_index, ds.tie_groups, ds.tie_end):
            arr.setflags(write=False)
        return ds

    @classmethod
    def from_records(cls, records: Sequence[SubjectRecord]) -> "CompetingRisksDataset":
        time = np.array([r.time for r in records])
        cause = np.array([r.cause for r in records])
        cov = np.array([np.asarray(r.covariates, dtype=float) for r in records])
        return cls.from_arrays(time, cause, cov)

    def record(self, i: int) -> SubjectRecord:
        return SubjectRecord(float(self.time[i]), int(self.cause[i]), self.covariates[i].copy())

    def records(self) -> list:
        return [self.record(i) for i in range(self.n)]

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame({"time": self.time, "status": self.cause})
        for j, name in enumerate(self.covariate_names):
            df[name] = self.covariates[:, j]
        return df

    def to_csv(self, path) -> None:
        """Write ``time,status,<covariates...>`` preserving full precision."""
        self.to_frame().to_csv(path, index=False, float_format="%.17g")


def _resolve_column(spec, header: Sequence[str], what: str) -> str:
    """Resolve a name or 0-based positional index against the header."""
    if isinstance(spec, (int, np.integer)):
        if not 0 <= spec < len(header):
            raise ValidationError(f"{what} column index {spec} out of range (file has {len(header)} columns)")
        return header[int(spec)]
    if spec not in header:
        raise ValidationError(f"{what} column {spec!r} not found in header {list(header)}")
    return str(spec)


def load_csv(
    path,
    time_col="time",
    status_col="status",
    covariate_cols: Sequence | None = None,
    collapse_competing: bool = False,
) -> CompetingRisksDataset:
    """Load a competing-risks dataset from a headered CSV file.

    Columns are resolvable by name or 0-based position.  ``covariate_cols``
    defaults to every column other than time and status.  Missing or
    non-numeric cells raise :class:`ParseError` naming the row and column;
    cause codes outside {0, 1, 2} raise :class:`ValidationError`.
    """
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise
    except Exception as exc:  # malformed CSV structure
        raise ParseError(f"could not parse {path}: {exc}") from exc
    if df.shape[0] == 0:
        raise EmptyDatasetError(f"{path}: dataset has zero rows")

    header = [str(c) for c in df.columns]
    time_name = _resolve_column(time_col, header, "time")
    status_name = _resolve_column(status_col, header, "status")
    if covariate_cols is None:
        cov_names = [c for c in header if c not in (time_name, status_name)]
    else:
        cov_names = [_resolve_column(c, header, "covariate") for c in covariate_cols]
    if not cov_names:
        raise ValidationError(f"{path}: no covariate columns selected")

    def numeric(name):
        col = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(col)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f"{path}: row {row + 2}, column {name!r}: missing or non-numeric value "
                f"{df[name].iloc[row]!r}"
            )
        return col

    time = numeric(time_name)
    status = numeric(status_name)
    cov = np.column_stack([numeric(c) for c in cov_names])
    return CompetingRisksDataset.from_arrays(
        time, status, cov, covariate_names=cov_names, collapse_competing=collapse_competing
    )


def standardize_covariates(dataset: CompetingRisksDataset):
    """Center and scale columns to mean 0 and sum of squares n - 1.

    Returns ``(dataset, centers, scales)`` where the original coefficients
    are recovered as ``beta_original = beta_standardized / scales`` (the
    pseudo-likelihood is invariant to centering).
    """
    n = dataset.n
    if n < 2:
        raise ValidationError("standardization requires n >= 2")
    z = dataset.covariates
    centers = z.mean(axis=0)
    centered = z - centers
    ss = np.einsum("ij,ij->j", centered, centered)
    degenerate = ss <= 0.0
    if degenerate.any():
        j = int(np.flatnonzero(degenerate)[0])
        raise DegenerateColumnError(
            f"covariate {dataset.covariate_names[j]} is constant and cannot be standardized"
        )
    scales = np.sqrt(ss / (n - 1))
    out = CompetingRisksDataset.from_arrays(
        dataset.time,
        dataset.cause,
        centered / scales,
        covariate_names=dataset.covariate_names,
    )
    return out, centers, scales
