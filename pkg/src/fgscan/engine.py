"""Log-pseudo-likelihood, score, and curvature for the PSH model.

Two interchangeable evaluators are provided:

``ScanEngine``
    Linear-time evaluation.  The weighted risk-set sum for an event at
    time X_i splits into a forward cumulative sum over subjects with
    X >= X_i (weight 1) and a backward cumulative sum over competing-risk
    subjects with X < X_i (weight G(X_i)/G(X_k)).  Both sums run over the
    descending-time order, so one pass per moment suffices.

``NaiveEngine``
    Literal double summation enumerating each event's risk set
    R_i = {X_k >= X_i} u {X_k <= X_i and cause_k = 2} with pairwise
    weights.  Quadratic cost; kept as the verification oracle and the
    no-scan arm of the benchmarks.

Both engines expose the same stateful protocol used by the coordinate
descent solvers: ``begin(beta)``, ``coord(j) -> (score_j, curv_j)``,
``shift(j, delta)``, ``loglik_current()``, plus the one-shot ``report``.
Linear predictors are centered by their maximum before exponentiation,
so large coefficients cannot overflow; the offset is added back inside
the log terms.

Engines hold per-fit mutable state: share datasets across threads, not
engine instances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .censoring import CensoringSurvival
from .data import CAUSE_COMPETING, CAUSE_EVENT, CompetingRisksDataset
from .errors import ComputationError, SingularRiskSetError

# below this curvature a coordinate is treated as informationless
DEGENERATE_CURVATURE = 1e-12

# the naive engine materializes its (events x n) weight matrix only up
# to this many entries; above it, rows are streamed to bound memory
_NAIVE_DENSE_LIMIT = 5_000_000


@dataclass(frozen=True)
class LikelihoodReport:
    """Value, per-coordinate score, and per-coordinate curvature at beta.

    ``neg_hess_diag`` holds the negated Hessian diagonal in its weighted
    variance form, hence nonnegative coordinate-wise.
    """

    loglik: float
    score: np.ndarray
    neg_hess_diag: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class ScanAccumulators:
    """Forward/backward cumulative sums behind one scanned moment."""

    fwd: np.ndarray
    bwd: np.ndarray
    per_event_denominator: np.ndarray


def _check_eta(eta: np.ndarray) -> None:
    if not np.isfinite(eta).all():
        raise ComputationError(
            "non-finite linear predictor; center/rescale covariates or shrink beta"
        )


class ScanEngine:
    """O(n) forward-backward scan evaluator over a fixed dataset.

    All state lives in descending-time order: the sorted design matrix
    is the working basis (Fortran layout so column slices are
    contiguous), coordinate shifts are in-place axpy updates, and the
    four per-coordinate moment sums share one buffered cumulative-sum
    call.
    """

    kind = "scan"

    def __init__(self, dataset: CompetingRisksDataset, censoring: CensoringSurvival):
        self.dataset = dataset
        self.censoring = censoring
        order = dataset.sorted_index
        self._order = order
        n = dataset.n
        self._zs = np.asfortranarray(dataset.covariates[order])
        cause_s = dataset.cause[order]
        g_s = censoring.per_subject_G[order]
        self._ev = np.flatnonzero(cause_s == CAUSE_EVENT)
        # inclusive cumsum index covering the whole tie group of each event
        self._ev_end = dataset.tie_end[self._ev] - 1
        self._g_ev = g_s[self._ev]
        inv = np.zeros(n)
        comp = cause_s == CAUSE_COMPETING
        inv[comp] = 1.0 / g_s[comp]
        self._inv_g2 = inv
        self._z_ev_sum = self._zs[self._ev].sum(axis=0) if self._ev.size else np.zeros(dataset.p)
        self._eta_s = np.zeros(n)
        self._offset = 0.0
        self._w = np.empty(n)
        self._den = None
        self._buf2 = np.empty((2, n))
        self._buf4 = np.empty((4, n))

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def n_events(self) -> int:
        return self._ev.size

    # -- stateful protocol -------------------------------------------------

    def begin(self, beta: np.ndarray) -> None:
        self._eta_s = self._zs @ np.asarray(beta, dtype=np.float64)
        self._refresh()

    def shift(self, j: int, delta: float) -> None:
        self._eta_s += delta * self._zs[:, j]
        self._refresh()

    def _refresh(self) -> None:
        eta_s = self._eta_s
        if not np.isfinite(eta_s).all():
            raise ComputationError(
                "non-finite linear predictor; center/rescale covariates or shrink beta"
            )
        self._offset = float(eta_s.max()) if eta_s.size else 0.0
        np.subtract(eta_s, self._offset, out=self._w)
        np.exp(self._w, out=self._w)
        buf = self._buf2
        buf[0] = self._w
        np.multiply(self._w, self._inv_g2, out=buf[1])
        cs = buf.cumsum(axis=1)
        ends = cs[:, self._ev_end]
        total = cs[1, -1] if eta_s.size else 0.0
        self._den = ends[0] + self._g_ev * (total - ends[1])
        if self._ev.size:
            if not np.isfinite(self._den).all() or (self._den <= 0.0).any():
                raise SingularRiskSetError("risk-set denominator underflowed to zero")

    def loglik_current(self) -> float:
        if self._ev.size == 0:
            return 0.0
        terms = self._eta_s[self._ev] - self._offset - np.log(self._den)
        return float(terms.sum())

    def coord(self, j: int):
        """Score and negated Hessian diagonal for coordinate j at the current state."""
        zj = self._zs[:, j]
        buf = self._buf4
        np.multiply(self._w, zj, out=buf[0])
        np.multiply(buf[0], zj, out=buf[1])
        np.multiply(buf[0], self._inv_g2, out=buf[2])
        np.multiply(buf[1], self._inv_g2, out=buf[3])
        cs = buf.cumsum(axis=1)
        ends = cs[:, self._ev_end]
        num1 = ends[0] + self._g_ev * (cs[2, -1] - ends[2])
        num2 = ends[1] + self._g_ev * (cs[3, -1] - ends[3])
        r1 = num1 / self._den
        score = float(self._z_ev_sum[j] - r1.sum())
        curv = float((num2 / self._den - r1 * r1).sum())
        return score, curv

    # -- one-shot evaluation ------------------------------------------------

    def eta(self) -> np.ndarray:
        """Current linear predictors in original row order."""
        out = np.empty_like(self._eta_s)
        out[self._order] = self._eta_s
        return out

    def loglik(self, beta: np.ndarray) -> float:
        self.begin(beta)
        if self._ev.size == 0:
            warnings.warn("no cause-1 events: log-pseudo-likelihood is an empty sum")
        return self.loglik_current()

    def report(self, beta: np.ndarray) -> LikelihoodReport:
        ll = self.loglik(beta)
        score = np.empty(self.p)
        curv = np.empty(self.p)
        for j in range(self.p):
            score[j], curv[j] = self.coord(j)
        np.maximum(curv, 0.0, out=curv)
        return LikelihoodReport(ll, score, curv, self.eta())


class NaiveEngine:
    """O(n^2) double-summation evaluator; the verification oracle."""

    kind = "naive"

    def __init__(self, dataset: CompetingRisksDataset, censoring: CensoringSurvival):
        self.dataset = dataset
        self.censoring = censoring
        self._z = dataset.covariates
        self._ev = np.flatnonzero(dataset.cause == CAUSE_EVENT)
        self._z_ev_sum = self._z[self._ev].sum(axis=0) if self._ev.size else np.zeros(dataset.p)
        self._weights = None
        if self._ev.size * dataset.n <= _NAIVE_DENSE_LIMIT:
            self._weights = self._weight_matrix()
        self._eta = None
        self._offset = 0.0
        self._w_exp = None
        self._den = None

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def n_events(self) -> int:
        return self._ev.size

    def _weight_row(self, i: int) -> np.ndarray:
        """w~_{ik} over R_i for event subject i, zero outside R_i."""
        x = self.dataset.time
        cause = self.dataset.cause
        g = self.censoring.per_subject_G
        later = x >= x[i]
        member = later | ((x <= x[i]) & (cause == CAUSE_COMPETING))
        row = np.where(later, 1.0, g[i] / g)
        row[~member] = 0.0
        return row

    def _weight_matrix(self) -> np.ndarray:
        return np.stack([self._weight_row(i) for i in self._ev]) if self._ev.size else np.zeros((0, self.n))

    # -- stateful protocol -------------------------------------------------

    def begin(self, beta: np.ndarray) -> None:
        eta = self._z @ np.asarray(beta, dtype=np.float64)
        self._set_eta(eta)

    def shift(self, j: int, delta: float) -> None:
        self._set_eta(self._eta + delta * self._z[:, j])

    def _set_eta(self, eta: np.ndarray) -> None:
        _check_eta(eta)
        self._eta = eta
        self._offset = float(eta.max())
        self._w_exp = np.exp(eta - self._offset)
        self._den = self._sums(self._w_exp)
        if self._ev.size:
            if not np.isfinite(self._den).all() or (self._den <= 0.0).any():
                raise SingularRiskSetError("risk-set denominator underflowed to zero")

    def _sums(self, values: np.ndarray) -> np.ndarray:
        if self._weights is not None:
            return self._weights @ values
        return np.array([self._weight_row(i) @ values for i in self._ev])

    def loglik_current(self) -> float:
        if self._ev.size == 0:
            return 0.0
        terms = self._eta[self._ev] - self._offset - np.log(self._den)
        return float(terms.sum())

    def coord(self, j: int):
        zj = self._z[:, j]
        num1 = self._sums(self._w_exp * zj)
        num2 = self._sums(self._w_exp * zj * zj)
        r1 = num1 / self._den
        score = float(self._z_ev_sum[j] - r1.sum())
        curv = float((num2 / self._den - r1 * r1).sum())
        return score, curv

    # -- one-shot evaluation ------------------------------------------------

    def loglik(self, beta: np.ndarray) -> float:
        self.begin(beta)
        if self._ev.size == 0:
            warnings.warn("no cause-1 events: log-pseudo-likelihood is an empty sum")
        return self.loglik_current()

    def report(self, beta: np.ndarray) -> LikelihoodReport:
        ll = self.loglik(beta)
        score = np.empty(self.p)
        curv = np.empty(self.p)
        for j in range(self.p):
            score[j], curv[j] = self.coord(j)
        np.maximum(curv, 0.0, out=curv)
        return LikelihoodReport(ll, score, curv, self._eta.copy())


_ENGINES = {"scan": ScanEngine, "naive": NaiveEngine}


def make_engine(dataset, censoring, kind: str = "scan"):
    try:
        return _ENGINES[kind](dataset, censoring)
    except KeyError:
        raise ValueError(f"unknown engine {kind!r}; expected one of {sorted(_ENGINES)}")


def scan_denominators(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    eta: np.ndarray,
    moment: int = 0,
    j: int | None = None,
) -> np.ndarray:
    """Per-event weighted risk-set sums via the forward-backward scan.

    ``moment`` selects the multiplier m_k in sum_{k in R_i} w~_{ik} m_k
    exp(eta_k): 1, z_{kj}, or z_{kj}^2.  Events are returned in
    descending-time order.  No exp-centering is applied here; this is the
    raw quantity used by the oracle tests.
    """
    eng = ScanEngine(dataset, censoring)
    eta = np.asarray(eta, dtype=np.float64)
    _check_eta(eta)
    w = np.exp(eta[dataset.sorted_index])
    if moment == 0:
        m = w
    elif moment == 1:
        m = w * eng._zs[:, j]
    elif moment == 2:
        m = w * eng._zs[:, j] ** 2
    else:
        raise ValueError("moment must be 0, 1 or 2")
    fwd = np.cumsum(m)[eng._ev_end]
    bwd_cum = np.cumsum(m * eng._inv_g2)
    total = bwd_cum[-1] if bwd_cum.size else 0.0
    den = fwd + eng._g_ev * (total - bwd_cum[eng._ev_end])
    if moment == 0 and den.size and ((den <= 0.0).any() or not np.isfinite(den).all()):
        raise SingularRiskSetError("risk-set denominator is zero or non-finite")
    return den


def scan_accumulators(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    eta: np.ndarray,
) -> ScanAccumulators:
    """Expose the per-event forward/backward split of the 0th moment."""
    eng = ScanEngine(dataset, censoring)
    eta = np.asarray(eta, dtype=np.float64)
    _check_eta(eta)
    w = np.exp(eta[dataset.sorted_index])
    fwd = np.cumsum(w)[eng._ev_end]
    bwd_cum = np.cumsum(w * eng._inv_g2)
    total = bwd_cum[-1] if bwd_cum.size else 0.0
    bwd = total - bwd_cum[eng._ev_end]
    return ScanAccumulators(fwd, bwd, fwd + eng._g_ev * bwd)


def naive_denominators(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    eta: np.ndarray,
    moment: int = 0,
    j: int | None = None,
) -> np.ndarray:
    """Literal enumeration counterpart of :func:`scan_denominators`.

    Events are returned in descending-time order to align with the scan.
    """
    eng = NaiveEngine(dataset, censoring)
    eta = np.asarray(eta, dtype=np.float64)
    _check_eta(eta)
    w = np.exp(eta)
    if moment == 0:
        m = w
    elif moment == 1:
        m = w * dataset.covariates[:, j]
    elif moment == 2:
        m = w * dataset.covariates[:, j] ** 2
    else:
        raise ValueError("moment must be 0, 1 or 2")
    vals = eng._sums(m)
    order = np.argsort(-dataset.time[eng._ev], kind="stable")
    return vals[order]


def naive_likelihood_suite(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    beta: np.ndarray,
) -> LikelihoodReport:
    """Full quadratic-cost evaluation of value/score/curvature at beta."""
    return NaiveEngine(dataset, censoring).report(beta)
