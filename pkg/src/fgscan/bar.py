"""Broken-adaptive-ridge estimation for the PSH model.

``fit_ridge`` solves the L2-penalized initializer by cyclic Newton
coordinate updates.  ``bar_ccd`` runs the original nested scheme: an
outer loop reweights each coordinate's ridge penalty by the inverse
square of its previous estimate, an inner cyclic coordinate descent
solves each reweighted ridge, and a final cutoff induces sparsity.
``cyc_bar`` collapses the nesting into one cyclic sweep over an explicit
coordinate-wise thresholding formula whose zeros are exact.

Coordinate updates default to Gauss-Seidel order (each update sees the
freshest coefficients); ``sweep_mode="jacobi"`` evaluates a whole sweep
at the previous iterate instead.  A single fit is sequential; run
concurrent fits (e.g. a tuning grid) on separate engine instances.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .censoring import CensoringSurvival
from .data import CompetingRisksDataset
from .engine import DEGENERATE_CURVATURE, make_engine

# previous-iterate magnitudes below this are treated as exact zeros in
# the 1/beta^2 reweighting (the penalty weight becomes +inf)
FROZEN_ZERO = 1e-150

SWEEP_MODES = ("gauss-seidel", "jacobi")


@dataclass(frozen=True)
class BarConfig:
    """Tuning and convergence knobs shared by both BAR algorithms.

    ``xi`` is the initial ridge penalty (``None`` means log(p), the
    fixed default used throughout the studies).  ``lam`` is the BAR
    penalty.  ``sparsity_cutoff`` only applies to :func:`bar_ccd`.
    """

    xi: float | None = None
    lam: float = 0.0
    tol: float = 1e-6
    inner_tol: float = 1e-6
    max_outer: int = 1000
    max_inner: int = 1000
    sparsity_cutoff: float = 1e-6
    sweep_mode: str = "gauss-seidel"
    engine: str = "scan"

    def __post_init__(self):
        if self.xi is not None and self.xi < 0:
            raise ValueError("xi must be >= 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        for name in ("tol", "inner_tol", "sparsity_cutoff"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.sweep_mode not in SWEEP_MODES:
            raise ValueError(f"sweep_mode must be one of {SWEEP_MODES}")

    def resolve_xi(self, p: int) -> float:
        return math.log(p) if self.xi is None else self.xi


@dataclass(frozen=True)
class BarFit:
    """A fitted sparse coefficient vector plus convergence bookkeeping."""

    beta: np.ndarray
    support: np.ndarray
    outer_iters: int
    converged: bool
    objective_trace: list = field(default_factory=list)
    config: object = None
    method: str = ""

    @property
    def support_size(self) -> int:
        return int(self.support.size)


def threshold_update(b: float, xtx: float, lam: float) -> float:
    """Coordinate-wise fixed-point update with an explicit zero threshold.

    Returns 0 when ``|b| < 2*sqrt(lam*xtx)``; otherwise the larger-
    magnitude root of ``xtx*beta^2 - b*beta + lam = 0``.  The boundary
    case returns the double root ``b/(2*xtx)``.
    """
    if xtx <= 0:
        raise ValueError("xtx must be > 0")
    if abs(b) < 2.0 * math.sqrt(lam * xtx):
        return 0.0
    disc = b * b - 4.0 * lam * xtx
    root = math.sqrt(disc) if disc > 0.0 else 0.0
    return (b + math.copysign(root, b)) / (2.0 * xtx)


def _ccd_penalized_quadratic(eng, beta, pen, frozen, tol, max_iter):
    """Cyclic Newton sweeps for -2*loglik + sum_j pen_j * beta_j^2.

    ``beta`` is updated in place; the engine state must already sit at
    ``beta``.  Frozen coordinates are pinned at zero (infinite penalty).
    Returns (sweeps, converged, trace of per-sweep ||delta||_2).
    """
    p = beta.shape[0]
    trace = []
    for sweep in range(1, max_iter + 1):
        delta_sq = 0.0
        for j in range(p):
            if frozen is not None and frozen[j]:
                continue
            c1, c2 = eng.coord(j)
            denom = c2 + pen[j]
            if denom <= DEGENERATE_CURVATURE:
                continue
            new = (c2 * beta[j] + c1) / denom
            delta = new - beta[j]
            if delta != 0.0:
                eng.shift(j, delta)
                beta[j] = new
                delta_sq += delta * delta
        step = math.sqrt(delta_sq)
        trace.append(step)
        if step < tol:
            return sweep, True, trace
    return max_iter, False, trace


def fit_ridge(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    xi: float,
    engine: str = "scan",
    tol: float = 1e-6,
    max_iter: int = 1000,
    beta0: np.ndarray | None = None,
) -> np.ndarray:
    """Minimize -2*loglik + xi * ||beta||^2 by cyclic Newton updates."""
    if xi < 0:
        raise ValueError("xi must be >= 0")
    eng = make_engine(dataset, censoring, engine)
    beta = np.zeros(dataset.p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    eng.begin(beta)
    pen = np.full(dataset.p, float(xi))
    _, converged, _ = _ccd_penalized_quadratic(eng, beta, pen, None, tol, max_iter)
    if not converged:
        warnings.warn(f"ridge initializer did not converge within {max_iter} sweeps")
    return beta


def bar_ccd(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    config: BarConfig,
    beta0: np.ndarray | None = None,
) -> BarFit:
    """Original BAR: iteratively reweighted ridge via nested CCD.

    Each outer step solves a ridge problem with coordinate penalties
    lam / beta_j^2 taken from the previous outer iterate; coordinates
    whose previous value underflows are pinned at zero.  After outer
    convergence, magnitudes <= ``sparsity_cutoff`` are zeroed.
    """
    p = dataset.p
    xi = config.resolve_xi(p)
    eng = make_engine(dataset, censoring, config.engine)

    beta_k = (
        fit_ridge(dataset, censoring, xi, config.engine, config.inner_tol, config.max_inner)
        if beta0 is None
        else np.asarray(beta0, dtype=float).copy()
    )

    trace = []
    converged = False
    outer = 0
    for outer in range(1, config.max_outer + 1):
        frozen = np.abs(beta_k) < FROZEN_ZERO
        pen = np.zeros(p)
        if config.lam > 0.0:
            live = ~frozen
            pen[live] = config.lam / beta_k[live] ** 2
        else:
            frozen = np.zeros(p, dtype=bool)

        beta_next = np.where(frozen, 0.0, beta_k)
        eng.begin(beta_next)
        _ccd_penalized_quadratic(
            eng, beta_next, pen, frozen, config.inner_tol, config.max_inner
        )
        step = float(np.linalg.norm(beta_next - beta_k))
        trace.append(step)
        beta_k = beta_next
        if step < config.tol:
            converged = True
            break

    beta_k = beta_k.copy()
    beta_k[np.abs(beta_k) <= config.sparsity_cutoff] = 0.0
    return BarFit(
        beta=beta_k,
        support=np.flatnonzero(beta_k),
        outer_iters=outer,
        converged=converged,
        objective_trace=trace,
        config=config,
        method="bar",
    )


def cyc_bar(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    config: BarConfig,
    beta0: np.ndarray | None = None,
) -> BarFit:
    """Cyclic coordinate-wise BAR via the thresholding fixed point.

    Starting from the ridge initializer, every sweep recomputes each
    coordinate's score and curvature, forms b_j = curv_j * beta_j +
    score_j, and applies :func:`threshold_update`.  Zeros are exact; no
    cutoff is needed.  Coordinates with degenerate curvature are set to
    zero for that sweep.
    """
    p = dataset.p
    xi = config.resolve_xi(p)
    eng = make_engine(dataset, censoring, config.engine)

    beta = (
        fit_ridge(dataset, censoring, xi, config.engine, config.inner_tol, config.max_inner)
        if beta0 is None
        else np.asarray(beta0, dtype=float).copy()
    )
    eng.begin(beta)

    jacobi = config.sweep_mode == "jacobi"
    trace = []
    converged = False
    sweep = 0
    for sweep in range(1, config.max_outer + 1):
        if jacobi:
            new = np.empty(p)
            for j in range(p):
                c1, c2 = eng.coord(j)
                if c2 <= DEGENERATE_CURVATURE:
                    new[j] = 0.0
                else:
                    new[j] = threshold_update(c2 * beta[j] + c1, c2, config.lam)
            step = float(np.linalg.norm(new - beta))
            beta = new
            eng.begin(beta)
        else:
            delta_sq = 0.0
            for j in range(p):
                c1, c2 = eng.coord(j)
                if c2 <= DEGENERATE_CURVATURE:
                    new_j = 0.0
                else:
                    new_j = threshold_update(c2 * beta[j] + c1, c2, config.lam)
                delta = new_j - beta[j]
                if delta != 0.0:
                    eng.shift(j, delta)
                    beta[j] = new_j
                    delta_sq += delta * delta
            step = math.sqrt(delta_sq)
        trace.append(step)
        if step < config.tol:
            converged = True
            break

    return BarFit(
        beta=beta,
        support=np.flatnonzero(beta),
        outer_iters=sweep,
        converged=converged,
        objective_trace=trace,
        config=config,
        method="cycbar",
    )


def fit_bar(dataset, censoring, config: BarConfig, method: str = "cycbar", beta0=None) -> BarFit:
    """Dispatch helper used by the CLI and the tuning grid."""
    if method == "cycbar":
        return cyc_bar(dataset, censoring, config, beta0=beta0)
    if method == "bar":
        return bar_ccd(dataset, censoring, config, beta0=beta0)
    raise ValueError(f"unknown BAR method {method!r}")


def with_lambda(config: BarConfig, lam: float) -> BarConfig:
    return replace(config, lam=float(lam))
