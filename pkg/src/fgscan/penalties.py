"""LASSO, adaptive LASSO, SCAD, and MCP baselines for the PSH model.

All four share the engines' coordinate protocol: each update minimizes
the local quadratic model of -2*loglik plus the penalty, which gives the
standard closed-form rules on the working statistic b_j = curv_j *
beta_j + score_j with curvature nu_j:

* soft threshold S(b, t) = sign(b) * max(|b| - t, 0),
* LASSO / ALASSO:  S(b, lam * w_j) / nu,
* SCAD (gamma > 2): three regimes meeting at |b| = lam*(nu+1) and
  |b| = nu*gamma*lam,
* MCP (gamma > 1): firm threshold below |b| = nu*gamma*lam.

The nonconvex rules can lose their positive denominator when curvature
is tiny relative to 1/gamma; those coordinates fall back to the plain
Newton step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bar import BarFit, fit_ridge
from .censoring import CensoringSurvival
from .data import CompetingRisksDataset
from .engine import DEGENERATE_CURVATURE, make_engine

PENALTY_KINDS = ("lasso", "alasso", "scad", "mcp")

_DEFAULT_GAMMA = {"scad": 3.7, "mcp": 3.0}


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family, strength, and shape for one baseline fit."""

    kind: str
    lam: float
    gamma: float | None = None
    adaptive_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"kind must be one of {PENALTY_KINDS}")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        gamma = self.resolved_gamma
        if self.kind == "scad" and gamma <= 2:
            raise ValueError("SCAD requires gamma > 2")
        if self.kind == "mcp" and gamma <= 1:
            raise ValueError("MCP requires gamma > 1")
        if self.adaptive_weights is not None:
            w = np.asarray(self.adaptive_weights, dtype=float)
            if (w <= 0).any() or not np.isfinite(w).all():
                raise ValueError("adaptive weights must be strictly positive and finite")
            object.__setattr__(self, "adaptive_weights", w)

    @property
    def resolved_gamma(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return _DEFAULT_GAMMA.get(self.kind, 0.0)


def _soft(b: float, t: float) -> float:
    return math.copysign(max(abs(b) - t, 0.0), b)


def _update(kind: str, b: float, nu: float, lam: float, gamma: float) -> float:
    if kind in ("lasso", "alasso"):
        return _soft(b, lam) / nu
    if kind == "scad":
        if abs(b) <= lam * (nu + 1.0):
            return _soft(b, lam) / nu
        if abs(b) <= nu * gamma * lam:
            d = nu - 1.0 / (gamma - 1.0)
            if d <= DEGENERATE_CURVATURE:
                return b / nu
            return _soft(b, gamma * lam / (gamma - 1.0)) / d
        return b / nu
    if kind == "mcp":
        if abs(b) <= nu * gamma * lam:
            d = nu - 1.0 / gamma
            if d <= DEGENERATE_CURVATURE:
                return b / nu
            return _soft(b, lam) / d
        return b / nu
    raise ValueError(kind)


def default_alasso_weights(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    engine: str = "scan",
    floor: float = 1e-10,
) -> np.ndarray:
    """1/|unpenalized estimate| weights; requires n > p."""
    if dataset.n <= dataset.p:
        raise ValueError(
            "default adaptive weights need n > p (supply adaptive_weights explicitly)"
        )
    beta = fit_ridge(dataset, censoring, 0.0, engine=engine)
    return 1.0 / np.maximum(np.abs(beta), floor)


def fit_penalized(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    spec: PenaltySpec,
    tol: float = 1e-6,
    max_iter: int = 1000,
    engine: str = "scan",
    beta0: np.ndarray | None = None,
) -> BarFit:
    """Cyclic coordinate descent under the requested penalty family.

    Converges on the Euclidean norm of the per-sweep coefficient change;
    a non-convergent fit is returned flagged, not raised.
    """
    p = dataset.p
    weights = np.ones(p)
    if spec.kind == "alasso":
        if spec.adaptive_weights is not None:
            if spec.adaptive_weights.shape[0] != p:
                raise ValueError("adaptive_weights length must equal p")
            weights = spec.adaptive_weights
        else:
            weights = default_alasso_weights(dataset, censoring, engine)

    eng = make_engine(dataset, censoring, engine)
    beta = np.zeros(p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    eng.begin(beta)
    gamma = spec.resolved_gamma

    trace = []
    converged = False
    sweep = 0
    for sweep in range(1, max_iter + 1):
        delta_sq = 0.0
        for j in range(p):
            c1, c2 = eng.coord(j)
            if c2 <= DEGENERATE_CURVATURE:
                new_j = 0.0
            else:
                b = c2 * beta[j] + c1
                new_j = _update(spec.kind, b, c2, spec.lam * weights[j], gamma)
            delta = new_j - beta[j]
            if delta != 0.0:
                eng.shift(j, delta)
                beta[j] = new_j
                delta_sq += delta * delta
        step = math.sqrt(delta_sq)
        trace.append(step)
        if step < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"{spec.kind} fit did not converge within {max_iter} sweeps")

    return BarFit(
        beta=beta,
        support=np.flatnonzero(beta),
        outer_iters=sweep,
        converged=converged,
        objective_trace=trace,
        config=spec,
        method=spec.kind,
    )
