"""Penalty grids and BIC scoring for all fitters.

The grid is 25 log-spaced values on [0.001, 3*log(p)].  Model scores use

    BIC = -2 * loglik(beta_hat) + |support| * log(N),

with N the subject count by default; ``bic_n="events"`` swaps in the
cause-1 event count instead (the pseudo-likelihood has one term per
cause-1 event, and no convention is canonical for it).  Ties in the
score resolve toward the larger (sparser) lambda.

The path is fitted from the largest lambda down, warm-starting each fit
from the previous solution.  For the nested BAR algorithm a warm start
re-seeds exactly-zero coordinates from the ridge initializer, because
its inverse-square reweighting makes zeros absorbing.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bar import BarConfig, BarFit, fit_bar, fit_ridge
from .censoring import CensoringSurvival
from .data import CompetingRisksDataset
from .engine import make_engine
from .errors import ConvergenceError
from .penalties import PENALTY_KINDS, PenaltySpec, default_alasso_weights, fit_penalized

GRID_SIZE = 25
GRID_FLOOR = 1e-3

BAR_METHODS = ("bar", "cycbar")
ALL_METHODS = BAR_METHODS + PENALTY_KINDS


@dataclass(frozen=True)
class TuneResult:
    """One tuned path: grid, scores, support sizes, and the winning fit."""

    grid: np.ndarray
    scores: np.ndarray
    support_sizes: np.ndarray
    converged: np.ndarray
    best_lambda: float
    best_fit: BarFit
    method: str
    bic_n: str
    path: np.ndarray  # (len(grid), p) coefficient vectors along the grid

    def to_rows(self):
        return [
            {
                "lambda": float(l),
                "bic": float(s),
                "support_size": int(k),
                "converged": bool(c),
            }
            for l, s, k, c in zip(self.grid, self.scores, self.support_sizes, self.converged)
        ]


def default_grid(p: int) -> np.ndarray:
    """25 log-spaced penalty values from 0.001 to 3*log(p), inclusive."""
    if p < 2:
        raise ValueError("default grid needs p >= 2")
    return np.geomspace(GRID_FLOOR, 3.0 * math.log(p), GRID_SIZE)


def bic_score(
    fit: BarFit | np.ndarray,
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    bic_n: str = "subjects",
    engine: str = "scan",
) -> float:
    beta = fit.beta if isinstance(fit, BarFit) else np.asarray(fit, float)
    if bic_n == "subjects":
        n_term = dataset.n
    elif bic_n == "events":
        n_term = max(dataset.n_events, 1)
    else:
        raise ValueError("bic_n must be 'subjects' or 'events'")
    ll = make_engine(dataset, censoring, engine).loglik(beta)
    df = int(np.count_nonzero(beta))
    return -2.0 * ll + df * math.log(n_term)


def _fit_one(dataset, censoring, method, lam, bar_config, penalty_kw, beta0):
    if method in BAR_METHODS:
        return fit_bar(dataset, censoring, replace(bar_config, lam=float(lam)), method, beta0=beta0)
    spec = PenaltySpec(method, float(lam), **penalty_kw)
    return fit_penalized(
        dataset,
        censoring,
        spec,
        tol=bar_config.tol,
        max_iter=bar_config.max_outer,
        engine=bar_config.engine,
        beta0=beta0,
    )


def grid_search(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    method: str,
    grid: np.ndarray | None = None,
    bar_config: BarConfig | None = None,
    gamma: float | None = None,
    bic_n: str = "subjects",
    warm_start: bool = True,
    max_workers: int | None = None,
) -> TuneResult:
    """Fit every grid value, score by BIC, return the minimizer.

    With ``warm_start`` disabled the grid points are independent and can
    run on up to ``max_workers`` threads.
    """
    if method not in ALL_METHODS:
        raise ValueError(f"method must be one of {ALL_METHODS}")
    grid = default_grid(dataset.p) if grid is None else np.asarray(grid, float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    bar_config = bar_config or BarConfig()

    penalty_kw = {}
    if method in ("scad", "mcp") and gamma is not None:
        penalty_kw["gamma"] = gamma
    if method == "alasso":
        # one set of weights shared along the whole path
        penalty_kw["adaptive_weights"] = default_alasso_weights(
            dataset, censoring, bar_config.engine
        )

    order = np.argsort(grid)[::-1]  # fit the sparse end first
    fits: list = [None] * grid.size

    ridge_start = None
    if warm_start and method == "bar":
        ridge_start = fit_ridge(
            dataset,
            censoring,
            bar_config.resolve_xi(dataset.p),
            bar_config.engine,
            bar_config.inner_tol,
            bar_config.max_inner,
        )

    if warm_start:
        beta_prev = None
        for idx in order:
            beta0 = beta_prev
            if beta0 is not None and method == "bar":
                beta0 = np.where(beta0 == 0.0, ridge_start, beta0)
            fit = _fit_one(dataset, censoring, method, grid[idx], bar_config, penalty_kw, beta0)
            fits[idx] = fit
            beta_prev = fit.beta
    else:
        def run(idx):
            return idx, _fit_one(
                dataset, censoring, method, grid[idx], bar_config, penalty_kw, None
            )

        if max_workers and max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                for idx, fit in pool.map(run, order):
                    fits[idx] = fit
        else:
            for idx in order:
                fits[idx] = run(idx)[1]

    scores = np.array([bic_score(f, dataset, censoring, bic_n, bar_config.engine) for f in fits])
    sizes = np.array([f.support_size for f in fits])
    converged = np.array([f.converged for f in fits])
    if not converged.any():
        raise ConvergenceError(
            f"no {method} fit converged on the grid; trace sizes: {sizes.tolist()}"
        )

    # minimal BIC among converged fits, ties toward larger lambda
    valid = np.flatnonzero(converged)
    best_score = scores[valid].min()
    candidates = valid[np.abs(scores[valid] - best_score) <= 1e-12]
    best_idx = candidates[np.argmax(grid[candidates])]

    return TuneResult(
        grid=grid,
        scores=scores,
        support_sizes=sizes,
        converged=converged,
        best_lambda=float(grid[best_idx]),
        best_fit=fits[best_idx],
        method=method,
        bic_n=bic_n,
        path=np.stack([f.beta for f in fits]),
    )


def fit_ebic_preset(
    dataset: CompetingRisksDataset,
    censoring: CensoringSurvival,
    method: str = "cycbar",
    bar_config: BarConfig | None = None,
) -> BarFit:
    """The fixed-parameter preset lam = xi = log(p): no grid search."""
    if method not in BAR_METHODS:
        raise ValueError("the fixed log(p) preset applies to the BAR methods")
    cfg = bar_config or BarConfig()
    lam = math.log(dataset.p)
    cfg = replace(cfg, lam=lam, xi=lam)
    return fit_bar(dataset, censoring, cfg, method)
