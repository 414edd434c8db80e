"""Wall-clock benchmark harness for the fitting pipelines.

Each cell of the grid (n, method, engine) times complete fits on
identical datasets and seeds, so fold changes between two cells isolate
the algorithmic contrast.  Dataset generation and the censoring fit are
excluded from the timed region (both arms share them); the first
replicate is a discarded warmup, and both the mean and the median of
the remaining times are reported.

Fits use the fixed lam = xi = log(p) preset so that cells measure one
fit each rather than a tuning path; pass ``lam`` to override.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .bar import BarConfig, fit_bar
from .censoring import fit_censoring_km
from .engine import make_engine
from .penalties import PenaltySpec, fit_penalized
from .simulate import SimulationSpec, calibrate_u_max, generate, study_beta1

BENCH_METHODS = ("cycbar", "bar", "lasso", "alasso", "scad", "mcp")


@dataclass(frozen=True)
class BenchCell:
    n: int
    p: int
    method: str
    engine: str
    replicates: int
    mean_seconds: float
    median_seconds: float
    converged: bool
    error: str = ""


@dataclass
class BenchReport:
    cells: list = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.__dict__ for c in self.cells])

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    def mean_seconds(self, n: int, method: str, engine: str) -> float:
        for c in self.cells:
            if c.n == n and c.method == method and c.engine == engine:
                if c.error:
                    raise ValueError(f"cell (n={n}, {method}, {engine}) failed: {c.error}")
                return c.mean_seconds
        raise KeyError(f"no cell (n={n}, {method}, {engine})")

    def fold_change(self, n: int, method: str, reference: tuple, variant: tuple) -> float:
        """reference time / variant time; both are (method, engine) pairs."""
        ref = self.mean_seconds(n, *reference)
        var = self.mean_seconds(n, *variant)
        return ref / var

    def fold_frame(self) -> pd.DataFrame:
        """Scan-vs-naive fold change per (n, method) where both arms ran."""
        rows = []
        for c in self.cells:
            if c.engine != "scan" or c.error:
                continue
            try:
                naive = self.mean_seconds(c.n, c.method, "naive")
            except (KeyError, ValueError):
                continue
            rows.append(
                {
                    "n": c.n,
                    "p": c.p,
                    "method": c.method,
                    "fold_scan_vs_naive": naive / c.mean_seconds,
                }
            )
        return pd.DataFrame(rows)


def _fit_once(dataset, censoring, method, engine, lam, xi, tol, max_iter, tuned):
    cfg = BarConfig(xi=xi, lam=lam, tol=tol, inner_tol=tol,
                    max_outer=max_iter, max_inner=max_iter, engine=engine)
    if tuned:
        # the BIC-grid procedure: one shared initializer, 25 warm-started fits
        from .tuning import grid_search

        return grid_search(dataset, censoring, method, bar_config=cfg).best_fit
    if method in ("cycbar", "bar"):
        return fit_bar(dataset, censoring, cfg, method)
    return fit_penalized(
        dataset, censoring, PenaltySpec(method, lam),
        tol=tol, max_iter=max_iter, engine=engine,
    )


def run_bench(
    sizes,
    p: int = 100,
    methods=("cycbar",),
    replicates: int = 3,
    seed: int = 0,
    scan: str = "both",
    lam: float | None = None,
    xi: float | None = None,
    tol: float = 1e-6,
    max_iter: int = 1000,
    pi: float = 0.5,
    rho: float = 0.5,
    target_censoring: float = 1.0 / 3.0,
    tuned: bool = False,
) -> BenchReport:
    """Time every (n, method, engine) cell over shared replicate datasets.

    ``tuned=False`` times one fixed-penalty fit per replicate;
    ``tuned=True`` times the full BIC grid-search procedure instead,
    which is the published runtime contrast.
    """
    if replicates < 3:
        raise ValueError("replicates must be >= 3 (first replicate is warmup)")
    engines = {"on": ["scan"], "off": ["naive"], "both": ["scan", "naive"]}[scan]
    for m in methods:
        if m not in BENCH_METHODS:
            raise ValueError(f"unknown bench method {m!r}")
    lam_value = math.log(p) if lam is None else lam
    xi_value = math.log(p) if xi is None else xi

    beta1 = study_beta1(p)
    u_max = calibrate_u_max(
        SimulationSpec(n=1000, p=p, rho=rho, pi=pi, beta1=beta1, seed=seed),
        target_censoring=target_censoring,
    )

    report = BenchReport()
    for n in sizes:
        spec = SimulationSpec(n=int(n), p=p, rho=rho, pi=pi, beta1=beta1, u_max=u_max, seed=seed)
        prepared = []
        for rep in range(replicates):
            ds = generate(spec, stream=rep)
            prepared.append((ds, fit_censoring_km(ds)))
        for method in methods:
            for engine in engines:
                times = []
                converged = True
                error = ""
                try:
                    for rep, (ds, cs) in enumerate(prepared):
                        t0 = time.perf_counter()
                        fit = _fit_once(
                            ds, cs, method, engine, lam_value, xi_value, tol, max_iter, tuned
                        )
                        elapsed = time.perf_counter() - t0
                        if rep > 0:  # warmup discarded
                            times.append(elapsed)
                        converged = converged and fit.converged
                except Exception as exc:  # cell marked invalid, run continues
                    error = f"{type(exc).__name__}: {exc}"
                cell = BenchCell(
                    n=int(n),
                    p=p,
                    method=method,
                    engine=engine,
                    replicates=len(times),
                    mean_seconds=float(np.mean(times)) if times else float("nan"),
                    median_seconds=float(np.median(times)) if times else float("nan"),
                    converged=converged if not error else False,
                    error=error,
                )
                report.cells.append(cell)
    return report


def time_engine_evaluations(
    sizes,
    p: int = 100,
    seed: int = 0,
    evaluations: int = 3,
    engines=("scan", "naive"),
    pi: float = 0.5,
    rho: float = 0.5,
    u_max: float = 2.0,
) -> pd.DataFrame:
    """Time full value/score/curvature evaluations for each engine.

    Used for the empirical complexity contrast: the naive evaluator must
    scale like n^2 while the scan evaluator stays near-linear.
    """
    beta1 = study_beta1(p)
    rows = []
    for n in sizes:
        spec = SimulationSpec(n=int(n), p=p, rho=rho, pi=pi, beta1=beta1, u_max=u_max, seed=seed)
        ds = generate(spec)
        cs = fit_censoring_km(ds)
        beta = np.zeros(p)
        for kind in engines:
            eng = make_engine(ds, cs, kind)
            eng.report(beta)  # warmup (naive may build its weight rows)
            times = []
            for _ in range(evaluations):
                t0 = time.perf_counter()
                eng.report(beta)
                times.append(time.perf_counter() - t0)
            rows.append(
                {"n": int(n), "p": p, "engine": kind, "seconds": float(np.mean(times))}
            )
    return pd.DataFrame(rows)


def loglog_slope(ns, seconds) -> float:
    """Least-squares slope of log(seconds) against log(n)."""
    x = np.log(np.asarray(ns, float))
    y = np.log(np.asarray(seconds, float))
    return float(np.polyfit(x, y, 1)[0])
