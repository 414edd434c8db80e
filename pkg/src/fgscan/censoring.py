"""Kaplan-Meier estimate of the censoring survival G(t) = Pr(C >= t).

The product-limit estimate treats cause 0 as the "event" for the
censoring process and causes 1/2 as censored-for-C.  Two conventions are
fixed here and relied on everywhere downstream:

* G is evaluated left-continuously: G(t) multiplies the drop factors of
  censoring times *strictly before* t, so subjects censored exactly at t
  still count as C >= t.
* When a failure and a censoring share a time, the censoring is taken to
  occur after the failure, so failures at t remain in the censoring risk
  set at t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CAUSE_CENSORED, CompetingRisksDataset
from .errors import WeightUndefinedError


@dataclass(frozen=True)
class CensoringSurvival:
    """Step function G(t) = Pr(C >= t) plus cached per-subject values.

    ``values[k]`` is G just after ``jump_times[k]``; ``per_subject_G[i]``
    is G(X_i) under the left-continuity convention.  ``subject_times``
    keeps the observed times so pairwise weights can be formed without
    the dataset at hand.
    """

    jump_times: np.ndarray
    values: np.ndarray
    per_subject_G: np.ndarray
    subject_times: np.ndarray

    def evaluate(self, t) -> np.ndarray:
        """Evaluate G(t) = Pr(C >= t) at scalar or array ``t``."""
        t = np.asarray(t, dtype=np.float64)
        if self.jump_times.size == 0:
            out = np.ones_like(t)
        else:
            idx = np.searchsorted(self.jump_times, t, side="left")
            out = np.where(idx == 0, 1.0, self.values[np.maximum(idx - 1, 0)])
        return out if out.ndim else float(out)


def fit_censoring_km(dataset: CompetingRisksDataset) -> CensoringSurvival:
    """Product-limit estimate of Pr(C >= t) from observed data.

    With no censored observations the estimate is identically 1 and the
    weighted machinery reduces bit-exactly to the unweighted one.
    """
    t = dataset.time
    order = np.argsort(t, kind="stable")
    ts = t[order]
    censored_s = dataset.cause[order] == CAUSE_CENSORED

    # distinct times, number censored at each, number still at risk (X >= t)
    uniq, first = np.unique(ts, return_index=True)
    d = np.add.reduceat(censored_s.astype(np.int64), first)
    at_risk = dataset.n - first

    has_jump = d > 0
    jump_times = uniq[has_jump]
    factors = 1.0 - d[has_jump] / at_risk[has_jump]
    values = np.cumprod(factors)

    cs = CensoringSurvival(
        jump_times=jump_times,
        values=values,
        per_subject_G=np.empty(0),
        subject_times=t,
    )
    per_subject = np.asarray(cs.evaluate(t), dtype=np.float64)
    cs = CensoringSurvival(
        jump_times=jump_times,
        values=values,
        per_subject_G=per_subject,
        subject_times=t,
    )
    for arr in (cs.jump_times, cs.values, cs.per_subject_G):
        arr.setflags(write=False)
    return cs


def weight_ratio(cs: CensoringSurvival, i: int, k: int) -> float:
    """IPCW ratio G(X_i) / G(min(X_i, X_k)); equals 1 whenever X_k >= X_i."""
    xi, xk = cs.subject_times[i], cs.subject_times[k]
    g_i = cs.per_subject_G[i]
    g_min = g_i if xk >= xi else cs.per_subject_G[k]
    if g_min <= 0.0:
        raise WeightUndefinedError(
            f"G(min(X_{i}, X_{k})) = 0: subject beyond last censoring support"
        )
    return float(g_i / g_min)
