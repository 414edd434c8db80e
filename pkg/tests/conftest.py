import numpy as np
import pytest

from fgscan import CompetingRisksDataset, fit_censoring_km


def random_dataset(rng, n, p, censor_frac=0.3, competing_frac=0.3, ties=False):
    """Ad-hoc competing-risks sample for oracle tests (not the study generator)."""
    if ties:
        time = rng.integers(1, max(3, n // 3), size=n).astype(float)
    else:
        time = rng.exponential(1.0, size=n)
    u = rng.random(n)
    cause = np.where(u < censor_frac, 0, np.where(u < censor_frac + competing_frac, 2, 1))
    if not (cause == 1).any():
        cause[int(rng.integers(n))] = 1
    z = rng.standard_normal((n, p))
    return CompetingRisksDataset.from_arrays(time, cause, z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def small_mixed(rng):
    ds = random_dataset(rng, 60, 3, ties=True)
    return ds, fit_censoring_km(ds)
