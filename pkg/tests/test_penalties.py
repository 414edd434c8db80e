import numpy as np
import pytest

from fgscan import ScanEngine, fit_censoring_km
from fgscan.penalties import PenaltySpec, default_alasso_weights, fit_penalized

from conftest import random_dataset
from test_bar import unpenalized_oracle


@pytest.fixture(scope="module")
def fit_problem():
    rng = np.random.default_rng(17)
    ds = random_dataset(rng, 200, 5)
    return ds, fit_censoring_km(ds)


class TestPenaltySpec:
    def test_defaults(self):
        assert PenaltySpec("scad", 1.0).resolved_gamma == 3.7
        assert PenaltySpec("mcp", 1.0).resolved_gamma == 3.0

    def test_shape_constraints(self):
        with pytest.raises(ValueError):
            PenaltySpec("scad", 1.0, gamma=2.0)
        with pytest.raises(ValueError):
            PenaltySpec("mcp", 1.0, gamma=1.0)
        with pytest.raises(ValueError):
            PenaltySpec("bridge", 1.0)

    def test_weights_positive(self):
        with pytest.raises(ValueError):
            PenaltySpec("alasso", 1.0, adaptive_weights=np.array([1.0, 0.0]))


class TestFitPenalized:
    @pytest.mark.parametrize("kind", ["lasso", "scad", "mcp"])
    def test_lambda_zero_matches_unpenalized(self, fit_problem, kind):
        ds, cs = fit_problem
        fit = fit_penalized(ds, cs, PenaltySpec(kind, 0.0), tol=1e-9)
        np.testing.assert_allclose(fit.beta, unpenalized_oracle(ds, cs), atol=1e-5)

    def test_alasso_lambda_zero(self, fit_problem):
        ds, cs = fit_problem
        fit = fit_penalized(ds, cs, PenaltySpec("alasso", 0.0), tol=1e-9)
        np.testing.assert_allclose(fit.beta, unpenalized_oracle(ds, cs), atol=1e-5)

    @pytest.mark.parametrize("kind", ["lasso", "alasso", "scad", "mcp"])
    def test_huge_lambda_all_zero(self, fit_problem, kind):
        ds, cs = fit_problem
        fit = fit_penalized(ds, cs, PenaltySpec(kind, 1e12))
        np.testing.assert_array_equal(fit.beta, 0.0)

    def test_lasso_kkt_at_zero_coordinates(self, fit_problem):
        ds, cs = fit_problem
        tol = 1e-8
        lam = 6.0
        fit = fit_penalized(ds, cs, PenaltySpec("lasso", lam), tol=tol)
        assert fit.converged
        rep = ScanEngine(ds, cs).report(fit.beta)
        for j in range(ds.p):
            if fit.beta[j] == 0.0:
                assert abs(rep.score[j]) <= lam + 10 * tol * rep.neg_hess_diag[j]
            else:
                # stationarity: score_j = lam * sign(beta_j)
                assert rep.score[j] == pytest.approx(
                    lam * np.sign(fit.beta[j]), abs=10 * tol * max(1.0, rep.neg_hess_diag[j])
                )

    def test_scan_naive_fit_parity(self, fit_problem):
        ds, cs = fit_problem
        for kind in ("lasso", "scad", "mcp"):
            a = fit_penalized(ds, cs, PenaltySpec(kind, 2.0), engine="scan")
            b = fit_penalized(ds, cs, PenaltySpec(kind, 2.0), engine="naive")
            np.testing.assert_allclose(a.beta, b.beta, atol=1e-8)

    def test_alasso_weights_require_n_gt_p(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, 6, 8)
        cs = fit_censoring_km(ds)
        with pytest.raises(ValueError, match="n > p"):
            default_alasso_weights(ds, cs)

    def test_sparsity_increases_with_lambda(self, fit_problem):
        ds, cs = fit_problem
        sizes = [
            fit_penalized(ds, cs, PenaltySpec("lasso", lam)).support_size
            for lam in (0.1, 2.0, 20.0)
        ]
        assert sizes[0] >= sizes[1] >= sizes[2]
