import numpy as np
import pytest

from rmtkit import crosscorr
from rmtkit.estimators import EstimatorError, ReturnPanel, standardize


class TestWhitening:
    def test_exact_unit_covariance(self):
        rng = np.random.default_rng(0)
        panel = standardize(ReturnPanel(rng.standard_normal((500, 60))))
        white = crosscorr.normalize_principal_components(panel)
        E = white.values.T @ white.values / white.T
        assert np.allclose(E, np.eye(white.N), atol=1e-10)

    def test_rank_deficit_dropped_with_warning(self):
        rng = np.random.default_rng(1)
        vals = rng.standard_normal((200, 30))
        vals[:, -1] = vals[:, 0] + vals[:, 1]  # exactly dependent column
        panel = standardize(ReturnPanel(vals))
        with pytest.warns(UserWarning, match="null principal directions"):
            white = crosscorr.normalize_principal_components(panel)
        assert white.N == 29


class TestCrossSingulars:
    def test_null_panels_inside_band(self):
        rng = np.random.default_rng(2)
        T, N, M = 1500, 180, 120
        X = standardize(ReturnPanel(rng.standard_normal((T, N))))
        Y = standardize(ReturnPanel(rng.standard_normal((T, M))))
        res = crosscorr.cross_singulars(
            crosscorr.normalize_principal_components(X),
            crosscorr.normalize_principal_components(Y))
        assert res.significant_count == 0
        assert res.singular_values.max() <= res.threshold
        assert res.singular_values.max() <= 1.0 + 1e-8

    def test_planted_factor_detected(self):
        X, Y = crosscorr.planted_factor_panels(150, 100, 1500, 0.8, seed=3)
        res = crosscorr.cross_singulars(
            crosscorr.normalize_principal_components(X),
            crosscorr.normalize_principal_components(Y))
        assert res.significant_count == 1
        assert res.singular_values[0] > res.threshold

    def test_weak_factor_hidden(self):
        X, Y = crosscorr.planted_factor_panels(150, 100, 1500, 0.05, seed=4)
        res = crosscorr.cross_singulars(
            crosscorr.normalize_principal_components(X),
            crosscorr.normalize_principal_components(Y))
        assert res.significant_count == 0

    def test_mismatched_dates_rejected(self):
        rng = np.random.default_rng(5)
        X = standardize(ReturnPanel(rng.standard_normal((100, 10))))
        Y = standardize(ReturnPanel(rng.standard_normal((120, 10))))
        with pytest.raises(EstimatorError, match="dates"):
            crosscorr.cross_singulars(X, Y)


class TestPlantedFactorPanels:
    def test_standardized_outputs(self):
        X, Y = crosscorr.planted_factor_panels(20, 15, 300, 0.5, seed=6)
        assert X.is_standardized(tol=1e-8)
        assert Y.is_standardized(tol=1e-8)

    def test_strength_validation(self):
        with pytest.raises(ValueError):
            crosscorr.planted_factor_panels(10, 10, 100, 1.5, seed=0)
