import numpy as np
import pytest

from rmtkit import synth
from rmtkit.synth import TrueCorrelationSpec


class TestSeeding:
    def test_same_seed_same_panel(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 10))
        a = synth.gaussian_panel(C, 20, seed=42)
        b = synth.gaussian_panel(C, 20, seed=42)
        assert np.array_equal(a.values, b.values)

    def test_different_seeds_differ(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 10))
        a = synth.gaussian_panel(C, 20, seed=1)
        b = synth.gaussian_panel(C, 20, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_spawned_seeds_independent(self):
        seeds = synth.spawn_seeds(0, 3)
        draws = [synth.make_rng(s).standard_normal(5) for s in seeds]
        assert not np.allclose(draws[0], draws[1])


class TestHaarRotation:
    def test_orthogonal(self):
        O = synth.haar_rotation(30, seed=0)
        assert np.allclose(O @ O.T, np.eye(30), atol=1e-12)

    def test_column_sign_convention_removes_qr_bias(self):
        # the mean diagonal of a sign-fixed QR rotation is near zero
        diags = [np.mean(np.diag(synth.haar_rotation(20, s)))
                 for s in range(50)]
        assert abs(np.mean(diags)) < 0.1


class TestTrueCorrelation:
    def test_identity(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 5))
        assert np.array_equal(C.values, np.eye(5))

    def test_single_spike_top_eigenvalue(self):
        C = synth.build_true_correlation(
            TrueCorrelationSpec("single_spike", 100, rho_bar=0.3))
        assert C.eigenvalues[0] == pytest.approx(1 + 99 * 0.3)
        assert np.allclose(np.diag(C.values), 1.0)

    def test_multi_spike_trace_budget(self):
        C = synth.build_true_correlation(
            TrueCorrelationSpec("multi_spike", 50, spikes=(5.0, 3.0)), seed=1)
        assert np.trace(C.values) == pytest.approx(50.0)
        assert C.eigenvalues[0] == pytest.approx(5.0)
        assert C.eigenvalues[1] == pytest.approx(3.0)

    def test_multi_spike_validation(self):
        with pytest.raises(ValueError):
            TrueCorrelationSpec("multi_spike", 5, spikes=(4.0, 3.0))
        with pytest.raises(ValueError):
            TrueCorrelationSpec("multi_spike", 5, spikes=(0.5,))

    def test_powerlaw_unit_trace_density(self):
        C = synth.build_true_correlation(
            TrueCorrelationSpec("powerlaw", 200, alpha=0.35), seed=2)
        assert np.trace(C.values) / 200 == pytest.approx(1.0, abs=0.1)
        assert C.eigenvalues[-1] >= 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            TrueCorrelationSpec("diagonalish", 5)


class TestPanels:
    def test_gaussian_panel_covariance(self):
        C = synth.build_true_correlation(
            TrueCorrelationSpec("single_spike", 30, rho_bar=0.4))
        panel = synth.gaussian_panel(C, 20000, seed=3)
        emp = panel.values.T @ panel.values / panel.T
        assert np.max(np.abs(emp - C.values)) < 0.05

    def test_student_panel_standardized(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 20))
        panel = synth.student_panel(C, 5.0, 500, seed=4)
        assert panel.is_standardized(tol=1e-10)

    def test_student_panel_heavy_tails(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 10))
        student = synth.student_panel(C, 3.0, 20000, seed=5)
        gauss = synth.gaussian_panel(C, 20000, seed=5)
        k_student = np.mean(student.values ** 4)
        k_gauss = np.mean(gauss.values ** 4)
        assert k_student > 2.0 * k_gauss

    def test_student_mu_validation(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 5))
        with pytest.raises(ValueError):
            synth.student_panel(C, 2.0, 100, seed=0)


class TestWickCheck:
    def test_gaussian_satisfies_wick(self):
        C = synth.build_true_correlation(
            TrueCorrelationSpec("single_spike", 20, rho_bar=0.3))
        panel = synth.gaussian_panel(C, 40000, seed=6)
        assert synth.wick_check(panel, np.inf) < 0.15

    def test_student_needs_elliptic_prefactor(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 20))
        panel = synth.student_panel(C, 8.0, 60000, seed=7, standardized=False)
        with_pref = synth.wick_check(panel, 8.0)
        plain = synth.wick_check(panel, np.inf)
        assert with_pref < plain

    def test_requires_finite_fourth_moment(self):
        C = synth.build_true_correlation(TrueCorrelationSpec("identity", 5))
        panel = synth.gaussian_panel(C, 100, seed=8)
        with pytest.raises(ValueError):
            synth.wick_check(panel, 3.0)
