import numpy as np
import pytest

from rmtkit import spectra
from rmtkit.density import SpectralDensity


class TestMarchenkoPastur:
    def test_edges_analytic(self):
        lo, hi = spectra.mp_edges(0.25)
        assert lo == pytest.approx(0.25)
        assert hi == pytest.approx(2.25)

    def test_density_value_at_one(self):
        # rho(1) = sqrt((hi-1)(1-lo)) / (2 pi q) at q = 0.25
        d = spectra.mp_density(0.25)
        assert d.interpolate(1.0) == pytest.approx(0.6164047, abs=1e-4)

    def test_moments(self):
        d = spectra.mp_density(0.25)
        assert d.mass() == pytest.approx(1.0, abs=1e-6)
        assert d.mean() == pytest.approx(1.0, abs=1e-4)
        assert d.variance() == pytest.approx(0.25, abs=1e-3)

    def test_singular_regime_atom(self):
        # q > 1: rank deficit puts mass 1 - 1/q at zero
        d = spectra.mp_density(2.0)
        assert d.atoms == ((0.0, pytest.approx(0.5)),)
        assert d.continuous_mass() == pytest.approx(0.5, abs=1e-6)
        assert d.mean() == pytest.approx(1.0, abs=1e-3)

    def test_tiny_q_collapses_to_atom(self):
        d = spectra.mp_density(1e-12)
        assert d.is_atomic
        assert d.atoms[0][0] == pytest.approx(1.0)

    def test_matches_sample_eigenvalues(self):
        rng = np.random.default_rng(3)
        N, T = 400, 1600
        X = rng.standard_normal((T, N))
        eigs = np.linalg.eigvalsh(X.T @ X / T)
        emp = SpectralDensity.from_samples(eigs, nbins=40)
        assert spectra.mp_density(0.25).l1_distance(emp) < 0.1


class TestWigner:
    def test_support_and_variance(self):
        d = spectra.wigner_semicircle(1.0)
        lo, hi = d.support()
        assert lo == pytest.approx(-2.0, abs=1e-3)
        assert hi == pytest.approx(2.0, abs=1e-3)
        assert d.variance() == pytest.approx(1.0, abs=1e-3)

    def test_center_value(self):
        d = spectra.wigner_semicircle(1.0)
        assert d.interpolate(0.0) == pytest.approx(1.0 / np.pi, abs=1e-4)


class TestEwma:
    def test_edges_solve_defining_equation(self):
        lo, hi = spectra.ewma_edges(0.5)
        assert lo == pytest.approx(0.301709562684336, abs=1e-12)
        assert hi == pytest.approx(2.357676673945899, abs=1e-12)

    def test_density_moments(self):
        d = spectra.ewma_density(0.5)
        assert d.mass() == pytest.approx(1.0, abs=1e-6)
        assert d.mean() == pytest.approx(1.0, abs=5e-3)

    def test_narrower_than_mp_at_same_q(self):
        # the exponential window loses less than a flat window of the same
        # effective length: support is strictly inside the MP band edges
        elo, ehi = spectra.ewma_edges(0.5)
        mlo, mhi = spectra.mp_edges(0.5)
        assert elo > mlo
        assert ehi < mhi

    def test_tiny_q_atom(self):
        assert spectra.ewma_density(1e-12).is_atomic


class TestDressedSpectrum:
    def test_atom_prior_recovers_mp(self):
        out = spectra.dressed_spectrum(SpectralDensity.atom(1.0), 0.25)
        assert out.l1_distance(spectra.mp_density(0.25)) < 0.02

    def test_powerlaw_prior_keeps_unit_mean(self):
        prior = spectra.powerlaw_prior_density(spectra.PowerLawPrior(0.35))
        out = spectra.dressed_spectrum(prior, 0.25)
        assert out.mass() == pytest.approx(1.0, abs=1e-6)
        assert out.mean() == pytest.approx(prior.mean(), abs=0.02)

    def test_sampling_broadens_the_prior(self):
        prior = spectra.powerlaw_prior_density(spectra.PowerLawPrior(0.35))
        out = spectra.dressed_spectrum(prior, 0.5)
        assert out.variance() > prior.variance()


class TestPowerLawPrior:
    def test_mu2_closed_forms(self):
        p = spectra.PowerLawPrior(0.5, mu=2.0)
        assert p.amplitude == pytest.approx(0.25)
        assert p.lambda0 == pytest.approx(0.0)

    def test_ladder_descends(self):
        p = spectra.PowerLawPrior(0.35)
        lam = p.eigenvalue_ladder(500, np.arange(1, 501))
        assert np.all(np.diff(lam) < 0)
        assert lam[-1] >= p.lambda_min - 1e-9

    def test_density_normalized_near_unit_mean(self):
        d = spectra.powerlaw_prior_density(spectra.PowerLawPrior(0.5))
        assert d.mass() == pytest.approx(1.0, abs=1e-6)
        # the truncated tail carries ~1% of the mean at the default cut
        assert d.mean() == pytest.approx(1.0, abs=0.02)

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            spectra.PowerLawPrior(0.0)
        with pytest.raises(ValueError):
            spectra.PowerLawPrior(0.5, mu=1.0)

    def test_alpha_one_degenerates_to_atom(self):
        d = spectra.powerlaw_prior_density(spectra.PowerLawPrior(1.0))
        assert d.is_atomic


class TestEllipticStudent:
    def test_mean_matches_volatility_mixture(self):
        # E[sigma^2] = mu/(mu-2) for the inverse-chi-squared volatility
        for mu in (3.0, 6.0):
            d = spectra.elliptic_student_density(
                spectra.EllipticParams(0.25, mu))
            assert d.mean() == pytest.approx(mu / (mu - 2.0), rel=0.03)

    def test_large_mu_approaches_mp(self):
        d = spectra.elliptic_student_density(spectra.EllipticParams(0.25, 1e6))
        assert d.l1_distance(spectra.mp_density(0.25)) < 0.02

    def test_tail_exponent(self):
        d = spectra.elliptic_student_density(spectra.EllipticParams(0.5, 4.0))
        mask = (d.grid > 30.0) & (d.grid < 300.0) & (d.density > 0)
        slope = np.polyfit(np.log(d.grid[mask]), np.log(d.density[mask]), 1)[0]
        assert slope == pytest.approx(-3.0, abs=0.15)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            spectra.elliptic_student_density(spectra.EllipticParams(1.5, 4.0))
        with pytest.raises(ValueError):
            spectra.EllipticParams(0.5, 2.0)


class TestRsvdBenchmark:
    def test_symmetric_band(self):
        # n = m: gamma- = 0, gamma+ = 4 n (1 - n)
        lo, hi = spectra.rsvd_band(0.25, 0.25)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert hi == pytest.approx(2.0 * np.sqrt(0.25 * 0.75))

    def test_density_masses(self):
        n, m = 0.125, 0.085
        d = spectra.rsvd_benchmark(n, m)
        assert d.mass() == pytest.approx(1.0, abs=1e-6)
        assert d.atom_mass() == pytest.approx(1.0 - min(n, m), abs=1e-6)
        assert d.continuous_mass() == pytest.approx(min(n, m), abs=1e-6)

    def test_matches_sampled_singular_values(self):
        rng = np.random.default_rng(11)
        T, N, M = 2000, 250, 170
        X, Y = rng.standard_normal((T, N)), rng.standard_normal((T, M))

        def whiten(A):
            E = A.T @ A / T
            vals, vecs = np.linalg.eigh(E)
            return A @ vecs / np.sqrt(vals)

        s = np.linalg.svd(whiten(Y).T @ whiten(X) / T, compute_uv=False)
        lo, hi = spectra.rsvd_band(N / T, M / T)
        assert s.max() < hi + 5 * min(N, M) ** (-2.0 / 3.0)
        assert s.min() > lo - 0.02
