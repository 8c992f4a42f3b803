"""Return panels, empirical correlation estimators and eigen-structure
statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import kurtosis

__all__ = [
    "ReturnPanel",
    "CorrelationMatrix",
    "EstimatorError",
    "standardize",
    "pearson",
    "ewma_estimator",
    "student_ml",
    "dual_spectrum_check",
    "eigenportfolio_report",
    "eigenvector_kurtosis",
]


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class ReturnPanel:
    """T x N matrix of returns with asset and time labels."""

    values: np.ndarray
    asset_ids: tuple = ()
    time_ids: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise EstimatorError("panel values must be a T x N matrix")
        if not np.all(np.isfinite(values)):
            raise EstimatorError("panel contains non-finite entries")
        T, N = values.shape
        asset_ids = tuple(self.asset_ids) or tuple(f"A{i:04d}" for i in range(N))
        time_ids = tuple(self.time_ids) or tuple(range(T))
        if len(asset_ids) != N:
            raise EstimatorError("asset_ids length mismatch")
        if len(time_ids) != T:
            raise EstimatorError("time_ids length mismatch")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "asset_ids", asset_ids)
        object.__setattr__(self, "time_ids", time_ids)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def window(self, start: int, stop: int) -> "ReturnPanel":
        return ReturnPanel(self.values[start:stop], self.asset_ids,
                           self.time_ids[start:stop])

    def is_standardized(self, tol: float = 1e-8) -> bool:
        mu = self.values.mean(axis=0)
        var = self.values.var(axis=0)
        return bool(np.all(np.abs(mu) < tol) and np.all(np.abs(var - 1) < tol))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric PSD correlation matrix with a cached eigendecomposition.

    Eigenvalues are stored in descending order; the sign of each eigenvector
    is fixed so that its largest-magnitude component is positive.
    """

    values: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise EstimatorError("correlation matrix must be square")
        asym = np.max(np.abs(values - values.T)) if values.size else 0.0
        if asym > 1e-10:
            raise EstimatorError(f"matrix is not symmetric (max gap {asym:.2e})")
        values = 0.5 * (values + values.T)
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @cached_property
    def _eig(self):
        vals, vecs = np.linalg.eigh(self.values)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        if vals[-1] < -1e-10:
            raise EstimatorError(f"matrix is not PSD (min eigenvalue {vals[-1]:.2e})")
        for k in range(vecs.shape[1]):
            j = np.argmax(np.abs(vecs[:, k]))
            if vecs[j, k] < 0:
                vecs[:, k] = -vecs[:, k]
        return vals, vecs

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eig[1]

    def with_spectrum(self, new_eigenvalues, metadata=None) -> "CorrelationMatrix":
        """Rebuild the matrix with modified eigenvalues, same eigenvectors."""
        vals, vecs = self._eig
        new_eigenvalues = np.asarray(new_eigenvalues, dtype=float)
        m = (vecs * new_eigenvalues) @ vecs.T
        return CorrelationMatrix(m, metadata or dict(self.metadata))

    def inverse(self) -> np.ndarray:
        vals, vecs = self._eig
        if vals[-1] <= 1e-12:
            raise EstimatorError(
                "matrix is singular; clean it before inverting")
        return (vecs / vals) @ vecs.T

    def sqrt(self) -> np.ndarray:
        vals, vecs = self._eig
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


# ---------------------------------------------------------------------------
# Estimators

def standardize(panel: ReturnPanel) -> ReturnPanel:
    """Demean and rescale every column to zero mean, unit variance."""
    values = panel.values
    if panel.T < 2:
        raise EstimatorError("need at least two observations")
    std = values.std(axis=0)
    bad = np.nonzero(std < 1e-15)[0]
    if bad.size:
        raise EstimatorError(
            f"constant column for asset {panel.asset_ids[bad[0]]}")
    out = (values - values.mean(axis=0)) / std
    return ReturnPanel(out, panel.asset_ids, panel.time_ids)


def pearson(panel: ReturnPanel) -> CorrelationMatrix:
    """E = X^T X with X = values/sqrt(T); requires a standardized panel."""
    if not panel.is_standardized(tol=1e-6):
        raise EstimatorError("pearson requires a standardized panel")
    E = panel.values.T @ panel.values / panel.T
    np.fill_diagonal(E, 1.0)
    return CorrelationMatrix(E, {"estimator": "pearson", "T": panel.T})


def ewma_estimator(panel: ReturnPanel, epsilon: float) -> CorrelationMatrix:
    """Exponentially weighted estimator with weights renormalized over the
    finite sample (most recent observation carries the largest weight)."""
    if not 0 < epsilon < 1:
        raise EstimatorError("epsilon must lie in (0, 1)")
    T = panel.T
    w = epsilon * (1.0 - epsilon) ** np.arange(T - 1, -1, -1, dtype=float)
    w /= w.sum()
    X = panel.values * np.sqrt(w)[:, None]
    return CorrelationMatrix(X.T @ X, {"estimator": "ewma", "epsilon": epsilon})


def student_ml(panel: ReturnPanel, mu: float, tol: float = 1e-9,
               max_iter: int = 500) -> CorrelationMatrix:
    """Maximum-likelihood correlation matrix under the multivariate Student
    model with tail index mu.

    Fixed point of ``C = ((N+mu)/T) sum_t r_t r_t^T / (mu + r_t^T C^{-1} r_t)``
    iterated from the Pearson start, with damping 0.5 if the residual
    oscillates.
    """
    if mu <= 2:
        raise EstimatorError("mu must exceed 2")
    R = panel.values
    T, N = R.shape
    C = pearson(panel).values
    damping = 1.0
    prev_res = np.inf
    for _ in range(max_iter):
        try:
            sol = np.linalg.solve(C, R.T)
        except np.linalg.LinAlgError as exc:
            raise EstimatorError("singular iterate in student_ml") from exc
        quad = np.einsum("ti,it->t", R, sol)
        weights = (N + mu) / (T * (mu + quad))
        Cn = (R * weights[:, None]).T @ R
        res = np.max(np.abs(Cn - C))
        if res < tol:
            return CorrelationMatrix(
                Cn, {"estimator": "student_ml", "mu": mu})
        if res > prev_res:
            damping = 0.5
        prev_res = res
        C = C + damping * (Cn - C)
    raise EstimatorError(
        f"student_ml did not converge in {max_iter} iterations "
        f"(last residual {prev_res:.2e})")


def dual_spectrum_check(panel: ReturnPanel):
    """Compare the N x N spectrum with the (rescaled) T x T dual spectrum.

    Returns (eigs_N, eigs_T_rescaled, max_relative_gap) over the shared
    non-zero eigenvalues.
    """
    R = panel.values
    T, N = R.shape
    E = R.T @ R / T
    Edual = R @ R.T / N  # T x T dual, eigenvalues (T/N) * lambda
    eigs_n = np.sort(np.linalg.eigvalsh(E))[::-1]
    eigs_t = np.sort(np.linalg.eigvalsh(Edual))[::-1] * (N / T)
    k = min(N, T)
    a, b = eigs_n[:k], eigs_t[:k]
    scale = max(a[0], 1e-30)
    keep = (a > 1e-12 * scale) & (b > 1e-12 * scale)
    gap = np.max(np.abs(a[keep] - b[keep]) / a[keep]) if keep.any() else 0.0
    return eigs_n, eigs_t, float(gap)


@dataclass(frozen=True)
class EigenportfolioRow:
    eigenvalue: float
    realized_variance: float
    max_abs_cross_covariance: float


def eigenportfolio_report(E: CorrelationMatrix, panel: ReturnPanel):
    """Realized variance and mutual covariances of the eigenportfolios.

    For E estimated from this panel the realized variance of portfolio alpha
    equals its eigenvalue, and different eigenportfolios are uncorrelated.
    """
    P = panel.values @ E.eigenvectors  # T x N portfolio returns
    cov = P.T @ P / panel.T
    rows = []
    for a in range(E.N):
        cross = np.abs(np.delete(cov[a], a))
        rows.append(EigenportfolioRow(
            float(E.eigenvalues[a]), float(cov[a, a]),
            float(cross.max()) if cross.size else 0.0))
    return rows


def eigenvector_kurtosis(E: CorrelationMatrix) -> np.ndarray:
    """Excess kurtosis of the components of each eigenvector, by rank.

    Rotationally invariant (Haar) eigenvectors give values near zero;
    localized eigenvectors give large positive values.
    """
    return kurtosis(E.eigenvectors, axis=0, fisher=True, bias=True)
