"""Numerical free-probability engine.

Resolvent (Stieltjes transform), its functional inverse (Blue function),
R- and S-transforms, free additive/multiplicative convolution, and location
of spectrum edges from stationary points of the Blue function.

Conventions: densities are evaluated on the line ``z = lambda - i*eps`` with
small ``eps > 0``; on that line ``Im G > 0`` and ``rho = Im G / pi``.  For
``z`` in the upper half-plane ``Im G < 0``.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import brentq

from .density import SpectralDensity

__all__ = [
    "TransformError",
    "PoleOnSupportError",
    "ConvergenceError",
    "resolvent",
    "resolvent_derivative",
    "density_from_resolvent",
    "blue",
    "blue_function",
    "r_transform",
    "s_transform",
    "free_add",
    "free_multiply",
    "spectrum_edges",
    "default_eps",
]

MAX_NEWTON_ITER = 200
NEWTON_TOL = 1e-12


class TransformError(RuntimeError):
    pass


class PoleOnSupportError(TransformError):
    pass


class ConvergenceError(TransformError):
    pass


def default_eps(density: SpectralDensity) -> float:
    """Imaginary offset for on-axis evaluation: 1e-4 of the spectral span."""
    lo, hi = density.support()
    span = hi - lo
    return 1e-4 * span if span > 0 else 1e-6


# ---------------------------------------------------------------------------
# Resolvent

def resolvent(density: SpectralDensity, z: complex) -> complex:
    """G(z) = int rho(x)/(z-x) dx + sum_k m_k/(z-x_k) by grid quadrature."""
    z = complex(z)
    _check_off_support(density, z)
    g = 0.0 + 0.0j
    for loc, mass in density.atoms:
        g += mass / (z - loc)
    if density.grid.size >= 2:
        g += np.trapezoid(density.density / (z - density.grid), density.grid)
    return complex(g)


def resolvent_derivative(density: SpectralDensity, z: complex) -> complex:
    z = complex(z)
    g = 0.0 + 0.0j
    for loc, mass in density.atoms:
        g -= mass / (z - loc) ** 2
    if density.grid.size >= 2:
        g -= np.trapezoid(density.density / (z - density.grid) ** 2, density.grid)
    return complex(g)


def _check_off_support(density: SpectralDensity, z: complex) -> None:
    if abs(z.imag) > 1e-12:
        return
    x = z.real
    for loc, mass in density.atoms:
        if abs(x - loc) < 1e-12:
            raise PoleOnSupportError("pole on support")
    if density.grid.size >= 2:
        lo, hi = density.grid[0], density.grid[-1]
        if lo <= x <= hi and density.interpolate(x) > 1e-12:
            raise PoleOnSupportError("pole on support")


def density_from_resolvent(g, grid, eps: float) -> SpectralDensity:
    """Extract rho(lambda) = Im g(lambda - i*eps) / pi on the given grid.

    Renormalizes silently when total mass is within 2% of one, warns (and
    still renormalizes) otherwise.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    grid = np.asarray(grid, dtype=float)
    z = grid - 1j * eps
    try:
        vals = np.asarray(g(z), dtype=complex)
        if vals.shape != z.shape:
            raise TypeError
    except Exception:
        vals = np.array([g(zz) for zz in z], dtype=complex)
    rho = vals.imag / np.pi
    scale = max(rho.max(), 1.0)
    if rho.min() < -1e-8 * scale:
        raise TransformError("non-Herglotz evaluator")
    rho = np.clip(rho, 0.0, None)
    mass = np.trapezoid(rho, grid)
    if mass <= 0:
        raise TransformError("evaluator produced zero density")
    if abs(mass - 1.0) > 0.02:
        warnings.warn(
            f"density mass {mass:.4f} off by more than 2%; renormalizing",
            stacklevel=2)
    return SpectralDensity(grid, rho / mass)


# ---------------------------------------------------------------------------
# Blue function and friends

def _damped_newton(f, fprime, x0, tol=NEWTON_TOL, max_iter=MAX_NEWTON_ITER):
    """Newton iteration with residual-decrease backtracking.

    Works for complex-valued holomorphic maps of one complex variable.
    """
    x = complex(x0)
    r = f(x)
    for _ in range(max_iter):
        if abs(r) < tol:
            return x
        d = fprime(x)
        if d == 0 or not np.isfinite(d):
            raise ConvergenceError(f"singular derivative, residual {abs(r):.3e}")
        step = -r / d
        for _ in range(60):
            xn = x + step
            rn = f(xn)
            if abs(rn) < abs(r):
                x, r = xn, rn
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"line search stalled, residual {abs(r):.3e}")
    if abs(r) < 1e-10:
        return x
    raise ConvergenceError(f"no convergence after {max_iter} iterations, "
                           f"residual {abs(r):.3e}")


def blue(density: SpectralDensity, w: complex, z0=None) -> complex:
    """Functional inverse of the resolvent: the z with G(z) = w.

    Real w is solved by bracketed root-finding on the physical branch outside
    the support (G is monotone there); complex w by damped Newton seeded at
    ``1/w + mean``.
    """
    w = complex(w)
    if w == 0:
        raise TransformError("Blue function diverges at w = 0")
    if density.is_atomic and len(density.atoms) == 1:
        # G(z) = 1/(z - m) inverts in closed form
        return density.atoms[0][0] + 1.0 / w
    if z0 is None and abs(w.imag) <= 1e-12 * abs(w.real):
        return complex(_blue_real(density, w.real))
    if z0 is None:
        z0 = 1.0 / w + density.mean()
    return _damped_newton(
        lambda z: resolvent(density, z) - w,
        lambda z: resolvent_derivative(density, z),
        z0)


def _blue_real(density: SpectralDensity, w: float) -> float:
    lo, hi = density.support()
    if density.grid.size:
        lo = min(lo, float(density.grid[0]))
        hi = max(hi, float(density.grid[-1]))
    span = max(hi - lo, 1e-12)
    delta = 1e-9 * span
    if w > 0:
        a = hi + delta
        g_a = resolvent(density, a).real
        if g_a <= w:
            raise ConvergenceError(
                f"no z with G(z) = {w:.6g}: beyond the fold point "
                f"G(edge+) = {g_a:.6g}")
        b = hi + max(2.0 / w, span)
    else:
        a = lo - delta
        g_a = resolvent(density, a).real
        if g_a >= w:
            raise ConvergenceError(
                f"no z with G(z) = {w:.6g}: beyond the fold point "
                f"G(edge-) = {g_a:.6g}")
        b = lo - max(-2.0 / w, span)
    for _ in range(200):
        if (resolvent(density, b).real - w) * (g_a - w) <= 0:
            break
        b = a + 2.0 * (b - a)
    return brentq(lambda z: resolvent(density, z).real - w, a, b,
                  xtol=1e-14, rtol=8.9e-16)


def blue_function(density: SpectralDensity):
    """A Blue-function evaluator with warm-started continuation.

    Successive calls reuse the previous solution as the initial guess, which
    keeps the root-finder on the physical branch when w is varied gradually.
    """
    state = {"z": None}

    def B(w):
        try:
            z = blue(density, w, z0=state["z"])
        except TransformError:
            if state["z"] is None:
                raise
            # stale warm start (e.g. after a failed probe); retry cold
            state["z"] = None
            z = blue(density, w)
        state["z"] = z
        return z

    return B


def r_transform(density: SpectralDensity, w: complex) -> complex:
    """R(w) = B(w) - 1/w; R(0+) is the mean (first free cumulant)."""
    w = complex(w)
    return blue(density, w) - 1.0 / w


# ---------------------------------------------------------------------------
# S-transform

def _psi(density: SpectralDensity, y: complex) -> complex:
    """Moment generating transform psi(y) = int rho(x) x*y/(1-x*y) dx."""
    y = complex(y)
    p = 0.0 + 0.0j
    for loc, mass in density.atoms:
        p += mass * loc * y / (1.0 - loc * y)
    if density.grid.size >= 2:
        x = density.grid
        p += np.trapezoid(density.density * x * y / (1.0 - x * y), x)
    return complex(p)


def _psi_derivative(density: SpectralDensity, y: complex) -> complex:
    y = complex(y)
    p = 0.0 + 0.0j
    for loc, mass in density.atoms:
        p += mass * loc / (1.0 - loc * y) ** 2
    if density.grid.size >= 2:
        x = density.grid
        p += np.trapezoid(density.density * x / (1.0 - x * y) ** 2, x)
    return complex(p)


def _psi_inverse_real(density: SpectralDensity, w: float) -> float:
    """Bracketed inverse of psi on its monotone real branch.

    For a density supported on [0, hi], psi is strictly increasing on
    (0, 1/hi), covering (0, psi(1/hi^-)), and on (-inf, 0), covering
    (-continuous mass, 0).
    """
    lo, hi = density.support()
    if density.grid.size:
        hi = max(hi, float(density.grid[-1]))
    if lo < 0:
        raise TransformError("real psi inversion requires non-negative support")
    if w > 0:
        b = (1.0 - 1e-9) / hi
        w_max = _psi(density, b).real
        if w_max <= w:
            raise ConvergenceError(
                f"no y with psi(y) = {w:.6g}: branch tops out at {w_max:.6g}")
        a = 1e-12 / hi
    else:
        a = -1e-12 / hi
        b = -1.0 / hi
        for _ in range(200):
            if _psi(density, b).real <= w:
                break
            b *= 2.0
        else:
            raise ConvergenceError(f"no y with psi(y) = {w:.6g}")
    return brentq(lambda y: _psi(density, y).real - w, a, b,
                  xtol=1e-15, rtol=8.9e-16)


def _psi_inverse(density: SpectralDensity, w: complex, y0=None) -> complex:
    mean = density.mean()
    if abs(mean) < 1e-14:
        raise TransformError("S-transform requires a density with non-zero mean")
    if y0 is None and abs(w.imag) <= 1e-12 * abs(w.real) and w.real != 0:
        return complex(_psi_inverse_real(density, w.real))
    if y0 is None:
        y0 = w / mean  # psi(y) ~ mean*y near the origin
    try:
        return _damped_newton(
            lambda y: _psi(density, y) - w,
            lambda y: _psi_derivative(density, y),
            y0)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"psi inversion failed at w={w}: {exc}") from exc


def s_transform(density: SpectralDensity, w: complex) -> complex:
    """S(w) = (1+w)/w * psi^{-1}(w), the multiplicative free transform.

    Equivalent to the eta-transform formulation S(w) = -((1+w)/w)
    eta^{-1}(1+w) with eta(y) = -(1/y) G(-1/y); the sign placement here makes
    S(atom at c) = 1/c.
    """
    w = complex(w)
    if w == 0:
        raise TransformError("S-transform is defined for w != 0")
    if density.is_atomic and len(density.atoms) == 1:
        return 1.0 / density.atoms[0][0]
    chi = _psi_inverse(density, w)
    return (1.0 + w) / w * chi


# ---------------------------------------------------------------------------
# Spectrum edges

def spectrum_edges(blue_fn, w_scan=None, h: float = 1e-6):
    """Edges (lambda_minus, lambda_plus) = B at real stationary points of B.

    Stationary points are found by scanning B'(w) (central differences, step
    ``h`` scaled by |w|) for sign changes on both sides of w = 0 and refining
    with Brent's method.
    """
    def deriv(w):
        step = h * (1.0 + abs(w))
        try:
            return (_real(blue_fn(w + step)) - _real(blue_fn(w - step))) / (2 * step)
        except TransformError:
            return np.nan

    if w_scan is None:
        mags = np.logspace(-4, 3, 600)
        w_scan = np.concatenate([-mags[::-1], mags])

    edges = []
    prev_w, prev_d = None, None
    for w in w_scan:
        d = deriv(w)
        if not np.isfinite(d):
            prev_w, prev_d = None, None
            continue
        if prev_d is not None and np.sign(d) != np.sign(prev_d) and prev_d != 0:
            try:
                w_star = brentq(deriv, prev_w, w, xtol=1e-14)
                lam = _real(blue_fn(w_star))
                if np.isfinite(lam):
                    edges.append(lam)
            except (ValueError, TransformError):
                pass
        prev_w, prev_d = w, d

    edges = sorted(set(round(e, 9) for e in edges))
    if len(edges) < 2:
        raise TransformError(
            "fewer than two stationary points: one-sided or unbounded "
            f"support (found {edges})")
    return edges[0], edges[-1]


def _real(z) -> float:
    z = complex(z)
    if abs(z.imag) > 1e-6 * (1.0 + abs(z.real)):
        return np.nan
    return z.real


# ---------------------------------------------------------------------------
# Free convolutions

def _solve_inverse_on_grid(F, Fname, grid, eps, seed):
    """Continuation solve of F(w) = lambda - i*eps along a descending grid.

    Returns the complex solution w at every grid point.  F must be holomorphic
    with F(w) -> lambda for the physical branch; the solve walks from the
    largest lambda (where the seed is reliable) downwards.
    """
    out = np.empty(grid.size, dtype=complex)
    w = seed
    failures = []
    for i in range(grid.size - 1, -1, -1):
        z = grid[i] - 1j * eps

        def f(x, z=z):
            return F(x) - z

        def fp(x):
            step = 1e-7 * (1.0 + abs(x))
            return (F(x + step) - F(x - step)) / (2 * step)

        try:
            w = _damped_newton(f, fp, w, tol=1e-11)
        except ConvergenceError:
            failures.append(grid[i])
            out[i] = np.nan
            continue
        out[i] = w
    if failures:
        raise ConvergenceError(
            f"{Fname}: inversion failed at {len(failures)} grid points, "
            f"first lambda={failures[-1]:.6g}")
    return out


def free_add(a: SpectralDensity, b: SpectralDensity,
             npoints: int = 2000) -> SpectralDensity:
    """Density whose R-transform is R_a + R_b (free additive convolution)."""
    if a.is_atomic and len(a.atoms) == 1:
        return b.shifted(a.atoms[0][0])
    if b.is_atomic and len(b.atoms) == 1:
        return a.shifted(b.atoms[0][0])

    Ba = blue_function(a)
    Bb = blue_function(b)

    def B_sum(w):
        return Ba(w) + Bb(w) - 1.0 / w

    mean = a.mean() + b.mean()
    spread = np.sqrt(max(a.variance() + b.variance(), 1e-12))
    try:
        lo, hi = spectrum_edges(B_sum)
        pad = 0.02 * (hi - lo)
        lo, hi = lo - pad, hi + pad
    except TransformError:
        lo, hi = mean - 4 * spread, mean + 4 * spread
    grid = np.linspace(lo, hi, npoints)
    eps = 1e-4 * (hi - lo)

    z_top = grid[-1] + 4 * spread
    seed = 1.0 / (z_top - mean)
    w = _solve_inverse_on_grid(B_sum, "free_add", grid, eps,
                               seed=blue_seed_refine(B_sum, seed, z_top))
    rho = np.clip(w.imag / np.pi, 0.0, None)
    return SpectralDensity.from_unnormalized(grid, rho)


def blue_seed_refine(B, w0, z_target):
    """Polish a far-field seed so the continuation starts on-branch."""
    try:
        return _damped_newton(
            lambda x: B(x) - z_target,
            lambda x: (B(x + 1e-7 * (1 + abs(x))) - B(x - 1e-7 * (1 + abs(x))))
            / (2e-7 * (1 + abs(x))),
            w0, tol=1e-11)
    except ConvergenceError:
        return w0


def free_multiply(a: SpectralDensity, b: SpectralDensity,
                  npoints: int = 2000) -> SpectralDensity:
    """Density whose S-transform is S_a * S_b (free multiplicative convolution)."""
    for d in (a, b):
        if d.support()[0] < -1e-10:
            raise TransformError(
                "free multiplication requires non-negative matrices")
    if a.is_atomic and len(a.atoms) == 1:
        return b.scaled(a.atoms[0][0])
    if b.is_atomic and len(b.atoms) == 1:
        return a.scaled(b.atoms[0][0])

    state_a = {"y": None}
    state_b = {"y": None}

    def chi_prod(w):
        # chi of the product: chi_a(w) * chi_b(w) * (1+w)/w
        ya = _psi_inverse(a, w, y0=state_a["y"])
        yb = _psi_inverse(b, w, y0=state_b["y"])
        state_a["y"], state_b["y"] = ya, yb
        return ya * yb * (1.0 + w) / w

    lo_a, hi_a = a.support()
    lo_b, hi_b = b.support()
    lo = max(lo_a * lo_b * 0.5, 0.0)
    hi = hi_a * hi_b * 1.1 + 1e-9
    grid = np.linspace(lo, hi, npoints)
    eps = 1e-4 * (hi - lo)

    # Solve chi_prod(w) = 1/z for w; then G(z) = (1+w)/z.
    mean = a.mean() * b.mean()
    out = np.empty(grid.size, dtype=complex)
    w = None
    failures = 0
    for i in range(grid.size - 1, -1, -1):
        z = grid[i] - 1j * eps
        if abs(z) < 1e-12:
            out[i] = 0.0
            continue
        target = 1.0 / z
        if w is None:
            w = mean / z  # psi(1/z) ~ mean/z far from the support

        def f(x):
            return chi_prod(x) - target

        def fp(x):
            step = 1e-7 * (1.0 + abs(x))
            return (chi_prod(x + step) - chi_prod(x - step)) / (2 * step)

        try:
            w = _damped_newton(f, fp, w, tol=1e-11)
            out[i] = (1.0 + w) / z
        except (ConvergenceError, TransformError):
            failures += 1
            out[i] = np.nan
            w = None
    good = np.isfinite(out)
    if good.sum() < npoints // 2:
        raise ConvergenceError(
            f"free_multiply: inversion failed on {failures} grid points")
    rho = np.where(good, np.clip(np.where(good, out, 0).imag / np.pi, 0, None), 0.0)
    return SpectralDensity.from_unnormalized(grid, rho)
