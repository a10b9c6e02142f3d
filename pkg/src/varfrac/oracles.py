"""Independent analytic references used to cross-check the simulators.

All formulas carry the unnormalized jump-density convention used throughout
the package: the increasing coordinate has jump density r^(-1-gamma) with
coefficient 1, so its Laplace exponent is Gamma(1-gamma) * lam^gamma / gamma
rather than the textbook lam^gamma. Every derived constant below states this
convention explicitly to prevent silent mismatches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import AccuracyLoss, InversionFailure, QuadratureFailure

_ML_MAX_ABS = 50.0
_ML_INTEGRAL_GAMMA_MAX = 0.97


def laplace_exponent(gamma: float, lam):
    """Exponent of the increasing coordinate: Gamma(1-gamma) lam^gamma / gamma."""
    return gamma_fn(1.0 - gamma) * np.power(lam, gamma) / gamma


# ---------------------------------------------------------------------------
# Mittag-Leffler function on the negative half line
# ---------------------------------------------------------------------------


def _ml_series(gamma: float, z: float):
    """Compensated power series; returns (value, ok) where ok is False when
    alternating-term cancellation ate more than ~7 digits of the result."""
    total = 0.0
    comp = 0.0
    term = 1.0
    peak = 1.0
    log_abs_z = math.log(abs(z)) if z != 0.0 else -math.inf
    n = 0
    while True:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        peak = max(peak, abs(total), abs(term))
        if abs(term) < 1e-18 * max(1.0, abs(total)) and n > 4:
            break
        n += 1
        log_term = n * log_abs_z - math.lgamma(1.0 + gamma * n)
        if log_term > 690.0 or n > 2000:
            return total, False
        term = math.exp(log_term) if n % 2 == 0 else -math.exp(log_term)
    ok = peak * 2.3e-16 <= 1e-9 * max(abs(total), 1e-12)
    return total, ok


def _ml_integral(gamma: float, z: float) -> float:
    # Spectral representation for z = -x < 0, 0 < gamma < 1, after the
    # singularity-removing substitution q = r^gamma:
    #   E_gamma(-x) = (x sin(pi gamma) / (pi gamma))
    #                 * int_0^inf exp(-q^(1/gamma))
    #                   / (q^2 + 2 x q cos(pi gamma) + x^2) dq
    x = -z
    spg = math.sin(math.pi * gamma)
    cpg = math.cos(math.pi * gamma)
    inv_g = 1.0 / gamma

    def integrand(q):
        return math.exp(-min(q**inv_g, 745.0)) / (q * q + 2.0 * x * q * cpg + x * x)

    # Denominator minimum sits near q = x when cos(pi gamma) < 0.
    cut = max(4.0 * x, 8.0)
    pts = sorted(p for p in (0.5 * x, x, 2.0 * x) if 0.0 < p < cut)
    val1, err1 = integrate.quad(
        integrand, 0.0, cut, points=pts or None, limit=500, epsabs=1e-14, epsrel=1e-12
    )
    val2, err2 = integrate.quad(integrand, cut, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)
    scale = x * spg / (math.pi * gamma)
    out = scale * (val1 + val2)
    if not np.isfinite(out) or scale * (err1 + err2) > 1e-9 * max(abs(out), 1e-10):
        raise QuadratureFailure("spectral integral for the Mittag-Leffler tail did not converge")
    return out


def mittag_leffler(gamma: float, z: float) -> float:
    """E_gamma(z) for gamma in (0, 1], real z <= 0, |z| <= 50.

    Power series with compensated summation for small |z|; spectral integral
    representation beyond. Relative accuracy 1e-8 inside the validated
    envelope; AccuracyLoss outside it.
    """
    if not 0.0 < gamma <= 1.0:
        raise AccuracyLoss(f"gamma={gamma} outside (0, 1]")
    if z > 0.0 or abs(z) > _ML_MAX_ABS:
        raise AccuracyLoss(f"argument z={z} outside validated range [-{_ML_MAX_ABS}, 0]")
    if gamma == 1.0:
        return math.exp(z)
    value, ok = _ml_series(gamma, z)
    if ok:
        return value
    if gamma > _ML_INTEGRAL_GAMMA_MAX:
        raise AccuracyLoss(
            f"gamma={gamma} too close to 1 for the integral branch at |z|={abs(z)}"
        )
    return _ml_integral(gamma, z)


def constant_order_solution(gamma: float, k: float, sigma: float, c: float = 1.0) -> float:
    """Amplitude of the cos(k x) mode at time-to-terminal sigma.

    Exact Fourier-mode solution of the terminal-value problem with constant
    order gamma and second-order spatial part with coefficient c:

        amplitude = E_gamma(-(gamma / Gamma(1-gamma)) * (c k^2 / 2) * sigma^gamma)

    The bridge factor gamma / Gamma(1-gamma) converts the nonlocal derivative
    in its jump-density form (coefficient 1) to the classical form that
    Mittag-Leffler profiles solve.
    """
    if sigma == 0.0 or k == 0.0:
        return 1.0
    lam = (gamma / gamma_fn(1.0 - gamma)) * (c * k * k / 2.0)
    return mittag_leffler(gamma, -lam * sigma**gamma)


# ---------------------------------------------------------------------------
# fixed Talbot inversion of Laplace transforms
# ---------------------------------------------------------------------------


def _talbot(transform, times, degree=32):
    """Fixed Talbot inversion, vectorized over positive times.

    transform must accept a complex ndarray and return the transform values.
    Rows where the contour integrand overflows are returned as 0: for the
    completely monotone transforms used here that happens only at times far
    below the distribution's scale, where the true value is superexponentially
    small.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0.0):
        raise InversionFailure("Talbot inversion requires strictly positive times")
    M = int(degree)
    k = np.arange(M)
    theta = k * np.pi / M
    delta = np.empty(M, dtype=complex)
    delta[0] = 2.0 * M / 5.0
    delta[1:] = 2.0 * np.pi / 5.0 * k[1:] * (1.0 / np.tan(theta[1:]) + 1j)
    gam = np.empty(M, dtype=complex)
    gam[0] = 0.5 * np.exp(delta[0])
    gam[1:] = (
        1.0 + 1j * theta[1:] * (1.0 + 1.0 / np.tan(theta[1:]) ** 2) - 1j / np.tan(theta[1:])
    ) * np.exp(delta[1:])
    p = delta[None, :] / times[:, None]
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        vals = transform(p)
        terms = gam[None, :] * vals
        out = (0.4 / times) * np.sum(terms, axis=1).real
        # Divergent contour: individual terms dwarf any probability-scale
        # value the inversions here can take.
        bad = ~np.isfinite(out) | (np.nanmax(np.abs(terms), axis=1) * 0.4 / times > 1e12)
    return np.where(bad, 0.0, out)


def invert_laplace(transform, times, degree=32, check_degree=44, tol=1e-6):
    """Invert with two Talbot degrees and fail loudly on disagreement."""
    a = _talbot(transform, times, degree)
    b = _talbot(transform, times, check_degree)
    if np.max(np.abs(a - b)) > tol:
        raise InversionFailure(
            f"Talbot degrees {degree}/{check_degree} disagree by {np.max(np.abs(a - b)):.3g}"
        )
    return b


def subordinator_cdf(gamma: float, s: float, v) -> np.ndarray:
    """P(S_s <= v) for the increasing coordinate with jump density r^(-1-gamma).

    Computed by Talbot inversion of exp(-s * Gamma(1-gamma) lam^gamma / gamma)
    / lam; accuracy ~1e-6. Values are clipped to [0, 1].
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros_like(v)
    pos = v > 0.0
    if np.any(pos):
        def transform(lam):
            return np.exp(-s * laplace_exponent(gamma, lam)) / lam

        out[pos] = invert_laplace(transform, v[pos])
    return np.clip(out, 0.0, 1.0)


def subordinator_density(gamma: float, s: float, w) -> np.ndarray:
    """Density of S_s at w, by Talbot inversion of exp(-s * exponent)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.zeros_like(w)
    pos = w > 0.0
    if np.any(pos):
        def transform(lam):
            return np.exp(-s * laplace_exponent(gamma, lam))

        out[pos] = _talbot(transform, w[pos], degree=40)
    return np.maximum(out, 0.0)


# ---------------------------------------------------------------------------
# constant-order analytic transition density and mixture references
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantOrderDensity:
    """Analytic transition density for a constant-order model with constant
    second-order coefficient g0: position and the increasing coordinate are
    independent, Gaussian times one-sided stable.

    Exposes exact cell masses (erf and Laplace-inverted CDF differences) so
    quadratures against it need not sample the near-origin density spike.
    """

    gamma: float
    g0: float
    x0: float
    s0: float
    separable: bool = True

    def density(self, u: float, y_centers: np.ndarray, v_centers: np.ndarray) -> np.ndarray:
        """Joint density on the (y, v) grid at elapsed operational time u."""
        var = self.g0 * u
        gy = np.exp(-((y_centers - self.x0) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
        w = v_centers - self.s0
        gv = subordinator_density(self.gamma, u, w)
        return gy[:, None] * gv[None, :]

    def y_cell_masses(self, u: float, y_edges: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr

        sd = math.sqrt(self.g0 * u)
        cdf = ndtr((np.asarray(y_edges, dtype=float) - self.x0) / sd)
        return np.maximum(np.diff(cdf), 0.0)

    def v_cell_masses(self, u: float, v_edges: np.ndarray) -> np.ndarray:
        cdf = subordinator_cdf(self.gamma, u, np.asarray(v_edges, dtype=float) - self.s0)
        return np.maximum(np.diff(cdf), 0.0)


def hitting_time_cdf(gamma: float, t: float, u) -> np.ndarray:
    """CDF of the first passage of the increasing coordinate over level t,
    started from 0: P(T(t) <= u) = 1 - P(S_u < t).

    The Talbot nodes depend only on the fixed level t, so the inversion
    vectorizes over the elapsed times u.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros_like(u)
    pos = u > 0.0
    if np.any(pos):
        up = u[pos]

        def run(degree):
            M = int(degree)
            k = np.arange(M)
            theta = k * np.pi / M
            delta = np.empty(M, dtype=complex)
            delta[0] = 2.0 * M / 5.0
            delta[1:] = 2.0 * np.pi / 5.0 * k[1:] * (1.0 / np.tan(theta[1:]) + 1j)
            gam = np.empty(M, dtype=complex)
            gam[0] = 0.5 * np.exp(delta[0])
            gam[1:] = (
                1.0
                + 1j * theta[1:] * (1.0 + 1.0 / np.tan(theta[1:]) ** 2)
                - 1j / np.tan(theta[1:])
            ) * np.exp(delta[1:])
            p = delta / t
            psi = laplace_exponent(gamma, p)
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                vals = np.exp(-np.outer(up, psi)) / p[None, :]
                terms = gam[None, :] * vals
                out = (0.4 / t) * np.sum(terms, axis=1).real
                bad = ~np.isfinite(out) | (
                    np.nanmax(np.abs(terms), axis=1) * 0.4 / t > 1e12
                )
            # the contour diverges only when the level t is far below S_u's
            # scale, where P(S_u <= t) is effectively zero
            return np.where(bad, 0.0, out)

        a = run(32)
        b = run(44)
        if np.max(np.abs(a - b)) > 1e-6:
            raise InversionFailure("first-passage inversion degrees disagree")
        out[pos] = 1.0 - b
    return np.clip(out, 0.0, 1.0)


def time_changed_gaussian_density(
    gamma: float, g0: float, x0: float, t: float, y, n_u: int = 2000, u_max: float | None = None
) -> np.ndarray:
    """Density of the position at horizon t: a Gaussian mixture over the
    first-passage time of the increasing coordinate.

    Quadrature mixture sum_i N(y; x0, g0 u_i) dP_T(u_i); independent of the
    chain engine and of the subordination quadrature.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if u_max is None:
        u_max = 1.0
        while hitting_time_cdf(gamma, t, np.array([u_max]))[0] < 1.0 - 1e-8:
            u_max *= 2.0
            if u_max > 1e6:
                raise InversionFailure("first-passage CDF did not saturate")
    edges = np.linspace(0.0, u_max, n_u + 1)
    cdf_vals = hitting_time_cdf(gamma, t, edges[1:])
    cdf_lo = np.concatenate([[0.0], cdf_vals[:-1]])
    masses = cdf_vals - cdf_lo
    centers = 0.5 * (edges[:-1] + edges[1:])
    var = g0 * centers
    kernels = np.exp(-((y[:, None] - x0) ** 2) / (2.0 * var[None, :])) / np.sqrt(
        2.0 * np.pi * var[None, :]
    )
    return kernels @ masses
