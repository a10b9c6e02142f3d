"""Waiting-time laws with exact power tails, and the generator rate check.

A law is a family of densities indexed by the local tail exponent gamma:
exactly r^(-1-gamma) beyond a threshold B shared by the whole family, with a
uniform head on [0, B) absorbing the remaining mass. Both branches invert in
closed form, so sampling is a pure function of (gamma, u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import InvalidTailMass, QuadratureFailure

_GAMMA_CHECK_POINTS = 1001


def _tail_mass(B, gamma):
    return B ** (-np.asarray(gamma, dtype=float)) / np.asarray(gamma, dtype=float)


@dataclass(frozen=True)
class WaitingLaw:
    """Family of waiting densities with a shared tail threshold B.

    head height is (1 - B^(-gamma)/gamma) / B, which keeps the density at or
    below 1 everywhere once construction has validated the threshold.
    """

    B: float
    gamma_lo: float
    gamma_hi: float
    head_kind: str = "uniform"

    def tail_mass(self, gamma):
        return _tail_mass(self.B, gamma)

    def head_height(self, gamma):
        return (1.0 - self.tail_mass(gamma)) / self.B

    def density(self, gamma, r):
        r = np.asarray(r, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        head = self.head_height(gamma)
        out = np.where(r >= self.B, np.power(np.maximum(r, self.B), -1.0 - gamma), head)
        return np.where(r < 0.0, 0.0, out)

    def sample(self, gamma, u):
        """Inverse-CDF draw; vectorized over gamma and u, monotone in u."""
        gamma = np.asarray(gamma, dtype=float)
        u = np.asarray(u, dtype=float)
        head_mass = 1.0 - self.tail_mass(gamma)
        tail = u >= head_mass
        # Head branch: uniform on [0, B).
        height = np.where(head_mass > 0.0, head_mass / self.B, 1.0)
        r_head = u / height
        # Tail branch: survival of the whole law at r >= B is r^(-gamma)/gamma.
        r_tail = np.power(gamma * (1.0 - u), -1.0 / gamma)
        return np.where(tail, r_tail, r_head)

    def survival(self, gamma, t):
        gamma = np.asarray(gamma, dtype=float)
        t = np.asarray(t, dtype=float)
        tail = np.power(np.maximum(t, self.B), -gamma) / gamma
        head = 1.0 - self.head_height(gamma) * np.maximum(t, 0.0)
        return np.where(t >= self.B, tail, head)


def build_waiting_law(gamma_lo: float, gamma_hi: float, B: float | None = None) -> WaitingLaw:
    """Construct a waiting law valid for every gamma in [gamma_lo, gamma_hi].

    With B omitted, uses the smallest threshold with tail mass <= 1 across
    the range: max of gamma^(-1/gamma) over the endpoint exponents (the map
    is monotone on (0,1); this is re-verified on a dense gamma grid here).
    A user-supplied B is rejected if any gamma in range gives tail mass > 1
    or head height > 1.
    """
    if not (0.0 < gamma_lo <= gamma_hi < 1.0):
        raise InvalidTailMass(
            f"exponent range [{gamma_lo}, {gamma_hi}] must sit inside (0, 1)"
        )
    user_supplied = B is not None
    if B is None:
        B = max(gamma_lo ** (-1.0 / gamma_lo), gamma_hi ** (-1.0 / gamma_hi))
    B = float(B)
    if B <= 0.0:
        raise InvalidTailMass(f"threshold B must be positive, got {B}")

    gammas = np.linspace(gamma_lo, gamma_hi, _GAMMA_CHECK_POINTS)
    masses = _tail_mass(B, gammas)
    tol = 0.0 if user_supplied else 1e-12
    if np.max(masses) > 1.0 + tol:
        raise InvalidTailMass(
            f"B={B} gives tail mass {np.max(masses):.6g} > 1 at gamma="
            f"{gammas[np.argmax(masses)]:.4g}"
        )
    heights = (1.0 - masses) / B
    if np.max(heights) > 1.0 + tol:
        raise InvalidTailMass(
            f"B={B} forces head height {np.max(heights):.6g} > 1 at gamma="
            f"{gammas[np.argmax(heights)]:.4g}"
        )
    return WaitingLaw(B=B, gamma_lo=gamma_lo, gamma_hi=gamma_hi)


def sample_waiting(law, gamma, u):
    """Inverse-CDF sample of the waiting density with exponent gamma."""
    return law.sample(gamma, u)


def tail_prob(law: WaitingLaw, gamma, t):
    """Exact survival function P(T > t); equals t^(-gamma)/gamma for t >= B."""
    return law.survival(gamma, t)


# ---------------------------------------------------------------------------
# discretized laws (finite atom support, shared by the exhaustive recursion
# and the Monte Carlo engine)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscretizedWaitingLaw:
    """Finite-atom version of a constant-exponent waiting law.

    Body atoms sit at cell midpoints of a regular grid on [B, r_cap]; all
    tail mass beyond r_cap is lumped into one atom at r_cap. Atom values are
    affine in the atom index (value_j = offset + spacing * j), which keeps
    sums of draws on a regular lattice.
    """

    gamma: float
    values: np.ndarray
    probs: np.ndarray
    offset: float
    spacing: float
    cum_probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cum_probs", np.cumsum(self.probs))

    def sample(self, gamma, u):
        gamma = np.asarray(gamma, dtype=float)
        if not np.allclose(gamma, self.gamma, atol=1e-12):
            raise ValueError("discretized law requires the constant exponent it was built for")
        idx = np.searchsorted(self.cum_probs, np.asarray(u, dtype=float), side="right")
        idx = np.minimum(idx, len(self.values) - 1)
        return self.values[idx]


def discretize_waiting_law(law: WaitingLaw, gamma: float, n_atoms: int, r_cap: float):
    """Collapse a pure-tail law at constant gamma onto a regular atom grid.

    Requires zero head mass (the default threshold at constant gamma gives a
    pure power law); each body cell's mass goes to its midpoint and the tail
    beyond r_cap is lumped at r_cap.
    """
    head = 1.0 - float(law.tail_mass(gamma))
    if head > 1e-12:
        raise InvalidTailMass("discretization supports pure-tail laws only (no head mass)")
    if r_cap <= law.B:
        raise InvalidTailMass("r_cap must exceed the tail threshold")
    spacing = (r_cap - law.B) / n_atoms
    edges = law.B + spacing * np.arange(n_atoms + 1)
    surv = edges ** (-gamma) / gamma
    probs = surv[:-1] - surv[1:]
    values = law.B + spacing * (np.arange(n_atoms) + 0.5)
    lump = surv[-1]
    values = np.concatenate([values, [r_cap]])
    probs = np.concatenate([probs, [lump]])
    return DiscretizedWaitingLaw(
        gamma=float(gamma),
        values=values,
        probs=probs,
        offset=float(law.B + 0.5 * spacing),
        spacing=float(spacing),
    )


# ---------------------------------------------------------------------------
# rate-of-convergence check for the scaled tail functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateTestFunction:
    """Continuous f with f(0) = f(inf) = 0 and |f(y)| <= lipschitz * y near 0."""

    fn: object
    lipschitz: float
    name: str = ""
    support_lo: float = 0.0  # f vanishes below this point (0 = unrestricted)


@dataclass(frozen=True)
class RateReport:
    h_values: np.ndarray
    errors: np.ndarray
    bound_values: np.ndarray
    fitted_order: float
    constant: float


def _quad(fn, a, b, **kw):
    val, err = integrate.quad(fn, a, b, limit=400, epsabs=1e-13, epsrel=1e-12, **kw)
    if err > 1e-10:
        raise QuadratureFailure(f"quadrature error {err:.3g} above 1e-10 on [{a}, {b}]")
    return val


def _limit_integral(f, alpha, support_lo):
    """int_0^inf f(y) y^(-1-alpha) dy with the algebraic endpoint handled
    by a weighted rule on the smooth factor f(y)/y."""
    if support_lo > 0.0:
        lo = support_lo
        head = 0.0
    else:
        cut = 0.5

        def smooth(y):
            return f(y) / y if y > 0.0 else 0.0

        head, err = integrate.quad(
            smooth, 0.0, cut, weight="alg", wvar=(-alpha, 0.0), limit=400,
            epsabs=1e-13, epsrel=1e-12,
        )
        if err > 1e-10:
            raise QuadratureFailure("weighted quadrature near zero did not converge")
        lo = cut
    mid = _quad(lambda y: f(y) * y ** (-1.0 - alpha), lo, max(2.0 * lo, 20.0))
    tail = _quad(lambda y: f(y) * y ** (-1.0 - alpha), max(2.0 * lo, 20.0), np.inf)
    return head + mid + tail


def check_rate(law: WaitingLaw, alpha: float, f: RateTestFunction, h_values) -> RateReport:
    """Measure |h^(-alpha) int f(h y) p(y) dy - int f(y) y^(-1-alpha) dy|
    against the bound C_B * L * h^(1-alpha) across a ladder of scales.

    Both sides are evaluated by deterministic quadrature, never sampling.
    The constant is C_B = B^(1-alpha)/(1-alpha) + int_0^B y p(y) dy.
    """
    if abs(law.gamma_lo - alpha) > 1e-12 or abs(law.gamma_hi - alpha) > 1e-12:
        raise ValueError("rate check requires a law with constant exponent equal to alpha")
    h_values = np.asarray(sorted(h_values, reverse=True), dtype=float)
    B = law.B
    eta = float(law.head_height(alpha))
    C_B = B ** (1.0 - alpha) / (1.0 - alpha) + eta * B * B / 2.0
    limit_val = _limit_integral(f.fn, alpha, f.support_lo)

    errors = np.empty_like(h_values)
    for i, h in enumerate(h_values):
        head = eta * _quad(lambda y: f.fn(h * y), 0.0, B) if eta > 0.0 else 0.0
        split = max(B, (f.support_lo / h) if f.support_lo > 0.0 else B)
        body = _quad(lambda y: f.fn(h * y) * y ** (-1.0 - alpha), B, max(4.0 * split, 50.0 / h))
        tail = _quad(
            lambda y: f.fn(h * y) * y ** (-1.0 - alpha), max(4.0 * split, 50.0 / h), np.inf
        )
        scaled = h ** (-alpha) * (head + body + tail)
        errors[i] = abs(scaled - limit_val)

    bounds = C_B * f.lipschitz * h_values ** (1.0 - alpha)
    positive = errors > 0.0
    if np.count_nonzero(positive) >= 2:
        slope = np.polyfit(np.log(h_values[positive]), np.log(errors[positive]), 1)[0]
    else:
        slope = math.inf
    return RateReport(
        h_values=h_values,
        errors=errors,
        bound_values=bounds,
        fitted_order=float(slope),
        constant=float(C_B),
    )
