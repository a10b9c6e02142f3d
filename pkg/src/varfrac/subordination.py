"""Representation formulas for the time-changed walk as quadrature over a
pair transition density.

The inner time integral carries the singular weight (t-v)^(-gamma(v,y))
near v = t, so each v-cell integrates that weight in closed form while the
density is held at its cell value (product integration). The density can be
an empirical histogram (with its multinomial noise propagated to an
uncertainty band) or an analytic constant-order density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ctrw import DensityGrid
from .errors import DomainError, LatticeOverflow, SingularityResolutionError
from .model import Diffusion, Model, gamma_at
from .waiting import DiscretizedWaitingLaw


def theta_tail(model: Model, v: float, y, t: float) -> float:
    """Tail functional of the waiting jump measure at state (v, y):
    integral of w^(-1-gamma(v,y)) over w >= t - v, i.e.
    (t - v)^(-gamma) / gamma."""
    if v >= t:
        raise DomainError(f"requires v < t, got v={v}, t={t}")
    gam = float(gamma_at(model, v, y))
    return (t - v) ** (-gam) / gam


@dataclass(frozen=True)
class SubordinationResult:
    value: float
    band: float  # propagated statistical uncertainty (0 for analytic input)


def _theta_cell_weights(model: Model, t: float, v_edges: np.ndarray, y_centers: np.ndarray):
    """Exact integrals of (t-v)^(-gamma) over each v-cell clipped to v < t,
    with gamma frozen at the clipped cell center. Returns (n_y, n_vcells)."""
    va = v_edges[:-1]
    vb = v_edges[1:]
    keep = va < t
    va = va[keep]
    vb = np.minimum(vb[keep], t)
    centers = 0.5 * (va + vb)
    yy = np.repeat(y_centers[:, None], len(va), axis=1)
    vv = np.broadcast_to(centers[None, :], yy.shape)
    gam = model.alpha * model.order_field(vv, yy)
    ta = np.maximum(t - va, 0.0)[None, :]
    tb = np.maximum(t - vb, 0.0)[None, :]
    integrals = (ta ** (1.0 - gam) - tb ** (1.0 - gam)) / ((1.0 - gam) * gam)
    return keep, integrals


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.zeros_like(nodes)
    d = np.diff(nodes)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def subordinated_expectation(model: Model, G, F, x0, s0, t, K=None,
                             n_v: int = 512, n_y: int = 513,
                             y_halfwidth: float | None = None,
                             u_max: float | None = None,
                             n_u: int = 257) -> SubordinationResult:
    """E[F at the horizon] as the triple quadrature
    int dy int du int_s0^t dv (t-v)^(-gamma(v,y))/gamma(v,y) G(u; y,v) F(y).

    G is either an empirical DensityGrid (its own axes are used; u = 0
    contributes the exact starting-point term) or an analytic object with a
    .density(u, y_centers, v_centers) method (quadrature axes built here).
    K, when given, truncates the operational-time integral to [1/K, K].
    """
    if isinstance(G, DensityGrid):
        return _expectation_empirical(model, G, F, x0, s0, t, K)
    return _expectation_analytic(
        model, G, F, x0, s0, t, K, n_v=n_v, n_y=n_y,
        y_halfwidth=y_halfwidth, u_max=u_max, n_u=n_u,
    )


def _u_window(nodes, K, include_zero):
    lo = 0.0 if K is None else 1.0 / K
    hi = math.inf if K is None else float(K)
    keep = (nodes >= lo) & (nodes <= hi)
    if include_zero and K is None:
        keep[0] = True
    return keep


def _local_frozen_density(model, x0, s0):
    """Short-time pair density with coefficients frozen at the start state;
    exact for constant coefficients, first-order accurate otherwise. Only
    available for 1-D second-order spatial parts."""
    if not isinstance(model.spatial, Diffusion) or model.dim != 1:
        return None
    from .oracles import ConstantOrderDensity

    x0f = float(np.atleast_1d(x0)[0])
    gam0 = float(gamma_at(model, s0, x0f))
    g0 = float(np.atleast_1d(model.spatial.g(0.0, np.atleast_1d(x0f)))[0])
    return ConstantOrderDensity(gamma=gam0, g0=g0, x0=x0f, s0=float(s0))


def _expectation_empirical(model, G: DensityGrid, F, x0, s0, t, K):
    if G.v_edges[0] > s0 + 1e-12:
        raise SingularityResolutionError("v grid must start at or below s0")
    if G.v_edges[-1] < t:
        raise SingularityResolutionError("v grid must reach the horizon t")
    y_centers = 0.5 * (G.y_edges[:-1] + G.y_edges[1:])
    dv = np.diff(G.v_edges)
    keep, integrals = _theta_cell_weights(model, t, G.v_edges, y_centers)
    f_y = np.asarray(F(y_centers), dtype=float)
    if f_y.shape != y_centers.shape:
        f_y = np.broadcast_to(f_y, y_centers.shape).astype(float)
    # Per-cell coefficient c = theta-cell-integral / dv * F(y); inner(u) is
    # the mass-weighted mean of c over the slice histogram.
    coef = integrals / dv[keep][None, :] * f_y[:, None]
    inner = np.empty(len(G.u_values))
    var_inner = np.empty(len(G.u_values))
    for i in range(len(G.u_values)):
        mass = G.masses[i][:, keep]
        first = float(np.sum(mass * coef))
        second = float(np.sum(mass * coef * coef))
        inner[i] = first
        var_inner[i] = max(second - first * first, 0.0) / G.n_traj

    bridge = _local_frozen_density(model, x0, s0) if K is None else None
    if bridge is not None:
        # Quadrature over [0, u_1] with the frozen-coefficient density, then
        # trapezoid over the measured nodes.
        u1 = float(G.u_values[0])
        head = _expectation_analytic(
            model, bridge, F, x0, s0, t, None,
            n_v=256, n_y=257, y_halfwidth=None, u_max=u1, n_u=129,
        ).value
        w = _trapezoid_weights(G.u_values)
        value = head + float(np.dot(w, inner))
        band = float(np.dot(w, np.sqrt(var_inner)))
        return SubordinationResult(value=value, band=band)

    nodes = np.concatenate([[0.0], G.u_values])
    vals = np.concatenate(
        [[theta_tail(model, s0, x0, t) * float(np.asarray(F(np.atleast_1d(x0)))[0])], inner]
    )
    sig = np.concatenate([[0.0], np.sqrt(var_inner)])
    win = _u_window(nodes, K, include_zero=K is None)
    nodes_w = nodes[win]
    w = _trapezoid_weights(nodes_w)
    value = float(np.dot(w, vals[win]))
    band = float(np.dot(w, sig[win]))
    return SubordinationResult(value=value, band=band)


def _expectation_analytic(model, G, F, x0, s0, t, K, *, n_v, n_y, y_halfwidth, u_max, n_u):
    if u_max is None:
        u_max = _find_u_max(model, G, x0, s0, t)
    if y_halfwidth is None:
        y_halfwidth = _default_y_halfwidth(model, u_max)
    y_edges = np.linspace(x0 - y_halfwidth, x0 + y_halfwidth, n_y + 1)
    y_centers = 0.5 * (y_edges[:-1] + y_edges[1:])
    dy = y_centers[1] - y_centers[0]
    v_edges = np.linspace(s0, t, n_v + 1)
    _, integrals = _theta_cell_weights(model, t, v_edges, y_centers)
    v_centers = 0.5 * (v_edges[:-1] + v_edges[1:])
    dv = np.diff(v_edges)
    f_y = np.asarray(F(y_centers), dtype=float)
    if f_y.shape != y_centers.shape:
        f_y = np.broadcast_to(f_y, y_centers.shape).astype(float)
    separable = getattr(G, "separable", False)
    if separable:
        # Exact cell masses against the mean theta weight per cell.
        weight = integrals / dv[None, :] * f_y[:, None]
    else:
        weight = integrals * f_y[:, None] * dy

    if n_u % 2 == 0:
        n_u += 1

    def inner(u):
        if u == 0.0:
            return theta_tail(model, s0, x0, t) * float(np.asarray(F(np.atleast_1d(x0)))[0])
        if separable:
            my = G.y_cell_masses(u, y_edges)
            mv = G.v_cell_masses(u, v_edges)
            return float(my @ weight @ mv)
        dens = G.density(u, y_centers, v_centers)
        return float(np.sum(dens * weight))

    if K is None:
        # Substitute u = q^2 (the start-point factor behaves like u^(-1/2))
        # and run composite Simpson on the smooth q-integrand.
        q_nodes = np.linspace(0.0, math.sqrt(u_max), n_u)
        vals = np.array([0.0] + [2.0 * q * inner(q * q) for q in q_nodes[1:]])
        h = q_nodes[1] - q_nodes[0]
        value = h / 3.0 * (
            vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2]) + 2.0 * np.sum(vals[2:-1:2])
        )
    else:
        nodes = np.linspace(0.0, u_max, n_u)
        win = _u_window(nodes, K, include_zero=False)
        nodes_w = nodes[win]
        vals_w = np.array([inner(u) for u in nodes_w])
        value = float(np.dot(_trapezoid_weights(nodes_w), vals_w))
    return SubordinationResult(value=float(value), band=0.0)


def _bridge_density_head(model, bridge, t, u1, y_edges, y_centers, dy, n_v=128, n_q=65):
    """Per-bin averaged contribution of the short-time piece over [0, u1]."""
    v_edges = np.linspace(bridge.s0, t, n_v + 1)
    dv = np.diff(v_edges)
    _, integrals = _theta_cell_weights(model, t, v_edges, y_centers)
    theta_avg = integrals / dv[None, :]
    q_nodes = np.linspace(0.0, math.sqrt(u1), n_q if n_q % 2 else n_q + 1)
    rows = np.zeros((len(q_nodes), len(y_centers)))
    for i, q in enumerate(q_nodes[1:], start=1):
        u = q * q
        my = bridge.y_cell_masses(u, y_edges)
        mv = bridge.v_cell_masses(u, v_edges)
        rows[i] = 2.0 * q * (my / dy) * (theta_avg @ mv)
    h = q_nodes[1] - q_nodes[0]
    return h / 3.0 * (
        rows[0] + rows[-1] + 4.0 * np.sum(rows[1:-1:2], axis=0) + 2.0 * np.sum(rows[2:-1:2], axis=0)
    )


def _find_u_max(model, G, x0, s0, t, tol=1e-10):
    """Smallest horizon after which the pair density puts negligible mass
    below the crossing level (probed on a coarse grid)."""
    probe_v = np.linspace(s0, t, 65)[1:]
    dv = probe_v[1] - probe_v[0]
    u = max(t - s0, 1e-3)
    for _ in range(60):
        hw = _default_y_halfwidth(model, u)
        probe_y = np.linspace(x0 - hw, x0 + hw, 41)
        dy = probe_y[1] - probe_y[0]
        dens = G.density(u, probe_y, probe_v)
        stay = float(np.sum(dens) * dv * dy)
        if stay < tol:
            return u
        u *= 1.5
    return u


def _default_y_halfwidth(model, u_max):
    if isinstance(model.spatial, Diffusion):
        return 8.0 * math.sqrt(model.spatial.g_hi * u_max) + 1.0
    return 40.0


def subordinated_density(model: Model, G, x0, s0, t, K=None, **kw):
    """Density of the walk position at the horizon over the y grid of G.

    Returns (y_centers, density values, band per point). Same quadrature as
    the expectation with F removed; the output integrates to 1 within the
    grid's resolution.
    """
    if isinstance(G, DensityGrid):
        y_centers = 0.5 * (G.y_edges[:-1] + G.y_edges[1:])
        dy = np.diff(G.y_edges)
        dv = np.diff(G.v_edges)
        keep, integrals = _theta_cell_weights(model, t, G.v_edges, y_centers)
        coef = integrals / dv[keep][None, :]
        inner = np.empty((len(G.u_values), len(y_centers)))
        var_inner = np.empty_like(inner)
        for i in range(len(G.u_values)):
            mass = G.masses[i][:, keep]
            first = np.sum(mass * coef, axis=1)
            second = np.sum(mass * coef * coef, axis=1)
            inner[i] = first / dy
            var_inner[i] = np.maximum(second - first * first, 0.0) / G.n_traj / dy**2
        bridge = _local_frozen_density(model, x0, s0) if K is None else None
        if bridge is not None:
            u1 = float(G.u_values[0])
            head = _bridge_density_head(model, bridge, t, u1, G.y_edges, y_centers, dy)
            w = _trapezoid_weights(G.u_values)
            dens = head + w @ inner
            band = w @ np.sqrt(var_inner)
            return y_centers, dens, band
        nodes = np.concatenate([[0.0], G.u_values])
        zero_row = np.zeros(len(y_centers))
        iz = np.searchsorted(G.y_edges, x0, side="right") - 1
        zero_row[iz] = theta_tail(model, s0, x0, t) / dy[iz]
        vals = np.vstack([zero_row, inner])
        sig = np.vstack([np.zeros(len(y_centers)), np.sqrt(var_inner)])
        win = _u_window(nodes, K, include_zero=K is None)
        w = _trapezoid_weights(nodes[win])
        dens = w @ vals[win]
        band = w @ sig[win]
        return y_centers, dens, band
    n_v = kw.pop("n_v", 512)
    n_y = kw.pop("n_y", 513)
    y_halfwidth = kw.pop("y_halfwidth", None)
    u_max = kw.pop("u_max", None)
    n_u = kw.pop("n_u", 257)
    if u_max is None:
        u_max = _find_u_max(model, G, x0, s0, t)
    if y_halfwidth is None:
        y_halfwidth = _default_y_halfwidth(model, u_max)
    y_edges = np.linspace(x0 - y_halfwidth, x0 + y_halfwidth, n_y + 1)
    y_centers = 0.5 * (y_edges[:-1] + y_edges[1:])
    dy = y_centers[1] - y_centers[0]
    v_edges = np.linspace(s0, t, n_v + 1)
    v_centers = 0.5 * (v_edges[:-1] + v_edges[1:])
    dv = np.diff(v_edges)
    _, integrals = _theta_cell_weights(model, t, v_edges, y_centers)
    separable = getattr(G, "separable", False)
    if n_u % 2 == 0:
        n_u += 1
    q_nodes = np.linspace(0.0, math.sqrt(u_max), n_u)
    vals = np.zeros((n_u, n_y))
    for i, q in enumerate(q_nodes[1:], start=1):
        u = q * q
        if separable:
            my = G.y_cell_masses(u, y_edges)
            mv = G.v_cell_masses(u, v_edges)
            row = (my / dy) * ((integrals / dv[None, :]) @ mv)
        else:
            dens = G.density(u, y_centers, v_centers)
            row = np.sum(dens * integrals, axis=1)
        vals[i] = 2.0 * q * row
    h = q_nodes[1] - q_nodes[0]
    out = h / 3.0 * (
        vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2], axis=0) + 2.0 * np.sum(vals[2:-1:2], axis=0)
    )
    return y_centers, out, np.zeros_like(out)


# ---------------------------------------------------------------------------
# exhaustive recursion for the discrete chain
# ---------------------------------------------------------------------------


def discrete_subordinated_expectation(model: Model, dlaw: DiscretizedWaitingLaw, F,
                                      x0, s0, t, tau, K=None,
                                      max_cells: int = 1 << 26):
    """Exact expectation of F at the crossing step for the discrete chain
    with atomized waiting law, by forward recursion on the state lattice.

    Requires a constant-order model with a constant one-dimensional
    diffusion coefficient, and a lump atom large enough to cross from any
    pre-horizon state (so the lump never propagates and the reachable
    accumulated times stay on a regular lattice).

    Returns (value, remaining_mass): remaining_mass is the probability not
    yet absorbed when the recursion stopped (bounded by 1e-14 on exit).
    """
    if model.a_lo != model.a_hi:
        raise ValueError("the exhaustive recursion requires a constant order field")
    sp = model.spatial
    if not isinstance(sp, Diffusion) or model.dim != 1 or sp.g_lo != sp.g_hi:
        raise ValueError("the exhaustive recursion requires constant 1-D diffusion")
    gam = model.alpha * model.a_lo
    if abs(gam - dlaw.gamma) > 1e-12:
        raise ValueError("discretized law exponent does not match the model")
    h = tau ** (1.0 / gam)
    jump = math.sqrt(tau * sp.g_lo)
    need = (t - s0) / h
    if dlaw.values[-1] < need:
        raise ValueError(
            f"lump atom {dlaw.values[-1]} below the worst-case crossing draw {need:.6g}"
        )
    offset, spacing = dlaw.offset, dlaw.spacing
    p_body = dlaw.probs[:-1]
    p_lump = float(dlaw.probs[-1])
    J = len(p_body)
    suffix = np.concatenate([np.cumsum(p_body[::-1])[::-1], [0.0]])

    k_cap = int(math.ceil(need / offset)) + 2
    n_m = int(math.ceil(need / spacing)) + J + 2
    n_i = 2 * k_cap + 1
    if n_i * n_m > max_cells:
        raise LatticeOverflow(f"lattice would need {n_i * n_m} cells (> {max_cells})")

    P = np.zeros((n_i, n_m))
    c_i = k_cap
    P[c_i, 0] = 1.0
    xs = x0 + jump * (np.arange(n_i) - c_i)
    f_x = np.asarray(F(xs), dtype=float)
    if f_x.shape != xs.shape:
        f_x = np.broadcast_to(f_x, xs.shape).astype(float)

    lo_w = 0.0 if K is None else 1.0 / K
    hi_w = math.inf if K is None else float(K)

    total = 0.0
    k = 0
    while True:
        mass = float(P.sum())
        if mass <= 1e-14 or k > k_cap + 4:
            break
        # spatial half-step: symmetric unit jump on the index lattice
        Pj = np.zeros_like(P)
        Pj[1:] += 0.5 * P[:-1]
        Pj[:-1] += 0.5 * P[1:]
        # crossing threshold in (m + j): states after this step carry k+1 atoms
        q = need / spacing - (k + 1) * offset / spacing
        m_idx = np.arange(n_m)
        j_min = np.ceil(q - m_idx)
        j_min = np.clip(j_min, 0, J).astype(int)
        cp = p_lump + suffix[j_min]
        in_window = lo_w <= (k + 1) * tau <= hi_w
        if in_window:
            total += float(f_x @ (Pj @ cp))
        # propagate the non-crossing atoms
        P_next = np.zeros_like(P)
        for j in range(J):
            length = int(min(max(math.ceil(q - j), 0), n_m - j))
            if length > 0:
                P_next[:, j : j + length] += Pj[:, :length] * p_body[j]
        P = P_next
        k += 1
    return total, float(P.sum())
