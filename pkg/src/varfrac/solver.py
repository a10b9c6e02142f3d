"""Terminal-value solver for the nonlocal-in-time problem on a periodic grid.

The memory integral int_0^(t-s) (g(s+r) - g(s)) r^(-1-gamma) dr is
discretized by product integration: g is piecewise linear on the time grid
and the singular kernel is integrated in closed form against it, so the
discrete operator is exact for linear g. The boundary term
(g(t) - g(s)) (t-s)^(-gamma) / gamma is kept analytically. Marching runs
backward from the terminal slice and solves one linear system per step; the
system matrix is an M-matrix, which gives conservation and the maximum
principle exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LinearSolveFailure, SingularityResolutionError
from .model import Diffusion, Model


@dataclass(frozen=True)
class Grid:
    """Uniform periodic x-grid and uniform s-grid on [0, t]."""

    n_x: int
    n_s: int
    t: float
    period: float = 2.0 * np.pi
    x_lo: float = -np.pi

    @property
    def dx(self) -> float:
        return self.period / self.n_x

    @property
    def ds(self) -> float:
        return self.t / self.n_s

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + self.dx * np.arange(self.n_x)

    @property
    def s(self) -> np.ndarray:
        return self.ds * np.arange(self.n_s + 1)


@dataclass(frozen=True)
class Field:
    """Solution values F(x_i, s_j) with the terminal slice pinned."""

    grid: Grid
    values: np.ndarray  # (n_s + 1, n_x)

    def at_start(self) -> np.ndarray:
        return self.values[0]


@dataclass(frozen=True)
class TimeWeights:
    """Product-integration weights for the memory integral at one slice.

    weights[m-1] multiplies (g(s + m ds) - g(s)) for m = 1..n_future;
    boundary_coef multiplies (g(t) - g(s)).
    """

    gamma: float
    ds: float
    weights: np.ndarray
    boundary_coef: float


def _cell_moments(gamma, m_idx, ds):
    """A_m = int over cell m of r^(-1-gamma), B_m = same against the local
    linear ramp (r - m ds)/ds; closed forms, inputs must broadcast."""
    gamma = np.asarray(gamma, dtype=float)
    m = np.asarray(m_idx, dtype=float)
    lo = m * ds
    hi = (m + 1.0) * ds
    A = (lo ** (-gamma) - hi ** (-gamma)) / gamma
    mom1 = (hi ** (1.0 - gamma) - lo ** (1.0 - gamma)) / (1.0 - gamma)
    B = mom1 / ds - m * A
    return A, B


def build_time_weights(gamma: float, n_future: int, ds: float) -> TimeWeights:
    """Weights exact for piecewise-linear g; the first cell's integrable
    singularity is integrated analytically against the linear ramp."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    M = int(n_future)
    w = np.zeros(M)
    # Cell 0 contributes only through the ramp: (g_1 - g_0) * ds^-gamma/(1-gamma).
    b0 = ds ** (-gamma) / (1.0 - gamma)
    if M == 1:
        w[0] = b0
    else:
        m_idx = np.arange(1, M)
        A, B = _cell_moments(gamma, m_idx, ds)
        w[0] = b0 + A[0] - B[0]
        if M > 2:
            w[1 : M - 1] = B[:-1][: M - 2] + A[1:] - B[1:]
        w[M - 1] = B[-1]
    boundary = (M * ds) ** (-gamma) / gamma
    return TimeWeights(gamma=float(gamma), ds=float(ds), weights=w, boundary_coef=boundary)


def apply_right_derivative(weights: TimeWeights, g: np.ndarray, j: int = 0) -> float:
    """Discrete nonlocal derivative at slice j from the future values
    g[j], g[j+1], ..., g[j+M] (the last entry is the terminal value):

        -sum_m w_m  (g[j+m] - g[j]) - (g[-1] - g[j]) * boundary_coef
    """
    M = len(weights.weights)
    seg = np.asarray(g[j : j + M + 1], dtype=float)
    if len(seg) != M + 1:
        raise ValueError("slice values do not cover the weight span")
    mem = float(np.dot(weights.weights, seg[1:] - seg[0]))
    return -mem - (seg[-1] - seg[0]) * weights.boundary_coef


# ---------------------------------------------------------------------------
# spatial operators on the periodic grid
# ---------------------------------------------------------------------------


def build_spatial_operator(model: Model, grid: Grid) -> np.ndarray:
    """Dense periodic operator matrix with zero row sums and nonnegative
    off-diagonal entries.

    Second-order part: central differences scaled by g(x)/2. Jump part of
    index beta: product integration of the symmetrized difference against
    the density m(x) y^(-1-beta), with a quadratic model on the singular
    first cell, lattice summation over repeated periods, and the remaining
    tail mass attached to the grid average.
    """
    n = grid.n_x
    dx = grid.dx
    x = grid.x
    L = np.zeros((n, n))
    if isinstance(model.spatial, Diffusion):
        if model.dim != 1:
            raise ValueError("the grid solver is one-dimensional")
        g = np.asarray(model.spatial.g(0.0, x), dtype=float)
        c = 0.5 * g / dx**2
        idx = np.arange(n)
        L[idx, idx] = -2.0 * c
        L[idx, (idx + 1) % n] += c
        L[idx, (idx - 1) % n] += c
        return L

    beta = model.spatial.beta
    m_vals = np.asarray(model.spatial.m(0.0, x), dtype=float)
    # Enough repeated periods that the post-truncation oscillatory residue
    # (the mean part is reattached below) is negligible for trend checks.
    periods = 256
    M_y = periods * n
    # Node weights for the one-sided integral; the pair (i+m, i-m) shares W_m.
    W = np.zeros(M_y + 1)
    w0 = dx ** (-beta) / (2.0 - beta)  # quadratic first cell
    m_idx = np.arange(1, M_y)
    A, B = _cell_moments(beta, m_idx, dx)
    W[1] = w0 + A[0] - B[0]
    W[2:M_y] = B[:-1][: M_y - 2] + A[1:] - B[1:]
    W[M_y] = B[-1]
    # Fold onto the periodic grid.
    folded = np.bincount(np.arange(1, M_y + 1) % n, weights=W[1:], minlength=n)
    row = np.zeros(n)
    row += folded
    row_rev = np.zeros(n)
    offs = (-np.arange(1, M_y + 1)) % n
    row_rev = np.bincount(offs, weights=W[1:], minlength=n)
    base = row + row_rev  # total weight reaching column (i + c) mod n
    total = np.sum(W[1:]) * 2.0
    base[0] -= total  # subtract 2 f(x) sum W
    # Tail beyond the truncation: attach to the grid mean.
    R = (M_y * dx + dx) ** (-beta) / beta
    tail_row = np.full(n, 2.0 * R / n)
    tail_row[0] -= 2.0 * R
    base = base + tail_row
    for i in range(n):
        L[i] = m_vals[i] * np.roll(base, i)
    return L


# ---------------------------------------------------------------------------
# backward march
# ---------------------------------------------------------------------------


def solve_terminal_problem(model: Model, F_terminal, t: float, grid: Grid) -> Field:
    """March the terminal-value problem backward to s = 0.

    At each slice the unknown appears in the memory weights and in the
    spatial operator; the resulting system (sum w + boundary) I - L is
    strictly diagonally dominant with nonpositive off-diagonals, so each
    step is a convex combination of future slices.
    """
    if grid.n_s < 16:
        raise SingularityResolutionError("need at least 16 time slices to resolve the horizon")
    if abs(grid.t - t) > 1e-12:
        raise ValueError("grid horizon differs from requested t")
    n_x, n_s = grid.n_x, grid.n_s
    ds = grid.ds
    x = grid.x
    L = build_spatial_operator(model, grid)
    values = np.empty((n_s + 1, n_x))
    term = np.asarray(F_terminal(x), dtype=float)
    if term.shape != (n_x,):
        term = np.broadcast_to(np.asarray(F_terminal(x), dtype=float), (n_x,)).copy()
    values[n_s] = term

    gam_grid = model.alpha * np.asarray(
        [model.order_field(sj, x) for sj in grid.s], dtype=float
    )
    time_indep = model.order_field.time_independent

    # Precompute per-position weight tables when the exponent field does not
    # depend on s: T1[m-1] is the interior weight at offset m, T2[m-1] the
    # terminal-node weight when offset m is the last one.
    tables = None
    if time_indep:
        gam_x = gam_grid[0]
        m_idx = np.arange(1, n_s + 1)
        A, B = _cell_moments(gam_x[:, None], m_idx[None, :], ds)
        b0 = ds ** (-gam_x) / (1.0 - gam_x)
        T1 = np.empty((n_x, n_s))
        T1[:, 0] = b0 + A[:, 0] - B[:, 0]
        T1[:, 1:] = B[:, :-1] + A[:, 1:] - B[:, 1:]
        T2 = np.empty((n_x, n_s))
        T2[:, 0] = b0
        T2[:, 1:] = B[:, :-1]
        tables = (T1, T2)

    for j in range(n_s - 1, -1, -1):
        M = n_s - j
        gam_x = gam_grid[j]
        if tables is not None:
            T1, T2 = tables
            w = T1[:, :M].copy()
            w[:, M - 1] = T2[:, M - 1]
        else:
            w = np.empty((n_x, M))
            uniq, inv = np.unique(gam_x, return_inverse=True)
            for u_i, gval in enumerate(uniq):
                tw = build_time_weights(gval, M, ds)
                w[inv == u_i] = tw.weights
        boundary = (M * ds) ** (-gam_x) / gam_x
        rhs = np.einsum("im,mi->i", w, values[j + 1 : j + M + 1]) + boundary * term
        diag = np.sum(w, axis=1) + boundary
        A_mat = np.diag(diag) - L
        try:
            sol = np.linalg.solve(A_mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailure(str(exc)) from exc
        if not np.all(np.isfinite(sol)):
            raise LinearSolveFailure(f"non-finite solution at slice {j}")
        values[j] = sol
    return Field(grid=grid, values=values)


def export_csv(field: Field, path) -> None:
    """Write the solved field as CSV rows (x, s, F)."""
    import csv

    grid = field.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "s", "F"])
        for j, sj in enumerate(grid.s):
            for i, xi in enumerate(grid.x):
                writer.writerow([repr(float(xi)), repr(float(sj)), repr(float(field.values[j, i]))])
