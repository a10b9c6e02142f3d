"""The enhanced chain (position, accumulated waiting time), its horizon
hitting time, and Monte Carlo functionals of the time-changed walk.

Trajectory i of a run with seed s consumes only stream (s, i), so estimates
are bit-identical for any worker count; chunk boundaries are fixed and the
cross-chunk reduction runs in chunk order with exact compensated summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import StepBudgetExceeded
from .model import Model, gamma_at
from .streams import TrajectoryStream, uniforms

DEFAULT_STEP_CAP = 10**8
_CHUNK = 4096


@dataclass(frozen=True)
class ChainState:
    """One enhanced-chain state: position, accumulated waiting time, step count."""

    x: np.ndarray
    s: float
    k: int = 0


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_traj: int
    seed: int


@dataclass(frozen=True)
class DensityGrid:
    """Histogram estimate of the pair law at a ladder of elapsed times.

    masses[i] is the joint probability mass on (y, v) cells at u_values[i];
    each slice sums to 1 exactly (positions are clipped into the y range and
    the final v bin absorbs everything above its lower edge).
    """

    u_values: np.ndarray
    y_edges: np.ndarray
    v_edges: np.ndarray
    masses: np.ndarray
    counts: np.ndarray
    n_traj: int
    x0: float
    s0: float
    tau: float
    seed: int

    def density(self, i: int) -> np.ndarray:
        dy = np.diff(self.y_edges)
        dv = np.diff(self.v_edges)
        vol = dy[:, None] * dv[None, :]
        return self.masses[i] / vol


def step_chain(state: ChainState, tau, model: Model, kernel_family, law, u_jump, u_wait):
    """One transition of the enhanced chain.

    The waiting increment is tau^(1/(alpha a(s, x))) * r with the order field
    read at the pre-step state, and the spatial increment is tau^(1/beta) * y;
    both coordinates move jointly.
    """
    x = np.atleast_1d(np.asarray(state.x, dtype=float))
    gam = float(gamma_at(model, state.s, x[0] if model.dim == 1 else x))
    r = float(law.sample(gam, u_wait))
    s_new = state.s + float(np.power(tau, 1.0 / gam)) * r
    if model.dim == 1:
        y = kernel_family.sample(x, np.asarray([u_jump]))
        x_new = x + tau ** (1.0 / model.beta) * np.asarray(y)
    else:
        y = kernel_family.sample(x[None, :], np.asarray([u_jump]))[0]
        x_new = x + tau ** (1.0 / model.beta) * y
    return ChainState(x=x_new, s=s_new, k=state.k + 1)


def run_to_horizon(x0, s0, t, tau, model: Model, kernel_family, law,
                   seed_stream: TrajectoryStream, step_cap: int = DEFAULT_STEP_CAP):
    """Iterate until the accumulated waiting time first reaches t.

    Returns (position at that step, hitting step time k*tau, step count).
    The position reported is the one updated jointly with the crossing
    waiting increment.
    """
    if t <= s0:
        raise ValueError("horizon must exceed the initial accumulated time")
    state = ChainState(x=np.atleast_1d(np.asarray(x0, dtype=float)), s=float(s0))
    while state.s < t:
        u_jump, u_wait = seed_stream.next_pair()
        state = step_chain(state, tau, model, kernel_family, law, u_jump, u_wait)
        if state.k > step_cap:
            raise StepBudgetExceeded(f"exceeded {step_cap} steps before reaching t={t}")
    x = state.x[0] if model.dim == 1 else state.x
    return x, state.k * tau, state.k


# ---------------------------------------------------------------------------
# vectorized ensemble engine
# ---------------------------------------------------------------------------


def _run_chunk_to_horizon(model, kern, law, x0, s0, t, tau, seed, ids, step_cap):
    """Advance a block of trajectories in lockstep until each reaches t.

    Returns (final positions, step counts) ordered like ids.
    """
    n = len(ids)
    d = model.dim
    inv_beta = 1.0 / model.beta
    h_x = tau**inv_beta
    alive_ids = np.asarray(ids, dtype=np.uint64)
    pos = np.arange(n)
    if d == 1:
        x = np.full(n, float(x0))
    else:
        x = np.tile(np.asarray(x0, dtype=float), (n, 1))
    s = np.full(n, float(s0))
    out_x = np.empty(n) if d == 1 else np.empty((n, d))
    out_k = np.empty(n, dtype=np.int64)
    k = 0
    while len(pos):
        k += 1
        if k > step_cap:
            raise StepBudgetExceeded(f"exceeded {step_cap} steps before reaching t={t}")
        u_jump = uniforms(seed, alive_ids, k, 0)
        u_wait = uniforms(seed, alive_ids, k, 1)
        gam = model.alpha * model.order_field(s, x)
        r = law.sample(gam, u_wait)
        s = s + np.power(tau, 1.0 / gam) * r
        y = kern.sample(x, u_jump)
        x = x + h_x * np.asarray(y)
        done = s >= t
        if np.any(done):
            idx = pos[done]
            out_x[idx] = x[done]
            out_k[idx] = k
            keep = ~done
            pos = pos[keep]
            alive_ids = alive_ids[keep]
            x = x[keep]
            s = s[keep]
    return out_x, out_k


def _chunks(n_traj):
    return [(lo, min(lo + _CHUNK, n_traj)) for lo in range(0, n_traj, _CHUNK)]


def _map_chunks(fn, n_traj, threads):
    spans = _chunks(n_traj)
    if threads <= 1:
        return [fn(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in spans]
        return [f.result() for f in futures]


def estimate_functional(F, x0, s0, t, tau, n_traj, seed, *, model, kernel_family, law,
                        threads: int = 1, step_cap: int = DEFAULT_STEP_CAP) -> MCEstimate:
    """Monte Carlo mean of F over the time-changed walk at horizon t.

    Deterministic in (seed, config): trajectory i always uses stream
    (seed, i), and the chunk reduction order is fixed regardless of threads.
    """
    if n_traj < 100:
        raise ValueError("n_traj must be at least 100")

    def work(lo, hi):
        ids = np.arange(lo, hi, dtype=np.uint64)
        xs, _ = _run_chunk_to_horizon(
            model, kernel_family, law, x0, s0, t, tau, seed, ids, step_cap
        )
        vals = np.asarray(F(xs), dtype=float)
        if vals.shape != (hi - lo,):
            vals = np.broadcast_to(vals, (hi - lo,)).astype(float)
        return float(np.sum(vals)), float(np.sum(vals * vals))

    parts = _map_chunks(work, n_traj, threads)
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / n_traj
    var = max(total_sq / n_traj - mean * mean, 0.0) * n_traj / max(n_traj - 1, 1)
    return MCEstimate(
        mean=mean, std_error=math.sqrt(var / n_traj), n_traj=n_traj, seed=seed
    )


def sample_hitting(x0, s0, t, tau, n_traj, seed, *, model, kernel_family, law,
                   threads: int = 1, step_cap: int = DEFAULT_STEP_CAP):
    """Raw ensemble results: final positions and hitting step times."""

    def work(lo, hi):
        ids = np.arange(lo, hi, dtype=np.uint64)
        return _run_chunk_to_horizon(
            model, kernel_family, law, x0, s0, t, tau, seed, ids, step_cap
        )

    parts = _map_chunks(work, n_traj, threads)
    xs = np.concatenate([p[0] for p in parts])
    ks = np.concatenate([p[1] for p in parts])
    return xs, ks * tau


def _run_chunk_fixed_steps(model, kern, law, x0, s0, tau, seed, ids, step_counts):
    """Advance a block for max(step_counts) steps, snapshotting the pair."""
    n = len(ids)
    d = model.dim
    h_x = tau ** (1.0 / model.beta)
    if d == 1:
        x = np.full(n, float(x0))
    else:
        x = np.tile(np.asarray(x0, dtype=float), (n, 1))
    s = np.full(n, float(s0))
    targets = {int(c) for c in step_counts}
    snaps = {}
    for k in range(1, max(targets) + 1):
        u_jump = uniforms(seed, ids, k, 0)
        u_wait = uniforms(seed, ids, k, 1)
        gam = model.alpha * model.order_field(s, x)
        r = law.sample(gam, u_wait)
        s = s + np.power(tau, 1.0 / gam) * r
        y = kern.sample(x, u_jump)
        x = x + h_x * np.asarray(y)
        if k in targets:
            snaps[k] = (x.copy(), s.copy())
    return snaps


def sample_chain_at_steps(x0, s0, tau, step_counts, n_traj, seed, *, model, kernel_family,
                          law, threads: int = 1):
    """Ensemble snapshots of (position, accumulated time) at fixed step counts.

    Returns {step_count: (x array, s array)} with trajectories in index order.
    """

    def work(lo, hi):
        ids = np.arange(lo, hi, dtype=np.uint64)
        return _run_chunk_fixed_steps(
            model, kernel_family, law, x0, s0, tau, seed, ids, step_counts
        )

    parts = _map_chunks(work, n_traj, threads)
    out = {}
    for k in sorted({int(c) for c in step_counts}):
        xs = np.concatenate([p[k][0] for p in parts])
        ss = np.concatenate([p[k][1] for p in parts])
        out[k] = (xs, ss)
    return out


def dump_trajectories(path, x0, s0, t, tau, n_traj, seed, *, model, kernel_family, law,
                      step_cap: int = DEFAULT_STEP_CAP) -> None:
    """Write the first n_traj trajectories as CSV rows (traj, step, x, s),
    replaying the exact streams the estimators consume."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj", "step", "x", "s"])
        for i in range(n_traj):
            state = ChainState(x=np.atleast_1d(np.asarray(x0, dtype=float)), s=float(s0))
            stream = TrajectoryStream(seed, i)
            writer.writerow([i, 0, repr(float(state.x[0])), repr(state.s)])
            while state.s < t:
                u_jump, u_wait = stream.next_pair()
                state = step_chain(state, tau, model, kernel_family, law, u_jump, u_wait)
                writer.writerow([i, state.k, repr(float(state.x[0])), repr(float(state.s))])
                if state.k > step_cap:
                    raise StepBudgetExceeded(f"exceeded {step_cap} steps in trajectory dump")


def empirical_transition_density(x0, s0, tau, u_grid, y_edges, v_edges, n_traj, seed, *,
                                 model, kernel_family, law, threads: int = 1) -> DensityGrid:
    """Histogram estimate of the pair law at the elapsed times in u_grid.

    Each u must give at least 100 chain steps at resolution tau. Positions
    are clipped into the y range so every slice keeps total mass 1.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    steps = np.round(u_grid / tau).astype(int)
    if np.any(steps < 100):
        raise ValueError("each u must give at least 100 steps at this tau")
    y_edges = np.asarray(y_edges, dtype=float)
    v_edges = np.asarray(v_edges, dtype=float)
    snaps = sample_chain_at_steps(
        x0, s0, tau, steps, n_traj, seed,
        model=model, kernel_family=kernel_family, law=law, threads=threads,
    )
    tiny = 1e-9 * (y_edges[-1] - y_edges[0])
    counts = np.empty((len(u_grid), len(y_edges) - 1, len(v_edges) - 1), dtype=np.int64)
    for i, k in enumerate(steps):
        xs, ss = snaps[int(k)]
        xs = np.clip(xs, y_edges[0] + tiny, y_edges[-1] - tiny)
        if np.isfinite(v_edges[-1]):
            ss = np.clip(ss, v_edges[0], np.nextafter(v_edges[-1], -np.inf))
        else:
            ss = np.clip(ss, v_edges[0], None)
        hist, _, _ = np.histogram2d(xs, ss, bins=[y_edges, v_edges])
        counts[i] = hist.astype(np.int64)
    masses = counts / float(n_traj)
    return DensityGrid(
        u_values=u_grid, y_edges=y_edges, v_edges=v_edges, masses=masses,
        counts=counts, n_traj=n_traj, x0=float(np.atleast_1d(x0)[0]), s0=float(s0),
        tau=float(tau), seed=int(seed),
    )
