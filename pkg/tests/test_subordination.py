import math

import numpy as np
import pytest

from varfrac import ctrw, oracles, subordination, waiting
from varfrac.errors import DomainError, SingularityResolutionError
from varfrac.kernels import kernel_family

AMPLITUDE_HALF = 0.8588108850325575


def test_theta_tail_values(const_model):
    assert subordination.theta_tail(const_model, 0.0, 0.0, 4.0) == pytest.approx(1.0)
    assert subordination.theta_tail(const_model, 0.0, 0.0, 1.0) == pytest.approx(2.0)


def test_theta_tail_domain(const_model):
    with pytest.raises(DomainError):
        subordination.theta_tail(const_model, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        subordination.theta_tail(const_model, 2.0, 0.0, 1.0)


def test_theta_tail_monotone_and_divergent(const_model):
    vals = [subordination.theta_tail(const_model, v, 0.0, 1.0)
            for v in (0.0, 0.5, 0.9, 0.999, 0.9999999)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1e3


def test_theta_tail_time_integral_closed_form(const_model):
    # int_s^t (t-v)^(-g)/g dv = (t-s)^(1-g) / ((1-g) g); here g = 1/2, t-s = 1
    from scipy import integrate

    val, _ = integrate.quad(
        lambda v: subordination.theta_tail(const_model, v, 0.0, 1.0), 0.0, 1.0,
        points=[0.999999], limit=200,
    )
    assert val == pytest.approx(4.0, abs=1e-6)
    # and the cell-integral helper reproduces it exactly
    edges = np.linspace(0.0, 1.0, 257)
    keep, integrals = subordination._theta_cell_weights(
        const_model, 1.0, edges, np.array([0.0])
    )
    assert integrals.sum() == pytest.approx(4.0, abs=1e-12)


@pytest.fixture(scope="module")
def analytic_G():
    return oracles.ConstantOrderDensity(gamma=0.5, g0=1.0, x0=0.0, s0=0.0)


def test_analytic_normalization(const_model, analytic_G, ones):
    r = subordination.subordinated_expectation(const_model, analytic_G, ones, 0.0, 0.0, 1.0)
    assert abs(r.value - 1.0) <= 1e-3
    assert r.band == 0.0


def test_analytic_matches_profile_reference(const_model, analytic_G):
    r = subordination.subordinated_expectation(const_model, analytic_G, np.cos, 0.0, 0.0, 1.0)
    assert abs(r.value - AMPLITUDE_HALF) <= 1e-2


def test_linearity_and_bound(const_model, analytic_G, ones):
    r1 = subordination.subordinated_expectation(const_model, analytic_G, np.cos, 0.0, 0.0, 1.0)
    r2 = subordination.subordinated_expectation(const_model, analytic_G, np.sin, 0.0, 0.0, 1.0)
    combo = subordination.subordinated_expectation(
        const_model, analytic_G, lambda y: 2.0 * np.cos(y) - 3.0 * np.sin(y), 0.0, 0.0, 1.0
    )
    assert combo.value == pytest.approx(2.0 * r1.value - 3.0 * r2.value, abs=1e-10)
    norm = subordination.subordinated_expectation(const_model, analytic_G, ones, 0.0, 0.0, 1.0)
    assert abs(r1.value) <= 1.0 * norm.value + 1e-12


def test_truncation_monotone(const_model, analytic_G, ones):
    vals = [
        subordination.subordinated_expectation(
            const_model, analytic_G, ones, 0.0, 0.0, 1.0, K=K
        ).value
        for K in (3.0, 10.0, 40.0)
    ]
    assert vals[0] <= vals[1] <= vals[2]
    full = subordination.subordinated_expectation(const_model, analytic_G, ones, 0.0, 0.0, 1.0)
    assert vals[2] <= full.value + 1e-9


def test_analytic_density_profile(const_model, analytic_G):
    y, q, band = subordination.subordinated_density(const_model, analytic_G, 0.0, 0.0, 1.0)
    dy = y[1] - y[0]
    assert np.sum(q) * dy == pytest.approx(1.0, abs=1e-3)
    assert np.max(np.abs(q - q[::-1])) < 1e-12
    ref = oracles.time_changed_gaussian_density(0.5, 1.0, 0.0, 1.0, y)
    assert np.max(np.abs(q - ref)) <= 0.02


@pytest.fixture(scope="module")
def empirical_G(const_model):
    law = waiting.build_waiting_law(0.5, 0.5)
    fam = kernel_family(const_model)
    h = math.sqrt(2e-3)
    m = 24
    y_edges = h * (8.0 * np.arange(-m, m + 1) + 4.5)
    u_grid = np.concatenate([np.arange(0.2, 0.6, 0.05), np.arange(0.6, 2.3, 0.1)])
    v_edges = np.concatenate([np.linspace(0.0, 1.0, 41), [1.5, np.inf]])
    return ctrw.empirical_transition_density(
        0.0, 0.0, 2e-3, u_grid, y_edges, v_edges, 30_000, 314,
        model=const_model, kernel_family=fam, law=law, threads=4,
    )


def test_empirical_normalization(const_model, empirical_G, ones):
    r = subordination.subordinated_expectation(const_model, empirical_G, ones, 0.0, 0.0, 1.0)
    assert r.band > 0.0
    assert abs(r.value - 1.0) <= 3.0 * r.band + 5e-3


def test_empirical_matches_reference(const_model, empirical_G):
    r = subordination.subordinated_expectation(const_model, empirical_G, np.cos, 0.0, 0.0, 1.0)
    assert abs(r.value - AMPLITUDE_HALF) <= 3.0 * r.band + 5e-3


def test_empirical_density_mass_and_symmetry(const_model, empirical_G):
    y, q, band = subordination.subordinated_density(const_model, empirical_G, 0.0, 0.0, 1.0)
    dy = np.diff(empirical_G.y_edges)
    total = float(np.sum(q * dy))
    assert total == pytest.approx(1.0, abs=1e-2)
    # symmetry through the interpolated distribution function (the bin grid
    # itself is half-lattice offset, so bins have no mirror partners)
    cdf = np.concatenate([[0.0], np.cumsum(q * dy)]) / total
    edges = empirical_G.y_edges
    for x in (0.5, 1.0, 2.0):
        lo = float(np.interp(-x, edges, cdf))
        hi = float(np.interp(x, edges, cdf))
        assert lo + hi == pytest.approx(1.0, abs=0.02)


def test_empirical_grid_must_cover_horizon(const_model, empirical_G):
    bad = ctrw.DensityGrid(
        u_values=empirical_G.u_values,
        y_edges=empirical_G.y_edges,
        v_edges=np.linspace(0.0, 0.5, 11),
        masses=empirical_G.masses[:, :, :10],
        counts=empirical_G.counts[:, :, :10],
        n_traj=empirical_G.n_traj,
        x0=0.0, s0=0.0, tau=2e-3, seed=314,
    )
    with pytest.raises(SingularityResolutionError):
        subordination.subordinated_expectation(
            const_model, bad, lambda y: np.ones_like(y), 0.0, 0.0, 1.0
        )


# ---------------------------------------------------------------------------
# exhaustive discrete recursion
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def lattice_setup(const_model):
    law = waiting.build_waiting_law(0.5, 0.5)
    tau = 0.1
    need = 1.0 / tau**2
    dlaw = waiting.discretize_waiting_law(law, 0.5, 16, 1.28 * need)
    return const_model, dlaw, tau


def test_recursion_conserves_mass(lattice_setup, ones):
    model, dlaw, tau = lattice_setup
    val, rem = subordination.discrete_subordinated_expectation(
        model, dlaw, ones, 0.0, 0.0, 1.0, tau
    )
    assert val == pytest.approx(1.0, abs=1e-12)
    assert rem <= 1e-12


def test_recursion_single_step_case(lattice_setup):
    # horizon below the smallest waiting increment: every path crosses at the
    # first step, so the value is the one-jump average of F times 1
    model, dlaw, tau = lattice_setup
    t = 0.5 * tau**2 * dlaw.values[0]
    val, _ = subordination.discrete_subordinated_expectation(
        model, dlaw, np.cos, 0.0, 0.0, t, tau
    )
    h = math.sqrt(tau)
    assert val == pytest.approx(0.5 * (math.cos(h) + math.cos(-h)), abs=1e-12)


def test_recursion_window_contained(lattice_setup, ones):
    model, dlaw, tau = lattice_setup
    full, _ = subordination.discrete_subordinated_expectation(
        model, dlaw, ones, 0.0, 0.0, 1.0, tau
    )
    windowed, _ = subordination.discrete_subordinated_expectation(
        model, dlaw, ones, 0.0, 0.0, 1.0, tau, K=5.0
    )
    assert windowed <= full + 1e-12


def test_recursion_matches_sampling(lattice_setup):
    model, dlaw, tau = lattice_setup
    val, _ = subordination.discrete_subordinated_expectation(
        model, dlaw, np.cos, 0.0, 0.0, 1.0, tau
    )
    fam = kernel_family(model)
    est = ctrw.estimate_functional(np.cos, 0.0, 0.0, 1.0, tau, 100_000, 2024,
                                   model=model, kernel_family=fam, law=dlaw, threads=4)
    assert abs(val - est.mean) <= 3.0 * est.std_error


def test_recursion_requires_constant_order(varorder_model, lattice_setup):
    _, dlaw, tau = lattice_setup
    with pytest.raises(ValueError):
        subordination.discrete_subordinated_expectation(
            varorder_model, dlaw, np.cos, 0.0, 0.0, 1.0, tau
        )


def test_recursion_lattice_guard(lattice_setup):
    from varfrac.errors import LatticeOverflow

    model, dlaw, tau = lattice_setup
    with pytest.raises(LatticeOverflow):
        subordination.discrete_subordinated_expectation(
            model, dlaw, np.cos, 0.0, 0.0, 1.0, tau, max_cells=16
        )
