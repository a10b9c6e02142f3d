import math

import numpy as np
import pytest

from varfrac import kernels as kr
from varfrac.errors import InvalidTailMass, KernelInfeasible
from varfrac.model import make_model

from conftest import CONSTANT_ORDER


def _model(spatial, dim=1):
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in CONSTANT_ORDER.items()}
    cfg["spatial"] = spatial
    cfg["dim"] = dim
    return make_model(cfg)


def test_diffusion_kernel_1d():
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 2.0},
                "g_lo": 2.0, "g_hi": 2.0})
    k = kr.diffusion_kernel(m, 0.0)
    assert sorted(k.atoms[:, 0]) == pytest.approx([-math.sqrt(2.0), math.sqrt(2.0)])
    assert k.weights.tolist() == [0.5, 0.5]
    assert k.second_moment()[0, 0] == pytest.approx(2.0)


def test_diffusion_kernel_2d_identity():
    m = _model({"kind": "diffusion", "g_matrix": [[1.0, 0.0], [0.0, 1.0]],
                "g_lo": 0.5, "g_hi": 1.5}, dim=2)
    k = kr.diffusion_kernel(m, [0.0, 0.0])
    assert np.allclose(k.weights, 0.25)
    # weight-1/4 atoms of length sqrt(2) along each axis give E[z z^T] = I
    assert np.allclose(np.abs(k.atoms).max(axis=1), math.sqrt(2.0))
    assert np.allclose(k.second_moment(), np.eye(2), atol=1e-12)


def test_diffusion_kernel_2d_offdiagonal_moments():
    G = np.array([[1.0, 0.5], [0.5, 1.0]])
    m = _model({"kind": "diffusion", "g_matrix": G.tolist(), "g_lo": 0.4, "g_hi": 1.6}, dim=2)
    k = kr.diffusion_kernel(m, [0.2, -0.3])
    assert np.max(np.abs(k.second_moment() - G)) < 1e-12
    assert k.weights.sum() == pytest.approx(1.0, abs=1e-12)
    # symmetry: atoms come in +- pairs
    atoms = sorted(map(tuple, np.round(k.atoms, 12)))
    assert sorted(map(tuple, np.round(-k.atoms, 12))) == atoms


def test_diffusion_kernel_2d_infeasible():
    G = [[0.5, 1.0], [1.0, 10.0]]  # positive definite but not diagonally dominated
    m = _model({"kind": "diffusion", "g_matrix": G, "g_lo": 0.3, "g_hi": 10.2}, dim=2)
    with pytest.raises(KernelInfeasible):
        kr.diffusion_kernel(m, [0.0, 0.0])


def test_stable_kernel_minimal_threshold(stable_model):
    # m = beta/2 makes the minimal threshold exactly 1 with empty head
    k = kr.stable_kernel(stable_model, 0.0)
    assert k.threshold == pytest.approx(1.0)
    assert k.head_height == pytest.approx(0.0)


def test_stable_kernel_bad_threshold(stable_model):
    with pytest.raises(InvalidTailMass):
        kr.stable_kernel(stable_model, 0.0, threshold=0.5)


def test_stable_sampler_tail_and_sign_balance(stable_model):
    fam = kr.kernel_family(stable_model)
    n = 1_000_000
    u = (np.arange(n) + 0.5) / n
    rng = np.random.default_rng(3)
    rng.shuffle(u)
    z = fam.sample(np.zeros(n), u)
    # sign balance (the mean does not exist for beta < 1)
    p_pos = float(np.mean(z > 0))
    assert abs(p_pos - 0.5) <= 3.0 * math.sqrt(0.25 / n)
    beta, mval = 0.5, 0.25
    for T in (2.0, 8.0, 50.0):
        p_ana = 2.0 * mval * T**-beta / beta
        p_emp = float(np.mean(np.abs(z) > T))
        se = math.sqrt(p_ana * (1.0 - p_ana) / n)
        assert abs(p_emp - p_ana) <= 3.0 * se


def test_apply_generator_quadratic_exact():
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.7},
                "g_lo": 1.7, "g_hi": 1.7})
    k = kr.diffusion_kernel(m, 0.4)
    for tau in (1.0, 0.3, 1e-3):
        assert kr.apply_approx_generator(k, tau, lambda y: y**2, 0.4, 2.0) == pytest.approx(
            1.7, rel=1e-12
        )


def test_apply_generator_constant_zero():
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                "g_lo": 1.0, "g_hi": 1.0})
    k = kr.diffusion_kernel(m, 0.0)
    assert kr.apply_approx_generator(k, 0.1, lambda y: 3.0 * np.ones_like(y), 0.0, 2.0) == 0.0


def test_apply_generator_sin_limit():
    # Richardson in tau: value(tau) ~ -sin(x)/2 + c tau
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                "g_lo": 1.0, "g_hi": 1.0})
    x = 0.9
    k = kr.diffusion_kernel(m, x)
    v1 = kr.apply_approx_generator(k, 2e-3, np.sin, x, 2.0)
    v2 = kr.apply_approx_generator(k, 1e-3, np.sin, x, 2.0)
    extrap = 2.0 * v2 - v1
    assert extrap == pytest.approx(-0.5 * math.sin(x), abs=1e-8)


def test_generator_odd_function_vanishes(stable_model):
    m1 = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                 "g_lo": 1.0, "g_hi": 1.0})
    k1 = kr.diffusion_kernel(m1, 0.7)
    val = kr.apply_approx_generator(k1, 0.1, lambda y: (y - 0.7) ** 3, 0.7, 2.0)
    assert abs(val) < 1e-12
    ks = kr.stable_kernel(stable_model, 0.0)
    odd = lambda y: (y) * np.exp(-(y**2))
    assert abs(kr.apply_approx_generator(ks, 0.1, odd, 0.0, 0.5)) < 1e-12


def test_generator_residual_quadratic_zero():
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                "g_lo": 1.0, "g_hi": 1.0})
    f = kr.TestFunction(fn=lambda y: y**2, d2=lambda y: 2.0 * np.ones_like(np.asarray(y)))
    assert kr.generator_residual(m, 0.05, [f], np.linspace(-1, 1, 5)) < 1e-10


def test_generator_residual_first_order_in_tau():
    m = _model({"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                "g_lo": 1.0, "g_hi": 1.0})
    f = kr.TestFunction(fn=np.sin, d2=lambda y: -np.sin(y))
    xg = np.linspace(-2.0, 2.0, 9)
    r1 = kr.generator_residual(m, 0.02, [f], xg)
    r2 = kr.generator_residual(m, 0.01, [f], xg)
    assert r2 / r1 == pytest.approx(0.5, abs=0.1)


def test_generator_residual_stable_monotone(stable_model):
    f = kr.TestFunction(fn=lambda y: np.exp(-(y**2)))
    xg = np.linspace(-2.0, 2.0, 9)
    res = [kr.generator_residual(stable_model, t, [f], xg) for t in (0.04, 0.02, 0.01)]
    assert res[0] > res[1] > res[2]


def test_family_matches_anchored_kernel(varorder_model):
    fam = kr.kernel_family(varorder_model)
    k = fam.at(0.3)
    assert k.kind == "discrete"
    z = fam.sample(np.array([0.3, 0.3]), np.array([0.2, 0.8]))
    assert z[0] == -z[1]
    assert abs(z[0]) == pytest.approx(abs(k.atoms[0, 0]))
