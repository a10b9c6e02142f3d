import numpy as np
import pytest

from varfrac.errors import (
    BoundViolation,
    ConfigError,
    DimensionUnsupported,
    NonPositiveBound,
    OrderBoundViolation,
)
from varfrac.model import gamma_at, make_model

from conftest import CONSTANT_ORDER


def _cfg(**overrides):
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in CONSTANT_ORDER.items()}
    cfg.update(overrides)
    return cfg


def test_constant_coefficients_accepted():
    model = make_model(_cfg())
    assert model.alpha == 0.5
    assert model.beta == 2.0


def test_order_bound_violation():
    with pytest.raises(OrderBoundViolation):
        make_model(_cfg(alpha=0.6, a_hi=2.0, order_field={"kind": "constant", "value": 1.0}))


def test_trig_order_field_accepted():
    cfg = _cfg(
        alpha=0.4,
        order_field={"kind": "trig", "base": 1.0, "amp": 0.5, "freq_x": 1.0, "freq_t": 1.0},
        a_lo=0.5,
        a_hi=1.5,
    )
    model = make_model(cfg)
    # 1.5 * 0.4 = 0.6 < 1
    assert model.gamma_hi == pytest.approx(0.6)


def test_gamma_at_constant():
    model = make_model(_cfg())
    assert gamma_at(model, 0.0, 0.0) == pytest.approx(0.5)
    assert gamma_at(model, 3.0, -1.2) == pytest.approx(0.5)


def test_gamma_at_variable():
    cfg = _cfg(
        alpha=0.4,
        order_field={"kind": "affine", "c0": 1.5, "ct": 0.0, "cx": 0.0},
        a_lo=1.5,
        a_hi=1.5,
    )
    model = make_model(cfg)
    assert gamma_at(model, 0.0, 0.0) == pytest.approx(0.6)


def test_gamma_stays_below_one_on_grid(varorder_model):
    xs = np.linspace(-np.pi, np.pi, 64)
    ss = np.linspace(0.0, 2.0, 32)
    for s in ss:
        g = gamma_at(varorder_model, s, xs)
        assert np.all(g > 0.0) and np.all(g < 1.0)


def test_nonpositive_bound_rejected():
    with pytest.raises(NonPositiveBound):
        make_model(_cfg(a_lo=0.0))
    bad_spatial = {"kind": "diffusion", "g": {"kind": "constant", "value": 1.0},
                   "g_lo": 0.0, "g_hi": 1.0}
    with pytest.raises(NonPositiveBound):
        make_model(_cfg(spatial=bad_spatial))


def test_dimension_gate():
    with pytest.raises(DimensionUnsupported):
        make_model(_cfg(dim=3))
    stable3 = {"kind": "stable1d", "beta": 0.5, "m": {"kind": "constant", "value": 1.0},
               "m_lo": 1.0, "m_hi": 1.0}
    with pytest.raises(DimensionUnsupported):
        make_model(_cfg(dim=2, spatial=stable3))


def test_field_outside_declared_range_rejected():
    cfg = _cfg(
        order_field={"kind": "trig", "base": 1.0, "amp": 0.5, "freq_x": 1.0, "freq_t": 0.0},
        a_lo=0.8,  # true minimum is 0.5
        a_hi=1.5,
    )
    with pytest.raises(OrderBoundViolation):
        make_model(cfg)


def test_spatial_field_outside_declared_range_rejected():
    cfg = _cfg(
        spatial={"kind": "diffusion",
                 "g": {"kind": "bump", "base": 1.0, "amp": 1.0, "center": 0.0, "width": 1.0},
                 "g_lo": 1.0, "g_hi": 1.5},
    )
    with pytest.raises(BoundViolation):
        make_model(cfg)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        make_model(_cfg(extra_knob=1))
    cfg = _cfg()
    cfg["order_field"] = {"kind": "constant", "value": 1.0, "oops": 2}
    with pytest.raises(ConfigError):
        make_model(cfg)


def test_make_model_deterministic():
    a = make_model(_cfg())
    b = make_model(_cfg())
    assert a.alpha == b.alpha
    assert a.order_field == b.order_field
    assert a.spatial == b.spatial


def test_matrix_field_eigenvalue_check():
    cfg = _cfg(
        dim=2,
        spatial={"kind": "diffusion", "g_matrix": [[1.0, 0.5], [0.5, 1.0]],
                 "g_lo": 0.5, "g_hi": 1.5},
    )
    model = make_model(cfg)
    G = model.spatial.g(np.array([0.3, -0.4]))
    assert G.shape == (2, 2)
    # declared range excludes the true eigenvalue 1.5 -> reject
    cfg_bad = _cfg(
        dim=2,
        spatial={"kind": "diffusion", "g_matrix": [[1.0, 0.5], [0.5, 1.0]],
                 "g_lo": 0.6, "g_hi": 1.5},
    )
    with pytest.raises(BoundViolation):
        make_model(cfg_bad)
