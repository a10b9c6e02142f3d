"""Problem definition: order field, spatial coefficients, and their bounds.

Coefficient fields are named presets with numeric parameters (so configs
stay serializable), and every declared bound is verified by dense grid
sampling at construction time with zero tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    BoundViolation,
    ConfigError,
    DimensionUnsupported,
    NonPositiveBound,
    OrderBoundViolation,
)

_VALIDATION_POINTS = 10_000


# ---------------------------------------------------------------------------
# scalar coefficient fields a(t, x), m(x), g(x)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """Named scalar field preset; callable as f(t, x) with array broadcasting.

    kinds:
      constant: value
      affine:   c0 + ct*t + sum(cx*x)
      trig:     base + amp * sin(sum(freq_x*x)) * cos(freq_t*t)
      bump:     base + amp * exp(-|x - center|^2 / (2 width^2))
    """

    kind: str
    params: Mapping[str, object]
    dim: int = 1

    def __call__(self, t, x):
        p = self.params
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        xs = self._axis_sum(x)
        if self.kind == "constant":
            return np.broadcast_to(
                np.asarray(float(p["value"])), np.broadcast_shapes(t.shape, xs.shape)
            ).copy()
        if self.kind == "affine":
            cx = np.atleast_1d(np.asarray(p.get("cx", 0.0), dtype=float))
            lin = self._dot(x, cx)
            return float(p.get("c0", 0.0)) + float(p.get("ct", 0.0)) * t + lin
        if self.kind == "trig":
            freq_x = np.atleast_1d(np.asarray(p.get("freq_x", 1.0), dtype=float))
            freq_t = float(p.get("freq_t", 0.0))
            phase = self._dot(x, freq_x)
            return float(p["base"]) + float(p["amp"]) * np.sin(phase) * np.cos(freq_t * t)
        if self.kind == "bump":
            center = np.atleast_1d(np.asarray(p.get("center", 0.0), dtype=float))
            width = float(p["width"])
            if self.dim == 1:
                d2 = (x - center[0]) ** 2
            else:
                d2 = np.sum((x - center) ** 2, axis=-1)
            return float(p["base"]) + float(p["amp"]) * np.exp(-d2 / (2.0 * width**2)) + 0.0 * t
        raise ConfigError(f"unknown field kind {self.kind!r}")

    def _axis_sum(self, x):
        if self.dim == 1:
            return x
        return x[..., 0] if x.ndim > 0 and x.shape[-1] == self.dim else x

    def _dot(self, x, coef):
        if self.dim == 1:
            return coef[0] * x
        return np.tensordot(x, coef, axes=([-1], [0]))

    @property
    def time_independent(self) -> bool:
        if self.kind in ("constant", "bump"):
            return True
        if self.kind == "affine":
            return float(self.params.get("ct", 0.0)) == 0.0
        if self.kind == "trig":
            return float(self.params.get("freq_t", 0.0)) == 0.0
        return False


@dataclass(frozen=True)
class MatrixField:
    """G(x) = scale(x) * base, with base a fixed SPD matrix (d = 2 only)."""

    base: np.ndarray
    scale: ScalarField | None = None

    def __call__(self, x):
        if self.scale is None:
            x = np.asarray(x, dtype=float)
            shape = x.shape[:-1] if x.ndim > 1 else ()
            return np.broadcast_to(self.base, shape + self.base.shape).copy()
        s = self.scale(0.0, x)
        return np.asarray(s)[..., None, None] * self.base


_FIELD_KEYS = {
    "constant": {"value"},
    "affine": {"c0", "ct", "cx"},
    "trig": {"base", "amp", "freq_x", "freq_t"},
    "bump": {"base", "amp", "center", "width"},
}


def parse_scalar_field(field_cfg: Mapping, dim: int) -> ScalarField:
    if not isinstance(field_cfg, Mapping) or "kind" not in field_cfg:
        raise ConfigError("field config must be a mapping with a 'kind' key")
    kind = field_cfg["kind"]
    if kind not in _FIELD_KEYS:
        raise ConfigError(f"unknown field kind {kind!r}")
    params = {k: v for k, v in field_cfg.items() if k != "kind"}
    unknown = set(params) - _FIELD_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} for field kind {kind!r}")
    return ScalarField(kind=kind, params=params, dim=dim)


# ---------------------------------------------------------------------------
# spatial parts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diffusion:
    """Second-order spatial part with coefficient matrix/scalar g(x)."""

    g: object  # ScalarField (d=1) or MatrixField (d=2)
    g_lo: float
    g_hi: float


@dataclass(frozen=True)
class Stable1D:
    """Jump-type spatial part of index beta with intensity m(x), d = 1."""

    beta: float
    m: ScalarField
    m_lo: float
    m_hi: float


@dataclass(frozen=True)
class Model:
    """Validated problem data shared by every other module.

    Immutable after construction; safe to share across workers.
    """

    alpha: float
    order_field: ScalarField
    a_lo: float
    a_hi: float
    spatial: Diffusion | Stable1D
    dim: int
    x_box: tuple = ((-np.pi, np.pi),)
    t_max: float = 2.0

    @property
    def beta(self) -> float:
        return 2.0 if isinstance(self.spatial, Diffusion) else self.spatial.beta

    @property
    def gamma_lo(self) -> float:
        return self.alpha * self.a_lo

    @property
    def gamma_hi(self) -> float:
        return self.alpha * self.a_hi


def gamma_at(model: Model, s, x):
    """Local tail exponent alpha * a(s, x); always inside (0, 1)."""
    return model.alpha * model.order_field(s, x)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

_MODEL_KEYS = {"alpha", "order_field", "a_lo", "a_hi", "spatial", "dim", "x_box", "t_max"}
_DIFFUSION_KEYS = {"kind", "g", "g_lo", "g_hi", "g_matrix"}
_STABLE_KEYS = {"kind", "beta", "m", "m_lo", "m_hi"}


def _sample_grid(model_dim, x_box, t_max, n_points):
    """Cartesian (t, x) sample grid with roughly n_points entries."""
    if model_dim == 1:
        n_side = int(np.sqrt(n_points))
        ts = np.linspace(0.0, t_max, n_side)
        xs = np.linspace(x_box[0][0], x_box[0][1], n_side)
        tt, xx = np.meshgrid(ts, xs, indexing="ij")
        return tt.ravel(), xx.ravel()
    n_t = max(4, int(round(n_points ** (1.0 / 3.0))))
    n_side = max(4, int(np.sqrt(n_points // n_t)))
    ts = np.linspace(0.0, t_max, n_t)
    g0 = np.linspace(x_box[0][0], x_box[0][1], n_side)
    g1 = np.linspace(x_box[1][0], x_box[1][1], n_side)
    tt, a0, a1 = np.meshgrid(ts, g0, g1, indexing="ij")
    return tt.ravel(), np.stack([a0.ravel(), a1.ravel()], axis=-1)


def make_model(config: Mapping) -> Model:
    """Build a validated Model from a parsed configuration mapping.

    Rejects any violation of the declared bounds: the product of the upper
    order bound with alpha must stay below 1, every lower bound must be
    strictly positive, and the coefficient fields are spot-checked on a
    dense grid against their declared ranges (hard reject, no tolerance).
    """
    if not isinstance(config, Mapping):
        raise ConfigError("model config must be a mapping")
    unknown = set(config) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}")
    for key in ("alpha", "order_field", "a_lo", "a_hi", "spatial", "dim"):
        if key not in config:
            raise ConfigError(f"model config missing {key!r}")

    alpha = float(config["alpha"])
    a_lo = float(config["a_lo"])
    a_hi = float(config["a_hi"])
    dim = int(config["dim"])
    if not 0.0 < alpha < 1.0:
        raise OrderBoundViolation(f"alpha must lie in (0,1), got {alpha}")
    if a_lo <= 0.0:
        raise NonPositiveBound(f"a_lo must be > 0, got {a_lo}")
    if a_lo > a_hi:
        raise ConfigError("a_lo > a_hi")
    if a_hi * alpha >= 1.0:
        raise OrderBoundViolation(
            f"a_hi * alpha = {a_hi * alpha} >= 1; the upper order bound is too large"
        )

    x_box = tuple(tuple(map(float, pair)) for pair in config.get("x_box", ((-np.pi, np.pi),) * dim))
    if len(x_box) != dim:
        raise ConfigError("x_box must supply one (lo, hi) pair per dimension")
    t_max = float(config.get("t_max", 2.0))

    order_field = parse_scalar_field(config["order_field"], dim)

    spatial_cfg = config["spatial"]
    if not isinstance(spatial_cfg, Mapping) or "kind" not in spatial_cfg:
        raise ConfigError("spatial config must be a mapping with a 'kind' key")
    kind = spatial_cfg["kind"]
    if kind == "diffusion":
        unknown = set(spatial_cfg) - _DIFFUSION_KEYS
        if unknown:
            raise ConfigError(f"unknown spatial keys {sorted(unknown)}")
        if dim not in (1, 2):
            raise DimensionUnsupported(f"diffusion supports d in {{1, 2}}, got d={dim}")
        g_lo = float(spatial_cfg["g_lo"])
        g_hi = float(spatial_cfg["g_hi"])
        if g_lo <= 0.0:
            raise NonPositiveBound(f"g_lo must be > 0, got {g_lo}")
        if dim == 1:
            g = parse_scalar_field(spatial_cfg["g"], dim)
        else:
            base = np.asarray(spatial_cfg["g_matrix"], dtype=float)
            if base.shape != (2, 2) or not np.allclose(base, base.T):
                raise ConfigError("g_matrix must be a symmetric 2x2 matrix")
            scale = (
                parse_scalar_field(spatial_cfg["g"], dim) if "g" in spatial_cfg else None
            )
            g = MatrixField(base=base, scale=scale)
        spatial = Diffusion(g=g, g_lo=g_lo, g_hi=g_hi)
    elif kind == "stable1d":
        unknown = set(spatial_cfg) - _STABLE_KEYS
        if unknown:
            raise ConfigError(f"unknown spatial keys {sorted(unknown)}")
        if dim != 1:
            raise DimensionUnsupported(f"stable part requires d=1, got d={dim}")
        beta = float(spatial_cfg["beta"])
        if not 0.0 < beta < 2.0:
            raise ConfigError(f"beta must lie in (0,2), got {beta}")
        m_lo = float(spatial_cfg["m_lo"])
        m_hi = float(spatial_cfg["m_hi"])
        if m_lo <= 0.0:
            raise NonPositiveBound(f"m_lo must be > 0, got {m_lo}")
        spatial = Stable1D(
            beta=beta, m=parse_scalar_field(spatial_cfg["m"], dim), m_lo=m_lo, m_hi=m_hi
        )
    else:
        raise ConfigError(f"unknown spatial kind {kind!r}")

    model = Model(
        alpha=alpha,
        order_field=order_field,
        a_lo=a_lo,
        a_hi=a_hi,
        spatial=spatial,
        dim=dim,
        x_box=x_box,
        t_max=t_max,
    )
    _validate_fields(model)
    return model


def _validate_fields(model: Model) -> None:
    ts, xs = _sample_grid(model.dim, model.x_box, model.t_max, _VALIDATION_POINTS)
    a_vals = model.order_field(ts, xs)
    if np.min(a_vals) < model.a_lo or np.max(a_vals) > model.a_hi:
        raise OrderBoundViolation(
            "order field leaves [a_lo, a_hi] on the validation grid: "
            f"range [{np.min(a_vals):.6g}, {np.max(a_vals):.6g}]"
        )
    sp = model.spatial
    if isinstance(sp, Diffusion):
        if model.dim == 1:
            g_vals = sp.g(0.0, xs)
            lo, hi = np.min(g_vals), np.max(g_vals)
        else:
            mats = sp.g(xs)
            eig = np.linalg.eigvalsh(mats)
            lo, hi = np.min(eig), np.max(eig)
        if lo < sp.g_lo or hi > sp.g_hi:
            raise BoundViolation(
                f"diffusion coefficient leaves [g_lo, g_hi]: range [{lo:.6g}, {hi:.6g}]"
            )
    else:
        m_vals = sp.m(0.0, xs)
        lo, hi = np.min(m_vals), np.max(m_vals)
        if lo < sp.m_lo or hi > sp.m_hi:
            raise BoundViolation(
                f"jump intensity leaves [m_lo, m_hi]: range [{lo:.6g}, {hi:.6g}]"
            )
