"""Tx/Rx scaling policies and their control-signal MSE.

Sensor states are modelled as i.i.d. standard normal, so the MSE of a
linear estimate ``g^T x + noise`` of ``k^T x`` is ``|g - k|^2`` plus the
noise power after receive scaling.

Over-the-air controller (single hop, one receive scale ``alpha``)::

    mse_air = |alpha (h * beta) - k|^2 + sigma2 alpha^2

Multi-hop baseline (per-sensor controller scales ``alpha_s``, actuator
scale ``alpha_a``; per-sensor noise enters before ``alpha_s``)::

    mse_sota = |alpha_a h_a D alpha_s - k|^2
               + alpha_a^2 h_a^2 sigma_s2 |alpha_s|^2 + alpha_a^2 sigma_a2

with ``D = diag(h * beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, DimensionError, ValidationError
from .linalg_core import as_vector


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h: np.ndarray
    h_a: float = 1.0
    sigma2: float = 0.5
    sigma_s2: float = 0.5
    sigma_a2: float = 0.5
    p_bar: float = 2.5

    def __post_init__(self):
        h = as_vector(self.h, name="h")
        if h.size == 0:
            raise DimensionError("channel needs at least one sensor")
        if np.any(h <= 0.0):
            raise ValidationError("sensor channel magnitudes must be > 0")
        object.__setattr__(self, "h", h)
        for name in ("sigma2", "sigma_s2", "sigma_a2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.p_bar) and self.p_bar > 0.0):
            raise ValidationError(f"p_bar must be > 0, got {self.p_bar}")
        if not math.isfinite(self.h_a):
            raise ValidationError("h_a must be finite")

    @property
    def N(self) -> int:
        return self.h.size


@dataclass(frozen=True, eq=False)
class AirScaling:
    beta: np.ndarray
    alpha: float


@dataclass(frozen=True, eq=False)
class SotaScaling:
    beta: np.ndarray
    alpha_s: np.ndarray
    alpha_a: float


def _gain(k, n: int) -> np.ndarray:
    return as_vector(k, length=n, name="k")


def effective_gain_air(s: AirScaling, ch: ChannelRealization) -> np.ndarray:
    beta = as_vector(s.beta, length=ch.N, name="beta")
    return s.alpha * ch.h * beta


def effective_gain_sota(s: SotaScaling, ch: ChannelRealization) -> np.ndarray:
    beta = as_vector(s.beta, length=ch.N, name="beta")
    alpha_s = as_vector(s.alpha_s, length=ch.N, name="alpha_s")
    return s.alpha_a * ch.h_a * (ch.h * beta) * alpha_s


def mse_air(s: AirScaling, ch: ChannelRealization, k) -> float:
    k = _gain(k, ch.N)
    e = effective_gain_air(s, ch) - k
    return float(e @ e + ch.sigma2 * s.alpha**2)


def mse_sota(s: SotaScaling, ch: ChannelRealization, k) -> float:
    k = _gain(k, ch.N)
    e = effective_gain_sota(s, ch) - k
    alpha_s = np.asarray(s.alpha_s, dtype=float)
    noise = s.alpha_a**2 * (ch.h_a**2 * ch.sigma_s2 * (alpha_s @ alpha_s) + ch.sigma_a2)
    return float(e @ e + noise)


def optimize_sota_scaling(ch: ChannelRealization, k) -> SotaScaling:
    """Closed-form two-step optimum: full power at the sensors, per-sensor
    Wiener scaling at the controller, then the MSE-optimal actuator scale."""
    k = _gain(k, ch.N)
    if ch.h_a == 0.0:
        raise DegenerateChannelError("controller-to-actuator channel h_a is zero")
    beta = np.full(ch.N, math.sqrt(ch.p_bar))
    d = ch.h * beta
    alpha_s = d * k / (d * d + ch.sigma_s2)
    num = ch.h_a * (alpha_s @ (d * k))
    den = ch.h_a**2 * ((alpha_s * d) @ (alpha_s * d)) + ch.h_a**2 * ch.sigma_s2 * (alpha_s @ alpha_s) + ch.sigma_a2
    alpha_a = num / den if den > 0.0 else 0.0
    return SotaScaling(beta, alpha_s, float(alpha_a))


def air_objective(alpha: float, ch: ChannelRealization, k) -> float:
    """MSE of the clipped channel-inversion policy at receive scale ``alpha``."""
    k = _gain(k, ch.N)
    reach = alpha * ch.h * math.sqrt(ch.p_bar)
    e = np.minimum(reach, k) - k
    return float(e @ e + ch.sigma2 * alpha**2)


def clipped_inversion(alpha: float, ch: ChannelRealization, k) -> np.ndarray:
    """Per-sensor optimal Tx scale for fixed ``alpha``: ``min(sqrt(p_bar), k/(alpha h))``."""
    k = _gain(k, ch.N)
    if alpha <= 0.0:
        return np.zeros(ch.N)
    return np.minimum(math.sqrt(ch.p_bar), k / (alpha * ch.h))


def optimize_air_alpha_batch(h: np.ndarray, k: np.ndarray, p_bar: float,
                             sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Optimal receive scale for a batch of instances (rows of ``h``, ``k``).

    Returns ``(alpha, mse)``. With ``c = h sqrt(p_bar)`` the objective
    ``sum_i (min(alpha c_i, k_i) - k_i)^2 + sigma2 alpha^2`` has breakpoints
    ``a_i = k_i / c_i``; between consecutive breakpoints the sensors with
    ``a_i >= alpha`` are power limited and the objective is the quadratic
    ``(S_cc + sigma2) alpha^2 - 2 S_ck alpha + S_kk`` over those sensors.
    Each interval is minimized exactly and the best interval wins; ties go
    to the smallest ``alpha``.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if h.shape != k.shape:
        raise DimensionError(f"h and k shapes differ: {h.shape} vs {k.shape}")
    if np.any(k < 0.0):
        raise ValidationError("gains must be nonnegative")
    B, n = h.shape
    c = h * math.sqrt(p_bar)
    a = k / c
    order = np.argsort(a, axis=1, kind="stable")
    a_s = np.take_along_axis(a, order, axis=1)
    c_s = np.take_along_axis(c, order, axis=1)
    k_s = np.take_along_axis(k, order, axis=1)

    def suffix(x):
        out = np.zeros((B, n + 1))
        out[:, :n] = np.cumsum(x[:, ::-1], axis=1)[:, ::-1]
        return out

    S_cc = suffix(c_s * c_s)
    S_ck = suffix(c_s * k_s)
    S_kk = suffix(k_s * k_s)
    lo = np.concatenate([np.zeros((B, 1)), a_s], axis=1)
    hi = np.concatenate([a_s, np.full((B, 1), np.inf)], axis=1)
    quad = S_cc + sigma2
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = np.where(quad > 0.0, S_ck / quad, 0.0)
    cand = np.clip(vertex, lo, hi)
    f = quad * cand * cand - 2.0 * S_ck * cand + S_kk
    best = np.argmin(f, axis=1)
    alpha = cand[np.arange(B), best]
    mse = np.maximum(f[np.arange(B), best], 0.0)
    return alpha, mse


def optimize_air_scaling(ch: ChannelRealization, k) -> AirScaling:
    """Power-constrained Tx/Rx scaling for the over-the-air controller.

    For a fixed receive scale the best transmit scales are the clipped
    channel inversion; the remaining one-dimensional problem in ``alpha``
    is solved exactly by :func:`optimize_air_alpha_batch`.
    """
    k = _gain(k, ch.N)
    if np.any(k < 0.0):
        raise ValidationError("gains must be nonnegative")
    if not np.any(k > 0.0):
        return AirScaling(np.zeros(ch.N), 0.0)
    alpha, _ = optimize_air_alpha_batch(ch.h[None, :], k[None, :], ch.p_bar, ch.sigma2)
    alpha = float(alpha[0])
    return AirScaling(clipped_inversion(alpha, ch, k), alpha)


def unconstrained_air_limit(ch: ChannelRealization, k, alpha: float) -> tuple[AirScaling, float]:
    """Exact inversion ``beta = k / (alpha h)`` ignoring the power limit.

    Diagnostic only: the resulting MSE is the pure noise term
    ``sigma2 alpha^2``, which vanishes as ``alpha -> 0`` while the transmit
    power grows without bound.
    """
    k = _gain(k, ch.N)
    if not alpha > 0.0:
        raise ValidationError("alpha must be > 0")
    s = AirScaling(k / (alpha * ch.h), float(alpha))
    return s, mse_air(s, ch, k)


def sota_mse_batch(h: np.ndarray, h_a: np.ndarray, k: np.ndarray, p_bar: float,
                   sigma_s2: float, sigma_a2: float) -> np.ndarray:
    """Optimal multi-hop MSE for a batch; same formulas as :func:`optimize_sota_scaling`.

    Rows with ``h_a == 0`` yield NaN.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    k = np.atleast_2d(np.asarray(k, dtype=float))
    h_a = np.asarray(h_a, dtype=float).reshape(-1)
    d = h * math.sqrt(p_bar)
    alpha_s = d * k / (d * d + sigma_s2)
    g_s = alpha_s * d
    ss = np.sum(alpha_s * alpha_s, axis=1)
    num = h_a * np.sum(g_s * k, axis=1)
    den = h_a**2 * np.sum(g_s * g_s, axis=1) + h_a**2 * sigma_s2 * ss + sigma_a2
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha_a = np.where(den > 0.0, num / den, 0.0)
    e = (alpha_a * h_a)[:, None] * g_s - k
    mse = np.sum(e * e, axis=1) + alpha_a**2 * (h_a**2 * sigma_s2 * ss + sigma_a2)
    return np.where(h_a == 0.0, np.nan, mse)
