"""Sampled-data closed-loop simulation with delayed, noisy feedback.

Between samples the plant is propagated exactly::

    x(k+1) = Phi x(k) + Gamma0 u(k) + Gamma1 u(k-1)

where ``u(k)`` is applied from ``k delta + tau`` and ``u(k-1)`` is still
held before that. The control law depends on the scheme:

* ``ideal``: ``u = -k^T x`` with no noise (delay 0 unless overridden);
* ``air``:  ``u = -alpha((h*beta)^T x + n)``, ``n ~ N(0, sigma2)``;
* ``sota``: ``u = -alpha_a(h_a alpha_s^T(D x + n_s) + n_a)``.

Noise only enters through the control signal; there is no process noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _csv
from .errors import FeasibilityError, ValidationError
from .linalg_core import as_vector
from .montecarlo import make_stream
from .plant import PlantModel, discretize
from .scaling import (ChannelRealization, effective_gain_air, effective_gain_sota,
                      optimize_air_scaling, optimize_sota_scaling)
from .stability import NetworkTiming, is_feasible, min_feasible_delay

SCHEMES = ("ideal", "air", "sota")

# sub-stream keys for make_stream; distinct per scheme so noise is independent
_NOISE_STREAM = {"ideal": 0, "air": 1, "sota": 2}


@dataclass(frozen=True, eq=False)
class SimConfig:
    plant: PlantModel
    scheme: str
    delta: float
    timing: NetworkTiming
    x0: np.ndarray
    horizon: float
    channel: ChannelRealization
    gain: np.ndarray
    seed: int = 0
    noise_enabled: bool = True
    tau: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        n = self.plant.N
        object.__setattr__(self, "x0", as_vector(self.x0, length=n, name="x0"))
        object.__setattr__(self, "gain", as_vector(self.gain, length=n, name="gain"))
        if self.channel.N != n:
            raise ValidationError(f"channel has {self.channel.N} sensors, plant has {n} states")
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValidationError(f"horizon must be > 0, got {self.horizon}")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise ValidationError(f"sampling period must be > 0, got {self.delta}")
        tau = self.delay
        if not is_feasible(tau, self.delta, min_feasible_delay(self.scheme, self.timing)):
            raise FeasibilityError(
                f"{self.scheme}: delay {tau:.6g} s infeasible for sampling period "
                f"{self.delta:.6g} s (minimum {min_feasible_delay(self.scheme, self.timing):.6g} s)")

    @property
    def delay(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return min_feasible_delay(self.scheme, self.timing)

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.delta))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray     # (K,)
    states: np.ndarray    # (K, N)
    controls: np.ndarray  # (K,)
    scheme: str
    delta: float

    def __post_init__(self):
        K = self.times.shape[0]
        if self.states.shape[0] != K or self.controls.shape[0] != K:
            raise ValidationError("trajectory arrays have inconsistent lengths")


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """``u = -(gain @ x) - noise_weights @ w`` with ``w`` i.i.d. standard normal."""

    gain: np.ndarray
    noise_weights: np.ndarray


def control_law(cfg: SimConfig) -> ControlLaw:
    """Effective feedback row and noise loading for the configured scheme."""
    ch = cfg.channel
    if cfg.scheme == "ideal":
        return ControlLaw(cfg.gain.copy(), np.zeros(0))
    if cfg.scheme == "air":
        s = optimize_air_scaling(ch, cfg.gain)
        w = np.array([s.alpha * math.sqrt(ch.sigma2)])
        return ControlLaw(effective_gain_air(s, ch), w)
    s = optimize_sota_scaling(ch, cfg.gain)
    w_s = s.alpha_a * ch.h_a * s.alpha_s * math.sqrt(ch.sigma_s2)
    w_a = np.array([s.alpha_a * math.sqrt(ch.sigma_a2)])
    return ControlLaw(effective_gain_sota(s, ch), np.concatenate([w_s, w_a]))


def simulate_closed_loop(cfg: SimConfig, law: ControlLaw | None = None) -> Trajectory:
    law = control_law(cfg) if law is None else law
    disc = discretize(cfg.plant, cfg.delta, cfg.delay)
    K = cfg.steps + 1
    n = cfg.plant.N
    if cfg.noise_enabled and law.noise_weights.size:
        rng = make_stream(cfg.seed, _NOISE_STREAM[cfg.scheme])
        noise = rng.standard_normal((K, law.noise_weights.size)) @ law.noise_weights
    else:
        noise = np.zeros(K)
    states = np.empty((K, n))
    controls = np.empty(K)
    x = cfg.x0.copy()
    u_prev = 0.0
    for i in range(K):
        states[i] = x
        u = -float(law.gain @ x) - noise[i]
        controls[i] = u
        x = disc.Phi @ x + disc.Gamma0 * u + disc.Gamma1 * u_prev
        u_prev = u
    times = np.arange(K) * cfg.delta
    return Trajectory(times, states, controls, cfg.scheme, cfg.delta)


def resample(traj: Trajectory, times: np.ndarray) -> Trajectory:
    """Restrict ``traj`` to the given sampling instants, which must be among its own."""
    idx = np.rint(np.asarray(times) / traj.delta).astype(int)
    if np.any(idx < 0) or np.any(idx >= traj.times.size) or \
            np.any(np.abs(traj.times[idx] - times) > 1e-9 * traj.delta):
        raise ValidationError("requested instants are not on the trajectory grid")
    return Trajectory(traj.times[idx], traj.states[idx], traj.controls[idx],
                      traj.scheme, float(times[1] - times[0]) if len(times) > 1 else traj.delta)


def tracking_error(traj: Trajectory, reference: Trajectory) -> float:
    """Root-mean-square over samples of ``|x - x_ref|``."""
    if traj.states.shape != reference.states.shape or \
            np.any(np.abs(traj.times - reference.times) > 1e-9 * max(traj.delta, 1e-300)):
        raise ValidationError("trajectories are not on the same time grid")
    d = traj.states - reference.states
    return float(math.sqrt(np.mean(np.sum(d * d, axis=1))))


def trajectories_to_csv(trajs: list[Trajectory]) -> str:
    n = trajs[0].states.shape[1]
    header = ("t", "scheme", "u", *(f"x{i + 1}" for i in range(n)))
    f = _csv.fmt_real
    rows = []
    for tr in trajs:
        for t, u, x in zip(tr.times, tr.controls, tr.states):
            rows.append((f(t), tr.scheme, f(u), *(f(v) for v in x)))
    return _csv.render_csv(header, rows)
