"""Monte Carlo estimates of the normalized control MSE under Rayleigh fading.

Every sweep point draws its realizations from a Philox stream keyed by
``(seed, N)``, so all points for one sensor count (and both schemes) see the
same channels and gains. Results therefore do not depend on evaluation
order or thread count, and differences between points or schemes are
paired comparisons.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _csv
from .errors import ValidationError
from .scaling import optimize_air_alpha_batch, sota_mse_batch

log = logging.getLogger(__name__)

SCHEMES = ("air", "sota")
CSV_HEADER = ("scheme", "N", "p_bar", "sigma2", "trials", "avg_control_mse", "stderr")


def make_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the sub-stream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_channel(rng: np.random.Generator, N: int, size: int | None = None) -> np.ndarray:
    """Rayleigh magnitudes with ``E[h^2] = 1``; shape ``(N,)`` or ``(size, N)``."""
    if N < 1:
        raise ValidationError("need at least one sensor")
    shape = (N,) if size is None else (size, N)
    return rng.rayleigh(scale=math.sqrt(0.5), size=shape)


def sample_gain(rng: np.random.Generator, N: int, size: int | None = None) -> np.ndarray:
    """Control gains uniform on ``[0, 100]``."""
    if N < 1:
        raise ValidationError("need at least one sensor")
    shape = (N,) if size is None else (size, N)
    return rng.uniform(0.0, 100.0, size=shape)


@dataclass(frozen=True)
class Realizations:
    h: np.ndarray      # (trials, N)
    h_a: np.ndarray    # (trials,)
    k: np.ndarray      # (trials, N)


def draw_realizations(rng: np.random.Generator, N: int, trials: int) -> Realizations:
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    h = sample_channel(rng, N, size=trials)
    h_a = sample_channel(rng, 1, size=trials)[:, 0]
    k = sample_gain(rng, N, size=trials)
    return Realizations(h, h_a, k)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    N: int
    p_bar: float
    sigma2: float
    avg_control_mse: float
    stderr: float
    trials: int
    skipped: int = 0


def normalized_mse(scheme: str, real: Realizations, p_bar: float, sigma2: float) -> np.ndarray:
    """Per-trial optimal MSE divided by ``k^T k``; NaN marks degenerate trials."""
    kk = np.sum(real.k * real.k, axis=1)
    if scheme == "air":
        _, mse = optimize_air_alpha_batch(real.h, real.k, p_bar, sigma2)
    elif scheme == "sota":
        mse = sota_mse_batch(real.h, real.h_a, real.k, p_bar, sigma2, sigma2)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(kk > 0.0, mse / kk, np.nan)


def summarize(scheme: str, N: int, p_bar: float, sigma2: float, values: np.ndarray) -> SweepRow:
    ok = values[np.isfinite(values)]
    skipped = int(values.size - ok.size)
    if skipped:
        log.warning("%s N=%d p_bar=%g sigma2=%g: skipped %d degenerate trials",
                    scheme, N, p_bar, sigma2, skipped)
    if ok.size == 0:
        raise ValidationError("every trial was degenerate")
    mean = float(np.mean(ok))
    se = float(np.std(ok, ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else 0.0
    return SweepRow(scheme, N, float(p_bar), float(sigma2), mean, se, int(ok.size), skipped)


def average_control_mse(scheme: str, N: int, p_bar: float, sigma2: float, trials: int,
                        rng: np.random.Generator) -> SweepRow:
    """Mean and standard error of the normalized optimal MSE over fresh draws."""
    if not (p_bar > 0.0 and sigma2 >= 0.0):
        raise ValidationError("need p_bar > 0 and sigma2 >= 0")
    real = draw_realizations(rng, N, trials)
    return summarize(scheme, N, p_bar, sigma2, normalized_mse(scheme, real, p_bar, sigma2))


@dataclass(frozen=True)
class SweepConfig:
    N_list: tuple[int, ...] = (10, 100)
    p_bar_values: tuple[float, ...] = (0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
    sigma2_values: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    p_bar_fixed: float = 2.5
    sigma2_fixed: float = 0.5
    trials: int = 10_000
    seed: int = 2021
    schemes: tuple[str, ...] = field(default=SCHEMES)

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if not self.N_list or any(int(n) != n or n < 1 for n in self.N_list):
            raise ValidationError("N_list must hold positive integers")
        values = (*self.p_bar_values, *self.sigma2_values, self.p_bar_fixed, self.sigma2_fixed)
        if any(not (math.isfinite(v) and v > 0.0) for v in values):
            raise ValidationError("powers and noise variances must be > 0")
        if any(s not in SCHEMES for s in self.schemes):
            raise ValidationError(f"schemes must be drawn from {SCHEMES}")

    def points(self) -> list[tuple[float, float]]:
        """Unique (p_bar, sigma2) points: the power sweep, then the noise sweep."""
        pts = [(float(p), float(self.sigma2_fixed)) for p in self.p_bar_values]
        pts += [(float(self.p_bar_fixed), float(s)) for s in self.sigma2_values]
        seen: set[tuple[float, float]] = set()
        out = []
        for p in pts:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out


def _sweep_N(cfg: SweepConfig, N: int) -> dict[str, list[SweepRow]]:
    real = draw_realizations(make_stream(cfg.seed, N), N, cfg.trials)
    rows: dict[str, list[SweepRow]] = {s: [] for s in cfg.schemes}
    for p_bar, sigma2 in cfg.points():
        for scheme in cfg.schemes:
            vals = normalized_mse(scheme, real, p_bar, sigma2)
            rows[scheme].append(summarize(scheme, N, p_bar, sigma2, vals))
    return rows


def run_sweep(cfg: SweepConfig, threads: int = 1) -> list[SweepRow]:
    """All scheme x N x point rows, ordered by scheme, then N, then point."""
    if threads <= 1:
        per_N = [_sweep_N(cfg, N) for N in cfg.N_list]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_N = list(pool.map(lambda n: _sweep_N(cfg, n), cfg.N_list))
    return [row for scheme in cfg.schemes for block in per_N for row in block[scheme]]


def rows_to_csv(rows: list[SweepRow]) -> str:
    f = _csv.fmt_real
    body = ((r.scheme, str(r.N), f(r.p_bar), f(r.sigma2), str(r.trials),
             f(r.avg_control_mse), f(r.stderr)) for r in rows)
    return _csv.render_csv(CSV_HEADER, body)
