"""Independent reference computations used to cross-check the kernels.

Nothing here calls the code paths it is meant to verify: exponentials come
from a truncated Taylor series, integrals from adaptive Simpson quadrature,
spectral radii from power iteration, optima from grid search and MSE
values from direct sampling of the signal model.
"""

from __future__ import annotations

import math

import numpy as np


def taylor_expm(M, t: float = 1.0, terms: int = 50) -> np.ndarray:
    """``e^{Mt}`` from ``terms`` Taylor terms, summed entrywise with ``math.fsum``."""
    A = np.asarray(M, dtype=float) * t
    n = A.shape[0]
    term = np.eye(n)
    parts = [term]
    for j in range(1, terms):
        term = term @ A / j
        parts.append(term)
    stack = np.stack(parts)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = math.fsum(stack[:, i, j])
    return out


def taylor_expm_vec(A, b, s: float, terms: int = 60) -> np.ndarray:
    """``e^{As} b`` by the Taylor series applied to the vector."""
    A = np.asarray(A, dtype=float)
    v = np.asarray(b, dtype=float).copy()
    parts = [v]
    for j in range(1, terms):
        v = (A @ v) * (s / j)
        parts.append(v)
    stack = np.stack(parts)
    return np.array([math.fsum(stack[:, i]) for i in range(stack.shape[1])])


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 40) -> np.ndarray:
    """Vector-valued adaptive Simpson rule with Richardson correction."""

    def simpson(fa, fm, fb, h):
        return (fa + 4.0 * fm + fb) * (h / 6.0)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        err = left + right - whole
        if depth <= 0 or np.max(np.abs(err)) <= 15.0 * tol:
            return left + right + err / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    if b == a:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    fa, fb = np.asarray(f(a), dtype=float), np.asarray(f(b), dtype=float)
    fm = np.asarray(f(0.5 * (a + b)), dtype=float)
    whole = simpson(fa, fm, fb, b - a)
    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def input_integral(A, b, lo: float, hi: float, tol: float = 1e-13) -> np.ndarray:
    """``int_lo^hi e^{As} b ds`` by quadrature of the Taylor-series integrand."""
    return adaptive_simpson(lambda s: taylor_expm_vec(A, b, s), lo, hi, tol)


def power_iteration_radius(M, steps: int = 10_000, seed: int = 0) -> float:
    """Dominant eigenvalue modulus from normalized power iteration.

    After ``steps`` iterations the iterate lies (numerically) in the dominant
    invariant subspace. A real dominant eigenvalue is read off the Rayleigh
    quotient; a dominant complex pair (or a +-rho pair) is recovered by
    fitting the two-term recurrence ``M^2 v = p M v - q v``.
    """
    A = np.asarray(M, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(steps):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    w1 = A @ v
    w2 = A @ w1
    basis = np.column_stack([w1, -v])
    coef, *_ = np.linalg.lstsq(basis, w2, rcond=None)
    p, q = coef
    fit_res = np.linalg.norm(basis @ coef - w2)
    one_term = float(v @ w1)
    one_res = np.linalg.norm(w1 - one_term * v)
    if one_res <= max(fit_res, 1e-12 * np.linalg.norm(w1)):
        return abs(one_term)
    roots = np.roots([1.0, -p, q])
    return float(np.max(np.abs(roots)))


def clipped_air_mse(alpha: float, h, k, p_bar: float, sigma2: float) -> float:
    """AirCont MSE with per-sensor clipped channel inversion at receive scale ``alpha``."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if alpha <= 0.0:
        return float(k @ k)
    beta = np.clip(k / (alpha * h), 0.0, math.sqrt(p_bar))
    e = alpha * h * beta - k
    return float(e @ e + sigma2 * alpha * alpha)


def grid_min_air(h, k, p_bar: float, sigma2: float, points: int = 10_000) -> tuple[float, float]:
    """Best ``(alpha, mse)`` over a log-spaced alpha grid spanning all breakpoints."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    pos = k[k > 0] / (h[k > 0] * math.sqrt(p_bar))
    if pos.size == 0:
        return 0.0, 0.0
    grid = np.geomspace(pos.min() / 100.0, pos.max() * 100.0, points)
    vals = [clipped_air_mse(a, h, k, p_bar, sigma2) for a in grid]
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i])


def sota_mse_direct(alpha_a: float, alpha_s, beta, h, h_a: float, k,
                    sigma_s2: float, sigma_a2: float) -> float:
    h, k = np.asarray(h, float), np.asarray(k, float)
    alpha_s, beta = np.asarray(alpha_s, float), np.asarray(beta, float)
    e = alpha_a * h_a * alpha_s * h * beta - k
    return float(e @ e + alpha_a**2 * h_a**2 * sigma_s2 * (alpha_s @ alpha_s) + alpha_a**2 * sigma_a2)


def grid_min_alpha_a(alpha_s, beta, h, h_a, k, sigma_s2, sigma_a2, lo: float, hi: float,
                     points: int = 10_000) -> tuple[float, float, float]:
    """Grid minimizer of the multi-hop MSE over the actuator scale; returns (alpha_a, mse, step)."""
    grid = np.linspace(lo, hi, points)
    vals = [sota_mse_direct(a, alpha_s, beta, h, h_a, k, sigma_s2, sigma_a2) for a in grid]
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i]), float(grid[1] - grid[0])


def _chunked_mean_se(sample_fn, samples: int, rng: np.random.Generator,
                     chunk: int = 200_000) -> tuple[float, float]:
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        e2 = sample_fn(rng, m)
        total += math.fsum(e2)
        total_sq += math.fsum(e2 * e2)
        done += m
    mean = total / samples
    var = (total_sq - samples * mean * mean) / (samples - 1)
    return mean, math.sqrt(max(var, 0.0) / samples)


def empirical_mse_air(beta, alpha: float, h, k, sigma2: float, samples: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """Sample mean and standard error of ``|alpha((h*beta)^T x + n) - k^T x|^2``."""
    hb = np.asarray(h, float) * np.asarray(beta, float)
    k = np.asarray(k, float)
    sd = math.sqrt(sigma2)

    def draw(rng, m):
        x = rng.standard_normal((m, k.size))
        n = sd * rng.standard_normal(m)
        e = alpha * (x @ hb + n) - x @ k
        return e * e

    return _chunked_mean_se(draw, samples, rng)


def empirical_mse_sota(beta, alpha_s, alpha_a: float, h, h_a: float, k, sigma_s2: float,
                       sigma_a2: float, samples: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Sample mean and standard error of ``|alpha_a(h_a alpha_s^T(Dx + n_s) + n_a) - k^T x|^2``."""
    d = np.asarray(h, float) * np.asarray(beta, float)
    alpha_s = np.asarray(alpha_s, float)
    k = np.asarray(k, float)
    sd_s, sd_a = math.sqrt(sigma_s2), math.sqrt(sigma_a2)

    def draw(rng, m):
        x = rng.standard_normal((m, k.size))
        n_s = sd_s * rng.standard_normal((m, k.size))
        n_a = sd_a * rng.standard_normal(m)
        e = alpha_a * (h_a * ((x * d + n_s) @ alpha_s) + n_a) - x @ k
        return e * e

    return _chunked_mean_se(draw, samples, rng)


def rk4_period(A, b, x, u_prev: float, u_cur: float, delta: float, tau: float,
               substeps: int = 1000) -> np.ndarray:
    """Integrate ``x' = Ax + bu`` over one period with ``u = u_prev`` on ``[0, tau)``
    and ``u_cur`` afterwards, using RK4 with step ``delta / substeps``.

    The switch instant is honoured exactly by splitting the step that spans it.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    x = np.asarray(x, float).copy()

    def rk4(x, u, h):
        f = lambda y: A @ y + b * u
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    h = delta / substeps
    t = 0.0
    for i in range(substeps):
        t_next = (i + 1) * h
        if t < tau < t_next:
            x = rk4(x, u_prev, tau - t)
            x = rk4(x, u_cur, t_next - tau)
        else:
            x = rk4(x, u_prev if t_next <= tau else u_cur, t_next - t)
        t = t_next
    return x
