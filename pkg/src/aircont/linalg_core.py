"""Dense real linear algebra for small matrices.

Three kernels are provided:

* :func:`mat_exp` -- matrix exponential by scaling and squaring with a
  diagonal Pade approximant (degrees 3/5/7/9/13, Higham 2005 thresholds).
* :func:`phi_gamma` -- the pair ``(e^{At}, int_0^t e^{As} b ds)`` read off a
  single exponential of the bordered matrix ``[[A, b], [0, 0]]``.
* :func:`spectral_radius` -- largest eigenvalue modulus via Householder
  Hessenberg reduction followed by Francis double-shift QR.

The eigenvalue kernel works on plain Python lists. For the 5x5 matrices the
stability sweeps produce this is several times faster than going through
numpy for every reflector.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, NumericalError, ValidationError

#: Largest matrix dimension accepted by the kernels.
MAX_DIM = 64

# Pade coefficients b_j for degrees 3, 5, 7, 9, 13 and the 1-norm bounds
# theta_m below which each degree is accurate to unit roundoff.
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_PADE_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
)
_THETA_13 = 5.371920351148152

_MAX_QR_ITERATIONS = 60


def as_matrix(M, *, square: bool = True, name: str = "matrix",
              max_dim: int = MAX_DIM) -> np.ndarray:
    """Validate ``M`` as a finite 2-D float array and return a float copy."""
    arr = np.array(M, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if max(arr.shape) > max_dim:
        raise DimensionError(f"{name} dimension {max(arr.shape)} exceeds cap {max_dim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def as_vector(v, *, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate ``v`` as a finite 1-D float array, optionally of fixed length."""
    arr = np.array(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def _pade(A: np.ndarray, m: int) -> np.ndarray:
    c = _PADE_COEFFS[m]
    n = A.shape[0]
    ident = np.eye(n)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = A @ (A6 @ (c[13] * A6 + c[11] * A4 + c[9] * A2)
                 + c[7] * A6 + c[5] * A4 + c[3] * A2 + c[1] * ident)
        V = (A6 @ (c[12] * A6 + c[10] * A4 + c[8] * A2)
             + c[6] * A6 + c[4] * A4 + c[2] * A2 + c[0] * ident)
    else:
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        U = np.zeros_like(A)
        V = np.zeros_like(A)
        for j in range(m, 0, -2):
            U += c[j] * powers[j // 2]
        U = A @ U
        for j in range(m - 1, -1, -2):
            V += c[j] * powers[j // 2]
    return np.linalg.solve(V - U, V + U)


def mat_exp(M, t: float = 1.0) -> np.ndarray:
    """Return ``e^{M t}``.

    The degree of the Pade approximant is the smallest one whose theta bound
    covers ``||M t||_1``; beyond theta_13 the argument is halved ``s`` times
    and the result squared back.
    """
    A = as_matrix(M, name="M")
    if not math.isfinite(t):
        raise ValidationError(f"t must be finite, got {t}")
    A = A * t
    norm1 = float(np.max(np.sum(np.abs(A), axis=0))) if A.size else 0.0
    if norm1 == 0.0:
        return np.eye(A.shape[0])
    for m, theta in _PADE_THETA:
        if norm1 <= theta:
            return _pade(A, m)
    s = max(0, math.ceil(math.log2(norm1 / _THETA_13)))
    E = _pade(A / 2.0**s, 13)
    for _ in range(s):
        E = E @ E
    return E


def phi_gamma(A, b, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(e^{At}, int_0^t e^{As} b ds)`` from one bordered exponential."""
    A = as_matrix(A, name="A")
    n = A.shape[0]
    b = as_vector(b, length=n, name="b")
    if not (math.isfinite(t) and t >= 0.0):
        raise ValidationError(f"integration length must be finite and >= 0, got {t}")
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = b
    E = mat_exp(M, t)
    return E[:n, :n].copy(), E[:n, n].copy()


def _hessenberg(a: list[list[float]]) -> None:
    """Reduce ``a`` to upper Hessenberg form in place by Householder reflectors."""
    n = len(a)
    for k in range(n - 2):
        col = [a[i][k] for i in range(k + 1, n)]
        cmax = max(abs(x) for x in col)
        if cmax == 0.0:
            continue
        col = [x / cmax for x in col]
        alpha = math.sqrt(math.fsum(x * x for x in col))
        if alpha == 0.0:
            continue
        if col[0] > 0.0:
            alpha = -alpha
        v = col
        v[0] -= alpha
        vnorm2 = math.fsum(x * x for x in v)
        if vnorm2 == 0.0:
            continue
        scale = 2.0 / vnorm2
        # left: rows k+1..n-1
        for j in range(k, n):
            s = 0.0
            for i, vi in enumerate(v):
                s += vi * a[k + 1 + i][j]
            s *= scale
            for i, vi in enumerate(v):
                a[k + 1 + i][j] -= s * vi
        # right: columns k+1..n-1
        for row in a:
            s = 0.0
            for i, vi in enumerate(v):
                s += row[k + 1 + i] * vi
            s *= scale
            for i, vi in enumerate(v):
                row[k + 1 + i] -= s * vi
        for i in range(k + 2, n):
            a[i][k] = 0.0


def _eig_2x2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    p = 0.5 * (a - d)
    q = p * p + b * c
    if q >= 0.0:
        z = p + math.copysign(math.sqrt(q), p)
        if z == 0.0:
            return complex(d), complex(d)
        return complex(d + z), complex(d - b * c / z)
    w = math.sqrt(-q)
    return complex(d + p, w), complex(d + p, -w)


def _reflector(x: float, y: float, z: float) -> tuple[float, float, float, float] | None:
    """Householder vector (1, v1, v2) and factor tau with (I - tau v v^T) e = -+||e|| e1."""
    m = max(abs(x), abs(y), abs(z))
    if m == 0.0:
        return None
    x, y, z = x / m, y / m, z / m
    norm = math.sqrt(x * x + y * y + z * z)
    alpha = -math.copysign(norm, x)
    v0 = x - alpha
    v1 = y / v0
    v2 = z / v0
    tau = (alpha - x) / alpha
    return v1, v2, tau, alpha


def hessenberg_eigenvalues(a: list[list[float]]) -> list[complex]:
    """Eigenvalues of an upper Hessenberg matrix; ``a`` is overwritten."""
    n = len(a)
    eigs: list[complex] = []
    eps = 2.220446049250313e-16
    # norm-wise floor: deflating below eps * ||H|| is backward stable and
    # keeps graded matrices from stalling the local test
    floor = eps * math.sqrt(math.fsum(x * x for row in a for x in row))
    hi = n - 1
    its = 0
    total_its = 0
    while hi >= 0:
        # find the lowest negligible subdiagonal in the active window
        lo = hi
        while lo > 0:
            s = abs(a[lo - 1][lo - 1]) + abs(a[lo][lo])
            if abs(a[lo][lo - 1]) <= max(eps * s, floor):
                a[lo][lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(a[hi][hi]))
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            eigs.extend(_eig_2x2(a[hi - 1][hi - 1], a[hi - 1][hi], a[hi][hi - 1], a[hi][hi]))
            hi -= 2
            its = 0
            continue
        if its >= _MAX_QR_ITERATIONS:
            raise NumericalError(
                f"QR iteration did not converge: window [{lo}, {hi}] after {its} sweeps, "
                f"subdiagonal {a[hi][hi - 1]:.3e}")
        its += 1
        total_its += 1
        if its % 11 == 0:
            # exceptional shift breaks cycles
            s = abs(a[hi][hi - 1]) + abs(a[hi - 1][hi - 2])
            h = 0.75 * s + a[hi][hi]
            tr = 2.0 * h
            det = h * h + 0.4375 * s * s
        else:
            tr = a[hi - 1][hi - 1] + a[hi][hi]
            det = a[hi - 1][hi - 1] * a[hi][hi] - a[hi - 1][hi] * a[hi][hi - 1]
        h00, h01 = a[lo][lo], a[lo][lo + 1]
        h10, h11 = a[lo + 1][lo], a[lo + 1][lo + 1]
        x = h00 * h00 + h01 * h10 - tr * h00 + det
        y = h10 * (h00 + h11 - tr)
        z = h10 * a[lo + 2][lo + 1]
        for k in range(lo, hi - 1):
            r = _reflector(x, y, z)
            if r is not None:
                v1, v2, tau, alpha = r
                # rows k..k+2, columns from max(lo, k-1) to hi
                for j in range(max(lo, k - 1), hi + 1):
                    s = tau * (a[k][j] + v1 * a[k + 1][j] + v2 * a[k + 2][j])
                    a[k][j] -= s
                    a[k + 1][j] -= s * v1
                    a[k + 2][j] -= s * v2
                # columns k..k+2, rows lo..min(k+3, hi)
                for i in range(lo, min(k + 3, hi) + 1):
                    row = a[i]
                    s = tau * (row[k] + v1 * row[k + 1] + v2 * row[k + 2])
                    row[k] -= s
                    row[k + 1] -= s * v1
                    row[k + 2] -= s * v2
                if k > lo:
                    a[k + 1][k - 1] = 0.0
                    a[k + 2][k - 1] = 0.0
            x = a[k + 1][k]
            y = a[k + 2][k]
            z = a[k + 3][k] if k < hi - 2 else 0.0
        # final 2x2 Givens-like reflector on rows hi-1, hi
        norm = math.hypot(x, y)
        if norm != 0.0:
            c, s_ = x / norm, y / norm
            k = hi - 1
            for j in range(max(lo, k - 1), hi + 1):
                t1, t2 = a[k][j], a[k + 1][j]
                a[k][j] = c * t1 + s_ * t2
                a[k + 1][j] = -s_ * t1 + c * t2
            for i in range(lo, hi + 1):
                row = a[i]
                t1, t2 = row[k], row[k + 1]
                row[k] = c * t1 + s_ * t2
                row[k + 1] = -s_ * t1 + c * t2
            if k > lo:
                a[k + 1][k - 1] = 0.0
    return eigs


def eigenvalues(M) -> list[complex]:
    """All eigenvalues of a real square matrix (order unspecified)."""
    A = as_matrix(M, name="M")
    if A.size == 0:
        return []
    # unit-scale first: the shift polynomial squares entries and would
    # underflow/overflow for extreme magnitudes
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return [0j] * A.shape[0]
    a = (A / scale).tolist()
    _hessenberg(a)
    return [lam * scale for lam in hessenberg_eigenvalues(a)]


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a real square matrix."""
    A = as_matrix(M, name="M")
    n = A.shape[0]
    if n == 0:
        return 0.0
    if n == 1:
        return abs(float(A[0, 0]))
    return max(abs(lam) for lam in eigenvalues(A))
