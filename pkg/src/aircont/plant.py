"""Plant models, sampled-data discretization under input delay, and the
augmented closed-loop matrix shared by the AirCont and multi-hop schemes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from .errors import ConfigError, DimensionError, FeasibilityError, ValidationError
from .linalg_core import as_matrix, as_vector, phi_gamma

#: Feedback gain used for the ball-and-beam experiments.
REFERENCE_GAIN = (6.67, 11.09, 41.15, 11.27)

_PLANT_KEYS = ("name", "A", "b", "labels")


@dataclass(frozen=True, eq=False)
class PlantModel:
    """Continuous LTI plant ``x' = A x + b u`` with one sensor per state."""

    A: np.ndarray
    b: np.ndarray
    name: str = "plant"
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        if A.shape[0] < 1:
            raise DimensionError("plant needs at least one state")
        b = as_vector(self.b, length=A.shape[0], name="b")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != A.shape[0]:
                raise DimensionError(f"expected {A.shape[0]} labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    @property
    def N(self) -> int:
        return self.A.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PlantModel):
            return NotImplemented
        return (self.name == other.name and self.labels == other.labels
                and np.array_equal(self.A, other.A) and np.array_equal(self.b, other.b))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"name": self.name, "A": self.A.tolist(), "b": self.b.tolist()}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d


@dataclass(frozen=True, eq=False)
class DiscretizedPlant:
    Phi: np.ndarray
    Gamma0: np.ndarray
    Gamma1: np.ndarray
    delta: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= self.delta:
            raise FeasibilityError(f"need 0 <= tau <= delta, got tau={self.tau}, delta={self.delta}")
        n = self.Phi.shape[0]
        if self.Phi.shape != (n, n) or self.Gamma0.shape != (n,) or self.Gamma1.shape != (n,):
            raise DimensionError("inconsistent discretized plant shapes")

    @property
    def N(self) -> int:
        return self.Phi.shape[0]


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """Closed-loop matrix acting on ``z(k) = [x(k); u(k-1)]``."""

    PhiTilde: np.ndarray
    effective_gain: np.ndarray
    scheme: str = "air"


def default_ball_and_beam() -> PlantModel:
    """Linearized ball-and-beam model used when no plant file is given.

    States are ball position (m), ball velocity (m/s), beam angle (rad) and
    beam angular rate (rad/s); the input drives the beam angular
    acceleration. This chain of integrators is a desk-scale stand-in, not a
    reproduction of any particular textbook's coefficients.
    """
    A = [[0.0, 1.0, 0.0, 0.0],
         [0.0, 0.0, 7.0, 0.0],
         [0.0, 0.0, 0.0, 1.0],
         [0.0, 0.0, 0.0, 0.0]]
    b = [0.0, 0.0, 0.0, 1.0]
    return PlantModel(np.array(A), np.array(b), name="ball_and_beam",
                      labels=("ball_position", "ball_velocity", "beam_angle", "beam_rate"))


def discretize(plant: PlantModel, delta: float, tau: float) -> DiscretizedPlant:
    """Sample ``plant`` with period ``delta`` and actuation delay ``tau``.

    ``Gamma0`` multiplies the control computed at the current sample and
    ``Gamma1`` the previous one, which is still held during ``[0, tau)``.
    """
    if not delta > 0.0:
        raise ValidationError(f"sampling period must be > 0, got {delta}")
    if tau < 0.0:
        raise ValidationError(f"delay must be >= 0, got {tau}")
    if tau > delta:
        raise FeasibilityError(f"delay {tau} exceeds sampling period {delta}")
    Phi, G_full = phi_gamma(plant.A, plant.b, delta)
    if tau == 0.0:
        Gamma0 = G_full
    else:
        _, Gamma0 = phi_gamma(plant.A, plant.b, delta - tau)
    Gamma1 = G_full - Gamma0
    scale = max(1.0, float(np.max(np.abs(G_full))))
    if np.max(np.abs(Gamma0 + Gamma1 - G_full)) > 1e-9 * scale:
        raise ValidationError("Gamma0 + Gamma1 does not reproduce the full-period integral")
    return DiscretizedPlant(Phi, Gamma0, Gamma1, float(delta), float(tau))


def augment(disc: DiscretizedPlant, g, scheme: str = "air") -> AugmentedSystem:
    """Closed-loop matrix ``[[Phi - Gamma0 g^T, Gamma1], [-g^T, 0]]``.

    ``g`` is the effective feedback row the plant sees: ``alpha (h*beta)`` for
    AirCont, ``alpha_a h_a (D alpha_s)`` for the multi-hop scheme.
    """
    n = disc.N
    g = as_vector(g, length=n, name="effective gain")
    P = np.zeros((n + 1, n + 1))
    P[:n, :n] = disc.Phi - np.outer(disc.Gamma0, g)
    P[:n, n] = disc.Gamma1
    P[n, :n] = -g
    return AugmentedSystem(P, g, scheme)


def plant_from_dict(d: Mapping[str, Any], *, source: str = "<config>") -> PlantModel:
    """Build a plant from a parsed mapping, reporting the offending row/column."""
    unknown = set(d) - set(_PLANT_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown plant keys {sorted(unknown)}")
    for key in ("A", "b"):
        if key not in d:
            raise ConfigError(f"{source}: missing required key '{key}'")
    A_raw = d["A"]
    if not isinstance(A_raw, Sequence) or isinstance(A_raw, str) or not A_raw:
        raise ConfigError(f"{source}: 'A' must be a non-empty list of rows")
    n = len(A_raw)
    rows = []
    for i, row in enumerate(A_raw):
        if not isinstance(row, Sequence) or isinstance(row, str):
            raise ConfigError(f"{source}: A row {i} is not a list")
        if len(row) != n:
            raise ConfigError(f"{source}: A row {i} has {len(row)} columns, expected {n}")
        vals = []
        for j, v in enumerate(row):
            vals.append(_finite(v, f"{source}: A[{i}][{j}]"))
        rows.append(vals)
    b_raw = d["b"]
    if not isinstance(b_raw, Sequence) or isinstance(b_raw, str):
        raise ConfigError(f"{source}: 'b' must be a list")
    if len(b_raw) != n:
        raise ConfigError(f"{source}: 'b' has {len(b_raw)} entries, expected {n}")
    b = [_finite(v, f"{source}: b[{i}]") for i, v in enumerate(b_raw)]
    labels = d.get("labels")
    if labels is not None and (not isinstance(labels, Sequence) or len(labels) != n):
        raise ConfigError(f"{source}: 'labels' must be a list of {n} names")
    try:
        return PlantModel(np.array(rows), np.array(b), name=str(d.get("name", "plant")),
                          labels=tuple(labels) if labels is not None else None)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_plant(path: str | Path) -> PlantModel:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return plant_from_dict(data, source=str(path))


def _finite(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} is not a number: {v!r}")
    x = float(v)
    if not np.isfinite(x):
        raise ConfigError(f"{where} is not finite")
    return x
