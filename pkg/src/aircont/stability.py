"""Stability-region sweeps over (sampling period, delay ratio) grids.

A cell is *maximally stable* when the augmented closed-loop matrix has
spectral radius below one. It is *achievable* for a scheme when, in
addition, the scheme's network can deliver the control signal within the
cell's delay: ``tau_min <= tau <= delta`` with ``tau_min = T_s`` for the
over-the-air controller and ``(N + 1) T_s`` for the multi-hop baseline.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import _csv
from .errors import AirContError, ValidationError
from .linalg_core import as_vector, spectral_radius
from .plant import PlantModel, augment, discretize

Scheme = Literal["air", "sota"]
Region = Literal["max", "achievable_air", "achievable_sota"]

# Grid delays are products of linspace values; compare with a relative slack
# so that e.g. tau = 1.0 * 0.05 counts as meeting tau_min = 5 * 0.01.
_FEAS_RTOL = 1e-9

CSV_HEADER = ("delta", "ratio", "tau", "rho", "max_stable", "achievable_air", "achievable_sota")


@dataclass(frozen=True)
class NetworkTiming:
    T_s: float
    N: int

    def __post_init__(self):
        if not self.T_s > 0.0:
            raise ValidationError(f"slot duration must be > 0, got {self.T_s}")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"sensor count must be a positive integer, got {self.N}")


def min_feasible_delay(scheme: str, timing: NetworkTiming) -> float:
    """Smallest sampling-to-actuation delay the scheme's network can achieve."""
    if scheme == "air":
        return timing.T_s
    if scheme == "sota":
        return (timing.N + 1) * timing.T_s
    if scheme == "ideal":
        return 0.0
    raise ValidationError(f"unknown scheme {scheme!r}")


def is_feasible(tau: float, delta: float, tau_min: float) -> bool:
    return tau >= tau_min * (1.0 - _FEAS_RTOL) and tau <= delta * (1.0 + _FEAS_RTOL)


@dataclass(frozen=True, eq=False)
class StabilityGridSpec:
    plant: PlantModel
    effective_gain: np.ndarray
    timing: NetworkTiming
    delta_min: float = 0.005
    delta_max: float = 0.30
    delta_steps: int = 60
    ratio_min: float = 0.0
    ratio_max: float = 1.0
    ratio_steps: int = 50
    margin: float = 0.0

    def __post_init__(self):
        g = as_vector(self.effective_gain, length=self.plant.N, name="effective gain")
        object.__setattr__(self, "effective_gain", g)
        if not 0.0 < self.delta_min <= self.delta_max:
            raise ValidationError("need 0 < delta_min <= delta_max")
        if not 0.0 <= self.ratio_min <= self.ratio_max <= 1.0:
            raise ValidationError("need 0 <= ratio_min <= ratio_max <= 1")
        if self.delta_steps < 1 or self.ratio_steps < 1:
            raise ValidationError("grid needs at least one step per axis")
        if (self.delta_steps == 1) != (self.delta_min == self.delta_max):
            raise ValidationError("delta range and step count disagree")
        if (self.ratio_steps == 1) != (self.ratio_min == self.ratio_max):
            raise ValidationError("ratio range and step count disagree")
        if not 0.0 <= self.margin < 1.0:
            raise ValidationError("margin must lie in [0, 1)")

    def deltas(self) -> np.ndarray:
        return _snap(np.linspace(self.delta_min, self.delta_max, self.delta_steps))

    def ratios(self) -> np.ndarray:
        return _snap(np.linspace(self.ratio_min, self.ratio_max, self.ratio_steps))


def _snap(x: np.ndarray) -> np.ndarray:
    """Round grid points to 15 significant digits so that nominal values such
    as 0.05 land on the double nearest to them, not one ulp below."""
    return np.array([float(f"{v:.15g}") for v in x])


@dataclass(frozen=True)
class StabilityCell:
    delta: float
    ratio: float
    tau: float
    rho: float
    max_stable: bool
    achievable_air: bool
    achievable_sota: bool


@dataclass(frozen=True)
class RegionArea:
    cell_count: int
    normalized_area: float


def evaluate_cell(spec: StabilityGridSpec, delta: float, ratio: float) -> StabilityCell:
    tau = ratio * delta
    try:
        disc = discretize(spec.plant, delta, tau)
        rho = spectral_radius(augment(disc, spec.effective_gain).PhiTilde)
    except AirContError as exc:
        raise type(exc)(f"cell delta={delta:.9g}, ratio={ratio:.9g}: {exc}") from exc
    stable = rho < 1.0 - spec.margin
    air = stable and is_feasible(tau, delta, min_feasible_delay("air", spec.timing))
    sota = stable and is_feasible(tau, delta, min_feasible_delay("sota", spec.timing))
    return StabilityCell(float(delta), float(ratio), float(tau), float(rho), stable, air, sota)


def sweep_stability(spec: StabilityGridSpec, threads: int = 1) -> list[StabilityCell]:
    """Evaluate every grid cell, row-major by delta then ratio.

    ``threads > 1`` distributes whole delta rows over a pool; output order and
    values do not depend on it.
    """
    ratios = spec.ratios()

    def row(delta: float) -> list[StabilityCell]:
        return [evaluate_cell(spec, float(delta), float(r)) for r in ratios]

    deltas = spec.deltas()
    if threads <= 1:
        rows = [row(d) for d in deltas]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, deltas))
    return [cell for r in rows for cell in r]


def region_area(cells: Iterable[StabilityCell], which: Region = "max") -> RegionArea:
    cells = list(cells)
    if not cells:
        raise ValidationError("region_area needs at least one cell")
    if which == "max":
        count = sum(c.max_stable for c in cells)
    elif which == "achievable_air":
        count = sum(c.achievable_air for c in cells)
    elif which == "achievable_sota":
        count = sum(c.achievable_sota for c in cells)
    else:
        raise ValidationError(f"unknown region {which!r}")
    return RegionArea(int(count), count / len(cells))


def area_ratio(cells: list[StabilityCell]) -> float | None:
    """Achievable-area ratio AirCont / multi-hop, ``None`` when the latter is empty."""
    air = region_area(cells, "achievable_air").cell_count
    sota = region_area(cells, "achievable_sota").cell_count
    if sota == 0:
        return None
    return air / sota


def cells_to_csv(cells: Iterable[StabilityCell]) -> str:
    f, b = _csv.fmt_real, _csv.fmt_flag
    rows = ((f(c.delta), f(c.ratio), f(c.tau), f(c.rho), b(c.max_stable),
             b(c.achievable_air), b(c.achievable_sota)) for c in cells)
    return _csv.render_csv(CSV_HEADER, rows)
