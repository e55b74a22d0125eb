"""Information/energy trade-off of a grid sensor network with minimum-hop
routing to a fusion centre at the origin.

Sensors sit on ``[-n..n]^2`` with spacing ``r``; the reading at ``(i, j)``
costs ``|i| + |j|`` hops of energy ``r**delta`` each.  Gathered information
is (number of sensors) x (per-sensor error exponent).

Correlation maps (spacing -> edge dependence factor) stand in for the
physical model of the field; the built-ins are placeholders, not derived
from any particular physics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import ZETA_MAX
from .exponent import DEFAULT_GRID, sfar_exponent_value

VANISHING, THRESHOLD, GROWING = "vanishing", "threshold", "growing"
MAP_CAVEAT = ("density-regime conclusions are conditional on the chosen correlation map, "
              "which is a modelling placeholder rather than a solved physical model")


# correlation maps -------------------------------------------------------

# A map may also define ``gap(r) = 1 - 4 zeta(r)``; it is used in place of
# ``1 - 4 zeta`` when zeta is too close to 1/4 to resolve in floating point.

@dataclass(frozen=True)
class ConstantMap:
    zeta: float = 0.0

    def __call__(self, r: float) -> float:
        return self.zeta


@dataclass(frozen=True)
class ExponentialMap:
    """rho(r) = exp(-r/r0), zeta = rho/4."""

    r0: float = 1.0

    def __call__(self, r: float) -> float:
        return 0.25 * math.exp(-r / self.r0)

    def gap(self, r: float) -> float:
        return -math.expm1(-r / self.r0)


@dataclass(frozen=True)
class ExpGapMap:
    """zeta = (1 - exp(-(r0/r)**beta)) / 4.

    The gap ``1 - 4 zeta`` closes super-exponentially as ``r -> 0``.  Since
    the exponent near perfect correlation falls like ``1/K(4 zeta)`` and
    ``K`` grows like ``log(1/gap)/2``, the exponent decays like
    ``r**beta``, i.e. ``density**(-beta/2)``.
    """

    r0: float = 1.0
    beta: float = 1.0

    def __call__(self, r: float) -> float:
        return 0.25 * (1.0 - self.gap(r))

    def gap(self, r: float) -> float:
        return math.exp(-((self.r0 / r) ** self.beta))


@dataclass(frozen=True)
class TabulatedMap:
    """Piecewise-linear interpolation of user-supplied (r, zeta) pairs,
    held constant beyond the table ends."""

    r: tuple
    zeta: tuple

    def __post_init__(self):
        r, z = np.asarray(self.r, float), np.asarray(self.zeta, float)
        if r.ndim != 1 or r.shape != z.shape or r.size < 2:
            raise ValueError("tabulated map needs matching 1D r and zeta arrays of length >= 2")
        if np.any(np.diff(r) <= 0):
            raise ValueError("tabulated r values must be strictly increasing")
        if np.any(np.diff(z) > 0):
            raise ValueError("tabulated zeta must be nonincreasing in r")
        if z.min() < 0 or z.max() > ZETA_MAX:
            raise ValueError("tabulated zeta must lie in [0, 1/4]")
        object.__setattr__(self, "r", tuple(r))
        object.__setattr__(self, "zeta", tuple(z))

    def __call__(self, r: float) -> float:
        return float(np.interp(r, self.r, self.zeta))


# scenarios --------------------------------------------------------------

@dataclass(frozen=True)
class EnergyScenario:
    half_width: int
    spacing: float
    delta: float = 2.0
    corr_map: Callable[[float], float] = field(default_factory=ConstantMap)
    snr: float = 1.0
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 0:
            raise ValueError(f"half_width must be a nonnegative integer, got {self.half_width!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        if not self.delta >= 2:
            raise ValueError(f"propagation loss factor must be >= 2, got {self.delta!r}")
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr!r}")

    @property
    def zeta(self) -> float:
        z = float(self.corr_map(self.spacing))
        if not 0.0 <= z <= ZETA_MAX:
            raise ValueError(f"correlation map returned zeta={z!r} outside [0, 1/4]")
        return z

    @property
    def gap(self) -> float:
        """1 - 4 zeta, taken from the map when it provides it."""
        if hasattr(self.corr_map, "gap"):
            return float(self.corr_map.gap(self.spacing))
        return 1.0 - 4.0 * self.zeta


@dataclass(frozen=True)
class EfficiencyPoint:
    n: int
    spacing: float
    zeta: float
    exponent: float
    total_info: float
    total_energy: float
    eta: float

    def row(self) -> dict:
        return {"n": self.n, "r_n": self.spacing, "zeta": self.zeta, "K_s": self.exponent,
                "I_t": self.total_info, "E_t": self.total_energy, "eta": self.eta}


def total_hops(n: int) -> int:
    """sum_{i,j in [-n, n]} (|i| + |j|) = 2 n (n + 1) (2 n + 1)."""
    if int(n) != n or n < 0:
        raise ValueError(f"half width must be a nonnegative integer, got {n!r}")
    n = int(n)
    return 2 * n * (n + 1) * (2 * n + 1)


def efficiency(scenario: EnergyScenario) -> EfficiencyPoint:
    n = int(scenario.half_width)
    if n < 1:
        raise ValueError("efficiency is undefined for n = 0 (no transmissions)")
    zeta = scenario.zeta
    ks = sfar_exponent_value(float(scenario.snr), zeta, scenario.grid, scenario.gap)
    info = (2 * n + 1) ** 2 * ks
    energy = total_hops(n) * scenario.spacing ** scenario.delta
    return EfficiencyPoint(n, scenario.spacing, zeta, ks, info, energy, info / energy)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


def area_regime_sweep(template: EnergyScenario, n_list: Sequence[int]) -> tuple[list[EfficiencyPoint], float]:
    """Fixed spacing (density); returns points and the slope of eta vs area."""
    n_list = [int(n) for n in n_list]
    if n_list != sorted(n_list):
        raise ValueError("n_list must be ascending")
    pts = [efficiency(EnergyScenario(n, template.spacing, template.delta, template.corr_map,
                                     template.snr, template.grid)) for n in n_list]
    area = [((2 * p.n + 1) * p.spacing) ** 2 for p in pts]
    return pts, loglog_slope(area, [p.eta for p in pts])


@dataclass(frozen=True)
class DensityVerdict:
    exponent_slope: float      # d log K_s / d log density
    eta_slope: float           # d log eta / d log n
    reference_slope: float     # (1 - delta) / 2
    verdict: str
    window: int
    tolerance: float
    caveat: str = MAP_CAVEAT

    def to_dict(self) -> dict:
        return {
            "exponent_slope_vs_density": self.exponent_slope,
            "eta_slope_vs_n": self.eta_slope,
            "reference_slope": self.reference_slope,
            "verdict": self.verdict,
            "fit_window": self.window,
            "tolerance": self.tolerance,
            "caveat": self.caveat,
        }


def classify(exponent_slope: float, delta: float, tolerance: float) -> str:
    """Compare the decay of K_s with density against (1 - delta)/2.

    eta ~ K_s n^(delta-1) and density ~ n^2, so the eta slope in n is
    ``2 (exponent_slope - (1 - delta)/2)``.
    """
    gap = exponent_slope - 0.5 * (1.0 - delta)
    if gap < -tolerance:
        return VANISHING
    if gap > tolerance:
        return GROWING
    return THRESHOLD


def density_regime_sweep(template: EnergyScenario, n_list: Sequence[int], extent: float,
                         corr_map: Callable[[float], float] | None = None,
                         window: int | None = None, tolerance: float = 0.05
                         ) -> tuple[list[EfficiencyPoint], DensityVerdict]:
    """Fixed physical extent: spacing ``extent / (2n + 1)``, density ~ n^2.

    Slopes are fitted on the last ``window`` points (default: last half).
    """
    n_list = [int(n) for n in n_list]
    if n_list != sorted(n_list) or len(n_list) < 2:
        raise ValueError("n_list must be ascending with at least two entries")
    if not extent > 0:
        raise ValueError("extent must be positive")
    cmap = corr_map if corr_map is not None else template.corr_map
    pts = [efficiency(EnergyScenario(n, extent / (2 * n + 1), template.delta, cmap,
                                     template.snr, template.grid)) for n in n_list]
    window = window or max(2, (len(pts) + 1) // 2)
    if not 2 <= window <= len(pts):
        raise ValueError(f"fit window must lie in [2, {len(pts)}], got {window}")
    tail = pts[-window:]
    if any(p.exponent <= 0 for p in tail):
        raise ValueError("exponent vanished inside the fit window; slope is undefined")
    density = [(2 * p.n + 1) ** 2 / extent**2 for p in tail]
    ks_slope = loglog_slope(density, [p.exponent for p in tail])
    eta_slope = loglog_slope([p.n for p in tail], [p.eta for p in tail])
    verdict = DensityVerdict(ks_slope, eta_slope, 0.5 * (1.0 - template.delta),
                             classify(ks_slope, template.delta, tolerance), window, tolerance)
    return pts, verdict
