"""Parameter records, spectral densities and power normalization for
conditional-autoregressive (CAR) Gauss-Markov fields on the 2D lattice.

The symmetric first-order model (SFAR) couples every site to its four
neighbours with weight ``lambda = zeta * kappa``.  ``zeta`` in ``[0, 1/4]``
runs from i.i.d. (0) to perfectly correlated (1/4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

FOUR_PI2 = 4.0 * math.pi**2
ZETA_MAX = 0.25


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def _k_from_complement(kprime: float) -> float:
    a, b = 1.0, kprime
    while abs(a - b) > 1e-15 * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def elliptic_k(modulus: float) -> float:
    """Complete elliptic integral of the first kind, ``K(k)``.

    The argument is the modulus ``k`` (not the parameter ``m = k**2``):
    ``K(0) = pi/2`` and ``K(1) = inf``.  Evaluated with the
    arithmetic-geometric mean ``K(k) = pi / (2 AGM(1, sqrt(1 - k^2)))``.
    """
    k = float(modulus)
    if not 0.0 <= k <= 1.0 or math.isnan(k):
        raise DomainError(f"elliptic_k: modulus must lie in [0, 1], got {modulus!r}")
    if k == 1.0:
        return math.inf
    # (1-k)(1+k) keeps the complementary modulus accurate near k = 1
    return _k_from_complement(math.sqrt((1.0 - k) * (1.0 + k)))


def elliptic_k_gap(gap: float) -> float:
    """``K(1 - gap)`` without forming ``1 - gap``; accurate for tiny gaps."""
    if not 0.0 <= gap <= 1.0:
        raise DomainError(f"gap must lie in [0, 1], got {gap!r}")
    if gap == 0.0:
        return math.inf
    return _k_from_complement(math.sqrt(gap * (2.0 - gap)))


@dataclass(frozen=True)
class SfarParams:
    """SFAR signal plus white-noise model.

    kappa:  conditional precision of each site (theta_00)
    zeta:   edge dependence factor lambda/kappa, in [0, 1/4]
    sigma2: measurement noise variance
    """

    kappa: float
    zeta: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise DomainError(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        if not 0.0 <= self.zeta <= ZETA_MAX:
            raise DomainError(f"zeta must lie in [0, 1/4], got {self.zeta!r}")

    @property
    def lam(self) -> float:
        return self.zeta * self.kappa

    @property
    def degenerate(self) -> bool:
        """True at perfect correlation, where the precision is singular."""
        return self.zeta == ZETA_MAX

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "zeta": self.zeta, "sigma2": self.sigma2}


@dataclass(frozen=True)
class SpectrumFn:
    """A 2D spectral density on (-pi, pi]^2, evaluable on numpy arrays.

    ``density(w1, w2)`` returns the spectrum with the 1/(4 pi^2)
    normalization, so that the covariance is
    ``gamma_ij = integral f(w) exp(i(i w1 + j w2)) dw``.
    ``+inf`` is a legal value at isolated frequencies.
    """

    density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kind: str
    params: object = None

    def __call__(self, w1, w2):
        with np.errstate(divide="ignore"):
            return self.density(np.asarray(w1, dtype=float), np.asarray(w2, dtype=float))


def _sfar_denominator(zeta: float, w1, w2):
    return 1.0 - 2.0 * zeta * np.cos(w1) - 2.0 * zeta * np.cos(w2)


def sfar_spectrum(params: SfarParams) -> SpectrumFn:
    kappa, zeta = params.kappa, params.zeta

    def density(w1, w2):
        den = FOUR_PI2 * kappa * _sfar_denominator(zeta, w1, w2)
        # exact zero only at the origin when zeta == 1/4
        den = np.where(den <= 0.0, 0.0, den)
        return 1.0 / den

    return SpectrumFn(density, "sfar", params)


def signal_power(params: SfarParams) -> float:
    """Marginal variance gamma_00 = 2 K(4 zeta) / (pi kappa)."""
    return 2.0 * elliptic_k(4.0 * params.zeta) / (math.pi * params.kappa)


def snr(params: SfarParams) -> float:
    return signal_power(params) / params.sigma2


def sfar_params_for_snr(target_snr: float, zeta: float, sigma2: float = 1.0) -> SfarParams:
    """SFAR parameters with the given edge dependence and SNR.

    Solves ``2 K(4 zeta) / (pi kappa sigma2) = target_snr`` for kappa.
    """
    if not target_snr > 0:
        raise DomainError(f"target_snr must be positive, got {target_snr!r}")
    if not 0.0 <= zeta < ZETA_MAX:
        raise DomainError(f"zeta must lie in [0, 1/4) to hold SNR fixed, got {zeta!r}")
    kappa = 2.0 * elliptic_k(4.0 * zeta) / (math.pi * sigma2 * target_snr)
    return SfarParams(kappa=kappa, zeta=zeta, sigma2=sigma2)


def frequency_grid(points: int, midpoint: bool = True) -> np.ndarray:
    """Equispaced frequencies on (-pi, pi].

    Midpoints ``-pi + (i + 1/2) 2pi/points`` never include 0 when
    ``points`` is even; nodes ``2 pi i / points`` always do.
    """
    i = np.arange(points, dtype=float)
    if midpoint:
        return -math.pi + (i + 0.5) * (2.0 * math.pi / points)
    return 2.0 * math.pi * i / points


@dataclass(frozen=True)
class CarCoefficients:
    """Finite CAR neighbour weights ``theta[(i, j)]``.

    The weights must be symmetric (theta_ij = theta_-i-j) with
    ``theta_00 > 0``, and the induced spectrum must be positive; the
    latter is checked on a frequency grid of ``check_points`` per axis
    (both nodes and midpoints of the quadrature grid).
    """

    theta: Mapping[tuple[int, int], float]
    check_points: int = field(default=256, compare=False)

    def __post_init__(self):
        theta = {(int(i), int(j)): float(v) for (i, j), v in self.theta.items() if v != 0.0}
        object.__setattr__(self, "theta", theta)
        if theta.get((0, 0), 0.0) <= 0.0:
            raise DomainError("theta_00 must be positive")
        for (i, j), v in theta.items():
            if not math.isclose(theta.get((-i, -j), 0.0), v, rel_tol=1e-12, abs_tol=0.0):
                raise DomainError(f"theta must satisfy theta[{i},{j}] == theta[{-i},{-j}]")
        w = frequency_grid(2 * self.check_points, midpoint=False)
        w1, w2 = np.meshgrid(w, w, indexing="ij")
        den = self.symbol(w1, w2)
        # tolerance admits the rounding residue of a zero at the boundary case
        bad = np.argwhere(den < -1e-12 * theta[(0, 0)])
        if bad.size:
            a, b = bad[np.argmin(den[tuple(bad.T)])]
            raise DomainError(
                "CAR spectrum is not positive: denominator "
                f"{den[a, b]:.6g} at (w1, w2) = ({w[a]:.6g}, {w[b]:.6g})"
            )

    def symbol(self, w1, w2):
        """sum_ij theta_ij exp(-i(i w1 + j w2)), real by symmetry."""
        out = np.zeros(np.broadcast(w1, w2).shape)
        for (i, j), v in self.theta.items():
            out = out + v * np.cos(i * w1 + j * w2)
        return out

    @classmethod
    def from_sfar(cls, params: SfarParams, check_points: int = 256) -> "CarCoefficients":
        lam = params.lam
        return cls(
            {(0, 0): params.kappa, (1, 0): -lam, (-1, 0): -lam, (0, 1): -lam, (0, -1): -lam},
            check_points=check_points,
        )


def car_spectrum(coeffs: CarCoefficients) -> SpectrumFn:
    def density(w1, w2):
        den = FOUR_PI2 * coeffs.symbol(w1, w2)
        den = np.where(den <= 0.0, 0.0, den)
        return 1.0 / den

    return SpectrumFn(density, "car", coeffs)
