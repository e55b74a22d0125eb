"""Error exponent of the Neyman-Pearson miss probability for detecting a
CAR field in white noise.

The exponent is the frequency average of the per-bin Kullback-Leibler
divergence ``D(N(0, sigma2) || N(0, sigma2 + 4 pi^2 f))``.  Values are in nats
per sensor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    FOUR_PI2,
    ZETA_MAX,
    DomainError,
    SpectrumFn,
    elliptic_k_gap,
    frequency_grid,
)

DEFAULT_GRID = 256


@dataclass(frozen=True)
class ExponentResult:
    value: float
    grid_points_per_axis: int
    error_estimate: float


@dataclass(frozen=True)
class FiniteRate:
    """KL rate per site of the N x N torus model.

    ``degenerate`` is set when the spectrum is infinite at one of the
    sampled frequencies (singular prior); ``value`` is then ``inf``.
    """

    side: int
    value: float
    degenerate: bool = False


def kl_from_ratio(q):
    """Per-bin divergence as a function of the bin SNR ``q = 4 pi^2 f / sigma2``.

    ``1/2 log(1+q) + 1/2 /(1+q) - 1/2``, written without the cancellation
    of the last two terms.
    """
    q = np.asarray(q, dtype=float)
    with np.errstate(invalid="ignore"):
        out = 0.5 * (np.log1p(q) - q / (1.0 + q))
    return np.where(np.isinf(q), np.inf, out)


def integrand(spectrum_value, sigma2: float):
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2!r}")
    out = kl_from_ratio(FOUR_PI2 * np.asarray(spectrum_value, dtype=float) / sigma2)
    return out.item() if out.ndim == 0 else out


def _check_grid(grid: int) -> int:
    if int(grid) != grid or grid < 8 or grid % 2:
        raise ValueError(f"grid must be an even integer >= 8, got {grid!r}")
    return int(grid)


def _grid_mean(values: np.ndarray) -> float:
    # fsum: order-independent and correctly rounded
    if np.isinf(values).any():
        return math.inf
    return math.fsum(values.ravel()) / values.size


def _midpoint_value(bin_ratio, points: int) -> float:
    w = frequency_grid(points)
    return _grid_mean(kl_from_ratio(bin_ratio(w[:, None], w[None, :])))


def _with_halving(bin_ratio, grid: int) -> ExponentResult:
    fine = _midpoint_value(bin_ratio, grid)
    coarse = _midpoint_value(bin_ratio, grid // 2)
    err = abs(fine - coarse) if math.isfinite(fine) and math.isfinite(coarse) else math.inf
    return ExponentResult(fine, grid, err)


def error_exponent(spectrum: SpectrumFn, sigma2: float, grid: int = DEFAULT_GRID) -> ExponentResult:
    """Tensor-product midpoint rule over (-pi, pi]^2 with ``grid`` nodes per axis.

    ``error_estimate`` is the change against the half-resolution grid.
    """
    grid = _check_grid(grid)
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2!r}")
    return _with_halving(lambda w1, w2: FOUR_PI2 * spectrum(w1, w2) / sigma2, grid)


def _sfar_bin_ratio(snr: float, gap: float):
    """Bin SNR as a function of frequency, with ``gap = 1 - 4 zeta``.

    The denominator is written as ``(1 - m) + gap m`` with
    ``m = (cos w1 + cos w2)/2`` and ``1 - m`` formed from half-angle sines,
    so it stays accurate when both the frequency and the gap are tiny.
    """
    k = elliptic_k_gap(gap)
    if math.isinf(k):
        # zeta = 1/4: every bin off the (unsampled) origin carries zero SNR
        return lambda w1, w2: np.zeros(np.broadcast(w1, w2).shape)
    scale = snr / ((2.0 / math.pi) * k)

    def ratio(w1, w2):
        one_minus_m = np.sin(0.5 * w1) ** 2 + np.sin(0.5 * w2) ** 2
        m = 0.5 * (np.cos(w1) + np.cos(w2))
        return scale / (one_minus_m + gap * m)

    return ratio


def _check_sfar(snr: float, zeta: float) -> None:
    if not snr >= 0:
        raise DomainError(f"snr must be nonnegative, got {snr!r}")
    if not 0.0 <= zeta <= ZETA_MAX:
        raise DomainError(f"zeta must lie in [0, 1/4], got {zeta!r}")


def sfar_error_exponent(snr: float, zeta: float, grid: int = DEFAULT_GRID) -> ExponentResult:
    """Exponent of the SFAR model parametrized by SNR and edge dependence.

    The bin SNR is ``snr / ((2/pi) K(4 zeta) (1 - 2 zeta cos w1 - 2 zeta cos w2))``;
    SNR and correlation enter separately.
    """
    grid = _check_grid(grid)
    _check_sfar(snr, zeta)
    return _with_halving(_sfar_bin_ratio(snr, 1.0 - 4.0 * zeta), grid)


def sfar_error_exponent_gap(snr: float, gap: float, grid: int = DEFAULT_GRID) -> ExponentResult:
    """As :func:`sfar_error_exponent`, parametrized by ``gap = 1 - 4 zeta``.

    Use this when zeta is too close to 1/4 to be represented in floating point.
    """
    grid = _check_grid(grid)
    _check_sfar(snr, 0.25 * (1.0 - gap))
    return _with_halving(_sfar_bin_ratio(snr, gap), grid)


@lru_cache(maxsize=4096)
def sfar_exponent_value(snr: float, zeta: float, grid: int = DEFAULT_GRID,
                        gap: float | None = None) -> float:
    """Cached exponent value for sweeps; ``gap`` overrides ``1 - 4 zeta``."""
    _check_sfar(snr, zeta)
    return _midpoint_value(_sfar_bin_ratio(snr, 1.0 - 4.0 * zeta if gap is None else gap),
                           _check_grid(grid))


def stein_exponent(snr: float) -> float:
    """Closed form for i.i.d. signals: D(N(0,1) || N(0, 1 + snr))."""
    return 0.5 * math.log1p(snr) + 0.5 / (1.0 + snr) - 0.5


def finite_lattice_kl_rate(spectrum: SpectrumFn, sigma2: float, side: int) -> FiniteRate:
    """(1/N^2) D(p0 || p1) for the N x N torus.

    The H1 covariance is block circulant with eigenvalues
    ``sigma2 + 4 pi^2 f(2 pi k / N, 2 pi l / N)``.
    """
    if int(side) != side or side < 2:
        raise ValueError(f"lattice side must be an integer >= 2, got {side!r}")
    side = int(side)
    w = frequency_grid(side, midpoint=False)
    f = spectrum(w[:, None], w[None, :])
    if np.isinf(f).any():
        return FiniteRate(side, math.inf, degenerate=True)
    return FiniteRate(side, _grid_mean(kl_from_ratio(FOUR_PI2 * f / sigma2)))


def zeta_sweep(snr: float, zetas, grid: int = DEFAULT_GRID) -> np.ndarray:
    return np.array([sfar_exponent_value(float(snr), float(z), grid) for z in zetas])


def optimal_zeta(snr: float, step: float = 0.001, zeta_max: float = 0.2499,
                 grid: int = DEFAULT_GRID) -> tuple[float, float]:
    """Argmax of the exponent over a uniform zeta grid; returns (zeta, value)."""
    zetas = np.round(np.arange(0.0, zeta_max + 0.5 * step, step), 12)
    zetas = zetas[zetas <= zeta_max]
    vals = zeta_sweep(snr, zetas, grid)
    i = int(np.argmax(vals))
    return float(zetas[i]), float(vals[i])
