"""Neyman-Pearson log-likelihood-ratio detector on torus observations and
Monte Carlo estimates of its error probabilities."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import binomtest

from .core import SfarParams, sfar_spectrum
from .exponent import finite_lattice_kl_rate
from .fields import (
    H0,
    H1,
    SingularPrecisionError,
    TorusField,
    draw_observations,
    rng_for,
    torus_precision_spectrum,
)

BLOCK = 256  # trials per sub-seed
MIN_TRIALS = 100
_TAG = {H0: 10, H1: 11}


@dataclass(frozen=True)
class LlrStatistic:
    value: float
    normalized: float


@dataclass(frozen=True)
class DetectionReport:
    alpha: float
    threshold: float
    p_false_alarm: float
    p_miss: float
    p_false_alarm_ci: float
    p_miss_ci: float
    trials: int
    side: int
    seed: int
    params: SfarParams

    def row(self) -> dict:
        d = asdict(self)
        d.update(d.pop("params"))
        return d


@dataclass(frozen=True)
class ConvergenceRow:
    side: int
    mean: float
    std: float
    stderr: float
    finite_rate: float
    trials: int


def h1_eigenvalues(params: SfarParams, side: int) -> np.ndarray:
    """Observation covariance eigenvalues under H1: sigma2 + 1/Lambda."""
    spec = torus_precision_spectrum(params, side)
    if spec.singular:
        raise SingularPrecisionError("H1 covariance is singular at zeta = 1/4")
    return params.sigma2 + 1.0 / spec.eigenvalues


def _llr_batch(y: np.ndarray, params: SfarParams) -> np.ndarray:
    side = y.shape[-1]
    s = h1_eigenvalues(params, side)
    const = 0.5 * np.sum(np.log(params.sigma2 / s))
    power = np.abs(np.fft.fft2(y, norm="ortho")) ** 2
    weights = 0.5 * (1.0 / params.sigma2 - 1.0 / s)
    return const + np.sum(power * weights, axis=(-2, -1))


def llr(observation, params: SfarParams) -> LlrStatistic:
    """log p1(y) - log p0(y), evaluated on the DFT coefficients of y."""
    y = observation.values if isinstance(observation, TorusField) else np.asarray(observation, float)
    value = float(_llr_batch(y, params))
    return LlrStatistic(value, value / y.size)


def dense_llr(y: np.ndarray, sigma0: np.ndarray, sigma1: np.ndarray) -> float:
    """1/2 [log det(Sigma0 Sigma1^-1) + y'(Sigma0^-1 - Sigma1^-1) y], dense oracle."""
    y = np.asarray(y, float).ravel()
    _, ld0 = np.linalg.slogdet(sigma0)
    _, ld1 = np.linalg.slogdet(sigma1)
    quad = y @ np.linalg.solve(sigma0, y) - y @ np.linalg.solve(sigma1, y)
    return 0.5 * (ld0 - ld1 + quad)


def _check_trials(trials: int):
    if int(trials) != trials or trials < MIN_TRIALS:
        raise ValueError(f"trials must be an integer >= {MIN_TRIALS}, got {trials!r}")


def simulate_llr(params: SfarParams, side: int, hypothesis: str, trials: int, seed: int) -> np.ndarray:
    """LLR values of ``trials`` independent observations.

    Trials are drawn in fixed blocks, each from its own sub-seed
    ``(seed, hypothesis, block)``, so results do not depend on how blocks
    are scheduled.
    """
    out = np.empty(trials)
    for b, start in enumerate(range(0, trials, BLOCK)):
        count = min(BLOCK, trials - start)
        y = draw_observations(params, side, hypothesis, count,
                              rng_for(seed, _TAG[hypothesis], b, 0),
                              rng_for(seed, _TAG[hypothesis], b, 1))
        out[start:start + count] = _llr_batch(y, params)
    return out


def calibrate_threshold(params: SfarParams, side: int, alpha: float, trials: int, seed: int) -> float:
    """Empirical (1 - alpha) quantile of the LLR under H0."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    _check_trials(trials)
    return float(np.quantile(simulate_llr(params, side, H0, trials, seed), 1.0 - alpha))


def wilson_halfwidth(successes: int, trials: int, confidence: float = 0.95) -> float:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return 0.5 * (ci.high - ci.low)


def estimate_error_probabilities(params: SfarParams, side: int, threshold: float, trials: int,
                                 seed: int, alpha: float = math.nan) -> DetectionReport:
    """P_F = P0(LLR > threshold), P_M = P1(LLR <= threshold)."""
    _check_trials(trials)
    l0 = simulate_llr(params, side, H0, trials, seed)
    l1 = simulate_llr(params, side, H1, trials, seed)
    fa = int(np.count_nonzero(l0 > threshold))
    miss = int(np.count_nonzero(l1 <= threshold))
    return DetectionReport(
        alpha=alpha, threshold=float(threshold),
        p_false_alarm=fa / trials, p_miss=miss / trials,
        p_false_alarm_ci=wilson_halfwidth(fa, trials), p_miss_ci=wilson_halfwidth(miss, trials),
        trials=int(trials), side=int(side), seed=int(seed), params=params,
    )


def detect(params: SfarParams, side: int, alpha: float, trials: int, seed: int,
           calibration_trials: int | None = None) -> DetectionReport:
    """Calibrate on one sub-seed, then estimate on an independent one."""
    thr = calibrate_threshold(params, side, alpha, calibration_trials or trials, seed=2 * seed)
    return estimate_error_probabilities(params, side, thr, trials, seed=2 * seed + 1, alpha=alpha)


def normalized_llr_convergence(params: SfarParams, sides, trials: int, seed: int) -> list[ConvergenceRow]:
    """Monte Carlo mean and spread of (1/N^2) log(p0/p1)(y) with y ~ H0.

    Its expectation is exactly the torus KL rate at each N.
    """
    sides = [int(n) for n in sides]
    if sides != sorted(sides):
        raise ValueError("lattice sides must be ascending")
    if trials < 2:
        raise ValueError("need at least two trials")
    spectrum = sfar_spectrum(params)
    rows = []
    for n in sides:
        stat = -simulate_llr(params, n, H0, trials, seed + n) / (n * n)
        std = float(np.std(stat, ddof=1))
        rows.append(ConvergenceRow(
            side=n, mean=float(np.mean(stat)), std=std, stderr=std / math.sqrt(trials),
            finite_rate=finite_lattice_kl_rate(spectrum, params.sigma2, n).value, trials=int(trials),
        ))
    return rows
