"""SFAR fields and noisy observations on the N x N torus.

Periodic boundaries make the precision block circulant, so the 2D DFT
diagonalizes everything: the precision eigenvalues are
``kappa (1 - 2 zeta cos(2 pi k/N) - 2 zeta cos(2 pi l/N))``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DomainError, SfarParams, frequency_grid

SIGNAL, NOISE = 0, 1
H0, H1 = "H0", "H1"
DENSE_MAX_SIDE = 8


class SingularPrecisionError(DomainError):
    pass


@dataclass(frozen=True)
class TorusPrecisionSpectrum:
    side: int
    eigenvalues: np.ndarray

    @property
    def singular(self) -> bool:
        return bool(self.eigenvalues[0, 0] <= 0.0)

    def covariance_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the field covariance, 1/Lambda (inf where singular)."""
        with np.errstate(divide="ignore"):
            return np.where(self.eigenvalues > 0.0, 1.0 / self.eigenvalues, np.inf)


@dataclass(frozen=True)
class TorusField:
    values: np.ndarray
    kind: str  # "signal" | "noise" | "observation"
    seed: Optional[int] = None
    params: Optional[SfarParams] = None
    hypothesis: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise ValueError(f"field must be a square array with side >= 2, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("field entries must be finite")
        if self.kind not in ("signal", "noise", "observation"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    @property
    def side(self) -> int:
        return self.values.shape[0]


def torus_precision_spectrum(params: SfarParams, side: int) -> TorusPrecisionSpectrum:
    if int(side) != side or side < 2:
        raise ValueError(f"lattice side must be an integer >= 2, got {side!r}")
    c = np.cos(frequency_grid(int(side), midpoint=False))
    lam = params.kappa * (1.0 - 2.0 * params.zeta * c[:, None] - 2.0 * params.zeta * c[None, :])
    # zeta = 1/4 leaves rounding residue at the origin
    lam[0, 0] = params.kappa * (1.0 - 4.0 * params.zeta)
    return TorusPrecisionSpectrum(int(side), lam)


def _seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the sub-stream ``key`` of ``seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, *key)))


def _filter_scale(params: SfarParams, side: int, project_zero_mode: bool) -> np.ndarray:
    spec = torus_precision_spectrum(params, side)
    if spec.singular and not project_zero_mode:
        raise SingularPrecisionError(
            "precision is singular at zeta = 1/4; pass project_zero_mode=True to pin the mean mode to 0"
        )
    cov = spec.covariance_eigenvalues()
    cov[~np.isfinite(cov)] = 0.0
    return np.sqrt(cov)


def _colour(white: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Shape white noise (..., N, N) to covariance with DFT eigenvalues scale**2.

    The orthonormal DFT of real white noise is Hermitian symmetric with
    unit-variance entries (real at self-conjugate frequencies), so the
    inverse transform of the scaled coefficients is real up to rounding.
    """
    coef = np.fft.fft2(white, norm="ortho") * scale
    out = np.fft.ifft2(coef, norm="ortho")
    resid = np.abs(out.imag).max() if out.size else 0.0
    assert resid <= 1e-10 * max(1.0, np.abs(out.real).max()), f"imaginary residue {resid}"
    return out.real


def draw_signals(params: SfarParams, side: int, count: int, rng: np.random.Generator,
                 project_zero_mode: bool = False) -> np.ndarray:
    scale = _filter_scale(params, side, project_zero_mode)
    return _colour(rng.standard_normal((count, side, side)), scale)


def draw_observations(params: SfarParams, side: int, hypothesis: str, count: int,
                      signal_rng: np.random.Generator, noise_rng: np.random.Generator,
                      project_zero_mode: bool = False) -> np.ndarray:
    if hypothesis not in (H0, H1):
        raise ValueError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    y = math.sqrt(params.sigma2) * noise_rng.standard_normal((count, side, side))
    if hypothesis == H1:
        y = y + draw_signals(params, side, count, signal_rng, project_zero_mode)
    return y


def sample_signal(params: SfarParams, side: int, seed: int,
                  project_zero_mode: bool = False) -> TorusField:
    """Zero-mean torus GMRF with the SFAR precision stencil."""
    x = draw_signals(params, side, 1, rng_for(seed, SIGNAL), project_zero_mode)[0]
    return TorusField(x, "signal", seed, params)


def sample_noise(params: SfarParams, side: int, seed: int) -> TorusField:
    w = math.sqrt(params.sigma2) * rng_for(seed, NOISE).standard_normal((side, side))
    return TorusField(w, "noise", seed, params)


def sample_observation(params: SfarParams, side: int, hypothesis: str, seed: int,
                       project_zero_mode: bool = False) -> TorusField:
    """H0: white noise only. H1: signal plus independent noise.

    Signal and noise come from distinct sub-streams of ``seed``; the H0 and
    H1 draws for one seed share their noise.
    """
    y = draw_observations(params, side, hypothesis, 1, rng_for(seed, SIGNAL),
                          rng_for(seed, NOISE), project_zero_mode)[0]
    return TorusField(y, "observation", seed, params, hypothesis)


def torus_covariance(params: SfarParams, side: int) -> np.ndarray:
    """Exact signal autocovariance c(di, dj) on the torus, as an N x N array."""
    cov = torus_precision_spectrum(params, side).covariance_eigenvalues()
    if not np.isfinite(cov).all():
        raise SingularPrecisionError("signal covariance is undefined at zeta = 1/4")
    return np.fft.ifft2(cov).real


def precision_matrix(params: SfarParams, side: int) -> np.ndarray:
    """Dense N^2 x N^2 torus precision, row-major site order."""
    n = side * side
    q = np.zeros((n, n))
    idx = np.arange(n).reshape(side, side)
    for i in range(side):
        for j in range(side):
            a = idx[i, j]
            q[a, a] += params.kappa
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                q[a, idx[(i + di) % side, (j + dj) % side]] -= params.lam
    return q


def dense_covariances(params: SfarParams, side: int) -> tuple[np.ndarray, np.ndarray]:
    """(Sigma0, Sigma1) as dense matrices; a test oracle for side <= 8."""
    if side > DENSE_MAX_SIDE or side < 2:
        raise ValueError(f"dense covariances need 2 <= side <= {DENSE_MAX_SIDE}, got {side}")
    if params.degenerate:
        raise SingularPrecisionError("precision is singular at zeta = 1/4")
    n = side * side
    s0 = params.sigma2 * np.eye(n)
    s1 = s0 + np.linalg.inv(precision_matrix(params, side))
    return s0, 0.5 * (s1 + s1.T)


def _header(field: TorusField) -> dict:
    return {
        "N": field.side,
        "kind": field.kind,
        "hypothesis": field.hypothesis,
        "seed": field.seed,
        "params": field.params.to_dict() if field.params is not None else None,
    }


def save_field(field: TorusField, path) -> Path:
    """Write a field row-major: ``.csv`` (``#`` JSON header line) or ``.bin``
    (JSON header line, then little-endian float64)."""
    path = Path(path)
    header = json.dumps(_header(field), sort_keys=True)
    if path.suffix == ".bin":
        with open(path, "wb") as fh:
            fh.write(header.encode() + b"\n")
            fh.write(field.values.astype("<f8").tobytes(order="C"))
    else:
        rows = "\n".join(",".join(repr(float(v)) for v in row) for row in field.values)
        path.write_text(f"# {header}\n{rows}\n")
    return path


def load_field(path) -> TorusField:
    path = Path(path)
    if path.suffix == ".bin":
        raw = path.read_bytes()
        cut = raw.index(b"\n")
        header = json.loads(raw[:cut])
        n = header["N"]
        values = np.frombuffer(raw[cut + 1:], dtype="<f8").reshape(n, n)
    else:
        lines = path.read_text().splitlines()
        header = json.loads(lines[0].lstrip("# "))
        values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln])
    params = SfarParams(**header["params"]) if header.get("params") else None
    return TorusField(values.copy(), header["kind"], header.get("seed"), params, header.get("hypothesis"))
