"""Detection of 2D hidden Gauss-Markov random fields: error exponents,
torus simulation, Monte Carlo validation and sensor-network efficiency."""
from .core import (
    CarCoefficients,
    DomainError,
    SfarParams,
    SpectrumFn,
    car_spectrum,
    elliptic_k,
    sfar_params_for_snr,
    sfar_spectrum,
    signal_power,
    snr,
)
from .exponent import (
    ExponentResult,
    FiniteRate,
    error_exponent,
    finite_lattice_kl_rate,
    integrand,
    sfar_error_exponent,
    stein_exponent,
)

__version__ = "0.1.0"
