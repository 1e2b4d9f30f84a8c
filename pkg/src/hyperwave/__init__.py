"""Wave equations on real hyperbolic spaces: spherical analysis, kernels,
dispersive estimates, a radial spectral solver and exponent geometry."""

from .errors import (
    DivergenceError,
    HyperwaveError,
    NonConvergenceError,
    PoleError,
    TailTruncationError,
    ValidationError,
)
from .space import SpaceParams, SpectralGrid, phi, phi_matrix, phi_hc, c_function, plancherel_density
from .transforms import (
    RadialFunction,
    SpectralFunction,
    spherical_transform,
    inverse_spherical_transform,
    lq_norm,
    abel_inverse,
    abel_transform,
    calibrate_constants,
)
from .wave import WaveState, propagate, energy, conserved_pair, nlw_picard
from .lwp import classify, thresholds, sigma_min, admissible, AdmissiblePair, bruteforce_witness

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "HyperwaveError",
    "NonConvergenceError",
    "PoleError",
    "TailTruncationError",
    "ValidationError",
    "SpaceParams",
    "SpectralGrid",
    "phi",
    "phi_matrix",
    "phi_hc",
    "c_function",
    "plancherel_density",
    "RadialFunction",
    "SpectralFunction",
    "spherical_transform",
    "inverse_spherical_transform",
    "lq_norm",
    "abel_inverse",
    "abel_transform",
    "calibrate_constants",
    "WaveState",
    "propagate",
    "energy",
    "conserved_pair",
    "nlw_picard",
    "classify",
    "thresholds",
    "sigma_min",
    "admissible",
    "AdmissiblePair",
    "bruteforce_witness",
]
