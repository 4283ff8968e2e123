"""Coupled heavy-tailed walk simulation and transform verification.

Monte Carlo engines for space-time coupled walks whose jump length is
tied to the waiting time, for their distributed-exponent variants, and
for the limiting coupled jump processes, together with the transform
calculus needed to check the governing equations numerically.
"""

__version__ = "0.1.0"

from . import _kernels
from .rng import RngStream
from .sampling import (
    DirectionMeasure,
    HeavyTailLaw,
    MixingDensity,
    QuantileTable,
    build_quantile_table,
    qbeta,
    validate_mixing_density,
)

__all__ = [
    "__version__",
    "_kernels",
    "RngStream",
    "DirectionMeasure",
    "HeavyTailLaw",
    "MixingDensity",
    "QuantileTable",
    "build_quantile_table",
    "qbeta",
    "validate_mixing_density",
]
