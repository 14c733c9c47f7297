"""Numerical laboratory for localization in the discrete Anderson model.

Finite cubes of Z^d carry random-potential hopping Hamiltonians; on top
of them the package estimates fractional moments of Green's functions,
audits the operator identities and bounds behind the fractional-moment
method, measures spectral statistics (almost-sure spectrum, integrated
density of states, fluctuation-boundary tails, level spacings),
evolves wavepackets exactly, and verifies rank-one perturbation theory.
"""

from .disorder import (
    BernoulliAtoms,
    DisorderField,
    Distribution,
    PiecewiseConstantDensity,
    SeedSpec,
    UniformDensity,
    density_eval,
    rescale,
    sample_field,
    support,
)
from .errors import (
    AndersonLabError,
    ConfigError,
    CyclicityError,
    FitError,
    NoDensityError,
    QuadratureError,
    SingularShiftError,
)
from .fitting import DecayFit, fit_log_decay
from .lattice import Box, BoundaryPairSet, Site, boundary_pairs, build_box, neighbors
from .numerics import (
    ComplexEnergy,
    EigenSystem,
    adaptive_quadrature,
    eig_sym,
    eigensystem,
    solve_shifted,
)
from .operator import DepletedPair, Hamiltonian, apply, assemble, deplete, free_hamiltonian

__version__ = "0.1.0"

__all__ = [
    "AndersonLabError",
    "BernoulliAtoms",
    "BoundaryPairSet",
    "Box",
    "ComplexEnergy",
    "ConfigError",
    "CyclicityError",
    "DecayFit",
    "DepletedPair",
    "DisorderField",
    "Distribution",
    "EigenSystem",
    "FitError",
    "Hamiltonian",
    "NoDensityError",
    "PiecewiseConstantDensity",
    "QuadratureError",
    "SeedSpec",
    "SingularShiftError",
    "Site",
    "UniformDensity",
    "adaptive_quadrature",
    "apply",
    "assemble",
    "boundary_pairs",
    "build_box",
    "density_eval",
    "deplete",
    "eig_sym",
    "eigensystem",
    "fit_log_decay",
    "free_hamiltonian",
    "neighbors",
    "rescale",
    "sample_field",
    "solve_shifted",
    "support",
]
