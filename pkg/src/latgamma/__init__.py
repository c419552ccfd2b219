"""Long-range lattice spin energies, majority coarse graining and surface-tension limits."""

from ._accel import BACKEND, COMPILED, get_threads, set_threads
from .coarsegrain import CoarseGrainParams, CoarseGrainResult, Label, classify, k_sets, majority_statistic
from .energy import (
    CoefficientMask,
    EnergyParams,
    NumericalError,
    coefficient_mask,
    energy,
    energy_direct,
    energy_fft,
    line_jump_bound,
    pair_difference_count,
)
from .field import (
    Ball,
    Complement,
    HalfSpace,
    PeriodicLattice,
    Perforated,
    Polytope,
    SpinField,
    Whole,
    interpolate,
    l1_distance,
    sample,
    voronoi_volume_estimate,
    window_average,
    window_fraction,
)
from .gammalab import (
    ConvergenceReport,
    Schedule,
    fit_rate,
    halfspace_experiment,
    perforation_counterexample,
    polytope_experiment,
    riemann_phi,
)
from .kernel import Kernel, QuadratureSpec, first_moment, phi, sigma_radial

__version__ = "0.1.0"
