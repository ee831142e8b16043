"""Phase-damping dynamics solved exactly and as averaged random unitary evolution."""

from .engine import (DensityMatrix, Hamiltonian, evolve_exact, evolve_mc, linear_entropy, purity,
                     read_density_matrix, read_hamiltonian, write_matrix)
from .errors import ClassificationError, ConfigurationError, DephasimError, DomainError, NumericalError
from .montecarlo import EstimateWithError, SeedSpec
from .observables import (GaussianPacket, MomentumGrid, PlaneWavePair, damped_pattern, erf_integral_identity,
                          linear_entropy_closed_form, linear_entropy_oracle, mc_gaussian_entropy, mc_pattern,
                          purity_gaussian_oracle, unitary_pattern)
from .profiles import (DecoherenceProfile, Regime, RegimeClass, builtin_profiles, classify_regime,
                       from_expression, lambda_of_t)
from .stochastic import (BrownianPath, TimeGrid, expect_trig, ito_integral, moment_closed_form, moment_recursion,
                         sample_brownian_path, sample_phase_time)

__version__ = "0.1.0"
