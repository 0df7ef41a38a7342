"""Maximum-entropy ("lazy") continuous ensembles of pure states averaging to a
given density matrix, plus the classical maximum-entropy die."""

from .die import GibbsDie, gibbs_probs, shannon_entropy, solve_beta
from .errors import (
    Degenerate,
    DegenerateValues,
    InfeasibleMean,
    LazyEnsError,
    MismatchedState,
    NoConvergence,
    NotHermitian,
    NotPositive,
    NotUnitary,
    NotUnitTrace,
    ValidationError,
)
from .hermitian import DensityMatrix, SpectralDecomposition, conjugate, eigh, validate_density
from .partition import (
    PartitionValue,
    divided_diff_exp,
    log_partition,
    partition,
    partition_gradient,
    partition_hessian,
)
from .sampler import SampleBatch, estimate_kl, mc_partition_oracle, sample, sample_uniform_state
from .solver import LazyEnsemble, SolveReport, dual_objective, ensemble_average, kl_from_uniform, solve

__version__ = "0.1.0"
