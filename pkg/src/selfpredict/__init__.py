"""Simulator for self-predictive representation dynamics on tabular chains."""

from .errors import (
    DegenerateCovarianceError,
    InnerSolveFailureError,
    InvalidInputError,
    NonConvergenceError,
    NotDoublyStochasticError,
    NotSymmetricError,
    SelfPredictError,
    ShapeMismatchError,
    StepSizeUnderflowError,
    UnknownScenarioError,
)
from .markov import (
    SpectralSummary,
    TransitionMatrix,
    fixed_example_2x2,
    fixed_example_3x3,
    gen_doubly_stochastic,
    gen_symmetric,
    n_step_matrix,
    sinkhorn_normalize,
    spectral,
    uniform_distribution,
    validate_distribution,
)
from .metrics import (
    CollapseMetrics,
    MetricBundle,
    Normalizers,
    collapse_metrics,
    normalizers,
    reference_normalizer,
    svd_trace_objective,
    trace_objective,
)
from .dynamics import (
    DynamicsConfig,
    TrajectoryRecord,
    covariance_solve,
    flow_residual,
    full_gradient_step,
    integrate_ode,
    noisy_predictor,
    ode_rhs,
    optimal_predictor,
    orthonormal_init,
    prediction_loss,
    predictor_gradient,
    run_discrete,
    run_discrete_batch,
    semi_gradient_step,
    solve_predictor,
)
from .bidirectional import (
    BidirState,
    bidir_ode_rhs,
    bidir_optimal_predictors,
    integrate_bidir,
    run_discrete_bidir,
)
from .seeding import (
    STREAM_INIT_LEFT,
    STREAM_INIT_RIGHT,
    STREAM_MATRIX,
    STREAM_NOISE,
    stream_rng,
    stream_seed,
)

__version__ = "0.1.0"

__all__ = [
    "BidirState",
    "CollapseMetrics",
    "DegenerateCovarianceError",
    "DynamicsConfig",
    "InnerSolveFailureError",
    "InvalidInputError",
    "MetricBundle",
    "NonConvergenceError",
    "Normalizers",
    "NotDoublyStochasticError",
    "NotSymmetricError",
    "STREAM_INIT_LEFT",
    "STREAM_INIT_RIGHT",
    "STREAM_MATRIX",
    "STREAM_NOISE",
    "SelfPredictError",
    "ShapeMismatchError",
    "SpectralSummary",
    "StepSizeUnderflowError",
    "TrajectoryRecord",
    "TransitionMatrix",
    "UnknownScenarioError",
    "bidir_ode_rhs",
    "bidir_optimal_predictors",
    "collapse_metrics",
    "covariance_solve",
    "fixed_example_2x2",
    "fixed_example_3x3",
    "flow_residual",
    "full_gradient_step",
    "gen_doubly_stochastic",
    "gen_symmetric",
    "integrate_bidir",
    "integrate_ode",
    "n_step_matrix",
    "noisy_predictor",
    "normalizers",
    "ode_rhs",
    "optimal_predictor",
    "orthonormal_init",
    "prediction_loss",
    "predictor_gradient",
    "reference_normalizer",
    "run_discrete",
    "run_discrete_batch",
    "run_discrete_bidir",
    "semi_gradient_step",
    "sinkhorn_normalize",
    "solve_predictor",
    "spectral",
    "stream_rng",
    "stream_seed",
    "svd_trace_objective",
    "trace_objective",
    "uniform_distribution",
    "validate_distribution",
]
