"""Generalized Katugampola fractional calculus and a Picard solver for
weighted Cauchy-type problems on graded meshes."""

from .expressions import EvalError, ParseError, evaluate, parse, to_source
from .operators import (
    FracParams,
    GridFunction,
    PowerFn,
    generalized_derivative_grid,
    generalized_derivative_power,
    integral_kernel,
    integral_power,
    katugampola_derivative_grid,
    katugampola_integral_grid,
    power_derivative,
    to_t,
    to_u,
)
from .quadrature import (
    GradedMesh,
    MeshError,
    PanelMoments,
    abel_convolve,
    abel_weight_matrix,
    build_mesh,
    kernel_backend,
    panel_moments,
)
from .solver import (
    BallViolationError,
    DegenerateSeriesError,
    HypothesisData,
    HypothesisReport,
    ProblemSpec,
    SolveResult,
    SolverConfig,
    apriori_log_terms,
    apriori_products,
    existence_radius,
    phi0,
    picard_solve,
    picard_step,
    ratio_sequence,
    residual,
    transformed_length,
    verify_hypotheses,
)
from .special import (
    MLParams,
    NonConvergenceError,
    beta,
    gamma,
    gauss_gamma_product,
    log_beta,
    log_gamma,
    mittag_leffler,
)

__version__ = "0.1.0"
