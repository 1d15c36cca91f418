from .errors import (
    FunRegError,
    DimensionMismatchError,
    DomainError,
    ConfigError,
    ParseError,
    DegenerateFitError,
    TuningError,
    CoverageUndefinedError
)

from .funcdata import (
    Grid, CurveSet, ResponseVector,
    integrate, inner_product, center, differentiate, expand_derivatives,
    load_curves, curves_to_frame
)
from .fpca import (
    EigenSystem, ScoreMatrix, Decomposition, LambdaMatrix,
    empirical_covariance, eigendecompose, scores, assemble_design, decompose, lambda_diagnostic
)
from .scad import ScadParams, scad_derivative, scad_value, group_norm
from .solver import FitConfig, FitResult, lqa_step, fit, intercept, predict
from .inference import (
    CoefCovariance, ConfidenceBand,
    sandwich_covariance, fit_covariance, pointwise_band, coverage_eval
)
from .tuning import TuningGrid, gcv_score, select, candidate_designs
from .simgen import SimConfig, SimMetrics, basis, generate_replicate, run_scenario
