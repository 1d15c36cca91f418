import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConfigError, DegenerateFitError, DimensionMismatchError
from .fpca import Decomposition, ScoreMatrix
from .funcdata import CurveSet, Grid, ResponseVector, inner_product, integrate
from .scad import ScadParams, group_norms, scad_derivative, scad_value

logger = logging.getLogger(__name__)

# # # # # # # # # # # # # # # # # # # # # # # # #


@dataclass(frozen = True)
class FitConfig:
    """Settings for one penalized fit

    :param K: The truncation level shared by all predictors
    :param scad: The group SCAD penalty
    :param drop_threshold: Groups whose norm falls below this are set to zero for good
    :param max_iterations: The cap on LQA iterations
    :param convergence_tol: Stop once no group moves further than this
    :param ridge_init: The ridge added to singular systems
    """
    K: int = 4
    scad: ScadParams = field(default_factory = ScadParams)
    drop_threshold: float = 1e-5
    max_iterations: int = 100
    convergence_tol: float = 1e-6
    ridge_init: float = 1e-8

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("K must be a positive integer, got {}".format(self.K))
        if self.drop_threshold <= 0 or self.convergence_tol <= 0:
            raise ConfigError("drop_threshold and convergence_tol must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError("max_iterations must be a positive integer")
        if self.ridge_init < 0:
            raise ConfigError("ridge_init must be nonnegative")


@dataclass(frozen = True)
class FitResult:
    """A converged (or capped) penalized fit.

    Coefficients of predictors outside the active set are exactly zero,
    as are their coefficient curves.
    """
    b_hat: np.ndarray
    active_set: Tuple[int, ...]
    intercept: float
    beta_curves: np.ndarray
    iterations: int
    converged: bool
    K: int
    lam: float
    a: float
    weights: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    criterion_path: Tuple[float, ...]
    ridge_used: bool
    eigenfunctions: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...]
    grid: Grid

    @property
    def p(self) -> int:
        return len(self.labels)

    def coefficients(self, j: int) -> np.ndarray:
        """Returns the K coefficients of predictor j"""
        return self.b_hat[j * self.K:(j + 1) * self.K]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "lambda": self.lam,
            "a": self.a,
            "intercept": self.intercept,
            "active_set": [self.labels[j] for j in self.active_set],
            "iterations": self.iterations,
            "converged": self.converged,
            "ridge_used": self.ridge_used,
            "criterion_path": list(self.criterion_path),
            "grid": {"size": len(self.grid), "domain": self.grid.domain},
            "predictors": [
                {
                    "label": self.labels[j],
                    "active": j in self.active_set,
                    "b_hat": self.coefficients(j).tolist(),
                    "weight": float(self.weights[j]),
                    "beta": self.beta_curves[j].tolist(),
                    "eigenfunctions": self.eigenfunctions[j].tolist()
                }
                for j in range(self.p)
            ]
        }

    @staticmethod
    def from_dict(data: dict) -> 'FitResult':
        """Rebuilds a fit saved with to_dict. The training fitted values
        and residuals are not saved, so they come back empty.

        :param data: The saved fit
        """
        grid = Grid(data["grid"]["size"], domain = data["grid"].get("domain"))
        predictors = data["predictors"]
        labels = tuple(predictor["label"] for predictor in predictors)
        return FitResult(
            b_hat = np.concatenate([np.asarray(predictor["b_hat"], dtype = float) for predictor in predictors]),
            active_set = tuple(j for j, predictor in enumerate(predictors) if predictor["active"]),
            intercept = float(data["intercept"]),
            beta_curves = np.asarray([predictor["beta"] for predictor in predictors], dtype = float),
            iterations = int(data["iterations"]),
            converged = bool(data["converged"]),
            K = int(data["K"]),
            lam = float(data["lambda"]),
            a = float(data["a"]),
            weights = np.asarray([predictor["weight"] for predictor in predictors], dtype = float),
            fitted = np.zeros(0),
            residuals = np.zeros(0),
            criterion_path = tuple(data.get("criterion_path", ())),
            ridge_used = bool(data.get("ridge_used", False)),
            eigenfunctions = tuple(np.asarray(predictor["eigenfunctions"], dtype = float) for predictor in predictors),
            labels = labels,
            grid = grid
        )


# # # # # # # # # # # # # # # # # # # # # # # # #


def penalty_weights(b, K: int, params: ScadParams) -> np.ndarray:
    """Returns p'(||b_j||) / ||b_j|| for every group; zero groups get weight 0

    :param b: The grouped coefficients
    :param K: The group size
    :param params: The penalty parameters
    """
    norms = group_norms(b, K)
    weights = np.zeros_like(norms)
    nonzero = norms > 0
    weights[nonzero] = scad_derivative(norms[nonzero], params) / norms[nonzero]
    return weights


def criterion(Z, y_centered, b, K: int, params: ScadParams) -> float:
    """Returns the penalized least squares criterion that the LQA update descends,
    0.5 ||y - Z b||^2 + n sum_j p(||b_j||)

    :param Z: The n * pK design
    :param y_centered: The centered responses
    :param b: The grouped coefficients
    :param K: The group size
    :param params: The penalty parameters
    """
    residual = y_centered - Z @ b
    n = len(y_centered)
    return float(0.5 * residual @ residual + n * np.sum(scad_value(group_norms(b, K), params)))


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray, ridge: float) -> Tuple[np.ndarray, bool]:
    """Solves a symmetric positive definite system, retrying once with
    a ridge on the diagonal when the factorization fails
    """
    try:
        return cho_solve(cho_factor(matrix), rhs), False
    except LinAlgError:
        ridge = ridge if ridge > 0 else 1e-8
        shift = ridge * max(float(np.trace(matrix)) / len(matrix), 1.0)
        try:
            return cho_solve(cho_factor(matrix + shift * np.eye(len(matrix))), rhs), True
        except LinAlgError:
            raise DegenerateFitError("The LQA system stays singular after a ridge of {}".format(shift))


def lqa_step(Z_active, y_centered, b_current, config: FitConfig) -> Tuple[np.ndarray, bool]:
    """Performs one local quadratic approximation update,
    solving (Z'Z + n R(b)) b_new = Z'y with R = diag(p'(||b_j||) / ||b_j||)

    :param Z_active: The n * qK score columns of the groups still in the model
    :param y_centered: The centered responses
    :param b_current: The current coefficients of those groups, none of them zero
    :param config: The fit settings

    :returns: The new coefficients and whether a ridge had to be added
    """
    Z_active = np.asarray(Z_active, dtype = float)
    n = Z_active.shape[0]
    weights = np.repeat(penalty_weights(b_current, config.K, config.scad), config.K)
    system = Z_active.T @ Z_active + n * np.diag(weights)
    return _solve_spd(system, Z_active.T @ y_centered, config.ridge_init)


def _drop_small(b: np.ndarray, active: List[int], K: int, threshold: float) -> List[int]:
    norms = group_norms(b, K)
    kept = []
    for j in active:
        if norms[j] < threshold:
            b[j * K:(j + 1) * K] = 0.0
        else:
            kept.append(j)
    return kept


def intercept(response: ResponseVector, beta_curves, means, grid: Grid) -> float:
    """Returns a = mean(Y) - sum_j <beta_j, mean of X_j>

    :param response: The training responses
    :param beta_curves: The p coefficient curves
    :param means: The p training mean curves
    :param grid: The shared Grid
    """
    return float(response.mean - sum(
        inner_product(beta, mean, grid) for beta, mean in zip(beta_curves, means)))


def fit(design: ScoreMatrix, response: ResponseVector, components: Sequence[Decomposition], config: FitConfig) -> FitResult:
    """Minimizes the group SCAD penalized least squares criterion by iterating
    LQA updates from the (ridge stabilized) least squares start.

    After every step, groups with norm below the drop threshold are set to zero
    and ignored for the rest of the fit.

    :param design: The n * pK score design
    :param response: The training responses
    :param components: The per-predictor decompositions the design was built from
    :param config: The fit settings

    :raises DimensionMismatchError: When the inputs disagree on n, p or K
    """
    # Check that the design, responses and decompositions agree on n, p and K
    Z = design.scores
    n, p, K = design.n, design.p, design.K
    if len(response) != n:
        raise DimensionMismatchError("Design has {} rows but there are {} responses".format(n, len(response)))
    if K != config.K:
        raise DimensionMismatchError("Design has K = {} but the config asks for {}".format(K, config.K))
    if len(components) != p or any(component.eigensystem.K != K for component in components):
        raise DimensionMismatchError("Expected {} decompositions with {} eigenpairs".format(p, K))

    y_centered = response.centered
    params = config.scad

    # Least squares start, ridge stabilized when Z'Z is singular
    b, ridge_used = _solve_spd(Z.T @ Z, Z.T @ y_centered, config.ridge_init)
    active = _drop_small(b, list(range(p)), K, config.drop_threshold)
    path = [criterion(Z, y_centered, b, K, params)]

    converged = len(active) == 0
    iterations = 0
    while not converged and iterations < config.max_iterations:
        iterations += 1

        # Solve the quadratic approximation over the groups still active
        columns = design.columns(active)
        step, ridged = lqa_step(Z[:, columns], y_centered, b[columns], config)
        ridge_used = ridge_used or ridged

        # Dropped groups stay at zero; the step size is the largest group change
        updated = np.zeros_like(b)
        updated[columns] = step
        change = max(np.linalg.norm(updated[j * K:(j + 1) * K] - b[j * K:(j + 1) * K]) for j in active)
        active = _drop_small(updated, active, K, config.drop_threshold)
        b = updated
        path.append(criterion(Z, y_centered, b, K, params))

        if change < config.convergence_tol or len(active) == 0:
            converged = True

    # Reported at DEBUG; select and the fit command summarise capped fits
    if not converged:
        logger.debug("LQA stopped after %d iterations without converging (K=%d, lambda=%g)",
            iterations, K, params.lam)
    logger.debug("Fit K=%d lambda=%g: %d iterations, active %s", K, params.lam, iterations, active)

    # Coefficient curves and intercept
    eigenfunctions = tuple(component.eigensystem.eigenfunctions for component in components)
    beta_curves = np.vstack([
        b[j * K:(j + 1) * K] @ eigenfunctions[j] for j in range(p)
    ])
    grid = components[0].grid
    fitted = Z @ b
    b.setflags(write = False)
    beta_curves.setflags(write = False)

    return FitResult(
        b_hat = b,
        active_set = tuple(active),
        intercept = intercept(response, beta_curves, [component.mean for component in components], grid),
        beta_curves = beta_curves,
        iterations = iterations,
        converged = converged,
        K = K,
        lam = params.lam,
        a = params.a,
        weights = penalty_weights(b, K, params),
        fitted = fitted,
        residuals = y_centered - fitted,
        criterion_path = tuple(path),
        ridge_used = ridge_used,
        eigenfunctions = eigenfunctions,
        labels = design.labels,
        grid = grid
    )


def predict(result: FitResult, curves: List[CurveSet]) -> ResponseVector:
    """Predicts responses a + sum_j <beta_j, X_ij> for new curves

    :param result: The fit to predict with
    :param curves: The new curves, one CurveSet per predictor on the training Grid

    :raises DimensionMismatchError: When the predictors or grids do not match the fit
    """
    if len(curves) != result.p:
        raise DimensionMismatchError("The fit has {} predictors, got {}".format(result.p, len(curves)))
    n = len(curves[0])
    predictions = np.full(n, result.intercept)
    for j, predictor in enumerate(curves):
        if predictor.grid != result.grid or len(predictor) != n:
            raise DimensionMismatchError("Predictor {} is not on the training grid".format(predictor.label))
        if j in result.active_set:
            predictions = predictions + integrate(predictor.values * result.beta_curves[j], result.grid)
    return ResponseVector(predictions)
