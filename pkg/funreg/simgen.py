"""The Monte Carlo design for penalized multiple functional regression.

Four latent processes W_j = sum_k xi_jk phi_k with xi_jk ~ N(0, k^-2) are mixed
into correlated predictors X_1, ..., X_4; only X_1 and X_2 carry signal.
Every replicate draws from its own seed stream, so replicates can run in any
order or concurrently and still reproduce bit for bit.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError

from .errors import ConfigError, CoverageUndefinedError, DomainError, FunRegError
from .funcdata import CurveSet, Grid, ResponseVector, integrate
from .inference import COVERAGE_POINTS, ConfidenceBand, coverage_eval, fit_covariance, pointwise_band
from .solver import FitConfig
from .tuning import DEFAULT_K_VALUES, candidate_designs, select

logger = logging.getLogger(__name__)

NOISE_READINGS = ("sd", "variance")
SIGNAL_PREDICTORS = (0, 1)
NULL_PREDICTORS = (2, 3)

# # # # # # # # # # # # # # # # # # # # # # # # #


@dataclass(frozen = True)
class SimConfig:
    """One simulation scenario

    :param sigma: The noise level; the error variance under the default "variance"
        reading and the standard deviation under the "sd" reading
    """
    n: int = 100
    p: int = 4
    rho: float = 0.0
    sigma: float = 0.1
    G: int = 500
    n_basis: int = 50
    true_b1: Tuple[float, ...] = (-2.0, 1.0, -2.0, 1.0)
    true_b2: Tuple[float, ...] = (1.0, -1.0, 0.5, -0.5)
    seed: int = 0
    replicates: int = 500
    noise_reading: str = "variance"
    K_values: Tuple[int, ...] = DEFAULT_K_VALUES
    level: float = 0.95

    def __post_init__(self):
        if self.p != 4:
            raise ConfigError("The mixing design is defined for p = 4 predictors, got {}".format(self.p))
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive, got {}".format(self.sigma))
        if self.noise_reading not in NOISE_READINGS:
            raise ConfigError("noise_reading must be one of {}, got {!r}".format(NOISE_READINGS, self.noise_reading))
        if self.n < 2 or self.G < 2 or self.n_basis < 1 or self.replicates < 1:
            raise ConfigError("n, G, n_basis and replicates must be positive (n, G at least 2)")
        if max(len(self.true_b1), len(self.true_b2)) > self.n_basis:
            raise ConfigError("The true coefficients use more basis functions than n_basis")
        if max(self.K_values) >= self.n:
            raise ConfigError("Every K must be smaller than n")

    @property
    def noise_sd(self) -> float:
        """The standard deviation of the errors under the chosen reading"""
        return self.sigma if self.noise_reading == "sd" else math.sqrt(self.sigma)


@dataclass
class Replicate:
    curves: List[CurveSet]
    response: ResponseVector
    beta_curves: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    grid: Grid


@dataclass
class ReplicateOutcome:
    index: int
    mse: float = math.nan
    omse: float = math.nan
    tp: int = 0
    fp: int = 0
    K: int = 0
    lam: float = math.nan
    bands: Dict[int, Optional[ConfidenceBand]] = field(default_factory = dict)
    failed: bool = False


@dataclass(frozen = True)
class SimMetrics:
    rho: float
    sigma: float
    noise_reading: str
    noise_sd: float
    mse: float
    omse: float
    tp: float
    fp: float
    cov1: float
    cov2: float
    replicates: int
    failures: int
    seed: int

    def as_row(self) -> dict:
        return asdict(self)


# # # # # # # # # # # # # # # # # # # # # # # # #


def basis(k: int, t):
    """Returns phi_1 = 1 and phi_(k+1) = sqrt(2) cos(k pi t)

    :param k: The 1-based basis index
    :param t: A point or array of points of [0, 1]

    :raises DomainError: When k < 1
    """
    if k < 1:
        raise DomainError("Basis index must be at least 1, got {}".format(k))
    t = np.asarray(t, dtype = float)
    result = np.ones_like(t) if k == 1 else math.sqrt(2) * np.cos((k - 1) * math.pi * t)
    return float(result) if result.ndim == 0 else result


def basis_matrix(count: int, grid: Grid) -> np.ndarray:
    """Returns the first count basis functions sampled on the grid, one per row"""
    return np.vstack([basis(k, grid.points) for k in range(1, count + 1)])


def mixing_matrix(rho: float) -> np.ndarray:
    """Returns A with X_i = sum_j A_ij W_j:
    X_1 = W_1 + rho (W_2 + W_3), X_2 = W_2 + rho (W_1 + W_3), X_3 = W_3 + rho (W_1 + W_2), X_4 = W_4
    """
    return np.array([
        [1.0, rho, rho, 0.0],
        [rho, 1.0, rho, 0.0],
        [rho, rho, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0]
    ])


def true_beta_curves(config: SimConfig, grid: Grid) -> np.ndarray:
    """Returns the p true coefficient curves; beta_3 = beta_4 = 0"""
    betas = np.zeros((config.p, len(grid)))
    for j, coefficients in enumerate((config.true_b1, config.true_b2)):
        betas[j] = np.asarray(coefficients) @ basis_matrix(len(coefficients), grid)
    return betas


def replicate_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Returns the independent seed stream of one replicate"""
    return np.random.SeedSequence([seed, index])


def generate_replicate(config: SimConfig, seed) -> Replicate:
    """Draws one data set: predictors, responses and the true coefficient curves

    :param config: The scenario
    :param seed: An integer seed or a SeedSequence
    """
    rng = np.random.default_rng(seed)
    grid = Grid(config.G)
    phi = basis_matrix(config.n_basis, grid)
    scale = 1.0 / np.arange(1, config.n_basis + 1)

    # Latent processes, then the mixing into predictors
    xi = rng.standard_normal((config.p, config.n, config.n_basis)) * scale
    latent = xi @ phi
    mixed = np.einsum("ij,jng->ing", mixing_matrix(config.rho), latent)

    betas = true_beta_curves(config, grid)
    signal = sum(integrate(mixed[j] * betas[j], grid) for j in range(config.p))
    noise = rng.standard_normal(config.n) * config.noise_sd

    curves = [CurveSet(grid, mixed[j], "x{}".format(j + 1)) for j in range(config.p)]
    return Replicate(curves, ResponseVector(signal + noise), betas, signal, noise, grid)


def squared_error(beta_curves, true_curves, grid: Grid) -> float:
    """Returns sum_j ||beta_hat_j - beta_j||^2 with the grid quadrature"""
    difference = np.asarray(beta_curves) - np.asarray(true_curves)
    return float(np.sum(integrate(difference ** 2, grid)))


def run_replicate(config: SimConfig, index: int) -> ReplicateOutcome:
    """Generates, tunes and fits one replicate and scores it against the truth

    :param config: The scenario
    :param index: The replicate number, which selects its seed stream
    """
    outcome = ReplicateOutcome(index)
    try:
        data = generate_replicate(config, replicate_seed(config.seed, index))

        # Penalized fit over all predictors, tuned by GCV
        designs = candidate_designs(data.curves, config.K_values)
        K, lam, result, _ = select(designs, data.response, config = FitConfig(K = min(config.K_values)))
        outcome.K, outcome.lam = K, lam
        outcome.mse = squared_error(result.beta_curves, data.beta_curves, data.grid)
        outcome.tp = sum(j in result.active_set for j in SIGNAL_PREDICTORS)
        outcome.fp = sum(j in result.active_set for j in NULL_PREDICTORS)

        covariance = fit_covariance(result, designs[K][0]) if result.active_set else None
        for j in SIGNAL_PREDICTORS:
            outcome.bands[j] = pointwise_band(result, covariance, j, config.level) if j in result.active_set else None

        # Oracle: only the signal predictors, no shrinkage, K still by GCV
        oracle_designs = candidate_designs([data.curves[j] for j in SIGNAL_PREDICTORS], config.K_values)
        _, _, oracle, _ = select(oracle_designs, data.response, lambda_values = [0.0],
            config = FitConfig(K = min(config.K_values)))
        oracle_curves = np.zeros_like(data.beta_curves)
        oracle_curves[list(SIGNAL_PREDICTORS)] = oracle.beta_curves
        outcome.omse = squared_error(oracle_curves, data.beta_curves, data.grid)

    except (FunRegError, LinAlgError) as error:
        logger.warning("Replicate %d failed: %s", index, error)
        outcome.failed = True
    return outcome


def run_scenario(config: SimConfig, *, workers: int = 1) -> SimMetrics:
    """Runs every replicate of a scenario and averages the metrics in replicate order.
    Failed replicates are excluded from the averages and counted.

    :param config: The scenario
    :param workers: The number of replicates run concurrently
    """
    run = partial(run_replicate, config)
    indices = range(config.replicates)
    if workers > 1:
        with ThreadPoolExecutor(max_workers = workers) as executor:
            outcomes = list(executor.map(run, indices))
    else:
        outcomes = [run(index) for index in indices]

    succeeded = [outcome for outcome in outcomes if not outcome.failed]
    failures = len(outcomes) - len(succeeded)
    if failures:
        logger.warning("%d of %d replicates failed (rho=%g, sigma=%g)", failures, len(outcomes), config.rho, config.sigma)

    true_curves = true_beta_curves(config, Grid(config.G))
    coverages = []
    for j in SIGNAL_PREDICTORS:
        try:
            coverages.append(coverage_eval(true_curves[j], [outcome.bands[j] for outcome in succeeded], COVERAGE_POINTS))
        except CoverageUndefinedError:
            coverages.append(math.nan)

    def average(values):
        values = list(values)
        return float(np.mean(values)) if values else math.nan

    return SimMetrics(
        rho = config.rho,
        sigma = config.sigma,
        noise_reading = config.noise_reading,
        noise_sd = config.noise_sd,
        mse = average(outcome.mse for outcome in succeeded),
        omse = average(outcome.omse for outcome in succeeded),
        tp = average(outcome.tp for outcome in succeeded),
        fp = average(outcome.fp for outcome in succeeded),
        cov1 = coverages[0],
        cov2 = coverages[1],
        replicates = len(succeeded),
        failures = failures,
        seed = config.seed)


def table1_scenarios(*, replicates: int = 500, seed: int = 0, noise_readings: Sequence[str] = ("variance",),
                     rhos: Sequence[float] = (0.0, 0.2, 0.5), sigmas: Sequence[float] = (0.1, 0.3)) -> List[SimConfig]:
    """Returns the six scenarios (noise level outer, correlation inner) for each noise reading"""
    return [
        SimConfig(rho = rho, sigma = sigma, seed = seed, replicates = replicates, noise_reading = reading)
        for reading in noise_readings
        for sigma in sigmas
        for rho in rhos
    ]


def run_table1(scenarios: Sequence[SimConfig], *, workers: int = 1) -> pd.DataFrame:
    """Runs every scenario and returns one metrics row per scenario"""
    rows = []
    for config in scenarios:
        logger.info("Running scenario rho=%g sigma=%g (%s), %d replicates",
            config.rho, config.sigma, config.noise_reading, config.replicates)
        rows.append(run_scenario(config, workers = workers).as_row())
    return pd.DataFrame(rows)
