import logging
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtri

from .errors import CoverageUndefinedError, DimensionMismatchError, DomainError
from .fpca import ScoreMatrix
from .funcdata import Grid
from .solver import FitResult

logger = logging.getLogger(__name__)

# The grid where Monte Carlo coverage is evaluated
COVERAGE_POINTS = tuple(np.round(np.arange(1, 10) / 10, 1))

# # # # # # # # # # # # # # # # # # # # # # # # #


class CoefCovariance:
    """The sandwich covariance of the nonzero coefficient blocks

    :param full: The covariance of all active coefficients, in active-set order
    :param groups: The active predictor indices
    :param K: The block size
    """

    def __init__(self, full, groups: Sequence[int], K: int):
        full = np.array(full, dtype = float)
        groups = tuple(int(j) for j in groups)
        if full.shape != (len(groups) * K, len(groups) * K):
            raise DimensionMismatchError("Expected a {0} x {0} covariance for {1} groups, got {2}".format(
                len(groups) * K, len(groups), full.shape))
        full.setflags(write = False)

        self.__full = full
        self.__groups = groups
        self.__K = int(K)

    @property
    def full(self) -> np.ndarray:
        return self.__full

    @property
    def groups(self) -> Tuple[int, ...]:
        return self.__groups

    @property
    def K(self) -> int:
        return self.__K

    @property
    def blocks(self) -> Dict[int, np.ndarray]:
        """The K * K diagonal blocks, keyed by predictor index"""
        K = self.__K
        return {
            j: self.__full[position * K:(position + 1) * K, position * K:(position + 1) * K]
            for position, j in enumerate(self.__groups)
        }

    def block(self, j: int) -> np.ndarray:
        if j not in self.__groups:
            raise DomainError("Predictor {} has no covariance block".format(j))
        return self.blocks[j]


class ConfidenceBand:
    """A pointwise confidence band center(t) +/- half_width(t)

    :param grid: The Grid the band is sampled on
    :param center: The estimated coefficient curve
    :param half_width: The nonnegative half width at each grid point
    :param level: The nominal coverage level
    :param label: The predictor the band belongs to
    """

    def __init__(self, grid: Grid, center, half_width, level: float, label: str = ""):
        center = np.array(center, dtype = float).reshape(-1)
        half_width = np.array(half_width, dtype = float).reshape(-1)
        if len(center) != len(grid) or len(half_width) != len(grid):
            raise DimensionMismatchError("A band must be sampled on {} points".format(len(grid)))
        center.setflags(write = False)
        half_width.setflags(write = False)

        self.__grid = grid
        self.__center = center
        self.__half_width = half_width
        self.__level = float(level)
        self.__label = label

    @property
    def grid(self) -> Grid:
        return self.__grid

    @property
    def center(self) -> np.ndarray:
        return self.__center

    @property
    def half_width(self) -> np.ndarray:
        return self.__half_width

    @property
    def level(self) -> float:
        return self.__level

    @property
    def label(self) -> str:
        return self.__label

    @property
    def lower(self) -> np.ndarray:
        return self.__center - self.__half_width

    @property
    def upper(self) -> np.ndarray:
        return self.__center + self.__half_width

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "t": self.__grid.points,
            "center": self.__center,
            "lower": self.lower,
            "upper": self.upper
        })
        if self.__grid.domain is not None:
            frame.insert(1, "physical", self.__grid.physical_points)
        return frame


# # # # # # # # # # # # # # # # # # # # # # # # #


def normal_quantile(level: float) -> float:
    """Returns the two-sided standard normal quantile z_(1 - alpha / 2)"""
    if not 0 < level < 1:
        raise DomainError("Confidence level must be in (0, 1), got {}".format(level))
    return float(ndtri(0.5 + level / 2))


def sandwich_covariance(Z_active, R_active, residuals, n: int, *, K: int, groups: Sequence[int] = None) -> CoefCovariance:
    """Returns A^-1 Z' diag(e^2) Z A^-1 with A = Z'Z + n R for the active columns.
    The n * n diagonal is never formed.

    :param Z_active: The n * qK active score columns
    :param R_active: The qK diagonal of R, or the qK * qK matrix itself
    :param residuals: The n residuals of the converged fit
    :param n: The sample size
    :param K: The block size
    :param groups: The predictor index of each active block

    :raises DomainError: When no predictor is active
    """
    Z_active = np.asarray(Z_active, dtype = float)
    if Z_active.ndim != 2 or Z_active.shape[1] == 0:
        raise DomainError("A covariance needs at least one active predictor")
    residuals = np.asarray(residuals, dtype = float)
    if len(residuals) != Z_active.shape[0]:
        raise DimensionMismatchError("Expected {} residuals, got {}".format(Z_active.shape[0], len(residuals)))
    R_active = np.asarray(R_active, dtype = float)
    if R_active.ndim == 1:
        R_active = np.diag(R_active)
    if groups is None:
        groups = range(Z_active.shape[1] // K)

    bread = cho_factor(Z_active.T @ Z_active + n * R_active)
    weighted = Z_active * residuals[:, None]
    meat = weighted.T @ weighted
    half = cho_solve(bread, meat)
    full = cho_solve(bread, half.T).T
    return CoefCovariance(0.5 * (full + full.T), groups, K)


def fit_covariance(result: FitResult, design: ScoreMatrix) -> CoefCovariance:
    """Returns the sandwich covariance of a fit's active coefficients

    :param result: The converged fit
    :param design: The design the fit was computed from
    """
    groups = list(result.active_set)
    columns = design.columns(groups)
    return sandwich_covariance(
        design.scores[:, columns],
        np.repeat(result.weights[groups], result.K),
        result.residuals,
        design.n,
        K = result.K,
        groups = groups)


def pointwise_band(result: FitResult, covariance: CoefCovariance, j: int, level: float = 0.95) -> ConfidenceBand:
    """Returns the pointwise band beta_j(t) +/- z sqrt(phi_j(t)' Cov(b_j) phi_j(t))

    :param result: The fit
    :param covariance: The sandwich covariance of the fit
    :param j: An active predictor
    :param level: The nominal coverage level

    :raises DomainError: When j is not active or the level is outside (0, 1)
    """
    if j not in result.active_set:
        raise DomainError("Predictor {} is not active in the fit".format(result.labels[j]))
    z = normal_quantile(level)
    phi = result.eigenfunctions[j]
    variance = np.einsum("kg,kl,lg->g", phi, covariance.block(j), phi)
    half_width = z * np.sqrt(np.maximum(variance, 0.0))
    return ConfidenceBand(result.grid, result.beta_curves[j], half_width, level, result.labels[j])


def coverage_eval(true_beta, bands: Sequence[ConfidenceBand], eval_points: Sequence[float] = COVERAGE_POINTS) -> float:
    """Returns the fraction of (replicate, point) pairs where the true curve lies
    inside the band, over the replicates where the predictor was active.
    Each point is evaluated at its nearest grid point.

    :param true_beta: The true coefficient curve sampled on the band grid
    :param bands: One band per replicate, None where the predictor was dropped
    :param eval_points: The points of [0, 1] to evaluate at

    :raises CoverageUndefinedError: When the predictor was never active
    """
    bands = [band for band in bands if band is not None]
    if len(bands) == 0:
        raise CoverageUndefinedError("The predictor was not selected in any replicate")

    true_beta = np.asarray(true_beta, dtype = float)
    hits = []
    for band in bands:
        index = [band.grid.nearest_index(t) for t in eval_points]
        distance = np.abs(true_beta[index] - band.center[index])
        hits.append(distance <= band.half_width[index])
    return float(np.mean(hits))
