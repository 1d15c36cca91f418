import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DegenerateFitError, FunRegError, TuningError
from .fpca import Decomposition, ScoreMatrix, decompose, truncate_design
from .funcdata import CurveSet, ResponseVector
from .scad import ScadParams
from .solver import FitConfig, FitResult, fit

logger = logging.getLogger(__name__)

DEFAULT_K_VALUES = tuple(range(1, 9))
DEFAULT_LAMBDA_COUNT = 30
DEFAULT_LAMBDA_RATIO = 1e-3

# # # # # # # # # # # # # # # # # # # # # # # # #


@dataclass(frozen = True)
class TuningRow:
    K: int
    lam: float
    gcv: float
    active_size: int
    converged: bool
    degenerate: bool


class TuningGrid:
    """The (K, lambda) pairs that were evaluated and their GCV scores

    :param K_values: The truncation levels, increasing
    :param lambda_values: The penalty levels, decreasing
    :param rows: One TuningRow per evaluated pair in (K, lambda) order
    """

    def __init__(self, K_values: Sequence[int], lambda_values: Sequence[float], rows: List[TuningRow]):
        self.K_values = tuple(K_values)
        self.lambda_values = tuple(lambda_values)
        self.rows = list(rows)

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(row.K, row.lam, row.gcv, row.active_size, row.converged, row.degenerate) for row in self.rows],
            columns = ["K", "lambda", "gcv", "active_size", "converged", "degenerate"])


# # # # # # # # # # # # # # # # # # # # # # # # #


def _hat_system(Z_active, weights):
    n = Z_active.shape[0]
    gram = Z_active.T @ Z_active
    try:
        return cho_factor(gram + n * np.diag(weights)), gram
    except LinAlgError:
        raise DegenerateFitError("The hat matrix system is singular")


def hat_trace(Z_active, weights) -> float:
    """Returns tr(Z (Z'Z + n R)^-1 Z') = tr((Z'Z + n R)^-1 Z'Z) without forming the hat matrix

    :param Z_active: The n * q active score columns
    :param weights: The q diagonal entries of R
    """
    factor, gram = _hat_system(Z_active, weights)
    return float(np.trace(cho_solve(factor, gram)))


def gcv_score(result: FitResult, design: ScoreMatrix, response: ResponseVector) -> float:
    """Returns GCV(K, lambda) = (1/n) ||Y - mean(Y) - H (Y - mean(Y))||^2 / (1 - tr(H) / n)^2
    with H built from the converged penalty weights; dropped predictors contribute nothing.

    :param result: The fit to score
    :param design: The design it was fitted on
    :param response: The training responses

    :raises DegenerateFitError: When tr(H) reaches n
    """
    y_centered = response.centered
    n = len(y_centered)
    groups = list(result.active_set)
    if len(groups) == 0:
        return float(y_centered @ y_centered / n)

    Z_active = design.scores[:, design.columns(groups)]
    weights = np.repeat(result.weights[groups], result.K)
    factor, gram = _hat_system(Z_active, weights)
    trace = float(np.trace(cho_solve(factor, gram)))
    if trace >= n:
        raise DegenerateFitError("tr(H) = {:.3f} reaches n = {}".format(trace, n))

    residual = y_centered - Z_active @ cho_solve(factor, Z_active.T @ y_centered)
    return float(residual @ residual / n / (1 - trace / n) ** 2)


def lambda_max(design: ScoreMatrix, response: ResponseVector) -> float:
    """Returns max_j ||Z_j' (Y - mean(Y))|| / n, the top of the default lambda grid"""
    y_centered = response.centered
    return float(max(
        np.linalg.norm(design.block(j).T @ y_centered) for j in range(design.p)
    ) / design.n)


def lambda_grid(top: float, count: int = DEFAULT_LAMBDA_COUNT, ratio: float = DEFAULT_LAMBDA_RATIO) -> np.ndarray:
    """Returns count log-spaced values from top down to ratio * top"""
    if top <= 0:
        return np.zeros(1)
    return np.geomspace(top, ratio * top, count)


def candidate_designs(curves: List[CurveSet], K_values: Sequence[int]) -> Dict[int, Tuple[ScoreMatrix, List[Decomposition]]]:
    """Builds the design for every truncation level from one decomposition at the largest K

    :param curves: The training predictors
    :param K_values: The truncation levels to prepare
    """
    design, components = decompose(curves, max(K_values))
    return {K: truncate_design(design, components, K) for K in sorted(K_values)}


def _evaluate(pair, designs, response: ResponseVector, config: FitConfig):
    K, lam = pair
    design, components = designs[K]
    pair_config = replace(config, K = K, scad = ScadParams(lam, config.scad.a))
    try:
        result = fit(design, response, components, pair_config)
        score = gcv_score(result, design, response)
    except (FunRegError, LinAlgError) as error:
        logger.debug("Pair K=%d lambda=%g is degenerate: %s", K, lam, error)
        return TuningRow(K, lam, np.inf, 0, False, True), None
    return TuningRow(K, lam, score, len(result.active_set), result.converged, False), result


def select(designs: Dict[int, Tuple[ScoreMatrix, List[Decomposition]]], response: ResponseVector, *,
           lambda_values: Sequence[float] = None, config: FitConfig = None,
           workers: int = 1) -> Tuple[int, float, FitResult, TuningGrid]:
    """Chooses K and lambda jointly by GCV, refitting every pair from the least squares start.
    Ties go to the smaller K, then to the larger lambda.

    :param designs: The design and decompositions for each candidate K
    :param response: The training responses
    :param lambda_values: The penalty levels; the default log grid below lambda_max when not given
    :param config: The remaining fit settings; K and lambda are overridden per pair
    :param workers: The number of pairs evaluated concurrently

    :returns: The chosen K and lambda, the fit there and the full table
    :raises TuningError: When every pair is degenerate
    """
    K_values = sorted(designs)
    if lambda_values is None:
        top = designs[K_values[-1]][0]
        lambda_values = lambda_grid(lambda_max(top, response))
    lambda_values = sorted((float(lam) for lam in lambda_values), reverse = True)
    config = config or FitConfig(K = K_values[0])

    pairs = [(K, lam) for K in K_values for lam in lambda_values]
    evaluate = partial(_evaluate, designs = designs, response = response, config = config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers = workers) as executor:
            outcomes = list(executor.map(evaluate, pairs))
    else:
        outcomes = [evaluate(pair) for pair in pairs]

    table = TuningGrid(K_values, lambda_values, [row for row, _ in outcomes])
    best = None
    for row, result in outcomes:
        if not row.degenerate and (best is None or row.gcv < best[0].gcv):
            best = (row, result)
    if best is None:
        raise TuningError("Every (K, lambda) pair was degenerate", table)

    capped = sum(not row.converged and not row.degenerate for row in table.rows)
    if capped:
        logger.info("%d of %d pairs stopped at max_iterations before converging", capped, len(table))

    row, result = best
    if not row.converged:
        logger.warning("The selected fit K=%d lambda=%g did not converge", row.K, row.lam)
    logger.info("GCV selected K=%d lambda=%g (GCV %.5g, %d active)", row.K, row.lam, row.gcv, row.active_size)
    return row.K, row.lam, result, table
