import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, eigvalsh

from .errors import DimensionMismatchError, DomainError
from .funcdata import CurveSet, Grid, center

logger = logging.getLogger(__name__)

# Relative level below which an eigenvalue is treated as zero
CLAMP_RATIO = 1e-12

# # # # # # # # # # # # # # # # # # # # # # # # #


class EigenSystem:
    """The leading K eigenpairs of one predictor's covariance operator.

    Eigenfunctions are sampled on the Grid and orthonormal under its quadrature.

    :param grid: The Grid the eigenfunctions are sampled on
    :param eigenvalues: K nonincreasing, nonnegative eigenvalues
    :param eigenfunctions: A K * G matrix, one eigenfunction per row
    """

    def __init__(self, grid: Grid, eigenvalues, eigenfunctions):
        eigenvalues = np.array(eigenvalues, dtype = float).reshape(-1)
        eigenfunctions = np.array(eigenfunctions, dtype = float).reshape(len(eigenvalues), -1)
        if eigenfunctions.shape[1] != len(grid):
            raise DimensionMismatchError("Eigenfunctions must be sampled on {} points".format(len(grid)))
        eigenvalues.setflags(write = False)
        eigenfunctions.setflags(write = False)

        self.__grid = grid
        self.__eigenvalues = eigenvalues
        self.__eigenfunctions = eigenfunctions

    def __len__(self) -> int:
        return len(self.__eigenvalues)

    @property
    def K(self) -> int:
        return len(self.__eigenvalues)

    @property
    def grid(self) -> Grid:
        return self.__grid

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.__eigenvalues

    @property
    def eigenfunctions(self) -> np.ndarray:
        return self.__eigenfunctions

    def truncate(self, K: int) -> 'EigenSystem':
        """Returns the leading K eigenpairs"""
        if not 1 <= K <= self.K:
            raise DomainError("Cannot truncate {} eigenpairs to {}".format(self.K, K))
        return EigenSystem(self.__grid, self.__eigenvalues[:K], self.__eigenfunctions[:K])

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.__eigenvalues.tolist(),
            "eigenfunctions": self.__eigenfunctions.tolist()
        }


class ScoreMatrix:
    """The n * pK design of estimated principal component scores,
    laid out as p contiguous blocks of K columns in predictor order

    :param scores: The n * pK matrix
    :param K: The number of columns per predictor
    :param labels: The predictor names, one per block
    """

    def __init__(self, scores, K: int, labels: Sequence[str] = None):
        scores = np.array(scores, dtype = float)
        if scores.ndim != 2 or K < 1 or scores.shape[1] % K != 0:
            raise DimensionMismatchError(
                "A design of shape {} cannot hold blocks of {} columns".format(scores.shape, K))
        p = scores.shape[1] // K
        if labels is None:
            labels = ["x{}".format(j + 1) for j in range(p)]
        if len(labels) != p:
            raise DimensionMismatchError("Expected {} labels, got {}".format(p, len(labels)))
        scores.setflags(write = False)

        self.__scores = scores
        self.__K = int(K)
        self.__labels = tuple(labels)

    @property
    def scores(self) -> np.ndarray:
        return self.__scores

    @property
    def K(self) -> int:
        return self.__K

    @property
    def p(self) -> int:
        return len(self.__labels)

    @property
    def n(self) -> int:
        return self.__scores.shape[0]

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.__labels

    def columns(self, groups: Sequence[int]) -> np.ndarray:
        """Returns the column indices belonging to the given predictor groups"""
        return np.concatenate([
            np.arange(j * self.__K, (j + 1) * self.__K) for j in groups
        ]).astype(int) if len(groups) > 0 else np.zeros(0, dtype = int)

    def block(self, j: int) -> np.ndarray:
        """Returns the n * K scores of predictor j"""
        return self.__scores[:, j * self.__K:(j + 1) * self.__K]


class Decomposition:
    """Everything learned about one predictor from its training curves:
    its name, mean curve and eigensystem

    :param label: The predictor name
    :param mean: The pointwise mean curve
    :param eigensystem: The estimated eigenpairs
    """

    def __init__(self, label: str, mean, eigensystem: EigenSystem):
        mean = np.array(mean, dtype = float).reshape(-1)
        if len(mean) != len(eigensystem.grid):
            raise DimensionMismatchError("The mean curve must be sampled on {} points".format(len(eigensystem.grid)))
        mean.setflags(write = False)

        self.__label = label
        self.__mean = mean
        self.__eigensystem = eigensystem

    @property
    def label(self) -> str:
        return self.__label

    @property
    def mean(self) -> np.ndarray:
        return self.__mean

    @property
    def eigensystem(self) -> EigenSystem:
        return self.__eigensystem

    @property
    def grid(self) -> Grid:
        return self.__eigensystem.grid

    def truncate(self, K: int) -> 'Decomposition':
        return Decomposition(self.__label, self.__mean, self.__eigensystem.truncate(K))


class LambdaMatrix:
    """The pK * pK matrix of cross-covariances between the principal
    component scores of p predictors; block (i1, i2) is K * K

    :param entries: The symmetric matrix
    :param p: The number of predictors
    :param K: The truncation level
    """

    def __init__(self, entries, p: int, K: int):
        entries = np.array(entries, dtype = float)
        if entries.shape != (p * K, p * K):
            raise DimensionMismatchError("Expected a {0} x {0} matrix, got {1}".format(p * K, entries.shape))
        entries.setflags(write = False)

        self.__entries = entries
        self.__p = int(p)
        self.__K = int(K)

    @property
    def entries(self) -> np.ndarray:
        return self.__entries

    @property
    def p(self) -> int:
        return self.__p

    @property
    def K(self) -> int:
        return self.__K

    def block(self, i1: int, i2: int) -> np.ndarray:
        K = self.__K
        return self.__entries[i1 * K:(i1 + 1) * K, i2 * K:(i2 + 1) * K]

    @property
    def min_eigenvalue(self) -> float:
        return float(eigvalsh(self.__entries)[0])


# # # # # # # # # # # # # # # # # # # # # # # # #
# Operations
# # # # # # # # # # # # # # # # # # # # # # # # #

def empirical_covariance(centered: CurveSet) -> np.ndarray:
    """Returns the G * G empirical covariance (1/n) sum_i X_i(s) X_i(t)
    of curves that have already been centered

    :param centered: The centered curves

    :raises DomainError: When there are no curves
    """
    n = len(centered)
    if n == 0:
        raise DomainError("Cannot estimate a covariance from zero curves")
    values = centered.values
    return values.T @ values / n


def eigendecompose(cov, grid: Grid, K: int, *, n_samples: int = None) -> EigenSystem:
    """Returns the leading K eigenpairs of the integral operator with kernel cov.

    The operator is discretised as weight * cov, whose unit eigenvectors are
    rescaled by 1 / sqrt(weight) so each eigenfunction has quadrature norm 1.
    Every eigenfunction is then flipped so its largest absolute entry is positive.

    :param cov: A symmetric G * G covariance matrix
    :param grid: The Grid the covariance is sampled on
    :param K: The number of eigenpairs to keep
    :param n_samples: The number of curves behind cov, which bounds K when given

    :raises DimensionMismatchError: When cov does not match the grid
    :raises DomainError: When K is out of range or beyond the numerical rank
    """
    cov = np.asarray(cov, dtype = float)
    G = len(grid)
    if cov.shape != (G, G):
        raise DimensionMismatchError("Covariance must be {0} x {0}, got {1}".format(G, cov.shape))
    limit = G if n_samples is None else min(G, n_samples)
    if int(K) != K or not 1 <= K <= limit:
        raise DomainError("K must be between 1 and {}, got {}".format(limit, K))
    scale = max(np.abs(cov).max(), 1.0)
    if not np.allclose(cov, cov.T, rtol = 0, atol = 1e-10 * scale):
        raise DomainError("Covariance must be symmetric")

    # Only the top K eigenpairs are computed; eigh returns them in ascending order
    operator = grid.weight * 0.5 * (cov + cov.T)
    values, vectors = eigh(operator, subset_by_index = [G - K, G - 1])
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].T / np.sqrt(grid.weight)

    # Clamp round-off and anything negligible relative to the leading eigenvalue
    leading = max(values[0], 0.0)
    values[values < CLAMP_RATIO * leading] = 0.0
    if leading > 0 and values[-1] == 0.0:
        raise DomainError("K = {} exceeds the numerical rank {} of the covariance".format(
            K, int(np.count_nonzero(values))))

    # Fix signs: largest absolute entry positive, earliest index on ties
    for k in range(K):
        if vectors[k, np.abs(vectors[k]).argmax()] < 0:
            vectors[k] = -vectors[k]

    return EigenSystem(grid, values, vectors)


def scores(centered: CurveSet, eigensystem: EigenSystem) -> np.ndarray:
    """Returns the n * K principal component scores, the inner products
    of each centered curve with each eigenfunction

    :param centered: The centered curves
    :param eigensystem: The eigenpairs to project on

    :raises DimensionMismatchError: When the grids differ
    """
    if centered.grid != eigensystem.grid:
        raise DimensionMismatchError("Curves and eigenfunctions are sampled on different grids")
    return centered.grid.weight * centered.values @ eigensystem.eigenfunctions.T


def assemble_design(blocks: Sequence[np.ndarray], labels: Sequence[str] = None) -> ScoreMatrix:
    """Concatenates per-predictor score blocks into the design matrix

    :param blocks: One n * K block per predictor, in predictor order
    :param labels: The predictor names

    :raises DimensionMismatchError: When the blocks disagree on n or K
    """
    if len(blocks) == 0:
        raise DimensionMismatchError("A design needs at least one predictor")
    blocks = [np.atleast_2d(np.asarray(block, dtype = float)) for block in blocks]
    shapes = {block.shape for block in blocks}
    if len(shapes) != 1:
        raise DimensionMismatchError("Score blocks have different shapes: {}".format(sorted(shapes)))
    return ScoreMatrix(np.hstack(blocks), blocks[0].shape[1], labels)


def decompose(curves: List[CurveSet], K: int) -> Tuple[ScoreMatrix, List[Decomposition]]:
    """Runs functional PCA on every predictor and assembles the design

    :param curves: The predictors, all on the same Grid with the same n
    :param K: The truncation level shared by all predictors

    :raises DimensionMismatchError: When the predictors disagree on grid or n
    """
    if len(curves) == 0:
        raise DimensionMismatchError("At least one predictor is needed")
    grid, n = curves[0].grid, len(curves[0])
    for predictor in curves:
        if predictor.grid != grid or len(predictor) != n:
            raise DimensionMismatchError(
                "Predictor {} does not share the grid and sample size of {}".format(
                    predictor.label, curves[0].label))

    blocks, components = [], []
    for predictor in curves:
        centered, mean = center(predictor)
        eigensystem = eigendecompose(empirical_covariance(centered), grid, K, n_samples = n)
        blocks.append(scores(centered, eigensystem))
        components.append(Decomposition(predictor.label, mean, eigensystem))
        logger.debug("%s: leading eigenvalues %s", predictor.label, eigensystem.eigenvalues[:4])

    return assemble_design(blocks, [predictor.label for predictor in curves]), components


def truncate_design(design: ScoreMatrix, components: List[Decomposition], K: int) -> Tuple[ScoreMatrix, List[Decomposition]]:
    """Keeps the leading K score columns of every block

    :param design: A design built at a truncation level of at least K
    :param components: The matching decompositions
    :param K: The new truncation level
    """
    blocks = [design.block(j)[:, :K] for j in range(design.p)]
    return (
        assemble_design(blocks, design.labels),
        [component.truncate(K) for component in components]
    )


def lambda_diagnostic(mixing, spectrum, K: int) -> Tuple[LambdaMatrix, float]:
    """Builds the score cross-covariance matrix for predictors X_i = sum_j a_ij W_j
    of independent W_j sharing eigenfunctions with variances kappa_jk,
    and returns it with its minimum eigenvalue.

    Block (i1, i2) is diagonal with entries sum_j a_i1j a_i2j kappa_jk.

    :param mixing: The p * l mixing coefficients a_ij
    :param spectrum: Either l * K variances kappa_jk or K variances shared by every W_j
    :param K: The truncation level

    :raises DomainError: When a variance is not positive
    """
    mixing = np.atleast_2d(np.asarray(mixing, dtype = float))
    p, l = mixing.shape
    spectrum = np.asarray(spectrum, dtype = float)
    if spectrum.ndim == 1:
        spectrum = np.tile(spectrum, (l, 1))
    if spectrum.shape[0] != l or spectrum.shape[1] < K:
        raise DimensionMismatchError(
            "Spectrum must have {} rows of at least {} variances, got {}".format(l, K, spectrum.shape))
    spectrum = spectrum[:, :K]
    if np.any(spectrum <= 0):
        raise DomainError("Every variance kappa_jk must be positive")

    entries = np.zeros((p * K, p * K))
    for k in range(K):
        block = (mixing * spectrum[:, k]) @ mixing.T
        index = np.arange(p) * K + k
        entries[np.ix_(index, index)] = block

    matrix = LambdaMatrix(entries, p, K)
    return matrix, matrix.min_eigenvalue
