import numpy as np
import pytest

from funreg.fpca import Decomposition, EigenSystem, ScoreMatrix
from funreg.funcdata import CurveSet, Grid, ResponseVector, integrate
from funreg.simgen import basis_matrix


def random_curves(rng, n: int, grid: Grid, *, n_basis: int = 20, label: str = "x") -> CurveSet:
    """Draws n curves sum_k xi_k phi_k with xi_k ~ N(0, k^-2)"""
    xi = rng.standard_normal((n, n_basis)) / np.arange(1, n_basis + 1)
    return CurveSet(grid, xi @ basis_matrix(n_basis, grid), label)


def flip_eigenfunction(design: ScoreMatrix, components, j: int, k: int):
    """Negates eigenfunction k of predictor j together with its score column"""
    scores = np.array(design.scores)
    scores[:, j * design.K + k] *= -1
    system = components[j].eigensystem
    eigenfunctions = np.array(system.eigenfunctions)
    eigenfunctions[k] *= -1
    flipped = list(components)
    flipped[j] = Decomposition(components[j].label, components[j].mean,
        EigenSystem(system.grid, system.eigenvalues, eigenfunctions))
    return ScoreMatrix(scores, design.K, design.labels), flipped


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid():
    return Grid(101)


@pytest.fixture
def regression_data(rng, grid):
    """Two predictors of which only the first carries signal"""
    curves = [random_curves(rng, 80, grid, label = "x1"), random_curves(rng, 80, grid, label = "x2")]
    beta = 2 * basis_matrix(2, grid)[1] - basis_matrix(3, grid)[2]
    signal = integrate(curves[0].values * beta, grid)
    response = ResponseVector(1.5 + signal + 0.05 * rng.standard_normal(80))
    return curves, response, beta
