from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_A = 3.7

# # # # # # # # # # # # # # # # # # # # # # # # #


@dataclass(frozen = True)
class ScadParams:
    """The SCAD penalty parameters

    :param lam: The regularization level lambda
    :param a: The shape parameter, which must exceed 2
    """
    lam: float = 0.0
    a: float = DEFAULT_A

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ConfigError("lambda must be nonnegative, got {}".format(self.lam))
        if not self.a > 2:
            raise ConfigError("a must be greater than 2, got {}".format(self.a))


def _check(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype = float)
    if np.any(theta < 0) or np.any(np.isnan(theta)):
        raise DomainError("SCAD is only defined for nonnegative arguments")
    return theta


def _unwrap(result: np.ndarray):
    return float(result) if result.ndim == 0 else result


def scad_derivative(theta, params: ScadParams):
    """Returns p'(theta) = lam for theta <= lam and (a lam - theta)_+ / (a - 1)
    beyond it. A zero lambda is the zero penalty.

    :param theta: A nonnegative value or array of them
    :param params: The penalty parameters

    :raises DomainError: When theta is negative
    """
    theta = _check(theta)
    lam, a = params.lam, params.a
    if lam == 0:
        return _unwrap(np.zeros_like(theta))
    result = np.where(
        theta <= lam,
        lam,
        np.maximum(a * lam - theta, 0.0) / (a - 1))
    return _unwrap(result)


def scad_value(theta, params: ScadParams):
    """Returns the SCAD penalty p(theta), the antiderivative of
    scad_derivative with p(0) = 0

    :param theta: A nonnegative value or array of them
    :param params: The penalty parameters

    :raises DomainError: When theta is negative
    """
    theta = _check(theta)
    lam, a = params.lam, params.a
    if lam == 0:
        return _unwrap(np.zeros_like(theta))
    result = np.where(
        theta <= lam,
        lam * theta,
        np.where(
            theta <= a * lam,
            -(theta ** 2 - 2 * a * lam * theta + lam ** 2) / (2 * (a - 1)),
            (a + 1) * lam ** 2 / 2))
    return _unwrap(result)


def group_norm(b) -> float:
    """Returns the Euclidean norm of one coefficient block"""
    return float(np.linalg.norm(np.asarray(b, dtype = float)))


def group_norms(b, K: int) -> np.ndarray:
    """Returns the Euclidean norm of every K-sized block of a grouped vector"""
    return np.linalg.norm(np.asarray(b, dtype = float).reshape(-1, K), axis = 1)
