import logging

import numpy as np
import pandas as pd

from funreg.errors import ConfigError
from funreg.fpca import lambda_diagnostic
from funreg.simgen import mixing_matrix

from .converters import matrix, positive_int

logger = logging.getLogger(__name__)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def eigenvalue_scaling(mixing, alpha: float, K_max: int, tolerance: float) -> pd.DataFrame:
    """Returns the minimum eigenvalue of the score cross-covariance matrix for
    K = 1..K_max with variances k^-alpha, scaled by K^alpha. Rows whose scaled
    value falls below the tolerance are flagged as collapsed.

    :param mixing: The p * l mixing coefficients
    :param alpha: The decay exponent of the variances
    :param K_max: The largest truncation level
    :param tolerance: The scaled value below which the condition is taken to fail

    :raises ConfigError: When alpha is not positive
    """
    if not alpha > 0:
        raise ConfigError("alpha must be positive, got {}".format(alpha))
    spectrum = np.arange(1, K_max + 1, dtype = float) ** -alpha

    rows = []
    for K in range(1, K_max + 1):
        _, smallest = lambda_diagnostic(mixing, spectrum, K)
        scaled = smallest * K ** alpha
        rows.append((K, smallest, scaled, bool(scaled < tolerance)))
    return pd.DataFrame(rows, columns = ["K", "min_eigenvalue", "scaled", "collapsed"])

def cmd_diagnose_lambda(args) -> int:
    """Prints the scaled minimum eigenvalue for each truncation level

    :param args: The parsed command-line arguments
    """
    mixing = np.asarray(args.mixing) if args.mixing is not None else mixing_matrix(args.rho)
    table = eigenvalue_scaling(mixing, args.alpha, args.K_max, args.tolerance)
    if table["collapsed"].any():
        logger.warning("The minimum eigenvalue collapses; some predictors are scalar multiples of each other")
    print(table.to_csv(index = False, float_format = "%.6g", lineterminator = "\n"), end = "")
    return 0

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def setup(subparsers):
    """Adds the diagnose-lambda subcommand

    :param subparsers: The subcommand group of the main parser
    """
    parser = subparsers.add_parser("diagnose-lambda",
        help = "check that the score cross-covariance stays well conditioned as K grows")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--mixing", type = matrix,
        help = "mixing coefficients, rows separated by semicolons: \"1,0.2; 0.2,1\"")
    source.add_argument("--rho", type = float, default = 0.0,
        help = "correlation of the four-predictor simulation mixing (default)")
    parser.add_argument("--alpha", type = float, default = 2.0, help = "variance decay exponent")
    parser.add_argument("--K-max", dest = "K_max", type = positive_int, default = 8)
    parser.add_argument("--tolerance", type = float, default = 1e-8,
        help = "scaled values below this are flagged")
    parser.set_defaults(command = cmd_diagnose_lambda)
