import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from funreg.errors import ConfigError, ParseError
from funreg.fpca import Decomposition
from funreg.funcdata import expand_derivatives, load_curves
from funreg.inference import CoefCovariance, fit_covariance, pointwise_band
from funreg.scad import DEFAULT_A, ScadParams
from funreg.solver import FitConfig, FitResult, predict
from funreg.tuning import (
    DEFAULT_K_VALUES, DEFAULT_LAMBDA_COUNT, DEFAULT_LAMBDA_RATIO,
    candidate_designs, lambda_grid, lambda_max, select
)
from util.functions import require_directory, require_file, thread_count, write_frame, write_json

from .converters import float_list, int_list, positive_int, probability

logger = logging.getLogger(__name__)

MODEL_FORMAT = "funreg-model/1"
DERIVATIVE_ORDERS = (0, 1, 2, 3)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def model_to_dict(result: FitResult, components: List[Decomposition], covariance: Optional[CoefCovariance], *,
                  derivatives: Optional[List[int]], level: float, gcv: float) -> dict:
    """Returns everything needed to predict with a fit and to recompute its bands

    :param result: The selected fit
    :param components: The decompositions behind its design
    :param covariance: The sandwich covariance, None when no predictor is active
    :param derivatives: The derivative orders the predictors were expanded to
    :param level: The band level used at fit time
    :param gcv: The GCV score of the fit
    """
    data = result.to_dict()
    data["format"] = MODEL_FORMAT
    data["derivatives"] = derivatives
    data["level"] = level
    data["gcv"] = gcv
    for predictor, component in zip(data["predictors"], components):
        predictor["mean"] = component.mean
        predictor["eigenvalues"] = component.eigensystem.eigenvalues
    data["covariance"] = None if covariance is None else {
        "groups": [result.labels[j] for j in covariance.groups],
        "matrix": covariance.full
    }
    return data

def load_model(path: Path) -> Tuple[FitResult, Optional[CoefCovariance], dict]:
    """Loads a model written by the fit command

    :param path: The model JSON file

    :returns: The fit, its covariance and the raw document
    :raises ParseError: When the file is not a saved model
    """
    try:
        data = json.loads(Path(path).read_text(encoding = "utf-8"))
    except json.JSONDecodeError as error:
        raise ParseError("{} is not valid JSON: {}".format(path, error))
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise ParseError("{} is not a {} file".format(path, MODEL_FORMAT))

    try:
        result = FitResult.from_dict(data)
    except (KeyError, TypeError, ValueError) as error:
        raise ParseError("{} is missing model fields: {}".format(path, error))

    covariance = None
    if data.get("covariance") is not None:
        groups = [result.labels.index(label) for label in data["covariance"]["groups"]]
        covariance = CoefCovariance(data["covariance"]["matrix"], groups, result.K)
    return result, covariance, data

def write_bands(output: Path, result: FitResult, covariance: Optional[CoefCovariance], level: float) -> List[Path]:
    """Writes one band CSV per active predictor and returns their paths"""
    paths = []
    for j in result.active_set:
        band = pointwise_band(result, covariance, j, level)
        path = output / "bands_{}.csv".format(band.label)
        write_frame(path, band.to_frame())
        paths.append(path)
    return paths

def _eigenfunctions(components: List[Decomposition]) -> dict:
    return {
        "predictors": [
            dict(label = component.label, t = component.grid.physical_points,
                 **component.eigensystem.to_dict())
            for component in components
        ]
    }

def _mse(observed, predicted) -> float:
    return float(np.mean((np.asarray(observed) - np.asarray(predicted)) ** 2))

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def cmd_fit(args) -> int:
    """Tunes K and lambda by GCV, fits the selected model and writes
    the model, tuning table, bands and eigenfunctions

    :param args: The parsed command-line arguments
    """
    # Check that the inputs exist and the derivative orders are supported
    source = require_file(args.input)
    descriptor = require_file(args.descriptor) if args.descriptor else None
    output = require_directory(args.output)
    if args.derivatives and any(order not in DERIVATIVE_ORDERS for order in args.derivatives):
        raise ConfigError("Derivative orders must be among {}".format(DERIVATIVE_ORDERS))

    # Load the curves and expand them to the requested derivatives
    curves, response = load_curves(source, descriptor)
    if args.derivatives:
        curves = expand_derivatives(curves, args.derivatives)

    # Training and hold-out parts
    n = len(response)
    train_curves, train_response = curves, response
    if args.split is not None:
        if not 0 < args.split < n:
            raise ConfigError("--split must leave both parts nonempty, got {} of {} rows".format(args.split, n))
        train_curves = [predictor.subset(slice(None, args.split)) for predictor in curves]
        train_response = response.subset(slice(None, args.split))

    # A fixed K skips the truncation search
    K_values = [args.K] if args.K is not None else sorted(set(args.K_grid))
    config = FitConfig(
        K = min(K_values),
        scad = ScadParams(0.0, args.a),
        drop_threshold = args.drop_threshold,
        max_iterations = args.max_iterations)

    # Build one design per K; the default lambda grid starts at the largest K's lambda_max
    designs = candidate_designs(train_curves, K_values)
    lambda_values = args.lambdas
    if lambda_values is None:
        top = lambda_max(designs[max(K_values)][0], train_response)
        lambda_values = lambda_grid(top, args.lambda_count, args.lambda_ratio)

    # Fit every (K, lambda) pair and keep the GCV minimizer
    K, lam, result, table = select(designs, train_response, lambda_values = lambda_values,
        config = config, workers = args.workers or thread_count())
    design, components = designs[K]
    covariance = fit_covariance(result, design) if result.active_set else None
    gcv = min(row.gcv for row in table.rows if row.K == K and row.lam == lam)
    logger.info("Selected K=%d lambda=%g with %d of %d predictors active",
        K, lam, len(result.active_set), len(result.labels))

    # Write the model, tuning table, eigenfunctions and one band per active predictor
    write_json(output / "model.json", model_to_dict(result, components, covariance,
        derivatives = args.derivatives, level = args.level, gcv = gcv))
    write_frame(output / "tuning.csv", table.to_frame())
    write_json(output / "eigenfunctions.json", _eigenfunctions(components))
    write_bands(output, result, covariance, args.level)

    print("active: {}".format(",".join(result.labels[j] for j in result.active_set)))
    print("K: {}".format(K))
    print("lambda: {:.6g}".format(lam))
    print("gcv: {:.6g}".format(gcv))

    # Score the hold-out rows with the selected fit
    if args.split is not None:
        holdout = [predictor.subset(slice(args.split, None)) for predictor in curves]
        observed = response.subset(slice(args.split, None)).y
        predicted = predict(result, holdout).y
        write_frame(output / "predictions.csv", pd.DataFrame({"observed": observed, "predicted": predicted}))
        print("holdout_mse: {:.6g}".format(_mse(observed, predicted)))

    return 0

def cmd_predict(args) -> int:
    """Predicts responses for new curves with a saved model

    :param args: The parsed command-line arguments
    """
    result, _, data = load_model(require_file(args.model))
    source = require_file(args.input)

    curves, response = load_curves(source, require_file(args.descriptor) if args.descriptor else None)
    if data.get("derivatives"):
        curves = expand_derivatives(curves, data["derivatives"])

    predicted = predict(result, curves).y
    frame = pd.DataFrame({"observed": response.y, "predicted": predicted})
    if args.output:
        write_frame(args.output, frame)
    else:
        print(frame.to_csv(index = False, float_format = "%.10g", lineterminator = "\n"), end = "")
    if not args.no_response:
        print("mse: {:.6g}".format(_mse(response.y, predicted)))
    return 0

def cmd_bands(args) -> int:
    """Recomputes the pointwise bands of a saved model at another level

    :param args: The parsed command-line arguments
    """
    result, covariance, _ = load_model(require_file(args.model))
    output = require_directory(args.output)
    for path in write_bands(output, result, covariance, args.level):
        print(path)
    return 0

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def setup(subparsers):
    """Adds the fit, predict and bands subcommands

    :param subparsers: The subcommand group of the main parser
    """
    parser = subparsers.add_parser("fit", help = "tune and fit a penalized functional regression")
    parser.add_argument("--input", required = True, help = "CSV of responses and curves")
    parser.add_argument("--descriptor", help = "JSON descriptor; <input>.json is used when present")
    parser.add_argument("--derivatives", type = int_list,
        help = "derivative orders used as predictors, e.g. 0,1,2,3")
    parser.add_argument("--split", type = positive_int,
        help = "train on the first SPLIT rows and report the hold-out MSE on the rest")
    parser.add_argument("--K", type = positive_int, help = "fixed truncation level")
    parser.add_argument("--K-grid", dest = "K_grid", type = int_list, default = list(DEFAULT_K_VALUES),
        help = "truncation levels tried by GCV (default 1-8)")
    parser.add_argument("--lambda", dest = "lambdas", type = float_list,
        help = "penalty levels tried by GCV; a log grid below lambda_max by default")
    parser.add_argument("--lambda-count", type = positive_int, default = DEFAULT_LAMBDA_COUNT)
    parser.add_argument("--lambda-ratio", type = float, default = DEFAULT_LAMBDA_RATIO)
    parser.add_argument("--a", type = float, default = DEFAULT_A, help = "SCAD shape parameter")
    parser.add_argument("--drop-threshold", type = float, default = 1e-5)
    parser.add_argument("--max-iterations", type = positive_int, default = 100)
    parser.add_argument("--level", type = probability, default = 0.95, help = "band level")
    parser.add_argument("--output", default = "funreg-fit", help = "output directory")
    parser.add_argument("--workers", type = positive_int, help = "threads for the tuning grid")
    parser.set_defaults(command = cmd_fit)

    parser = subparsers.add_parser("predict", help = "predict new responses with a saved model")
    parser.add_argument("--model", required = True, help = "model.json written by fit")
    parser.add_argument("--input", required = True, help = "CSV of curves")
    parser.add_argument("--descriptor")
    parser.add_argument("--output", help = "CSV of predictions; stdout when not given")
    parser.add_argument("--no-response", action = "store_true",
        help = "the y column is a placeholder, so no MSE is reported")
    parser.set_defaults(command = cmd_predict)

    parser = subparsers.add_parser("bands", help = "recompute pointwise bands of a saved model")
    parser.add_argument("--model", required = True, help = "model.json written by fit")
    parser.add_argument("--level", type = probability, default = 0.95)
    parser.add_argument("--output", default = "funreg-bands", help = "output directory")
    parser.set_defaults(command = cmd_bands)
