import json
import logging
import re
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DimensionMismatchError, DomainError, ParseError

logger = logging.getLogger(__name__)

COLUMN_PATTERN = re.compile(r"^x(\d+)_(\d+)$")
RESPONSE_COLUMN = "y"

# # # # # # # # # # # # # # # # # # # # # # # # #


class Grid:
    """A Grid is the shared, equally spaced sampling grid on [0, 1]
    that every functional predictor of a problem is observed on.

    Integrals over the grid use the Riemann sum with weight 1 / G.

    :param size: The number of grid points G
    :param domain: The physical interval the grid was remapped from, if any
    """

    @staticmethod
    def from_points(points: Sequence[float]) -> 'Grid':
        """Returns the Grid matching a sequence of sampling points,
        validating that they are equally spaced from 0 to 1

        :param points: The sampling points

        :raises DomainError: When the points are not an equally spaced cover of [0, 1]
        """
        points = np.asarray(points, dtype = float)
        grid = Grid(len(points))
        if not np.allclose(points, grid.points, rtol = 1e-12, atol = 1e-12):
            raise DomainError("Grid points must be equally spaced from 0 to 1")
        return grid

    def __init__(self, size: int, *, domain: Tuple[float, float] = None):
        if int(size) != size or size < 2:
            raise DomainError("A Grid needs at least 2 points, got {}".format(size))
        if domain is not None and not domain[0] < domain[1]:
            raise DomainError("A physical domain must be increasing, got {}".format(domain))

        self.__size = int(size)
        self.__points = np.linspace(0.0, 1.0, self.__size)
        self.__points.setflags(write = False)
        self.__weight = 1.0 / self.__size
        self.__domain = None if domain is None else (float(domain[0]), float(domain[1]))

    # # # # # # # # # # # # # # # # # # # # # # # # #

    def __len__(self) -> int:
        return self.__size

    def __eq__(self, grid: 'Grid') -> bool:
        return isinstance(grid, Grid) and len(grid) == len(self)

    def __hash__(self) -> int:
        return hash(self.__size)

    def __repr__(self) -> str:
        return "Grid(size={})".format(self.__size)

    # # # # # # # # # # # # # # # # # # # # # # # # #

    @property
    def points(self) -> np.ndarray:
        return self.__points

    @property
    def weight(self) -> float:
        """The quadrature weight 1 / G"""
        return self.__weight

    @property
    def spacing(self) -> float:
        """The distance between neighbouring points"""
        return 1.0 / (self.__size - 1)

    @property
    def domain(self) -> Union[Tuple[float, float], None]:
        return self.__domain

    @property
    def physical_points(self) -> np.ndarray:
        """The grid points mapped back onto the physical domain,
        or the [0, 1] points when there is none
        """
        if self.__domain is None:
            return self.__points
        low, high = self.__domain
        return low + (high - low) * self.__points

    def nearest_index(self, t: float) -> int:
        """Returns the index of the grid point closest to t"""
        return int(np.abs(self.__points - t).argmin())


class CurveSet:
    """A CurveSet holds n curves of one functional predictor sampled on a Grid.
    The values are copied and frozen on construction.

    :param grid: The Grid the curves are sampled on
    :param values: An n * G matrix, one row per subject
    :param label: The name of the predictor

    :raises DimensionMismatchError: When the rows do not match the grid
    :raises DomainError: When a value is not finite
    """

    def __init__(self, grid: Grid, values, label: str = "x"):
        values = np.array(values, dtype = float)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if values.ndim != 2 or values.shape[1] != len(grid):
            raise DimensionMismatchError(
                "Curves of {} must have {} values per row, got shape {}".format(
                    label, len(grid), values.shape))
        if not np.all(np.isfinite(values)):
            raise DomainError("Curves of {} contain non-finite values".format(label))
        values.setflags(write = False)

        self.__grid = grid
        self.__values = values
        self.__label = label

    # # # # # # # # # # # # # # # # # # # # # # # # #

    def __len__(self) -> int:
        return self.__values.shape[0]

    def __repr__(self) -> str:
        return "CurveSet(label={!r}, n={}, G={})".format(self.__label, len(self), len(self.__grid))

    @property
    def grid(self) -> Grid:
        return self.__grid

    @property
    def values(self) -> np.ndarray:
        return self.__values

    @property
    def label(self) -> str:
        return self.__label

    # # # # # # # # # # # # # # # # # # # # # # # # #

    def subset(self, rows) -> 'CurveSet':
        """Returns a CurveSet of the selected rows

        :param rows: A slice, index array or boolean mask of subjects to keep
        """
        return CurveSet(self.__grid, self.__values[rows], self.__label)

    def relabel(self, label: str) -> 'CurveSet':
        """Returns the same curves under another predictor name"""
        return CurveSet(self.__grid, self.__values, label)


class ResponseVector:
    """The scalar responses Y_1, ..., Y_n

    :param y: The responses

    :raises DomainError: When a response is not finite
    """

    def __init__(self, y):
        y = np.array(y, dtype = float).reshape(-1)
        if not np.all(np.isfinite(y)):
            raise DomainError("Responses must be finite")
        y.setflags(write = False)
        self.__y = y

    def __len__(self) -> int:
        return len(self.__y)

    @property
    def y(self) -> np.ndarray:
        return self.__y

    @property
    def mean(self) -> float:
        return float(self.__y.mean())

    @property
    def centered(self) -> np.ndarray:
        """Returns Y - mean(Y)"""
        return self.__y - self.__y.mean()

    def subset(self, rows) -> 'ResponseVector':
        return ResponseVector(self.__y[rows])


# # # # # # # # # # # # # # # # # # # # # # # # #
# Quadrature
# # # # # # # # # # # # # # # # # # # # # # # # #

def integrate(f, grid: Grid):
    """Integrates a sampled function over [0, 1] with the Riemann sum
    weight * sum(f). A matrix is integrated row by row.

    :param f: G sampled values, or a matrix whose rows are sampled functions
    :param grid: The Grid the function is sampled on

    :raises DimensionMismatchError: When the last axis of f is not of length G
    """
    f = np.asarray(f, dtype = float)
    if f.ndim == 0 or f.shape[-1] != len(grid):
        raise DimensionMismatchError(
            "Expected {} sampled values, got shape {}".format(len(grid), f.shape))
    result = grid.weight * f.sum(axis = -1)
    if np.ndim(result) == 0:
        return float(result)
    return result


def inner_product(f, g, grid: Grid):
    """Returns the L2 inner product of two sampled functions on the same Grid

    :param f: A sampled function, or a matrix of them
    :param g: A sampled function, or a matrix of them
    :param grid: The Grid both are sampled on

    :raises DimensionMismatchError: When either is not sampled on the grid
    """
    f = np.asarray(f, dtype = float)
    g = np.asarray(g, dtype = float)
    if f.shape[-1:] != (len(grid),) or g.shape[-1:] != (len(grid),):
        raise DimensionMismatchError(
            "Both functions must be sampled on {} points, got {} and {}".format(
                len(grid), f.shape, g.shape))
    return integrate(f * g, grid)


# # # # # # # # # # # # # # # # # # # # # # # # #
# Transformations
# # # # # # # # # # # # # # # # # # # # # # # # #

def center(curves: CurveSet) -> Tuple[CurveSet, np.ndarray]:
    """Removes the pointwise sample mean from every curve

    :param curves: The curves to center

    :returns: The centered CurveSet and the mean curve
    :raises DomainError: When there are no curves
    """
    if len(curves) == 0:
        raise DomainError("Cannot center an empty CurveSet ({})".format(curves.label))
    mean = curves.values.mean(axis = 0)
    centered = CurveSet(curves.grid, curves.values - mean, curves.label)
    mean.setflags(write = False)
    return centered, mean


def differentiate(curves: CurveSet, order: int) -> CurveSet:
    """Differentiates every curve numerically. Interior points use second order
    central differences and both ends use second order one-sided differences;
    orders 2 and 3 apply the first derivative repeatedly.

    :param curves: The curves to differentiate
    :param order: The derivative order, 1, 2 or 3

    :raises DomainError: When the order is not supported or the grid is too coarse
    """
    if order not in (1, 2, 3):
        raise DomainError("Derivative order must be 1, 2 or 3, got {}".format(order))
    if len(curves.grid) < 2 * order + 1:
        raise DomainError("A grid of {} points is too coarse for derivative order {}".format(
            len(curves.grid), order))

    values = curves.values
    for _ in range(order):
        values = np.gradient(values, curves.grid.spacing, axis = 1, edge_order = 2)
    return CurveSet(curves.grid, values, "{}_d{}".format(curves.label, order))


def expand_derivatives(curves: List[CurveSet], orders: Sequence[int]) -> List[CurveSet]:
    """Replaces every predictor by the requested derivatives of it.
    Order 0 keeps the curves themselves.

    :param curves: The predictors to expand
    :param orders: The derivative orders to use, e.g. (0, 1, 2, 3)
    """
    expanded = []
    for predictor in curves:
        for order in orders:
            if order == 0:
                expanded.append(predictor)
            else:
                expanded.append(differentiate(predictor, order))
    return expanded


# # # # # # # # # # # # # # # # # # # # # # # # #
# CSV ingestion
# # # # # # # # # # # # # # # # # # # # # # # # #

def load_descriptor(path: Union[str, Path]) -> dict:
    """Loads a sidecar JSON descriptor naming the predictors and their physical grids.

    The descriptor looks like
    ``{"predictors": [{"label": "absorbance", "domain": [850, 1050]}]}``

    :param path: The descriptor file
    """
    try:
        descriptor = json.loads(Path(path).read_text(encoding = "utf-8"))
    except json.JSONDecodeError as error:
        raise ParseError("Descriptor {} is not valid JSON: {}".format(path, error))
    if not isinstance(descriptor, dict) or not isinstance(descriptor.get("predictors", []), list):
        raise ParseError("Descriptor {} must be an object with a predictors list".format(path))
    return descriptor


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype = str, keep_default_na = False, encoding = "utf-8")
    except pd.errors.EmptyDataError:
        raise ParseError("{} is empty".format(path))
    except pd.errors.ParserError as error:

        # pandas reports the physical line, which counts the header as line 1
        match = re.search(r"line (\d+)", str(error))
        row = int(match.group(1)) - 1 if match else None
        raise ParseError("Ragged row in {}".format(path), row = row)


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column]
    missing = raw.isna() | (raw.str.strip() == "")
    if missing.any():
        raise ParseError("Missing value", row = int(np.flatnonzero(missing.values)[0]) + 1, column = column)
    text = raw.str.strip()
    numbers = pd.to_numeric(text, errors = "coerce")
    invalid = numbers.isna() | ~np.isfinite(numbers)
    if invalid.any():
        row = int(np.flatnonzero(invalid.values)[0])
        raise ParseError("Non-numeric value {!r}".format(raw.iloc[row]), row = row + 1, column = column)

    # to_numeric is not correctly rounded; float() is, so written values read back exactly
    return text.astype(float).to_numpy()


def load_curves(path: Union[str, Path], descriptor: Union[str, Path, dict] = None) -> Tuple[List[CurveSet], ResponseVector]:
    """Loads functional predictors and responses from a CSV file with a header
    of the form ``y, x1_1, ..., x1_G, x2_1, ...`` (predictor j, grid index g).

    A sidecar descriptor is read from ``<path>.json`` when one exists and none is given.

    :param path: The CSV file
    :param descriptor: A descriptor path or an already loaded descriptor

    :raises ParseError: When the file does not follow the format
    """
    # Use the sidecar descriptor when none is given
    path = Path(path)
    if descriptor is None and path.with_suffix(".json").exists():
        descriptor = path.with_suffix(".json")
    if descriptor is not None and not isinstance(descriptor, dict):
        descriptor = load_descriptor(descriptor)

    # Check the header for the response column
    frame = _read_frame(path)
    frame.columns = [str(column).strip() for column in frame.columns]
    if RESPONSE_COLUMN not in frame.columns:
        raise ParseError("Missing response column", column = RESPONSE_COLUMN)

    # Group the curve columns by predictor
    predictors = {}
    for column in frame.columns:
        if column == RESPONSE_COLUMN:
            continue
        match = COLUMN_PATTERN.match(column)
        if match is None:
            raise ParseError("Unrecognised column name", column = column)
        j, g = int(match.group(1)), int(match.group(2))
        predictors.setdefault(j, {})[g] = column
    if not predictors:
        raise ParseError("No curve columns x<j>_<g> in {}".format(path))

    # Every predictor must cover the same contiguous grid indices
    sizes = set()
    for j, columns in predictors.items():
        indices = sorted(columns)
        if indices != list(range(indices[0], indices[0] + len(indices))):
            raise ParseError("Grid indices of predictor {} are not contiguous".format(j))
        sizes.add(len(indices))
    if len(sizes) != 1:
        raise ParseError("Predictors are sampled on different grids: sizes {}".format(sorted(sizes)))

    # Build one CurveSet per predictor in column order, named and scaled by the descriptor
    size = sizes.pop()
    entries = (descriptor or {}).get("predictors", [])
    response = ResponseVector(_numeric_column(frame, RESPONSE_COLUMN))
    curves = []
    for position, j in enumerate(sorted(predictors)):
        entry = entries[position] if position < len(entries) else {}
        grid = Grid(size, domain = entry.get("domain"))
        columns = [predictors[j][g] for g in sorted(predictors[j])]
        values = np.column_stack([_numeric_column(frame, column) for column in columns])
        curves.append(CurveSet(grid, values, entry.get("label", "x{}".format(j))))

    logger.info("Loaded %d predictors of %d curves on %d points from %s",
        len(curves), len(response), len(curves[0].grid), path)
    return curves, response


def curves_to_frame(curves: List[CurveSet], response: ResponseVector = None) -> pd.DataFrame:
    """Lays out curves (and responses) in the CSV format read by load_curves

    :param curves: The predictors to write, all with the same number of curves
    :param response: The responses; a column of zeros is written when not given
    """
    n = len(curves[0])
    if any(len(predictor) != n for predictor in curves):
        raise DimensionMismatchError("All predictors must have the same number of curves")
    if response is not None and len(response) != n:
        raise DimensionMismatchError("Expected {} responses, got {}".format(n, len(response)))

    columns = {RESPONSE_COLUMN: response.y if response is not None else np.zeros(n)}
    for j, predictor in enumerate(curves, start = 1):
        for g in range(len(predictor.grid)):
            columns["x{}_{}".format(j, g + 1)] = predictor.values[:, g]
    return pd.DataFrame(columns)


def describe(curves: List[CurveSet]) -> dict:
    """Returns the sidecar descriptor for a list of predictors"""
    return {
        "predictors": [
            {"label": predictor.label, "domain": list(predictor.grid.domain)}
            if predictor.grid.domain is not None else {"label": predictor.label}
            for predictor in curves
        ]
    }
