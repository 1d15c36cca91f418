import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from funreg.errors import DimensionMismatchError, DomainError, ParseError
from funreg.funcdata import (
    CurveSet, Grid, ResponseVector,
    center, curves_to_frame, describe, differentiate, expand_derivatives,
    inner_product, integrate, load_curves
)
from util.functions import DATA_FORMAT, write_frame


class TestGrid:

    def test_weight_times_size_is_one(self):
        for size in (2, 5, 500):
            grid = Grid(size)
            assert abs(grid.weight * size - 1) <= 1e-12

    def test_points_are_equally_spaced(self):
        grid = Grid(500)
        steps = np.diff(grid.points)
        assert np.all(steps > 0)
        assert_allclose(steps, grid.spacing, rtol = 1e-12)
        assert grid.points[0] == 0.0 and grid.points[-1] == 1.0

    def test_physical_points(self):
        grid = Grid(3, domain = (850, 1050))
        assert_allclose(grid.physical_points, [850, 950, 1050])

    def test_from_points_rejects_uneven_points(self):
        assert len(Grid.from_points(np.linspace(0, 1, 7))) == 7
        with pytest.raises(DomainError):
            Grid.from_points([0.0, 0.1, 1.0])

    def test_too_small(self):
        with pytest.raises(DomainError):
            Grid(1)


class TestContainers:

    def test_curves_are_frozen(self, grid):
        curves = CurveSet(grid, np.zeros((2, len(grid))))
        with pytest.raises(ValueError):
            curves.values[0, 0] = 1.0

    def test_row_length_must_match_grid(self, grid):
        with pytest.raises(DimensionMismatchError):
            CurveSet(grid, np.zeros((2, len(grid) - 1)))

    def test_non_finite_values(self, grid):
        values = np.zeros((2, len(grid)))
        values[1, 3] = np.nan
        with pytest.raises(DomainError):
            CurveSet(grid, values)
        with pytest.raises(DomainError):
            ResponseVector([1.0, np.inf])

    def test_subset(self, grid):
        curves = CurveSet(grid, np.arange(3)[:, None] * np.ones(len(grid)), "x")
        assert_allclose(curves.subset(slice(1, None)).values[:, 0], [1, 2])
        assert_allclose(ResponseVector([1, 2, 3]).subset(slice(None, 2)).y, [1, 2])


class TestQuadrature:

    def test_constant_integrates_to_one(self):
        for size in (2, 17, 500):
            grid = Grid(size)
            assert integrate(np.ones(size), grid) == pytest.approx(1.0, abs = 1e-15)

    def test_identity(self):
        grid = Grid(500)
        assert integrate(grid.points, grid) == pytest.approx(0.5, abs = 2e-3)

    def test_squared_cosine(self):
        grid = Grid(500)
        assert integrate(2 * np.cos(math.pi * grid.points) ** 2, grid) == pytest.approx(1.0, abs = 1e-2)

    def test_linearity(self, rng):
        grid = Grid(64)
        f, g = rng.standard_normal((2, 64))
        expected = 2.5 * integrate(f, grid) - 0.5 * integrate(g, grid)
        assert integrate(2.5 * f - 0.5 * g, grid) == pytest.approx(expected, rel = 1e-12)

    def test_rows_are_integrated_separately(self):
        grid = Grid(10)
        assert_allclose(integrate(np.vstack([np.ones(10), 2 * np.ones(10)]), grid), [1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            integrate(np.ones(4), Grid(5))

    def test_inner_products_of_the_cosine_basis(self):
        grid = Grid(500)
        phi = math.sqrt(2) * np.cos(math.pi * grid.points)
        assert inner_product(np.ones(500), np.ones(500), grid) == pytest.approx(1.0)
        assert abs(inner_product(np.ones(500), phi, grid)) <= 1e-10
        assert inner_product(phi, phi, grid) == pytest.approx(1.0, abs = 1e-2)

    def test_inner_product_is_symmetric_and_positive(self, rng):
        grid = Grid(40)
        f, g = rng.standard_normal((2, 40))
        assert inner_product(f, g, grid) == pytest.approx(inner_product(g, f, grid), rel = 1e-14)
        assert inner_product(f, f, grid) > 0

    def test_inner_product_grid_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            inner_product(np.ones(5), np.ones(6), Grid(5))


class TestCenter:

    def test_identical_curves(self, grid):
        centered, _ = center(CurveSet(grid, np.tile(np.sin(grid.points), (2, 1))))
        assert_allclose(centered.values, 0.0, atol = 1e-15)

    def test_antisymmetric_pair(self, grid):
        phi = np.cos(math.pi * grid.points)
        centered, mean = center(CurveSet(grid, np.vstack([phi, -phi])))
        assert_allclose(mean, 0.0, atol = 1e-15)
        assert_allclose(centered.values, np.vstack([phi, -phi]))

    def test_hand_arithmetic(self, grid):
        values = np.vstack([np.ones(len(grid)), 3 * np.ones(len(grid))])
        centered, mean = center(CurveSet(grid, values))
        assert_allclose(mean, 2.0)
        assert_allclose(centered.values[0], -1.0)
        assert_allclose(centered.values[1], 1.0)

    def test_idempotent(self, rng, grid):
        curves = CurveSet(grid, rng.standard_normal((6, len(grid))))
        once, _ = center(curves)
        twice, _ = center(once)
        assert_allclose(twice.values, once.values, atol = 1e-12)
        assert_allclose(once.values.sum(axis = 0), 0.0, atol = 1e-12)

    def test_empty(self, grid):
        with pytest.raises(DomainError):
            center(CurveSet(grid, np.zeros((0, len(grid)))))


class TestDifferentiate:

    def test_constant(self, grid):
        curves = CurveSet(grid, 4 * np.ones((2, len(grid))))
        for order in (1, 2, 3):
            assert_allclose(differentiate(curves, order).values, 0.0, atol = 1e-9)

    def test_linear(self, grid):
        derivative = differentiate(CurveSet(grid, grid.points), 1)
        assert_allclose(derivative.values[0, 1:-1], 1.0, atol = 1e-8)
        assert derivative.label == "x_d1"

    def test_quadratic(self, grid):
        derivative = differentiate(CurveSet(grid, grid.points ** 2), 2)
        assert_allclose(derivative.values[0, 2:-2], 2.0, atol = 1e-6)

    def test_repeated_first_derivative(self, grid):
        curves = CurveSet(grid, grid.points ** 3 - grid.points)
        twice = differentiate(differentiate(curves, 1), 1)
        assert_allclose(twice.values[0, 2:-2], differentiate(curves, 2).values[0, 2:-2], atol = 1e-8)

    def test_unsupported_order(self, grid):
        with pytest.raises(DomainError):
            differentiate(CurveSet(grid, grid.points), 4)
        with pytest.raises(DomainError):
            differentiate(CurveSet(Grid(4), np.ones(4)), 2)

    def test_expand_derivatives(self, grid):
        curves = [CurveSet(grid, grid.points, "spectra")]
        expanded = expand_derivatives(curves, (0, 1, 2))
        assert [predictor.label for predictor in expanded] == ["spectra", "spectra_d1", "spectra_d2"]
        assert expanded[0] is curves[0]


class TestLoadCurves:

    @staticmethod
    def write(path, text):
        path.write_text(text, encoding = "utf-8")
        return path

    def test_well_formed(self, tmp_path):
        path = self.write(tmp_path / "data.csv",
            "y,x1_1,x1_2,x1_3,x1_4\n"
            "1.0,0,1,2,3\n"
            "2.0,1,1,1,1\n"
            "3.5,-1,0.5,2,4\n")
        curves, response = load_curves(path)
        assert len(curves) == 1
        assert len(curves[0]) == 3 and len(curves[0].grid) == 4
        assert_allclose(response.y, [1.0, 2.0, 3.5])
        assert_allclose(curves[0].values[2], [-1, 0.5, 2, 4])

    def test_two_predictors_share_a_grid(self, tmp_path):
        path = self.write(tmp_path / "data.csv",
            "y,x1_1,x1_2,x2_1,x2_2\n"
            "1,0,1,5,6\n"
            "2,1,1,7,8\n")
        curves, _ = load_curves(path)
        assert [predictor.label for predictor in curves] == ["x1", "x2"]
        assert_allclose(curves[1].values, [[5, 6], [7, 8]])

    def test_non_numeric_cell_names_the_row(self, tmp_path):
        path = self.write(tmp_path / "data.csv",
            "y,x1_1,x1_2\n"
            "1,0,1\n"
            "2,abc,1\n"
            "3,0,1\n")
        with pytest.raises(ParseError) as error:
            load_curves(path)
        assert error.value.row == 2
        assert error.value.column == "x1_1"
        assert "row 2" in str(error.value)

    def test_ragged_row(self, tmp_path):
        path = self.write(tmp_path / "data.csv",
            "y,x1_1,x1_2\n"
            "1,0,1\n"
            "2,0,1,9\n")
        with pytest.raises(ParseError):
            load_curves(path)

    def test_short_row(self, tmp_path):
        path = self.write(tmp_path / "data.csv",
            "y,x1_1,x1_2\n"
            "1,0,1\n"
            "2,0\n")
        with pytest.raises(ParseError):
            load_curves(path)

    def test_missing_response(self, tmp_path):
        path = self.write(tmp_path / "data.csv", "x1_1,x1_2\n0,1\n")
        with pytest.raises(ParseError) as error:
            load_curves(path)
        assert error.value.column == "y"

    def test_different_grid_sizes(self, tmp_path):
        path = self.write(tmp_path / "data.csv", "y,x1_1,x1_2,x2_1\n1,0,1,2\n")
        with pytest.raises(ParseError):
            load_curves(path)

    def test_sidecar_descriptor(self, tmp_path):
        path = self.write(tmp_path / "spectra.csv", "y,x1_1,x1_2,x1_3\n1,0,1,2\n2,1,1,1\n")
        (tmp_path / "spectra.json").write_text(json.dumps(
            {"predictors": [{"label": "absorbance", "domain": [850, 1050]}]}), encoding = "utf-8")
        curves, _ = load_curves(path)
        assert curves[0].label == "absorbance"
        assert curves[0].grid.domain == (850.0, 1050.0)

    def test_written_frame_reads_back(self, tmp_path, rng, grid):
        curves = [CurveSet(grid, rng.standard_normal((4, len(grid))), "x1"),
                  CurveSet(grid, rng.standard_normal((4, len(grid))), "x2")]
        response = ResponseVector(rng.standard_normal(4))
        path = tmp_path / "out.csv"
        write_frame(path, curves_to_frame(curves, response), float_format = DATA_FORMAT)
        loaded, loaded_response = load_curves(path)
        assert np.array_equal(loaded[0].values, curves[0].values)
        assert np.array_equal(loaded[1].values, curves[1].values)
        assert np.array_equal(loaded_response.y, response.y)
        assert describe(loaded) == {"predictors": [{"label": "x1"}, {"label": "x2"}]}
