import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from funreg.errors import ConfigError, ParseError
from funreg.funcdata import load_curves
from util import tecator
from util.functions import require_directory, require_file, thread_count, to_json, write_json


def raw_file(samples: int) -> str:
    """A spectrometrics file: a text header, then 125 numbers per sample over five lines"""
    lines = ["This is the Tecator data set.", "Columns: absorbances, components, moisture fat protein", ""]
    for sample in range(samples):
        values = [sample + channel / 1000 for channel in range(125)]
        values[123] = 10.0 + sample
        for start in range(0, 125, 25):
            lines.append(" ".join("{:.4f}".format(value) for value in values[start:start + 25]))
    return "\n".join(lines) + "\n"


class TestTecator:

    def test_parse(self):
        spectra, fat = tecator.parse_tecator(raw_file(4), samples = 3)
        assert spectra.shape == (3, 100)
        assert_allclose(fat, [10.0, 11.0, 12.0])
        assert spectra[2, 99] == pytest.approx(2.099)

    def test_too_few_samples(self):
        with pytest.raises(ParseError):
            tecator.parse_tecator(raw_file(2), samples = 3)

    def test_written_file_loads_with_its_wavelengths(self, tmp_path):
        spectra, fat = tecator.parse_tecator(raw_file(5), samples = 5)
        path = tmp_path / "tecator.csv"
        tecator.write_tecator(path, spectra, fat)

        curves, response = load_curves(path)
        assert curves[0].label == "absorbance"
        assert curves[0].grid.domain == (850.0, 1050.0)
        assert_allclose(curves[0].values, spectra)
        assert_allclose(response.y, fat)
        assert json.loads((tmp_path / "tecator.json").read_text())["predictors"][0]["domain"] == [850.0, 1050.0]

    def test_download_uses_requests(self, monkeypatch):
        class Response:
            text = "1 2 3"

            def raise_for_status(self):
                pass

        calls = []
        monkeypatch.setattr(tecator, "get", lambda url, timeout: calls.append((url, timeout)) or Response())
        assert tecator.download_tecator_sync("http://example.org/tecator", timeout = 5) == "1 2 3"
        assert calls == [("http://example.org/tecator", 5)]


class TestFunctions:

    def test_thread_count(self, monkeypatch):
        monkeypatch.setenv("FUNREG_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("FUNREG_THREADS", "0")
        assert thread_count() == 1
        monkeypatch.delenv("FUNREG_THREADS")
        assert thread_count() >= 1
        monkeypatch.setenv("FUNREG_THREADS", "many")
        with pytest.raises(ConfigError):
            thread_count()

    def test_json_conversion(self, tmp_path):
        data = {"a": np.arange(3), "b": np.float64(np.nan), "c": (np.int64(2), 1.5)}
        assert to_json(data) == {"a": [0, 1, 2], "b": None, "c": [2, 1.5]}
        write_json(tmp_path / "out" / "data.json", data)
        assert json.loads((tmp_path / "out" / "data.json").read_text()) == {"a": [0, 1, 2], "b": None, "c": [2, 1.5]}
        assert list(tmp_path.joinpath("out").iterdir()) == [tmp_path / "out" / "data.json"]

    def test_paths(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            require_file(tmp_path / "missing.csv")
        target = tmp_path / "file.txt"
        target.write_text("x")
        assert require_file(target) == target
        with pytest.raises(ConfigError):
            require_directory(target)
        assert require_directory(tmp_path / "new").is_dir()
