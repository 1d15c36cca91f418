from os import environ
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from requests import get

from funreg.errors import ParseError
from funreg.funcdata import CurveSet, Grid, ResponseVector, curves_to_frame, describe

from .functions import DATA_FORMAT, write_frame, write_json

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

TECATOR_URL = environ.get("FUNREG_TECATOR_URL", "http://lib.stat.cmu.edu/datasets/tecator")

# Every sample is 100 absorbances, 22 principal components, then moisture, fat and protein
CHANNELS = 100
VALUES_PER_SAMPLE = 125
FAT_INDEX = 123
SAMPLES = 215
WAVELENGTHS = (850.0, 1050.0)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def download_tecator_sync(url: str = TECATOR_URL, *, timeout: float = 60) -> str:
    """Synchronously downloads the raw spectrometrics file

    :param url: Where to download it from
    :param timeout: The number of seconds to wait for the server
    """
    response = get(url, timeout = timeout)
    response.raise_for_status()
    return response.text

def parse_tecator(text: str, *, samples: int = SAMPLES) -> Tuple[np.ndarray, np.ndarray]:
    """Parses the raw spectrometrics file into absorbance spectra and fat contents.
    Only lines made entirely of numbers are read; the descriptive header is skipped.

    :param text: The raw file contents
    :param samples: How many samples to keep, in file order

    :returns: A samples * 100 matrix of spectra and the fat content of each sample
    :raises ParseError: When the file holds fewer samples than requested
    """
    numbers = []
    for line in text.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        try:
            values = [float(token) for token in tokens]
        except ValueError:
            continue
        numbers.extend(values)

    available = len(numbers) // VALUES_PER_SAMPLE
    if available < samples:
        raise ParseError("Expected {} samples of {} values, found {}".format(
            samples, VALUES_PER_SAMPLE, available))

    records = np.asarray(numbers[:samples * VALUES_PER_SAMPLE]).reshape(samples, VALUES_PER_SAMPLE)
    return records[:, :CHANNELS], records[:, FAT_INDEX]

def write_tecator(path: Union[str, Path], spectra: np.ndarray, fat: np.ndarray):
    """Writes the spectra and fat contents in the curve CSV format,
    with a sidecar descriptor recording the wavelength range

    :param path: The CSV file to write
    :param spectra: The absorbance spectra, one per row
    :param fat: The fat content of each sample
    """
    path = Path(path)
    curves = [CurveSet(Grid(spectra.shape[1], domain = WAVELENGTHS), spectra, "absorbance")]
    write_frame(path, curves_to_frame(curves, ResponseVector(fat)), float_format = DATA_FORMAT)
    write_json(path.with_suffix(".json"), describe(curves))
