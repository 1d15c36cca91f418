import json
import os
from os import environ
from pathlib import Path
from tempfile import NamedTemporaryFile
from typing import Union

import numpy as np
import pandas as pd

from funreg.errors import ConfigError

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

THREADS_VARIABLE = "FUNREG_THREADS"

# Reports keep ten significant digits; curves and responses keep every bit
SUMMARY_FORMAT = "%.10g"
DATA_FORMAT = "%.17g"

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def thread_count() -> int:
    """Returns the default number of worker threads, read from the
    FUNREG_THREADS environment variable when it is set

    :rtype: int
    """
    value = environ.get(THREADS_VARIABLE)
    if value is None or value.strip() == "":
        return os.cpu_count() or 1
    try:
        return max(int(value), 1)
    except ValueError:
        raise ConfigError("{} must be an integer, got {!r}".format(THREADS_VARIABLE, value))

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def write_text_atomic(path: Union[str, Path], text: str):
    """Writes text to a file all at once: the text goes to a temporary
    file in the same directory, which then replaces the target

    :param path: The file to write
    :param text: The contents
    """
    path = Path(path)
    path.parent.mkdir(parents = True, exist_ok = True)
    with NamedTemporaryFile("w", dir = path.parent, prefix = ".{}.".format(path.name),
                            suffix = ".tmp", delete = False, encoding = "utf-8", newline = "") as handle:
        handle.write(text)
        temporary = handle.name
    try:
        os.replace(temporary, path)
    except OSError:
        os.unlink(temporary)
        raise

def write_frame(path: Union[str, Path], frame: pd.DataFrame, *, float_format: str = SUMMARY_FORMAT):
    """Writes a DataFrame as CSV, atomically

    :param path: The CSV file to write
    :param frame: The table
    :param float_format: SUMMARY_FORMAT for reports, DATA_FORMAT for data that is read back
    """
    write_text_atomic(path, frame.to_csv(index = False, float_format = float_format, lineterminator = "\n"))

def to_json(value):
    """Converts numpy values inside a structure to plain Python for json"""
    if isinstance(value, dict):
        return {str(key): to_json(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_json(value.tolist())
    if isinstance(value, np.generic):
        return to_json(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value

def write_json(path: Union[str, Path], data: dict):
    """Writes a structure as indented JSON, atomically

    :param path: The JSON file to write
    :param data: The structure, which may contain numpy values
    """
    write_text_atomic(path, json.dumps(to_json(data), indent = 2) + "\n")

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def require_file(path: Union[str, Path]) -> Path:
    """Returns the path of an existing input file

    :param path: The file that must exist
    :raises FileNotFoundError: When it does not
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError("No such file: {}".format(path))
    return path

def require_directory(path: Union[str, Path]) -> Path:
    """Returns an output directory, creating it when needed

    :param path: The directory to write into
    :raises ConfigError: When the path exists and is not a directory
    """
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise ConfigError("{} exists and is not a directory".format(path))
    path.mkdir(parents = True, exist_ok = True)
    return path
