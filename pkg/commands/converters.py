from argparse import ArgumentTypeError
from typing import List


def int_list(text: str) -> List[int]:
    """A converter for integer lists written as "1,2,3", "1-8" or a mix of both

    :param text: The command-line value
    :return: The integers in the order given
    """
    values = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                start, stop = part.split("-", 1)
                values.extend(range(int(start), int(stop) + 1))
            elif part:
                values.append(int(part))
    except ValueError:
        raise ArgumentTypeError("{!r} is not a list of integers".format(text))
    if not values:
        raise ArgumentTypeError("{!r} names no values".format(text))
    return values


def float_list(text: str) -> List[float]:
    """A converter for comma separated numbers

    :param text: The command-line value
    """
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ArgumentTypeError("{!r} is not a list of numbers".format(text))
    if not values:
        raise ArgumentTypeError("{!r} names no values".format(text))
    return values


def matrix(text: str) -> List[List[float]]:
    """A converter for matrices written as rows separated by semicolons: "1,0.2; 0.2,1"

    :param text: The command-line value
    """
    rows = [float_list(row) for row in text.split(";") if row.strip()]
    if not rows or len({len(row) for row in rows}) != 1:
        raise ArgumentTypeError("{!r} is not a rectangular matrix".format(text))
    return rows


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ArgumentTypeError("{!r} is not an integer".format(text))
    if value < 1:
        raise ArgumentTypeError("{} must be at least 1".format(value))
    return value


def probability(text: str) -> float:
    """A converter for confidence levels strictly between 0 and 1"""
    try:
        value = float(text)
    except ValueError:
        raise ArgumentTypeError("{!r} is not a number".format(text))
    if not 0 < value < 1:
        raise ArgumentTypeError("{} must be strictly between 0 and 1".format(value))
    return value
