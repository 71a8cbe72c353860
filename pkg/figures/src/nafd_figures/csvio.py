"""Typed, validated access to the simulator's CSV artifacts.

Rendering is read-only: these helpers parse what the simulator wrote and
never recompute anything. Numeric columns become float arrays with empty
fields as NaN; anything non-numeric stays a string array.
"""

import csv

import numpy as np

__all__ = ["MissingColumnError", "read_columns"]


class MissingColumnError(ValueError):
    """A required column is absent from a CSV file."""

    def __init__(self, column: str, path, available):
        self.column = column
        self.path = str(path)
        super().__init__(
            f"column '{column}' not found in {path} "
            f"(available: {', '.join(available)})"
        )


def _to_array(values: list) -> np.ndarray:
    """Float array with '' -> NaN, or a string array if conversion fails."""
    try:
        return np.array([float(v) if v != "" else np.nan for v in values])
    except ValueError:
        return np.array(values, dtype=object)


def read_columns(path, required=()) -> dict:
    """Parse a CSV file into named column arrays.

    Raises MissingColumnError for the first `required` name that the header
    does not carry, so callers fail before touching any data.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    for name in required:
        if name not in header:
            raise MissingColumnError(name, path, header)
    columns = {}
    for j, name in enumerate(header):
        columns[name] = _to_array([row[j] for row in rows])
    return columns
