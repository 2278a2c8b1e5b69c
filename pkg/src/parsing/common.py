from __future__ import annotations

import io
import re
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from src.errors import GraceError
from src.utils.numbers import safe_float


class ParsingError(GraceError):
    """Raised when an input file cannot be parsed."""

    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.line = line
        self.column = column


HEADER_PATTERN = re.compile(r"[^a-z0-9]+")


def normalize_header(label: str) -> str:
    return HEADER_PATTERN.sub("_", str(label).strip().lower()).strip("_")


def read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, str):
        if "\n" in source:
            return source
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if hasattr(source, "read"):
        content = source.read()
        return content.decode("utf-8") if isinstance(content, bytes) else content
    raise ParsingError("Unsupported input source provided")


def read_csv(source, **kwargs) -> pd.DataFrame:
    text = read_text(source)
    if not text.strip():
        raise ParsingError("input file is empty")
    try:
        return pd.read_csv(io.StringIO(text), **kwargs)
    except pd.errors.ParserError as exc:
        raise ParsingError(f"malformed CSV: {exc}") from exc


def looks_like_header(cells: Iterable[str]) -> bool:
    return any(safe_float(cell) is None for cell in cells)


def to_numeric_array(raw: pd.DataFrame, first_line: int) -> np.ndarray:
    """Convert string cells to floats, reporting the 1-based line and column of the first bad cell."""
    values = np.empty(raw.shape, dtype=float)
    for row_idx, row in enumerate(raw.itertuples(index=False)):
        for col_idx, cell in enumerate(row):
            number = safe_float(cell)
            if number is None:
                text = "" if cell is None or (isinstance(cell, float) and np.isnan(cell)) else str(cell)
                problem = "missing value" if not text.strip() else f"unparseable number '{text}'"
                raise ParsingError(problem, line=first_line + row_idx, column=col_idx + 1)
            values[row_idx, col_idx] = number
    return values
