from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .common import ParsingError, looks_like_header, normalize_header, read_csv, to_numeric_array


def parse_matrix_csv(source) -> Tuple[np.ndarray, Optional[List[str]]]:
    """Comma-delimited numeric matrix; a non-numeric first row is taken as a header."""
    raw = read_csv(source, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    columns: Optional[List[str]] = None
    first_line = 1
    if looks_like_header(raw.iloc[0].tolist()):
        columns = [str(cell).strip() for cell in raw.iloc[0].tolist()]
        if len(set(normalize_header(c) for c in columns)) != len(columns):
            raise ParsingError("duplicate column names in header", line=1)
        raw = raw.iloc[1:].reset_index(drop=True)
        first_line = 2
    if raw.empty:
        raise ParsingError("no data rows found")
    return to_numeric_array(raw, first_line), columns


def parse_vector_csv(source) -> np.ndarray:
    values, _ = parse_matrix_csv(source)
    if values.ndim != 2 or min(values.shape) != 1:
        raise ParsingError(
            f"response file must hold a single column or row, got shape {values.shape}"
        )
    return values.ravel()
