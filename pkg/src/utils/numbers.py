from __future__ import annotations

import math
from typing import Any, Optional

NUMERIC_NULLS = {"", "--", "n/a", "na", "nan", "null", "none"}


def safe_float(value: Any, default: Optional[float] = None) -> Optional[float]:
    """Parse decimal or scientific notation; return ``default`` for blanks or junk."""
    if value is None:
        return default
    if isinstance(value, bool):
        return default
    if isinstance(value, (int, float)):
        number = float(value)
        return default if math.isnan(number) else number
    text = str(value).strip()
    if text.lower() in NUMERIC_NULLS:
        return default
    try:
        number = float(text)
    except (TypeError, ValueError):
        return default
    if math.isnan(number) or math.isinf(number):
        return default
    return number


def safe_int(value: Any) -> Optional[int]:
    number = safe_float(value)
    if number is None or not number.is_integer():
        return None
    return int(number)


def format_float(value: float) -> str:
    """Full double precision, scientific notation."""
    return f"{value:.16e}"
