"""Package logger configured once from GRACE_INFER_LOG_LEVEL."""

import logging
import os
from typing import Optional

ROOT_LOGGER = "grace_infer"
LEVEL_ENV = "GRACE_INFER_LOG_LEVEL"


def get_logger(name: Optional[str] = None) -> logging.Logger:
    full_name = ROOT_LOGGER if not name else f"{ROOT_LOGGER}.{name}"
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
        )
        handler.setFormatter(formatter)
        root.addHandler(handler)
        root.setLevel(os.environ.get(LEVEL_ENV, "INFO").upper())
    return logging.getLogger(full_name)
