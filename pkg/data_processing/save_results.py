import json
import os
from typing import Any, Dict

import pandas as pd

from qmicro.dos import SCHEMA_VERSION
from qmicro.logging_utils import get_logger

logger = get_logger("data_processing.save_results")


def _prepare(path: str, remove_if_exists: bool) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if remove_if_exists and os.path.exists(path):
        try:
            os.remove(path)
            logger.info("The existing file at '%s' was removed.", path)
        except OSError as e:
            raise OSError(f"Error removing existing file: {e}")


def save_csv(frame: pd.DataFrame, path: str, remove_if_exists: bool = True) -> str:
    """
    Save a table as CSV with 17 significant digits.

    The output is locale independent: dot decimal separator, LF line
    endings, no index column.

    Args:
        frame (pd.DataFrame): Table to write.
        path (str): Destination file.
        remove_if_exists (bool): If True, removes an existing file first.

    Returns:
        str: The path written.

    Raises:
        OSError: If there's an error writing to or managing the file.
    """
    try:
        _prepare(path, remove_if_exists)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info("CSV saved at '%s'.", path)
        return path
    except OSError as e:
        raise OSError(f"Error saving CSV file to {path}: {e}")


def save_json(payload: Dict[str, Any], path: str, remove_if_exists: bool = True) -> str:
    """
    Save a JSON document, stamping it with ``schema_version``.

    Args:
        payload (dict): JSON-serializable content.
        path (str): Destination file.
        remove_if_exists (bool): If True, removes an existing file first.

    Returns:
        str: The path written.

    Raises:
        OSError: If there's an error writing to or managing the file.
    """
    document = {"schema_version": SCHEMA_VERSION, **payload}
    try:
        _prepare(path, remove_if_exists)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(document, f, indent=2)
            f.write("\n")
        logger.info("JSON saved at '%s'.", path)
        return path
    except OSError as e:
        raise OSError(f"Error saving JSON file to {path}: {e}")
