import json
from typing import Union

from data_processing.spectrum_parser import SpectrumFileParser
from qmicro.dos import SCHEMA_VERSION, DensityOfStates
from qmicro.errors import SpectrumFileError
from qmicro.spectrum import Spectrum


def read_text_file(file_path: str) -> str:
    """
    Reads a file and returns its content as a string.

    Args:
        file_path (str): The path to the file.

    Returns:
        str: The stripped content of the file.

    Raises:
        SpectrumFileError: If the file is missing or unreadable.
    """
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            content = file.read()
        return content.strip()
    except FileNotFoundError:
        raise SpectrumFileError(f"The file at '{file_path}' was not found.")
    except PermissionError:
        raise SpectrumFileError(f"Permission denied to read the file at '{file_path}'.")
    except (OSError, UnicodeDecodeError) as e:
        raise SpectrumFileError(f"An error occurred while reading '{file_path}': {e}")


def read_spectrum_file(file_path: str) -> Union[Spectrum, DensityOfStates]:
    """
    Load a spectrum, or a density of states saved by ``qmicro dos --out x.json``.

    Args:
        file_path (str): Path to a JSON or plain-text spectrum file.

    Returns:
        Spectrum or DensityOfStates: A saved density of states is returned
        as is, so it reloads bit-exactly.

    Raises:
        SpectrumFileError: If the file cannot be read or parsed.
    """
    content = read_text_file(file_path)
    try:
        data = json.loads(content)
    except ValueError:
        data = None
    if isinstance(data, dict) and "knots" in data:
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SpectrumFileError(
                f"Unsupported schema_version {version!r} in '{file_path}'."
            )
        try:
            return DensityOfStates.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise SpectrumFileError(f"Malformed density of states in '{file_path}': {e}")
    return SpectrumFileParser().parse(content)
