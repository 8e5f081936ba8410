import json
import re
from fractions import Fraction
from typing import Any, List, Tuple

from qmicro.errors import InvalidArgumentError, SpectrumFileError
from qmicro.spectrum import Spectrum

# one level per line: energy, optional multiplicity, optional trailing comment
LINE_PATTERN = re.compile(
    r"^\s*(?P<energy>[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?)"
    r"(?:\s+(?P<mult>\d+))?\s*(?:#.*)?$"
)


def _exact(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError(f"not an energy: {value!r}")
    return Fraction(str(value)) if isinstance(value, str) else Fraction(value)


class SpectrumFileParser:
    def parse(self, text: str) -> Spectrum:
        """
        Parse a spectrum from file content.

        Tries the JSON form ``{"levels": [[E, mult], ...]}`` first, then the
        line form ``E mult`` with ``#`` comments. Energies may be integers,
        decimals or fractions ``p/q`` and are kept exact.

        Args:
            text (str): File content.

        Returns:
            Spectrum: Parsed spectrum.

        Raises:
            SpectrumFileError: If no valid spectrum is found.
        """
        for reader in (self._parse_json, self._parse_lines):
            try:
                levels = reader(text)
            except (ValueError, TypeError, KeyError, ZeroDivisionError):
                continue
            if self._validate_levels(levels):
                try:
                    return Spectrum(tuple(levels))
                except InvalidArgumentError as e:
                    raise SpectrumFileError(f"Invalid spectrum: {e}")

        raise SpectrumFileError("No valid spectrum found in the input.")

    def _parse_json(self, text: str) -> List[Tuple[Fraction, int]]:
        data = json.loads(text, parse_float=Fraction)
        return [(_exact(e), int(k)) for e, k in data["levels"]]

    def _parse_lines(self, text: str) -> List[Tuple[Fraction, int]]:
        levels = []
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            match = LINE_PATTERN.match(line)
            if not match:
                raise ValueError(f"unparseable line: {line!r}")
            mult = int(match.group("mult") or 1)
            levels.append((Fraction(match.group("energy")), mult))
        return levels

    def _validate_levels(self, levels: List[Tuple[Fraction, int]]) -> bool:
        """
        Basic validation before building the spectrum.

        Equal energies listed on separate lines are merged here, so only an
        empty list or a non-positive multiplicity is rejected.

        Args:
            levels (list): Parsed ``(energy, multiplicity)`` pairs.

        Returns:
            bool: True if the pairs can form a spectrum.
        """
        if not levels or any(k < 1 for _, k in levels):
            return False
        merged = {}
        for e, k in levels:
            merged[e] = merged.get(e, 0) + k
        levels[:] = sorted(merged.items())
        return True

    @property
    def type(self) -> str:
        """Return the type identifier for the parser."""
        return "spectrum_file"
