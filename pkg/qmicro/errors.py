"""Exception types raised by the qmicro library.

Every error carries a plain message; the command-line entry point maps the
classes to exit codes.
"""


class QMicroError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(QMicroError, ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedError(QMicroError):
    """The request is valid but outside what the library handles."""


class DegenerateSpectrumError(InvalidArgumentError):
    """All levels coincide, so the density of states is a delta function."""


class DomainError(QMicroError, ValueError):
    """An energy lies outside the domain where a quantity is defined."""


class NegativeTemperatureError(DomainError):
    """The energy lies on the Omega' < 0 branch and it was not requested."""


class InfiniteTemperatureError(QMicroError):
    """Omega'(E) vanishes, so the temperature is infinite."""


class DivergentHeatError(QMicroError):
    """The specific heat denominator vanishes."""


class FrozenSpectrumError(QMicroError):
    """The spectrum has no finite positive-temperature branch."""


class InternalConsistencyError(QMicroError):
    """A numerical guard or asserted postcondition failed."""


class SpectrumFileError(QMicroError):
    """A spectrum file could not be read or parsed."""


class InsufficientStatisticsError(QMicroError):
    """Too few Monte Carlo samples survived a conditioning window."""

    def __init__(self, achieved: int, required: int, message: str = None):
        self.achieved = achieved
        self.required = required
        super().__init__(
            message
            or f"insufficient statistics: {achieved} samples survived the window, "
            f"{required} required"
        )
