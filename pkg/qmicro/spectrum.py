"""Finite quantum spectra: construction, merging and simple statistics.

Energies are dimensionless. A spectrum whose energies are all integers or
fractions is kept exact (``fractions.Fraction``); any float makes it a
floating spectrum.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from qmicro.config import get_settings
from qmicro.errors import InvalidArgumentError, UnsupportedError
from qmicro.jacobi import jacobi_eigenvalues
from qmicro.logging_utils import get_logger

logger = get_logger(__name__)


class Level(NamedTuple):
    energy: object
    multiplicity: int


def exact(value):
    """
    Convert a builder parameter to an exact rational where that is faithful.

    Integers and fractions convert directly; floats go through their shortest
    decimal representation, so ``0.25`` becomes ``1/4`` and ``0.1`` becomes
    ``1/10``.

    Args:
        value: Real number.

    Returns:
        Fraction: Exact value.

    Raises:
        InvalidArgumentError: If ``value`` is not finite.
    """
    if isinstance(value, Rational):
        return Fraction(value)
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"non-finite parameter: {value}")
    return Fraction(repr(value))


def _normalize_energies(values: Sequence) -> List:
    if all(isinstance(v, Rational) for v in values):
        return [Fraction(v) for v in values]
    out = []
    for v in values:
        v = float(v)
        if not math.isfinite(v):
            raise InvalidArgumentError(f"non-finite energy: {v}")
        out.append(v)
    return out


@dataclass(frozen=True)
class Spectrum:
    """
    Distinct energy levels with multiplicities, sorted by energy.

    Attributes:
        levels (tuple[Level, ...]): ``(energy, multiplicity)`` pairs with
            strictly increasing energies and multiplicities >= 1.
    """

    levels: Tuple[Level, ...]

    def __post_init__(self):
        levels = tuple(Level(e, int(k)) for e, k in self.levels)
        energies = _normalize_energies([lv.energy for lv in levels])
        levels = tuple(Level(e, lv.multiplicity) for e, lv in zip(energies, levels))
        if any(lv.multiplicity < 1 for lv in levels):
            raise InvalidArgumentError("multiplicities must be positive")
        if any(b.energy <= a.energy for a, b in zip(levels, levels[1:])):
            raise InvalidArgumentError("level energies must be strictly increasing")
        if sum(lv.multiplicity for lv in levels) < 2:
            raise InvalidArgumentError("a spectrum needs total dimension >= 2")
        object.__setattr__(self, "levels", levels)

    @property
    def n_plus_1(self) -> int:
        return sum(lv.multiplicity for lv in self.levels)

    @property
    def n(self) -> int:
        return self.n_plus_1 - 1

    @property
    def m(self) -> int:
        """Number of distinct levels."""
        return len(self.levels)

    @property
    def energies(self) -> Tuple:
        return tuple(lv.energy for lv in self.levels)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(lv.multiplicity for lv in self.levels)

    @property
    def e_min(self):
        return self.levels[0].energy

    @property
    def e_max(self):
        return self.levels[-1].energy

    @property
    def is_rational(self) -> bool:
        return isinstance(self.e_min, Fraction)

    def expanded(self) -> List:
        """Eigenvalues repeated by multiplicity, ascending."""
        return [lv.energy for lv in self.levels for _ in range(lv.multiplicity)]

    def affine(self, a, b=0) -> "Spectrum":
        """
        Spectrum of ``a * H + b``.

        Raises:
            InvalidArgumentError: If ``a`` is zero.
        """
        if a == 0:
            raise InvalidArgumentError("affine scale must be non-zero")
        levels = [(a * lv.energy + b, lv.multiplicity) for lv in self.levels]
        return Spectrum(tuple(sorted(levels, key=lambda lv: lv[0])))

    def reflected(self) -> "Spectrum":
        return self.affine(-1)

    def to_dict(self) -> dict:
        return {
            "levels": [
                [str(lv.energy) if self.is_rational else lv.energy, lv.multiplicity]
                for lv in self.levels
            ]
        }


@dataclass(frozen=True)
class HermitianMatrix:
    """
    Dense square matrix stored row-major.

    Attributes:
        dimension (int): Number of rows.
        entries (tuple[complex, ...]): ``dimension**2`` entries, row-major.
    """

    dimension: int
    entries: Tuple[complex, ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidArgumentError("matrix dimension must be positive")
        if len(self.entries) != self.dimension**2:
            raise InvalidArgumentError(
                f"expected {self.dimension ** 2} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_array(cls, array) -> "HermitianMatrix":
        a = np.asarray(array, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgumentError(f"matrix must be square, got shape {a.shape}")
        return cls(a.shape[0], tuple(complex(x) for x in a.ravel()))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex).reshape(
            self.dimension, self.dimension
        )


def build_uniform_ladder(n: int, epsilon=1) -> Spectrum:
    """
    Nondegenerate ladder ``{0, eps, 2 eps, ..., n eps}``.

    Args:
        n (int): Number of gaps, ``n >= 1`` (dimension n + 1).
        epsilon: Level spacing, positive.

    Returns:
        Spectrum: Exact ladder.

    Raises:
        InvalidArgumentError: For non-positive ``n`` or ``epsilon``.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"ladder size must be a positive integer, got {n}")
    eps = exact(epsilon)
    if eps <= 0:
        raise InvalidArgumentError(f"ladder spacing must be positive, got {epsilon}")
    return Spectrum(tuple((k * eps, 1) for k in range(int(n) + 1)))


def build_ising_chain(J, B) -> Spectrum:
    """
    Spectrum of the cyclic three-spin Ising chain.

    ``E(s) = -J sum_k s_k s_{k+1} - B sum_k s_k`` with ``s_4 = s_1``, over all
    eight configurations; equal energies merge into multiplicities.

    Args:
        J: Coupling.
        B: Field.

    Returns:
        Spectrum: Exact spectrum of total dimension 8.
    """
    J, B = exact(J), exact(B)
    values = []
    for s in itertools.product((1, -1), repeat=3):
        bond = sum(s[k] * s[(k + 1) % 3] for k in range(3))
        values.append(-J * bond - B * sum(s))
    return from_eigenvalues(values, multiplicity_tolerance=0)


def from_eigenvalues(
    values: Iterable, multiplicity_tolerance: Optional[float] = None
) -> Spectrum:
    """
    Build a spectrum from raw eigenvalues.

    Sorted values whose consecutive gap is at most the tolerance merge into a
    single level at the group mean with summed multiplicity.

    Args:
        values (Iterable): Eigenvalues, any order.
        multiplicity_tolerance (float, optional): Absolute merge tolerance;
            defaults to ``merge_tolerance`` times the spectral range.

    Returns:
        Spectrum: The merged spectrum.

    Raises:
        InvalidArgumentError: If fewer than two values are given.
    """
    values = _normalize_energies(list(values))
    if len(values) < 2:
        raise InvalidArgumentError(f"need at least 2 eigenvalues, got {len(values)}")
    values.sort()
    if multiplicity_tolerance is None:
        multiplicity_tolerance = get_settings().merge_tolerance * float(
            values[-1] - values[0]
        )
    if multiplicity_tolerance < 0:
        raise InvalidArgumentError("multiplicity tolerance must be non-negative")

    groups = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] <= multiplicity_tolerance:
            groups[-1].append(v)
        else:
            groups.append([v])

    levels = []
    for group in groups:
        if all(v == group[0] for v in group):
            energy = group[0]
        elif isinstance(group[0], Fraction):
            energy = sum(group) / len(group)
        else:
            energy = math.fsum(group) / len(group)
        levels.append((energy, len(group)))
    return Spectrum(tuple(levels))


def eigenvalues_of_hermitian(
    H: HermitianMatrix,
    multiplicity_tolerance: Optional[float] = None,
    max_dimension: Optional[int] = None,
) -> Spectrum:
    """
    Spectrum of a small Hermitian matrix.

    Args:
        H (HermitianMatrix): Input matrix.
        multiplicity_tolerance (float, optional): Passed to ``from_eigenvalues``.
        max_dimension (int, optional): Size cap; defaults to ``matrix_cap``.

    Returns:
        Spectrum: Floating spectrum of the eigenvalues.

    Raises:
        InvalidArgumentError: If ``H`` is not Hermitian to 1e-12 relative.
        UnsupportedError: If ``H`` exceeds the size cap.
    """
    cap = max_dimension or get_settings().matrix_cap
    if H.dimension > cap:
        raise UnsupportedError(
            f"matrix dimension {H.dimension} exceeds the small-matrix cap {cap}"
        )
    a = H.to_array()
    scale = max(float(np.max(np.abs(a))), 1e-300)
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > 1e-12 * scale:
        raise InvalidArgumentError(
            f"matrix is not Hermitian (asymmetry {asym:.3g}, scale {scale:.3g})"
        )
    a = 0.5 * (a + a.conj().T)
    eigs = jacobi_eigenvalues(a)
    return from_eigenvalues([float(e) for e in eigs], multiplicity_tolerance)


def mean_energy(s: Spectrum):
    """Uniform average of the eigenvalues, ``tr(H) / (n + 1)``."""
    total = sum(lv.energy * lv.multiplicity for lv in s.levels)
    return total / s.n_plus_1
