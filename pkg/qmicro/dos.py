"""Exact density of states Omega(E) on the projective state space.

For a spectrum E_0 <= ... <= E_n (repeated by multiplicity) the squared
amplitudes ``p_k`` of a uniformly distributed pure state are uniform on the
simplex, and ``Omega(E)`` is ``pi**n / n!`` times the density of
``sum_k p_k E_k``. That density is ``n`` times the divided difference of the
truncated power ``u -> (u - E)_+**(n-1)`` over the eigenvalues, repeated
eigenvalues contributing derivative terms. It is built here piece by piece
with the Cox-de Boor recurrence on polynomial-valued entries, which is the
numerically stable way to run that divided-difference table and needs no
special case for degenerate levels.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence

from qmicro import polynomial as P
from qmicro.config import get_settings
from qmicro.errors import DegenerateSpectrumError, InvalidArgumentError
from qmicro.logging_utils import get_logger
from qmicro.piecewise import Backing, PiecewisePolynomial, Side, to_number
from qmicro.spectrum import Spectrum

logger = get_logger(__name__)

SCHEMA_VERSION = 1


def phase_space_volume(n: int) -> float:
    """Total volume ``pi**n / n!`` of the state space of an (n+1)-level system."""
    return math.pi**n / math.factorial(n)


def resolve_backing(spectrum: Spectrum, backing: Optional[str] = None) -> Backing:
    """
    Pick the coefficient backing for ``spectrum``.

    ``"auto"`` (the configured default) selects rational arithmetic for
    exact spectra and floating point otherwise.
    """
    backing = backing or get_settings().backing
    if backing == "auto":
        return "rational" if spectrum.is_rational else "float"
    if backing not in ("rational", "float"):
        raise InvalidArgumentError(f"unknown backing {backing!r}")
    return backing


def simplex_density(nodes: Sequence, backing: Backing = "float") -> PiecewisePolynomial:
    """
    Density of ``sum_k p_k x_k`` for ``p`` uniform on the simplex.

    Runs the recurrence

        M_i^k = k / (k - 1) * [(E - x_i) M_i^(k-1) + (x_(i+k) - E) M_(i+1)^(k-1)]
                / (x_(i+k) - x_i)

    from ``M_i^1 = 1 / (x_(i+1) - x_i)`` on each interval between distinct
    nodes, with every entry a polynomial in the local coordinate. All terms
    are non-negative on the interval, so no cancellation occurs.

    Args:
        nodes (Sequence): Node values with repetition, any order.
        backing (str): ``"rational"`` or ``"float"``.

    Returns:
        PiecewisePolynomial: Density of degree ``len(nodes) - 2`` with knots at
        the distinct nodes; it integrates to one.

    Raises:
        DegenerateSpectrumError: If all nodes coincide.
    """
    x = sorted(to_number(v, backing) for v in nodes)
    order = len(x) - 1
    distinct = sorted(set(x))
    if len(distinct) < 2:
        raise DegenerateSpectrumError(
            "all levels coincide; the density of states is a delta function"
        )
    one = to_number(1, backing)
    zero = to_number(0, backing)
    pieces = []
    for j in range(len(distinct) - 1):
        t = distinct[j]
        M = [[one / (x[i + 1] - x[i])] if x[i] <= t < x[i + 1] else [] for i in range(order)]
        for k in range(2, order + 1):
            ratio = to_number(Fraction(k, k - 1), backing)
            nxt = []
            for i in range(order - k + 1):
                span = x[i + k] - x[i]
                if span == 0:
                    nxt.append([])
                    continue
                rising = P.mul([t - x[i], one], M[i])
                falling = P.mul([x[i + k] - t, -one], M[i + 1])
                nxt.append(P.scale(P.add(rising, falling), ratio / span))
            M = nxt
        pieces.append(tuple(P.pad(M[0], order, zero)))
    return PiecewisePolynomial(tuple(distinct), tuple(pieces), backing)


@dataclass(frozen=True)
class DensityOfStates:
    """
    A spectrum together with its density of states.

    Attributes:
        spectrum (Spectrum): The source spectrum.
        shape (PiecewisePolynomial): Energy density of a uniformly random
            pure state; integrates to exactly one. ``Omega = volume * shape``.
        phase_space_volume (float): ``pi**n / n!``.
    """

    spectrum: Spectrum
    shape: PiecewisePolynomial
    phase_space_volume: float

    @property
    def backing(self) -> Backing:
        return self.shape.backing

    @property
    def n(self) -> int:
        return self.spectrum.n

    @property
    def e_min(self):
        return self.shape.knots[0]

    @property
    def e_max(self):
        return self.shape.knots[-1]

    @property
    def omega(self) -> PiecewisePolynomial:
        """Omega itself as a floating piecewise polynomial."""
        return self.shape.to_float().scaled(self.phase_space_volume)

    def to_float(self) -> "DensityOfStates":
        """Same density with a floating shape, for fast sweeps."""
        if self.backing == "float":
            return self
        return DensityOfStates(self.spectrum, self.shape.to_float(), self.phase_space_volume)

    @cached_property
    def reflected(self) -> "DensityOfStates":
        """
        Density of states of ``-H`` with the same backing.

        ``Omega_H(E) = Omega_-H(-E)``; its first pieces are based near E_max.
        """
        return density_of_states(self.spectrum.reflected(), self.backing)

    @cached_property
    def level_weight_shapes(self) -> tuple:
        """
        Per distinct level, the simplex density with that level's node repeated
        once more. Divided by ``(n + 1) * shape`` it gives the conditional mean
        of one squared amplitude of that level at fixed energy.
        """
        nodes = self.spectrum.expanded()
        return tuple(
            simplex_density(nodes + [lv.energy], self.backing)
            for lv in self.spectrum.levels
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spectrum": self.spectrum.to_dict(),
            "backing": self.backing,
            "phase_space_volume": self.phase_space_volume,
            **{k: v for k, v in self.shape.to_dict().items() if k != "backing"},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityOfStates":
        backing = data["backing"]
        levels = tuple(
            (Fraction(e) if isinstance(e, str) else e, k) for e, k in data["spectrum"]["levels"]
        )
        shape = PiecewisePolynomial.from_dict(
            {"backing": backing, "knots": data["knots"], "pieces": data["pieces"]}
        )
        return cls(Spectrum(levels), shape, float(data["phase_space_volume"]))


def density_of_states(s: Spectrum, backing: Optional[str] = None) -> DensityOfStates:
    """
    Build Omega(E) for a spectrum.

    Args:
        s (Spectrum): Spectrum with at least two distinct levels.
        backing (str, optional): ``"auto"``, ``"rational"`` or ``"float"``.

    Returns:
        DensityOfStates: Omega as a piecewise polynomial of degree n - 1 with
        knots at the distinct eigenvalues.

    Raises:
        DegenerateSpectrumError: If the spectrum has a single distinct level.
    """
    if s.n_plus_1 < 2:
        raise InvalidArgumentError("density of states needs dimension >= 2")
    if s.m == 1:
        raise DegenerateSpectrumError(
            f"all {s.n_plus_1} levels equal {s.e_min}; Omega is a delta function"
        )
    backing = resolve_backing(s, backing)
    shape = simplex_density(s.expanded(), backing)
    logger.debug(
        "density of states: n=%d, %d pieces, backing=%s", s.n, len(shape.pieces), backing
    )
    return DensityOfStates(s, shape, phase_space_volume(s.n))


def _check_order(d: DensityOfStates, order: int) -> None:
    if order < 0 or order > d.n - 1:
        raise InvalidArgumentError(
            f"derivative order {order} outside 0..{d.n - 1} for n={d.n}"
        )


def evaluate(d: DensityOfStates, E, derivative_order: int = 0, side: Side = "right") -> float:
    """
    Omega or one of its derivatives at ``E``.

    Args:
        d (DensityOfStates): Density of states.
        E: Energy.
        derivative_order (int): 0..n-1.
        side (str): ``"right"`` (the canonical right-continuous value) or
            ``"left"`` (limit from below).

    Returns:
        float: Value, zero outside the support.

    Raises:
        InvalidArgumentError: If the derivative order exceeds n - 1.
    """
    _check_order(d, derivative_order)
    return d.phase_space_volume * d.shape.evaluate(E, derivative_order, side)


def evaluate_left(d: DensityOfStates, E, derivative_order: int = 0) -> float:
    return evaluate(d, E, derivative_order, side="left")


def evaluate_right(d: DensityOfStates, E, derivative_order: int = 0) -> float:
    return evaluate(d, E, derivative_order, side="right")


def integrate_moment(d: DensityOfStates, a, b, power: int = 0) -> float:
    """
    Integral of ``u**power * Omega(u)`` over ``[a, b]`` clamped to the support.

    Raises:
        InvalidArgumentError: If ``a > b`` or ``power`` is not in 0..2.
    """
    if power not in (0, 1, 2):
        raise InvalidArgumentError(f"moment power must be 0, 1 or 2, got {power}")
    return d.phase_space_volume * d.shape.integrate_moment(a, b, power)


class KnotSmoothness(NamedTuple):
    knot: object
    multiplicity: int
    continuity_order: int
    jump: float


def _matches(left, right, scale: float, backing: Backing) -> bool:
    if backing == "rational":
        return left == right
    return abs(left - right) <= 1e-9 * max(abs(left), abs(right), scale) + 1e-300


def _local_scales(shape: PiecewisePolynomial, j: int, top: int) -> List[float]:
    """Derivative magnitudes at the outer ends of the two pieces meeting at knot ``j``."""
    if shape.backing == "rational":
        return [0.0] * (top + 1)

    def size(piece, k):
        return abs(float(piece[k])) * math.factorial(k) if k < len(piece) else 0.0

    outer = P.taylor_shift(shape.pieces[j], shape.width(j))
    return [max(size(shape.pieces[j - 1], k), size(outer, k)) for k in range(top + 1)]


def smoothness_report(d: DensityOfStates) -> List[KnotSmoothness]:
    """
    Continuity class of Omega at each interior knot.

    Adjacent piece coefficients are compared analytically: the continuity
    order is the largest ``c`` such that derivatives ``0..c`` agree from both
    sides (-1 if Omega itself jumps), and ``jump`` is the jump of derivative
    ``c + 1`` (0 when every stored derivative agrees).

    Args:
        d (DensityOfStates): Density of states.

    Returns:
        list[KnotSmoothness]: One entry per interior knot, ascending.
    """
    shape = d.shape
    top = d.n - 1
    report = []
    for j in range(1, len(shape.knots) - 1):
        left, right = shape.one_sided_derivatives(j)
        scales = _local_scales(shape, j, top)
        c = -1
        for k in range(top + 1):
            if not _matches(left[k], right[k], scales[k], shape.backing):
                break
            c = k
        jump = 0.0 if c >= top else d.phase_space_volume * float(right[c + 1] - left[c + 1])
        report.append(
            KnotSmoothness(shape.knots[j], d.spectrum.multiplicities[j], c, jump)
        )
    return report


def direct_sum_reference(s: Spectrum, E: float) -> float:
    """
    Omega(E) from the explicit alternating sum over a nondegenerate spectrum.

    Only a reference for tests: the sum cancels badly for close levels.

    Raises:
        InvalidArgumentError: If the spectrum is degenerate.
    """
    if s.m != s.n_plus_1:
        raise InvalidArgumentError("direct summation needs a nondegenerate spectrum")
    n = s.n
    energies = [float(e) for e in s.energies]
    total = 0.0
    for k, ek in enumerate(energies):
        if ek <= E:
            continue
        term = (ek - E) ** (n - 1)
        for l, el in enumerate(energies):
            if l != k:
                term /= el - ek
        total += term
    return (-math.pi) ** n / math.factorial(n - 1) * total


def ladder_reference(n: int, E: float, epsilon: float = 1.0) -> float:
    """Omega(E) of the uniform ladder ``k * epsilon`` from its closed alternating sum."""
    x = E / epsilon
    total = 0.0
    for k in range(n + 1):
        if k > x:
            total += (-1) ** k * (k - x) ** (n - 1) / (math.factorial(k) * math.factorial(n - k))
    return (-math.pi) ** n / math.factorial(n - 1) * total / epsilon
