"""Piecewise polynomials on a strictly increasing knot sequence.

Each piece is stored in the local shifted basis of its interval, i.e. as
powers of ``(x - left_knot)``. Values are right-continuous at interior knots
and zero outside ``[knots[0], knots[-1])``; ``side="left"`` gives the limit
from below instead.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Dict, List, Literal, Sequence, Tuple

import numpy as np

from qmicro import polynomial as P
from qmicro.errors import InvalidArgumentError

Backing = Literal["rational", "float"]
Side = Literal["left", "right"]


def to_number(value, backing: Backing):
    """Coerce ``value`` to the scalar type of ``backing``."""
    if backing == "rational":
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            return Fraction(value)
        return Fraction(value)
    return float(value)


def encode_number(value) -> Any:
    """JSON form of a scalar: ``"p/q"`` for fractions, plain float otherwise."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def decode_number(value, backing: Backing):
    if backing == "rational":
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class PiecewisePolynomial:
    """
    Immutable piecewise polynomial.

    Attributes:
        knots (tuple): Strictly increasing breakpoints.
        pieces (tuple): One coefficient tuple per interval, ascending powers of
            ``(x - knots[j])``; all pieces have the same length.
        backing (str): ``"rational"`` (Fraction coefficients) or ``"float"``.
    """

    knots: Tuple
    pieces: Tuple[Tuple, ...]
    backing: Backing = "float"

    def __post_init__(self):
        if len(self.knots) < 2:
            raise InvalidArgumentError("a piecewise polynomial needs at least two knots")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise InvalidArgumentError("knots must be strictly increasing")
        if len(self.pieces) != len(self.knots) - 1:
            raise InvalidArgumentError(
                f"{len(self.knots)} knots need {len(self.knots) - 1} pieces, "
                f"got {len(self.pieces)}"
            )

    @property
    def degree(self) -> int:
        """Largest power stored (length of the coefficient vectors minus one)."""
        return max(len(p) for p in self.pieces) - 1

    def width(self, j: int):
        return self.knots[j + 1] - self.knots[j]

    def piece_index(self, x, side: Side = "right") -> int:
        """
        Locate the piece used to evaluate at ``x``.

        Args:
            x: Abscissa.
            side (str): ``"right"`` for right-continuous lookup, ``"left"``
                for the limit from below.

        Returns:
            int: Piece index, or -1 when ``x`` is outside the support.
        """
        lo, hi = self.knots[0], self.knots[-1]
        if side == "right":
            if x < lo or x >= hi:
                return -1
            return bisect_right(self.knots, x) - 1
        if x <= lo or x > hi:
            return -1
        return bisect_left(self.knots, x) - 1

    def evaluate(self, x, order: int = 0, side: Side = "right"):
        """Value of the ``order``-th derivative at ``x`` (analytic)."""
        j = self.piece_index(x, side)
        if j < 0:
            return self._zero()
        return P.evaluate(P.derivative(self.pieces[j], order), x - self.knots[j])

    __call__ = evaluate

    def one_sided_derivatives(self, j: int) -> Tuple[List, List]:
        """
        Derivatives of orders 0..degree at interior knot ``j`` from both sides.

        Args:
            j (int): Index into ``knots``; must satisfy 0 < j < len(knots) - 1.

        Returns:
            tuple: (left limits, right limits).
        """
        left_piece = P.taylor_shift(self.pieces[j - 1], self.width(j - 1))
        right_piece = self.pieces[j]
        left = [c * factorial(k) for k, c in enumerate(left_piece)]
        right = [c * factorial(k) for k, c in enumerate(right_piece)]
        size = self.degree + 1
        zero = self._zero()
        return P.pad(left, size, zero), P.pad(right, size, zero)

    def derivative(self, order: int = 1) -> "PiecewisePolynomial":
        zero = self._zero()
        pieces = []
        for piece in self.pieces:
            d = P.derivative(piece, order) or [zero]
            pieces.append(tuple(d))
        return PiecewisePolynomial(self.knots, tuple(pieces), self.backing)

    def scaled(self, factor) -> "PiecewisePolynomial":
        pieces = tuple(tuple(c * factor for c in piece) for piece in self.pieces)
        backing = self.backing if isinstance(factor, (int, Fraction)) else "float"
        return PiecewisePolynomial(self.knots, pieces, backing)

    def to_float(self) -> "PiecewisePolynomial":
        if self.backing == "float":
            return self
        return PiecewisePolynomial(
            tuple(float(k) for k in self.knots),
            tuple(tuple(float(c) for c in piece) for piece in self.pieces),
            "float",
        )

    def integrate_moment(self, a, b, power: int = 0):
        """
        Exact integral of ``x**power * f(x)`` over ``[a, b]`` clamped to the support.

        Args:
            a: Lower limit.
            b: Upper limit, ``b >= a``.
            power (int): Non-negative moment order.

        Returns:
            The integral, in the backing's scalar type when the limits are.

        Raises:
            InvalidArgumentError: If ``a > b`` or ``power`` is negative.
        """
        if a > b:
            raise InvalidArgumentError(f"integration limits out of order: {a} > {b}")
        if power < 0:
            raise InvalidArgumentError("moment power must be non-negative")
        lo = max(a, self.knots[0])
        hi = min(b, self.knots[-1])
        total = self._zero()
        if lo >= hi:
            return total
        for j, piece in enumerate(self.pieces):
            left, right = self.knots[j], self.knots[j + 1]
            x0, x1 = max(lo, left), min(hi, right)
            if x0 >= x1:
                continue
            # x**power expanded around the piece origin
            weight = [comb(power, i) * left ** (power - i) for i in range(power + 1)]
            integrand = P.mul(weight, list(piece))
            total = total + P.integrate(integrand, x0 - left, x1 - left)
        return total

    def critical_points(self) -> List:
        """
        Interior zeros of the derivative, piece by piece.

        Returns:
            list: Abscissae (floats, or Fractions when a rational root is
            recovered exactly) where the first derivative vanishes inside a
            piece; the left knot of a piece whose derivative is identically
            zero is included.
        """
        found = []
        for j, piece in enumerate(self.pieces):
            d = P.trim(P.derivative(piece))
            left, h = self.knots[j], self.width(j)
            if not d:
                found.append(left)
                continue
            if len(d) == 1:
                continue
            roots = np.polynomial.polynomial.polyroots([float(c) for c in d])
            for r in roots:
                if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)):
                    continue
                x = float(r.real)
                if not 0.0 < x < float(h):
                    continue
                if self.backing == "rational":
                    guess = Fraction(x).limit_denominator(10**6)
                    if P.evaluate(d, guess) == 0:
                        found.append(left + guess)
                        continue
                    x = _polish_root(d, x)
                found.append(left + x)
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {
            "backing": self.backing,
            "knots": [encode_number(k) for k in self.knots],
            "pieces": [[encode_number(c) for c in piece] for piece in self.pieces],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PiecewisePolynomial":
        backing = data["backing"]
        knots = tuple(decode_number(k, backing) for k in data["knots"])
        pieces = tuple(
            tuple(decode_number(c, backing) for c in piece) for piece in data["pieces"]
        )
        return cls(knots, pieces, backing)

    def _zero(self):
        return Fraction(0) if self.backing == "rational" else 0.0


def _polish_root(coeffs: Sequence, x: float, steps: int = 3) -> float:
    """Newton steps in floating point on a rational polynomial."""
    c = [float(v) for v in coeffs]
    dc = P.derivative(c)
    for _ in range(steps):
        slope = P.evaluate(dc, x)
        if slope == 0:
            break
        x -= P.evaluate(c, x) / slope
    return x
