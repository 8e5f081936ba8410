"""Microcanonical thermodynamics derived from a density of states.

Units: k_B = 1, energies dimensionless. Temperature is ``Omega / Omega'``
and the specific heat is ``Omega'^2 / (Omega'^2 - Omega Omega'')``. Both are
ratios, so they are evaluated on the exact shape polynomial and come back as
``Fraction`` for rational densities at rational energies.

At a knot the scalar functions take a ``side``; the default ``"left"``
approaches from below, i.e. the system is being cooled onto the knot.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from qmicro.config import get_settings
from qmicro.dos import DensityOfStates, smoothness_report
from qmicro.errors import (
    DivergentHeatError,
    DomainError,
    FrozenSpectrumError,
    InfiniteTemperatureError,
    InternalConsistencyError,
    InvalidArgumentError,
    NegativeTemperatureError,
)
from qmicro.logging_utils import get_logger
from qmicro.piecewise import Side
from qmicro.spectrum import mean_energy

logger = get_logger(__name__)


def _require_interior(d: DensityOfStates, E) -> None:
    if not d.e_min < E < d.e_max:
        raise DomainError(f"energy {E} outside the open support ({d.e_min}, {d.e_max})")


def _is_zero(value, reference, d: DensityOfStates) -> bool:
    if d.backing == "rational" and isinstance(value, Fraction):
        return value == 0
    width = float(d.e_max - d.e_min)
    return abs(value) <= 1e-13 * abs(reference) / width


def _mirrored(d: DensityOfStates, E) -> bool:
    # float pieces are based at their left knot and lose digits toward E_max
    return d.backing == "float" and 2 * E > d.e_min + d.e_max


def _derivatives(d: DensityOfStates, E, side: Side, upto: int) -> List:
    if _mirrored(d, E):
        flipped = "left" if side == "right" else "right"
        shape = d.reflected.shape
        return [(-1) ** k * shape.evaluate(-E, k, flipped) for k in range(upto + 1)]
    return [d.shape.evaluate(E, k, side) for k in range(upto + 1)]


def entropy(d: DensityOfStates, E) -> float:
    """
    ``S(E) = ln Omega(E)``.

    Raises:
        DomainError: Outside the open support, or where Omega vanishes.
    """
    _require_interior(d, E)
    (value,) = _derivatives(d, E, "right", 0)
    if value <= 0:
        raise DomainError(f"Omega({E}) = {value} is not positive")
    return math.log(d.phase_space_volume) + math.log(value)


def inverse_temperature(d: DensityOfStates, E, side: Side = "left"):
    """``beta = Omega'/Omega``; finite (zero) at the maximum of Omega."""
    _require_interior(d, E)
    f, f1 = _derivatives(d, E, side, 1)
    if f <= 0:
        raise DomainError(f"Omega({E}) = {f} is not positive")
    return f1 / f


def temperature(d: DensityOfStates, E, side: Side = "left", allow_negative: bool = False):
    """
    Microcanonical temperature ``Omega(E) / Omega'(E)``.

    Args:
        d (DensityOfStates): Density of states.
        E: Energy strictly inside the support.
        side (str): One-sided evaluation at knots.
        allow_negative (bool): Permit the Omega' < 0 branch.

    Returns:
        Temperature (Fraction for exact inputs).

    Raises:
        DomainError: Outside the open support.
        InfiniteTemperatureError: Where Omega' vanishes.
        NegativeTemperatureError: On the Omega' < 0 branch unless allowed.
    """
    _require_interior(d, E)
    f, f1 = _derivatives(d, E, side, 1)
    if _is_zero(f1, f, d):
        raise InfiniteTemperatureError(f"Omega'({E}) = 0: infinite temperature")
    T = f / f1
    if T < 0 and not allow_negative:
        raise NegativeTemperatureError(
            f"E = {E} lies on the negative-temperature branch (T = {float(T):.6g})"
        )
    return T


def specific_heat(d: DensityOfStates, E, side: Side = "left", allow_negative: bool = False):
    """
    Specific heat ``C = dE/dT`` in units of k_B.

    Raises:
        DomainError: Outside the open support.
        InfiniteTemperatureError: Where Omega' vanishes.
        NegativeTemperatureError: On the Omega' < 0 branch unless allowed.
        DivergentHeatError: Where ``Omega'^2 - Omega Omega''`` vanishes.
    """
    _require_interior(d, E)
    f, f1, f2 = _derivatives(d, E, side, 2)
    if _is_zero(f1, f, d):
        raise InfiniteTemperatureError(f"Omega'({E}) = 0: infinite temperature")
    if f1 < 0 and not allow_negative:
        raise NegativeTemperatureError(f"E = {E} lies on the negative-temperature branch")
    denom = f1 * f1 - f * f2
    if _is_zero(denom, f1 * f1, d):
        raise DivergentHeatError(f"specific heat diverges at E = {E}")
    return f1 * f1 / denom


@dataclass(frozen=True)
class AccessibleRange:
    """
    Energies reachable at positive temperature.

    Attributes:
        e_min: Ground energy.
        e_star: Smallest maximizer of Omega.
        e_max: Top of the spectrum (end of the negative-temperature branch).
        frozen (bool): True when ``e_star == e_min``, i.e. no positive
            finite-temperature branch exists.
    """

    e_min: object
    e_star: object
    e_max: object
    frozen: bool

    def upper(self, allow_negative: bool = False):
        return self.e_max if allow_negative else self.e_star


def accessible_range(d: DensityOfStates) -> AccessibleRange:
    """
    Locate the maximum of Omega.

    Candidates are every knot (with the inward one-sided value at the ends)
    and every interior root of Omega' on each piece; the smallest candidate
    attaining the maximum is returned.

    Returns:
        AccessibleRange: ``(e_min, e_star)`` plus the frozen flag.
    """
    shape = d.shape
    candidates = []
    for j, knot in enumerate(shape.knots):
        if j == 0:
            value = shape.evaluate(knot, side="right")
        elif j == len(shape.knots) - 1:
            value = shape.evaluate(knot, side="left")
        else:
            value = max(shape.evaluate(knot, side="left"), shape.evaluate(knot))
        candidates.append((knot, value))
    candidates.extend((x, shape.evaluate(x)) for x in shape.critical_points())
    candidates.sort(key=lambda c: c[0])

    best = max(v for _, v in candidates)
    exact = all(isinstance(v, Fraction) for _, v in candidates)
    tol = 0 if exact else 1e-12 * float(best)
    e_star = next(x for x, v in candidates if v >= best - tol)
    frozen = e_star <= d.e_min
    if frozen:
        logger.info("Omega is maximal at E_min = %s: no positive-temperature branch", d.e_min)
    return AccessibleRange(d.e_min, e_star, d.e_max, frozen)


def energy_uncertainty(d: DensityOfStates, E) -> float:
    """
    Residual quantum energy uncertainty Delta H of the microcanonical state.

    ``(Delta H)^2 = (n + 1) / Omega(E) * int_{E_min}^{E} (Hbar - u) Omega(u) du``
    with ``Hbar`` the mean eigenvalue; it vanishes at both ends of the
    spectrum. Delta H is unchanged under ``H -> -H``, so on the float backing
    the upper half is computed from the reflected spectrum, where the
    integral runs over the short stretch next to its lower edge.

    Raises:
        DomainError: Outside ``[E_min, E_max]``.
        InternalConsistencyError: If the radicand is clearly negative.
    """
    if not d.e_min <= E <= d.e_max:
        raise DomainError(f"energy {E} outside [{d.e_min}, {d.e_max}]")
    if E == d.e_min or E == d.e_max:
        return 0.0
    if _mirrored(d, E):
        return energy_uncertainty(d.reflected, -E)
    hbar = mean_energy(d.spectrum)
    shape = d.shape
    integral = hbar * shape.integrate_moment(d.e_min, E, 0) - shape.integrate_moment(
        d.e_min, E, 1
    )
    radicand = (d.n + 1) * integral / shape.evaluate(E)
    width = float(d.e_max - d.e_min)
    if radicand < -1e-12 * max(1.0, width * width):
        raise InternalConsistencyError(
            f"negative energy variance {float(radicand):.3g} at E = {E}"
        )
    return math.sqrt(max(0.0, float(radicand)))


def microcanonical_weights(d: DensityOfStates, E, side: Side = "right") -> List:
    """
    Diagonal of the microcanonical density matrix in the energy eigenbasis.

    ``w_k`` is the conditional mean of the squared amplitude ``p_k`` given
    ``sum_j p_j E_j = E``. Weighting by ``p_k`` turns the flat simplex law
    into one with node ``E_k`` doubled, so ``w_k`` is the ratio of that
    density to ``(n + 1)`` times Omega's shape.

    Args:
        d (DensityOfStates): Density of states.
        E: Energy strictly inside the support.
        side (str): One-sided evaluation at knots.

    Returns:
        list: ``n + 1`` weights, eigenstates in ascending energy order; equal
        within a degenerate level. They sum to one with mean energy ``E``.

    Raises:
        DomainError: Outside the open support.
    """
    _require_interior(d, E)
    base = d.shape.evaluate(E, 0, side) * (d.n + 1)
    weights = []
    for level, numerator in zip(d.spectrum.levels, d.level_weight_shapes):
        w = numerator.evaluate(E, 0, side) / base
        weights.extend([w] * level.multiplicity)
    return weights


@dataclass(frozen=True)
class CriticalPoint:
    """
    A knot inside the accessible range where E(T) is not smooth.

    Attributes:
        E_c: Knot energy.
        T_c: Temperature limit from below.
        T_minus, T_plus: One-sided temperature limits (equal unless Omega'
            itself jumps).
        C_minus, C_plus: One-sided specific heats (None where divergent).
        discontinuity_order (int): Order of the first derivative of E(T) that
            jumps; 1 means the specific heat jumps.
        multiplicity (int): Degeneracy of the knot.
    """

    E_c: object
    T_c: object
    T_minus: object
    T_plus: object
    C_minus: object
    C_plus: object
    discontinuity_order: int
    multiplicity: int

    def to_dict(self) -> Dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "E_c": num(self.E_c),
            "T_c": num(self.T_c),
            "T_minus": num(self.T_minus),
            "T_plus": num(self.T_plus),
            "C_minus": num(self.C_minus),
            "C_plus": num(self.C_plus),
            "discontinuity_order": self.discontinuity_order,
            "multiplicity": self.multiplicity,
        }


def _heat_or_none(d: DensityOfStates, E, side: Side):
    try:
        return specific_heat(d, E, side)
    except DivergentHeatError:
        return None


def critical_points(d: DensityOfStates) -> List[CriticalPoint]:
    """
    Finite-system phase transitions at the knots below the maximum of Omega.

    The discontinuity order comes from the smoothness report: if Omega is of
    class ``c`` at the knot, T(E) first jumps in its ``c``-th derivative and
    so does E(T). ``c = 0`` means T itself jumps (order 0).

    Returns:
        list[CriticalPoint]: Possibly empty, ascending in energy.
    """
    rng = accessible_range(d)
    if rng.frozen:
        return []
    points = []
    for entry in smoothness_report(d):
        knot = entry.knot
        if not rng.e_min < knot < rng.e_star:
            continue
        t_minus = temperature(d, knot, "left")
        t_plus = temperature(d, knot, "right")
        points.append(
            CriticalPoint(
                E_c=knot,
                T_c=t_minus,
                T_minus=t_minus,
                T_plus=t_plus,
                C_minus=_heat_or_none(d, knot, "left"),
                C_plus=_heat_or_none(d, knot, "right"),
                discontinuity_order=max(entry.continuity_order, 0),
                multiplicity=entry.multiplicity,
            )
        )
    logger.debug("found %d critical points", len(points))
    return points


@dataclass(frozen=True)
class EnergyGrid:
    """
    Sampling grid for thermodynamic curves.

    Points sit at cell centres ``lower + (i + 1/2) h``; a centre that lands
    on a knot moves half a step away from it.

    Attributes:
        count (int, optional): Number of points; defaults to ``grid_points``.
        lower, upper (optional): Range; defaults to the accessible range.
        allow_negative (bool): Extend the default range to ``E_max``.
    """

    count: Optional[int] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    allow_negative: bool = False

    def points(self, d: DensityOfStates, rng: AccessibleRange) -> np.ndarray:
        count = self.count or get_settings().grid_points
        if count < 2:
            raise InvalidArgumentError(f"grid needs at least 2 points, got {count}")
        limit = float(rng.upper(self.allow_negative))
        lo = float(d.e_min) if self.lower is None else float(self.lower)
        hi = limit if self.upper is None else float(self.upper)
        if not float(d.e_min) <= lo < hi <= limit:
            raise InvalidArgumentError(
                f"grid [{lo}, {hi}] outside the range [{float(d.e_min)}, {limit}]"
            )
        h = (hi - lo) / count
        pts = lo + (np.arange(count) + 0.5) * h
        knots = np.array([float(k) for k in d.shape.knots])
        for i, x in enumerate(pts):
            if np.any(np.abs(knots - x) <= 1e-12 * max(1.0, abs(x))):
                pts[i] = x - 0.5 * h if i == count - 1 else x + 0.5 * h
        return pts


class ThermoRow(NamedTuple):
    E: float
    S: float
    T: float
    C: float
    dH: float


@dataclass(frozen=True)
class ThermoCurve:
    """Sampled ``(E, S, T, C, dH)`` rows plus the grid they were taken on."""

    rows: Tuple[ThermoRow, ...]
    grid: Dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rows), columns=list(ThermoRow._fields))


def thermo_curve(d: DensityOfStates, grid: Optional[EnergyGrid] = None) -> ThermoCurve:
    """
    Sweep entropy, temperature, specific heat and Delta H over an energy grid.

    Args:
        d (DensityOfStates): Density of states.
        grid (EnergyGrid, optional): Defaults to the accessible range with
            the configured number of points.

    Returns:
        ThermoCurve: One row per grid point; on the positive branch T is
        strictly increasing.

    Raises:
        FrozenSpectrumError: If there is no finite-temperature branch.
        InvalidArgumentError: If the grid leaves the allowed range.
        InternalConsistencyError: If T fails to increase along the grid.
    """
    grid = grid or EnergyGrid()
    rng = accessible_range(d)
    if rng.frozen and not grid.allow_negative:
        raise FrozenSpectrumError("no finite-temperature branch: Omega is maximal at E_min")
    fd = d.to_float()
    rows = []
    for E in grid.points(fd, rng):
        E = float(E)
        try:
            T = temperature(fd, E, "right", allow_negative=grid.allow_negative)
            C = specific_heat(fd, E, "right", allow_negative=grid.allow_negative)
        except (InfiniteTemperatureError, DivergentHeatError) as exc:
            logger.warning("skipping grid point E=%.17g: %s", E, exc)
            continue
        rows.append(
            ThermoRow(E, entropy(fd, E), float(T), float(C), energy_uncertainty(fd, E))
        )

    positive = [r.T for r in rows if r.E < float(rng.e_star)]
    if any(b <= a for a, b in zip(positive, positive[1:])):
        raise InternalConsistencyError("temperature is not increasing along the grid")
    meta = {
        "count": len(rows),
        "lower": rows[0].E if rows else None,
        "upper": rows[-1].E if rows else None,
        "spacing": "cell-centred, knot-avoiding",
        "allow_negative": grid.allow_negative,
    }
    return ThermoCurve(tuple(rows), meta)


@dataclass(frozen=True)
class EquilibriumResult:
    """
    Outcome of an energy exchange between two systems.

    Attributes:
        epsilon_star (float): Energy moved into system 1.
        T1, T2 (float): Final temperatures (inf at a maximum of Omega).
        boundary (str, optional): ``"lower"`` or ``"upper"`` when the
            entropy maximum sits on the edge of the feasible interval.
    """

    epsilon_star: float
    T1: float
    T2: float
    boundary: Optional[str] = None

    @property
    def T_common(self) -> float:
        return self.T1


def _beta(d: DensityOfStates, E: float) -> float:
    return float(inverse_temperature(d, E, "right"))


def _temp(beta: float) -> float:
    return math.inf if beta == 0 else 1.0 / beta


def equilibrate(d1: DensityOfStates, E1, d2: DensityOfStates, E2) -> EquilibriumResult:
    """
    Energy transfer maximizing ``S1(E1 + eps) + S2(E2 - eps)``.

    The entropy derivative ``beta1 - beta2`` decreases in ``eps`` on the
    accessible ranges, so the maximum is its sign change, found by Brent's
    method on the feasible interval.

    Returns:
        EquilibriumResult: ``epsilon_star`` and the final temperatures;
        ``boundary`` is set when no interior maximum exists.

    Raises:
        FrozenSpectrumError: If either system has no positive branch.
        DomainError: If an energy lies outside its accessible range.
        InvalidArgumentError: If no exchange keeps both systems accessible.
        InternalConsistencyError: If the final temperatures disagree.
    """
    r1, r2 = accessible_range(d1), accessible_range(d2)
    if r1.frozen or r2.frozen:
        raise FrozenSpectrumError("both systems need a positive-temperature branch")
    E1, E2 = float(E1), float(E2)
    for E, r, label in ((E1, r1, "E1"), (E2, r2, "E2")):
        if not float(r.e_min) <= E <= float(r.e_star):
            raise DomainError(
                f"{label} = {E} outside the accessible range [{float(r.e_min)}, {float(r.e_star)}]"
            )
    lo = max(float(r1.e_min) - E1, E2 - float(r2.e_star))
    hi = min(float(r1.e_star) - E1, E2 - float(r2.e_min))
    if lo > hi:
        raise InvalidArgumentError("no energy exchange keeps both systems accessible")
    f1, f2 = d1.to_float(), d2.to_float()

    def gap(eps: float) -> float:
        return _beta(f1, E1 + eps) - _beta(f2, E2 - eps)

    width = hi - lo
    a, b = lo + 1e-12 * width, hi - 1e-12 * width
    if width <= 0 or gap(a) <= 0:
        eps, boundary = lo, "lower"
    elif gap(b) >= 0:
        eps, boundary = hi, "upper"
    else:
        eps = brentq(gap, a, b, xtol=1e-15, rtol=1e-15, maxiter=500)
        boundary = None

    beta1 = _beta(f1, E1 + eps) if d1.e_min < E1 + eps < d1.e_max else math.inf
    beta2 = _beta(f2, E2 - eps) if d2.e_min < E2 - eps < d2.e_max else math.inf
    if boundary is None and abs(beta1 - beta2) > 1e-8 * max(beta1, beta2):
        raise InternalConsistencyError(
            f"temperatures differ after equilibration: beta1={beta1!r}, beta2={beta2!r}"
        )
    if boundary:
        logger.info("entropy maximum on the %s edge of the feasible interval", boundary)
    return EquilibriumResult(eps, _temp(beta1), _temp(beta2), boundary)


def chebyshev_bound(N: int, x: float, mean: float, variance: float) -> float:
    """
    Chebyshev bound on the relative deviation of a total energy.

    ``Prob(|H_total - E_total| / |E_total| > x) <= variance / (N x^2 mean^2)``,
    clamped to 1.

    Raises:
        InvalidArgumentError: For ``N < 1``, ``x <= 0``, ``mean == 0`` or
            negative variance.
    """
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    if x <= 0:
        raise InvalidArgumentError(f"x must be positive, got {x}")
    if mean == 0:
        raise InvalidArgumentError("relative deviation undefined for zero mean energy")
    if variance < 0:
        raise InvalidArgumentError("variance must be non-negative")
    return min(1.0, variance / (N * x * x * mean * mean))


def fit_exponents(
    curve: ThermoCurve, windows: Sequence[Tuple[float, float]], T_c: Optional[float] = None
) -> List[Dict]:
    """
    Log-log slopes of C against ``|T - T_c|`` on temperature windows.

    Informational only. With no ``T_c`` the slope is taken against T itself.

    Returns:
        list[dict]: ``{T_low, T_high, points, slope}`` per window; ``slope`` is
        None when fewer than three usable rows fall in the window.
    """
    frame = curve.to_frame()
    fits = []
    for lo, hi in windows:
        sel = frame[(frame["T"] >= lo) & (frame["T"] <= hi) & (frame["C"] > 0)]
        x = (sel["T"] - T_c).abs() if T_c is not None else sel["T"]
        keep = x > 0
        x, y = np.log(x[keep]), np.log(sel["C"][keep])
        slope = float(np.polyfit(x, y, 1)[0]) if len(x) >= 3 else None
        fits.append({"T_low": lo, "T_high": hi, "points": int(len(x)), "slope": slope})
    return fits
