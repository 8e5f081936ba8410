import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmicro.dos import density_of_states
from qmicro.errors import (
    DomainError,
    FrozenSpectrumError,
    InfiniteTemperatureError,
    InvalidArgumentError,
    NegativeTemperatureError,
)
from qmicro.mc_oracle import grid_search_equilibrium
from qmicro.spectrum import Spectrum, build_uniform_ladder
from qmicro.thermo import (
    EnergyGrid,
    accessible_range,
    chebyshev_bound,
    critical_points,
    energy_uncertainty,
    entropy,
    equilibrate,
    fit_exponents,
    inverse_temperature,
    microcanonical_weights,
    specific_heat,
    temperature,
    thermo_curve,
)
from strategies import integer_spectra

PI = math.pi


def test_entropy_examples(two_level, tent, four_level):
    assert entropy(two_level, F(1, 2)) == pytest.approx(math.log(PI))
    assert entropy(tent, F(1)) == pytest.approx(math.log(PI**2 / 2))
    assert entropy(four_level, F(3, 2)) == pytest.approx(math.log(PI**3 / 8))
    with pytest.raises(DomainError):
        entropy(tent, F(0))


def test_temperature_examples(two_level, tent, four_level):
    assert temperature(tent, F(1, 2)) == F(1, 2)
    assert temperature(four_level, F(1), "left") == F(1, 2)
    assert temperature(four_level, F(1), "right") == F(1, 2)
    with pytest.raises(InfiniteTemperatureError):
        temperature(two_level, F(1, 2))
    with pytest.raises(DomainError):
        temperature(tent, F(3))


def test_negative_branch_needs_flag(four_level):
    with pytest.raises(NegativeTemperatureError):
        temperature(four_level, F(5, 2))
    assert temperature(four_level, F(5, 2), allow_negative=True) == F(-1, 4)


def test_specific_heat_drop(four_level, tent):
    assert specific_heat(four_level, F(1), "left") == 2
    assert specific_heat(four_level, F(1), "right") == F(1, 2)
    assert specific_heat(tent, F(1, 3)) == 1


def test_float_backing_agrees(four_level):
    d = density_of_states(build_uniform_ladder(3), "float")
    assert temperature(d, 1.0, "left") == pytest.approx(0.5, abs=1e-12)
    assert specific_heat(d, 1.0, "left") == pytest.approx(2.0, rel=1e-12)
    assert specific_heat(d, 1.0, "right") == pytest.approx(0.5, rel=1e-12)


def test_accessible_range_examples(four_level, tent, degenerate_ground, two_level):
    r = accessible_range(four_level)
    assert (r.e_min, r.e_star, r.frozen) == (0, F(3, 2), False)
    assert accessible_range(tent).e_star == 1
    frozen = accessible_range(degenerate_ground)
    assert frozen.frozen and frozen.e_star == 0
    assert accessible_range(two_level).frozen
    assert r.upper(allow_negative=True) == 3


def test_energy_uncertainty_examples(two_level, four_level):
    assert energy_uncertainty(two_level, F(1, 2)) == pytest.approx(0.5, abs=1e-12)
    assert energy_uncertainty(four_level, 0) == 0
    assert energy_uncertainty(four_level, 3) == 0
    with pytest.raises(DomainError):
        energy_uncertainty(four_level, 4)


@settings(max_examples=50, deadline=None)
@given(integer_spectra())
def test_energy_uncertainty_vanishes_at_the_edges(s):
    d = density_of_states(s)
    # the full-range integral of (Hbar - u) Omega is exactly zero
    full = d.shape.integrate_moment(d.e_min, d.e_max, 1)
    assert full == d.shape.integrate_moment(d.e_min, d.e_max, 0) * sum(s.expanded()) / s.n_plus_1
    width = float(d.e_max - d.e_min)
    assert energy_uncertainty(d, d.e_max - F(1, 10**9)) < 1e-3 * width
    assert energy_uncertainty(d, d.e_min + F(1, 10**9)) < 1e-3 * width


@pytest.mark.parametrize("n, E", [(3, "2.5"), (5, "4.999"), (8, "7.99"), (11, "10.9")])
def test_float_energy_uncertainty_near_the_top(n, E):
    s = build_uniform_ladder(n)
    exact = energy_uncertainty(density_of_states(s, "rational"), F(E))
    assert exact > 0
    assert energy_uncertainty(density_of_states(s, "float"), float(E)) == pytest.approx(
        exact, rel=1e-8
    )


def test_float_thermodynamics_near_the_top():
    s = build_uniform_ladder(11)
    exact, d = density_of_states(s, "rational"), density_of_states(s, "float")
    E = F(1099, 100)
    assert entropy(d, float(E)) == pytest.approx(entropy(exact, E), rel=1e-9)
    T = temperature(d, float(E), allow_negative=True)
    assert T < 0
    assert T == pytest.approx(float(temperature(exact, E, allow_negative=True)), rel=1e-9)
    heat = specific_heat(d, float(E), allow_negative=True)
    assert heat == pytest.approx(float(specific_heat(exact, E, allow_negative=True)), rel=1e-9)


def test_weights_examples(two_level, tent):
    E = F(3, 10)
    assert microcanonical_weights(two_level, E) == [F(7, 10), F(3, 10)]
    assert microcanonical_weights(tent, F(1)) == [F(1, 4), F(1, 2), F(1, 4)]
    with pytest.raises(DomainError):
        microcanonical_weights(tent, F(2))


def test_weights_concentrate_on_ground_state(four_level):
    assert microcanonical_weights(four_level, F(1, 1000))[0] > F(99, 100)


def test_degenerate_multiplet_has_equal_weights(degenerate_five):
    w = microcanonical_weights(degenerate_five, F(3, 2))
    assert w[1] == w[2]
    assert sum(w) == 1


@settings(max_examples=50, deadline=None)
@given(integer_spectra(max_levels=4), st.integers(1, 96))
def test_weight_laws(s, k):
    d = density_of_states(s)
    E = d.e_min + (d.e_max - d.e_min) * F(k, 97)
    w = microcanonical_weights(d, E)
    energies = s.expanded()
    assert len(w) == s.n_plus_1
    assert all(x >= 0 for x in w)
    assert sum(w) == 1
    assert sum(x * e for x, e in zip(w, energies)) == E


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_weight_variance_reproduces_energy_uncertainty(n):
    d = density_of_states(build_uniform_ladder(n))
    for k in range(1, 40):
        E = F(n * k, 40)
        w = microcanonical_weights(d, E)
        variance = sum(x * e * e for x, e in zip(w, d.spectrum.expanded())) - E * E
        assert float(variance) == pytest.approx(energy_uncertainty(d, E) ** 2, rel=1e-8, abs=1e-14)


def test_four_level_critical_point(four_level):
    (cp,) = critical_points(four_level)
    assert cp.E_c == 1
    assert cp.T_c == F(1, 2)
    assert (cp.C_minus, cp.C_plus) == (2, F(1, 2))
    assert cp.discontinuity_order == 1
    assert cp.to_dict()["T_c"] == 0.5


def test_four_level_critical_point_float():
    (cp,) = critical_points(density_of_states(build_uniform_ladder(3), "float"))
    assert cp.T_c == pytest.approx(0.5, abs=1e-12)
    assert cp.C_minus == pytest.approx(2.0, rel=1e-12)
    assert cp.C_plus == pytest.approx(0.5, rel=1e-12)


def test_ising_critical_point(ising):
    r = accessible_range(ising)
    assert -0.75 < r.e_star < 1.25
    (cp,) = critical_points(ising)
    assert cp.E_c == F(-3, 4)
    assert float(cp.T_c) == pytest.approx(0.5, abs=1e-9)
    assert cp.multiplicity == 3
    assert cp.discontinuity_order == 3
    assert cp.C_minus == cp.C_plus == 6


def test_ising_heat_rises_on_cooling(ising):
    frame = thermo_curve(ising, EnergyGrid(count=4000)).to_frame()
    near_double = frame.iloc[(frame["T"] - 1.0).abs().argmin()]
    assert specific_heat(ising, F(-3, 4), "left") >= 10 * near_double["C"]


def test_no_critical_points_without_positive_branch(two_level):
    assert critical_points(two_level) == []


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_ladder_discontinuity_order(n):
    points = critical_points(density_of_states(build_uniform_ladder(n)))
    if n == 2:
        # the only interior knot is the maximum of Omega
        assert points == []
    else:
        assert points
        assert all(p.discontinuity_order == n - 2 for p in points)
        assert all(p.T_minus == p.T_plus for p in points)


@settings(max_examples=50, deadline=None)
@given(integer_spectra(simple_ground=True), st.integers(1, 96))
def test_first_interval_law_simple_ground(s, k):
    assume(s.n >= 2)
    d = density_of_states(s)
    lo, hi = s.energies[0], s.energies[1]
    E = lo + (hi - lo) * F(k, 97)
    assert temperature(d, E) == (E - lo) / (s.n - 1)
    assert specific_heat(d, E) == s.n - 1


@settings(max_examples=50, deadline=None)
@given(integer_spectra())
def test_first_interval_limit_law(s):
    order = s.n - s.multiplicities[0]
    assume(order >= 1)
    d = density_of_states(s)
    lo, hi = s.energies[0], s.energies[1]
    E = lo + (hi - lo) * F(1, 10**9)
    assert float(temperature(d, E) / (E - lo)) == pytest.approx(1 / order, rel=1e-4)
    assert float(specific_heat(d, E)) == pytest.approx(order, rel=1e-4)


@settings(max_examples=50, deadline=None)
@given(integer_spectra(), st.integers(1, 96))
def test_entropy_slope_is_inverse_temperature(s, k):
    d = density_of_states(s)
    E = d.e_min + (d.e_max - d.e_min) * F(k, 97)
    beta = inverse_temperature(d, E)
    if beta != 0:
        assert temperature(d, E, allow_negative=True) * beta == 1
    h = 1e-6 * float(d.e_max - d.e_min)
    slope = (entropy(d, float(E) + h) - entropy(d, float(E) - h)) / (2 * h)
    assert slope == pytest.approx(float(beta), rel=1e-5, abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(integer_spectra(simple_ground=True), st.integers(1, 96))
def test_affine_response(s, k):
    assume(s.n >= 2)
    a, b = F(5, 2), F(-1, 3)
    d = density_of_states(s)
    t = density_of_states(s.affine(a, b))
    lo, hi = s.energies[0], s.energies[1]
    E = lo + (hi - lo) * F(k, 97)
    assert temperature(t, a * E + b) == a * temperature(d, E)
    assert specific_heat(t, a * E + b) == specific_heat(d, E)
    assert energy_uncertainty(t, a * E + b) == pytest.approx(float(a) * energy_uncertainty(d, E))


def test_four_level_curve(four_level):
    curve = thermo_curve(four_level, EnergyGrid(count=1000))
    frame = curve.to_frame()
    assert list(frame.columns) == ["E", "S", "T", "C", "dH"]
    assert len(frame) == 1000
    assert (np.diff(frame["E"]) > 0).all()
    assert (np.diff(frame["T"]) > 0).all()
    assert (frame["T"] > 0).all()
    below = frame[frame["T"] < 0.5]
    above = frame[(frame["T"] > 0.5) & (frame["T"] < 0.52)]
    assert below["C"].to_numpy() == pytest.approx(2.0)
    assert len(above) > 0 and (above["C"] < 0.6).all()
    assert curve.grid["count"] == 1000


def test_degenerate_curve_runs(degenerate_five):
    frame = thermo_curve(degenerate_five, EnergyGrid(count=1000)).to_frame()
    assert (np.diff(frame["T"]) > 0).all()


def test_curve_rejections(two_level, four_level):
    with pytest.raises(FrozenSpectrumError):
        thermo_curve(two_level)
    with pytest.raises(InvalidArgumentError):
        thermo_curve(four_level, EnergyGrid(count=10, lower=-1.0))
    with pytest.raises(InvalidArgumentError):
        thermo_curve(four_level, EnergyGrid(count=10, upper=2.0))


def test_negative_branch_curve(four_level):
    frame = thermo_curve(four_level, EnergyGrid(count=200, allow_negative=True)).to_frame()
    assert frame["E"].max() > 2.9
    assert (frame[frame["E"] > 1.5]["T"] < 0).all()


def test_heat_matches_numerical_derivative():
    d = density_of_states(build_uniform_ladder(4))
    frame = thermo_curve(d, EnergyGrid(count=4000)).to_frame()
    E, T, C = frame["E"].to_numpy(), frame["T"].to_numpy(), frame["C"].to_numpy()
    h = E[1] - E[0]
    for i in range(1, len(E) - 1):
        if E[i] > 1.9 or abs(E[i] - 1.0) < 3 * h:
            continue
        numerical = (E[i + 1] - E[i - 1]) / (T[i + 1] - T[i - 1])
        assert numerical == pytest.approx(C[i], rel=1e-4)


def test_equilibrate_identical_systems(tent):
    result = equilibrate(tent, F(2, 5), tent, F(4, 5))
    assert result.epsilon_star == pytest.approx(0.2, abs=1e-10)
    assert result.boundary is None
    assert equilibrate(tent, F(1, 2), tent, F(1, 2)).epsilon_star == pytest.approx(0, abs=1e-12)


def test_equilibrate_mixed_systems(tent, four_level):
    result = equilibrate(tent, F(3, 10), four_level, F(1))
    # T = E on the tent, T = E/2 below the four-level knot
    assert result.epsilon_star == pytest.approx(2 / 15, abs=1e-10)
    assert result.T1 == pytest.approx(result.T2, rel=1e-8)
    grid = grid_search_equilibrium(tent, F(3, 10), four_level, F(1))
    assert grid == pytest.approx(result.epsilon_star, abs=1e-6)


def test_equilibrate_is_a_fixed_point(tent, four_level):
    first = equilibrate(tent, F(3, 10), four_level, F(1))
    E1 = 0.3 + first.epsilon_star
    E2 = 1.0 - first.epsilon_star
    assert equilibrate(tent, E1, four_level, E2).epsilon_star == pytest.approx(0, abs=1e-9)


def test_equilibrate_rejects_frozen_and_out_of_range(two_level, tent):
    with pytest.raises(FrozenSpectrumError):
        equilibrate(two_level, 0.5, tent, 0.5)
    with pytest.raises(DomainError):
        equilibrate(tent, 1.5, tent, 0.5)


def _random_system(rng):
    while True:
        m = int(rng.integers(2, 6))
        energies = np.sort(rng.choice(np.arange(-8, 9), size=m, replace=False))
        mults = [1] + [int(x) for x in rng.integers(1, 3, size=m - 1)]
        d = density_of_states(Spectrum(tuple(zip(energies.tolist(), mults))))
        r = accessible_range(d)
        if not r.frozen:
            return d, float(r.e_min) + float(r.e_star - r.e_min) * rng.uniform(0.05, 0.95)


def test_equilibrate_random_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        (d1, E1), (d2, E2) = _random_system(rng), _random_system(rng)
        result = equilibrate(d1, E1, d2, E2)
        if result.boundary is None:
            assert abs(result.T1 - result.T2) <= 1e-8 * max(result.T1, result.T2)
        grid = grid_search_equilibrium(d1, E1, d2, E2, points=401)
        scale = max(1.0, float(d1.e_max - d1.e_min), float(d2.e_max - d2.e_min))
        assert result.epsilon_star == pytest.approx(grid, abs=1e-6 * scale)


def test_chebyshev_bound():
    assert chebyshev_bound(100, 0.1, 1.0, 1.0) == 1.0
    assert chebyshev_bound(10**4, 0.1, 1.0, 1.0) == pytest.approx(0.01)
    assert chebyshev_bound(7, 0.3, -2.0, 0.0) == 0.0
    with pytest.raises(InvalidArgumentError):
        chebyshev_bound(10, 0.1, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        chebyshev_bound(0, 0.1, 1.0, 1.0)


def test_fit_exponents_reports_each_window(ising):
    curve = thermo_curve(ising, EnergyGrid(count=2000))
    fits = fit_exponents(curve, [(0.6, 1.5), (50.0, 60.0)], T_c=0.5)
    assert [f["T_low"] for f in fits] == [0.6, 50.0]
    assert fits[0]["points"] >= 3 and math.isfinite(fits[0]["slope"])
