from collections import Counter
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmicro.errors import InvalidArgumentError, UnsupportedError
from qmicro.jacobi import jacobi_eigenvalues
from qmicro.spectrum import (
    HermitianMatrix,
    Spectrum,
    build_ising_chain,
    build_uniform_ladder,
    eigenvalues_of_hermitian,
    exact,
    from_eigenvalues,
    mean_energy,
)
from strategies import integer_spectra


def test_uniform_ladder():
    assert build_uniform_ladder(3).levels == ((0, 1), (1, 1), (2, 1), (3, 1))
    assert build_uniform_ladder(1).energies == (0, 1)
    half = build_uniform_ladder(5, 0.5)
    assert [float(e) for e in half.energies] == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]
    assert half.is_rational


@pytest.mark.parametrize("n, eps", [(0, 1), (-2, 1), (3, 0), (3, -1)])
def test_uniform_ladder_rejects_bad_parameters(n, eps):
    with pytest.raises(InvalidArgumentError):
        build_uniform_ladder(n, eps)


def test_ising_chain_examples():
    s = build_ising_chain(0.25, 1)
    assert s.levels == ((F(-15, 4), 1), (F(-3, 4), 3), (F(5, 4), 3), (F(9, 4), 1))
    assert build_ising_chain(0, 0).levels == ((0, 8),)
    assert build_ising_chain(1, 0).levels == ((-3, 2), (1, 6))


@settings(max_examples=50, deadline=None)
@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=8),
    st.fractions(min_value=-3, max_value=3, max_denominator=8),
)
def test_ising_chain_matches_closed_form(J, B):
    expected = Counter()
    for energy, mult in ((-3 * J - 3 * B, 1), (J - B, 3), (J + B, 3), (-3 * J + 3 * B, 1)):
        expected[energy] += mult
    assert dict(build_ising_chain(J, B).levels) == dict(expected)


def test_exact_conversion():
    assert exact(0.25) == F(1, 4)
    assert exact(0.1) == F(1, 10)
    with pytest.raises(InvalidArgumentError):
        exact(float("nan"))


def test_from_eigenvalues_examples():
    assert from_eigenvalues([0, 1, 1, 2, 3], 0).levels == ((0, 1), (1, 2), (2, 1), (3, 1))
    assert from_eigenvalues([3, 0, 1, 2], 0).levels == ((0, 1), (1, 1), (2, 1), (3, 1))
    merged = from_eigenvalues([0.0, 1e-13, 1.0], 1e-9)
    assert merged.multiplicities == (2, 1)
    assert merged.e_min == pytest.approx(5e-14, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        from_eigenvalues([1.0])


@settings(max_examples=50, deadline=None)
@given(integer_spectra())
def test_from_eigenvalues_is_idempotent(s):
    assert from_eigenvalues(s.expanded(), 0) == s


def test_spectrum_validation():
    with pytest.raises(InvalidArgumentError):
        Spectrum(((1, 1), (0, 1)))
    with pytest.raises(InvalidArgumentError):
        Spectrum(((0, 0), (1, 1)))
    with pytest.raises(InvalidArgumentError):
        Spectrum(((0, 1),))


def test_affine_and_reflection():
    s = Spectrum(((0, 2), (1, 1)))
    assert s.affine(2, 1).levels == ((1, 2), (3, 1))
    assert s.reflected().levels == ((-1, 1), (0, 2))
    with pytest.raises(InvalidArgumentError):
        s.affine(0)


def test_mean_energy():
    assert mean_energy(build_uniform_ladder(3)) == F(3, 2)
    assert mean_energy(Spectrum(((0, 2), (1, 1)))) == F(1, 3)
    assert mean_energy(build_ising_chain(F(1, 4), 1)) == 0


@settings(max_examples=30, deadline=None)
@given(integer_spectra(), st.integers(-5, 5))
def test_mean_energy_shifts_with_spectrum(s, c):
    assert mean_energy(s.affine(1, c)) == mean_energy(s) + c


def test_hermitian_diagonal_and_pauli():
    s = eigenvalues_of_hermitian(HermitianMatrix.from_array(np.diag([0.0, 1.0, 2.0, 3.0])))
    assert s.levels == ((0.0, 1), (1.0, 1), (2.0, 1), (3.0, 1))
    pauli = eigenvalues_of_hermitian(HermitianMatrix.from_array([[0, 1], [1, 0]]))
    assert [e for e in pauli.energies] == pytest.approx([-1.0, 1.0], abs=1e-12)


def test_hermitian_ising_cross_check():
    values = [float(e) for e in build_ising_chain(F(1, 4), 1).expanded()]
    s = eigenvalues_of_hermitian(HermitianMatrix.from_array(np.diag(values)))
    assert s.levels == build_ising_chain(F(1, 4), 1).levels


def test_jacobi_matches_reference_on_complex_matrix():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = a + a.conj().T
    ours = jacobi_eigenvalues(h)
    reference = np.linalg.eigvalsh(h)
    radius = np.max(np.abs(reference))
    assert np.allclose(ours, reference, rtol=0, atol=1e-12 * radius)


def test_hermitian_errors():
    with pytest.raises(InvalidArgumentError):
        eigenvalues_of_hermitian(HermitianMatrix.from_array([[0, 1], [2, 0]]))
    with pytest.raises(UnsupportedError):
        eigenvalues_of_hermitian(HermitianMatrix.from_array(np.eye(65)))
    with pytest.raises(InvalidArgumentError):
        HermitianMatrix(2, (1, 2, 3))


@settings(max_examples=20, deadline=None)
@given(integer_spectra())
def test_diagonal_round_trip(s):
    assume(s.n_plus_1 <= 12)
    values = [float(e) for e in s.expanded()]
    back = eigenvalues_of_hermitian(HermitianMatrix.from_array(np.diag(values)))
    assert back.multiplicities == s.multiplicities
    assert list(back.energies) == pytest.approx([float(e) for e in s.energies], abs=1e-12)
