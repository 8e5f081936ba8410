from fractions import Fraction

from hypothesis import strategies as st

from qmicro.spectrum import Spectrum


@st.composite
def integer_spectra(draw, max_levels=6, max_multiplicity=2, simple_ground=False):
    """Exact spectra with integer energies; total dimension stays <= 12."""
    m = draw(st.integers(2, max_levels))
    energies = sorted(draw(st.lists(st.integers(-10, 10), min_size=m, max_size=m, unique=True)))
    mults = draw(st.lists(st.integers(1, max_multiplicity), min_size=m, max_size=m))
    if simple_ground:
        mults[0] = 1
    return Spectrum(tuple(zip(energies, mults)))


@st.composite
def interior_fractions(draw, lo, hi, denominator=97):
    """A rational strictly between ``lo`` and ``hi``."""
    k = draw(st.integers(1, denominator - 1))
    return lo + (hi - lo) * Fraction(k, denominator)


@st.composite
def float_spectra(draw, max_levels=6, max_multiplicity=2):
    """Spectra with non-integer float energies spaced at least 0.1 apart."""
    m = draw(st.integers(3, max_levels))
    start = draw(st.floats(-5, 5, allow_nan=False, allow_infinity=False))
    gaps = draw(st.lists(st.floats(0.1, 3), min_size=m - 1, max_size=m - 1))
    energies = [start]
    for gap in gaps:
        energies.append(energies[-1] + gap)
    mults = draw(st.lists(st.integers(1, max_multiplicity), min_size=m, max_size=m))
    return Spectrum(tuple(zip(energies, mults)))
