"""Exact quantum microcanonical density of states and thermodynamics."""

from qmicro.dos import (
    DensityOfStates,
    density_of_states,
    evaluate,
    evaluate_left,
    evaluate_right,
    integrate_moment,
    smoothness_report,
)
from qmicro.errors import QMicroError
from qmicro.spectrum import (
    HermitianMatrix,
    Spectrum,
    build_ising_chain,
    build_uniform_ladder,
    eigenvalues_of_hermitian,
    from_eigenvalues,
    mean_energy,
)
from qmicro.thermo import (
    accessible_range,
    chebyshev_bound,
    critical_points,
    energy_uncertainty,
    entropy,
    equilibrate,
    microcanonical_weights,
    specific_heat,
    temperature,
    thermo_curve,
)

__all__ = [
    "DensityOfStates",
    "HermitianMatrix",
    "QMicroError",
    "Spectrum",
    "accessible_range",
    "build_ising_chain",
    "build_uniform_ladder",
    "chebyshev_bound",
    "critical_points",
    "density_of_states",
    "eigenvalues_of_hermitian",
    "energy_uncertainty",
    "entropy",
    "equilibrate",
    "evaluate",
    "evaluate_left",
    "evaluate_right",
    "from_eigenvalues",
    "integrate_moment",
    "mean_energy",
    "microcanonical_weights",
    "smoothness_report",
    "specific_heat",
    "temperature",
    "thermo_curve",
]
