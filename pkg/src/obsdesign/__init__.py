"""Optimal observation domains for wave and Schrodinger equations on model domains."""

from ._threads import apply_thread_cap

apply_thread_cap()

from .domains import Boundary, DomainKind, DomainSpec, EigenMode, enumerate_modes, window_modes  # noqa: E402
from .errors import (  # noqa: E402
    CertificationError,
    ConfigurationError,
    DegenerateDesignError,
    DomainError,
    NumericalError,
    ObsDesignError,
)
from .functionals import (  # noqa: E402
    InitialData,
    J,
    J_weighted,
    cross_coefficients,
    gamma_weights,
    hum_gram,
    time_energy_density,
)
from .mesh import DensityField, SubsetIndicator, build_mesh, mode_mass, reference_mesh  # noqa: E402
from .problem1 import solve_problem1  # noqa: E402
from .problem2 import detect_stationarity, solve_problem2  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CertificationError",
    "ConfigurationError",
    "DegenerateDesignError",
    "DensityField",
    "DomainError",
    "DomainKind",
    "DomainSpec",
    "EigenMode",
    "InitialData",
    "J",
    "J_weighted",
    "NumericalError",
    "ObsDesignError",
    "SubsetIndicator",
    "build_mesh",
    "cross_coefficients",
    "detect_stationarity",
    "enumerate_modes",
    "gamma_weights",
    "hum_gram",
    "mode_mass",
    "reference_mesh",
    "solve_problem1",
    "solve_problem2",
    "time_energy_density",
    "window_modes",
]
