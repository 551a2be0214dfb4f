"""Worked systems with closed-form supplementary laws, used as oracles."""

from .cattaneo import (
    CattaneoSblParams,
    CattaneoSpec,
    cattaneo_entropy_check,
    cattaneo_internal_energy,
    cattaneo_lambda0_from_energy,
    cattaneo_main_fields,
    cattaneo_sbl,
    cattaneo_system,
    default_spec,
    constant_tau_density,
    linear_density,
)
from .maxwell import divergence_candidate, energy_density, maxwell_system, poynting_candidate
from .scalar import burgers, scalar_law, scalar_sbl
from .synthetic import default_gradient_flux, gradient_flux_system, linear_symmetric_system
from .twofield import TableCase, harmonic_family, table_one_case, wave_convex_density


def default_cattaneo():
    """Cattaneo with ``tau = 1``, ``Lambda = 2 theta``, ``eps = 1.5 theta``."""
    return cattaneo_system(default_spec(), default_spec().eps_eq)


def all_systems() -> dict:
    """Every shipped system, keyed by name."""
    out = {
        "burgers": burgers(),
        "cattaneo": default_cattaneo(),
        "maxwell": maxwell_system(),
        "gradient_flux": default_gradient_flux(),
        "linear_symmetric": linear_symmetric_system(
            [[[2.0, 0.5], [0.5, -1.0]], [[0.0, 1.0], [1.0, 3.0]]]
        ),
    }
    for row in range(1, 6):
        case = table_one_case(row)
        out[case.system.name] = case.system
    return out
