"""Physical constants and unit conversions.

Everything downstream computes in hartree / bohr / electron-mass atomic
units (hbar = 1) with the reduced mass kept explicit.  This module is the
single source of constants (CODATA 2018, hard-coded to 12 significant
digits) and of the wavenumber convention

    k = sqrt(2 * mu * E)       [bohr^-1, with mu in m_e and E in hartree]

which every other module must consume through :func:`wavenumber`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysQuantity",
    "UnitError",
    "convert",
    "convert_value",
    "reduced_mass",
    "wavenumber",
    "HARTREE_EV",
    "HARTREE_J",
    "BOHR_M",
    "AMU_PER_ME",
    "KELVIN_HARTREE",
    "MHZ_HARTREE",
    "ATOMIC_TIME_S",
    "BOHR2_CM2",
    "AU_VELOCITY_CM_S",
    "AU_RATEVOL_CM3_S",
]

# CODATA 2018 primaries (h, k_B, e are exact SI definitions).
HARTREE_EV = 27.2113862460  # eV
HARTREE_J = 4.35974472221e-18  # J
BOHR_M = 0.529177210903e-10  # m
ELECTRON_MASS_KG = 9.10938370150e-31  # kg
AMU_KG = 1.66053906660e-27  # kg
PLANCK_J_S = 6.62607015e-34  # J s, exact
HBAR_J_S = 1.05457181765e-34  # J s
BOLTZMANN_J_K = 1.380649e-23  # J/K, exact
EV_J = 1.602176634e-19  # J, exact

# Derived atomic-unit scales.
AMU_PER_ME = AMU_KG / ELECTRON_MASS_KG  # 1822.888...
KELVIN_HARTREE = BOLTZMANN_J_K / HARTREE_J  # k_B * 1 K in hartree
MHZ_HARTREE = 1.0e6 * PLANCK_J_S / HARTREE_J  # h * 1 MHz in hartree
ATOMIC_TIME_S = HBAR_J_S / HARTREE_J  # 2.4188...e-17 s
BOHR2_CM2 = (BOHR_M * 1.0e2) ** 2  # bohr^2 in cm^2
AU_VELOCITY_CM_S = BOHR_M * 1.0e2 / ATOMIC_TIME_S
AU_RATEVOL_CM3_S = (BOHR_M * 1.0e2) ** 3 / ATOMIC_TIME_S  # bohr^3/atomic-time


class UnitError(ValueError):
    """Raised for dimensionally incompatible or unknown units."""


# unit -> (dimension, value of one unit in the atomic unit of that dimension)
_UNITS: dict[str, tuple[str, float]] = {
    "hartree": ("energy", 1.0),
    "eV": ("energy", 1.0 / HARTREE_EV),
    "meV": ("energy", 1.0e-3 / HARTREE_EV),
    "MHz": ("energy", MHZ_HARTREE),
    "kelvin": ("energy", KELVIN_HARTREE),
    "bohr": ("length", 1.0),
    "angstrom": ("length", 1.0e-10 / BOHR_M),
    "amu": ("mass", AMU_PER_ME),
    "electron_mass": ("mass", 1.0),
    "bohr^2": ("area", 1.0),
    "cm^2": ("area", 1.0 / BOHR2_CM2),
    "second": ("time", 1.0 / ATOMIC_TIME_S),
    "atomic_time": ("time", 1.0),
    "cm^3/s": ("rate_volume", 1.0),
}


@dataclass(frozen=True)
class PhysQuantity:
    """A value tagged with one of the supported unit labels."""

    value: float
    unit: str

    def __post_init__(self) -> None:
        if self.unit not in _UNITS:
            raise UnitError(f"unknown unit {self.unit!r}")

    def to(self, target_unit: str) -> "PhysQuantity":
        return convert(self, target_unit)


def convert(q: PhysQuantity, target_unit: str) -> PhysQuantity:
    """Convert ``q`` to ``target_unit`` within the same dimension.

    Raises :class:`UnitError` naming both units if the dimensions differ.
    """
    return PhysQuantity(convert_value(q.value, q.unit, target_unit), target_unit)


def convert_value(value: float, unit: str, target_unit: str) -> float:
    """Bare-float version of :func:`convert`."""
    try:
        dim_src, f_src = _UNITS[unit]
    except KeyError:
        raise UnitError(f"unknown unit {unit!r}") from None
    try:
        dim_tgt, f_tgt = _UNITS[target_unit]
    except KeyError:
        raise UnitError(f"unknown unit {target_unit!r}") from None
    if dim_src != dim_tgt:
        raise UnitError(
            f"incompatible dimensions: cannot convert {unit!r} ({dim_src}) "
            f"to {target_unit!r} ({dim_tgt})"
        )
    return value * (f_src / f_tgt)


def reduced_mass(m_a: float, m_b: float) -> PhysQuantity:
    """Reduced mass m_a*m_b/(m_a+m_b) of two masses given in amu.

    Returns the result in electron masses, ready for the radial equation.
    """
    if m_a <= 0 or m_b <= 0:
        raise ValueError(f"masses must be positive, got ({m_a}, {m_b})")
    mu_amu = m_a * m_b / (m_a + m_b)
    return PhysQuantity(mu_amu * AMU_PER_ME, "electron_mass")


def wavenumber(energy_hartree: float, mu_emass: float) -> float:
    """k = sqrt(2 mu E) in bohr^-1.  The one wavenumber convention."""
    if energy_hartree < 0:
        raise ValueError(f"scattering energy must be >= 0, got {energy_hartree}")
    return math.sqrt(2.0 * mu_emass * energy_hartree)


# Standard isotope masses (amu) for the pairs studied here.
MASS_K39_AMU = 38.9637064864
MASS_HE3_AMU = 3.0160293220
MASS_AR37_AMU = 36.96677632


def mu_khe() -> float:
    """Reduced mass of the K-3He pair in electron masses."""
    return reduced_mass(MASS_K39_AMU, MASS_HE3_AMU).value


def mu_kar() -> float:
    """Reduced mass of the K-37Ar pair in electron masses."""
    return reduced_mass(MASS_K39_AMU, MASS_AR37_AMU).value
