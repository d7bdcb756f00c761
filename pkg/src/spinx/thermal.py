"""Thermally averaged rate coefficients and enhancement ratios.

The rate coefficient is the Maxwell-Boltzmann average of sigma * v,

    k = sqrt(8/(pi mu)) (k_B T)^(-3/2) * int sigma(E) E exp(-E/k_B T) dE,

integrated on a logarithmic base grid over [1e-3, 25] k_B T plus dense
refinement windows around every narrow resonance inside the range (the
windows make sure Lorentzians far narrower than the base spacing still
carry their full weight).  The trapezoid value is paired with a
Richardson half-grid error estimate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from spinx.engine import PoleEngine
from spinx.scattering import ScatteringModel
from spinx.semiclassical import ClassicalModel
from spinx.units import ATOMIC_TIME_S, AU_RATEVOL_CM3_S, BOHR2_CM2, convert_value

__all__ = [
    "RateResult",
    "rate_coefficient",
    "quantum_rate",
    "classical_rate",
    "enhancement_ratio",
    "gamma_of_pressure",
    "gamma_to_atomic",
    "GAMMA0_DEFAULT_S",
    "PRESSURE_COEF_S_PER_TORR",
    "GAMMA0_RADIATIVE_5S_S",
]

# gamma model gamma(p) = gamma0 + coef * p (rates in 1/s, p in Torr);
# the default gamma0 is the (10 ns)^-1 spontaneous-emission scale and the
# pressure slope is the hard-sphere bound 25 * 2pi MHz/Torr.  The 5S
# radiative decay 2pi * 3.8 MHz is available as a preset.
GAMMA0_DEFAULT_S = 1.0e8
PRESSURE_COEF_S_PER_TORR = 25.0 * 2.0 * math.pi * 1.0e6
GAMMA0_RADIATIVE_5S_S = 2.0 * math.pi * 3.8e6

# resonances narrower than this count as "narrow" and get windows
# (one picosecond lifetime)
NARROW_WIDTH_HARTREE = ATOMIC_TIME_S / 1e-12
MIN_WINDOW_HARTREE = convert_value(1e-3, "meV", "hartree")


def gamma_of_pressure(
    p_torr: float,
    gamma0_s: float = GAMMA0_DEFAULT_S,
    coef_s_per_torr: float = PRESSURE_COEF_S_PER_TORR,
) -> float:
    """Dissociation rate gamma(p) in 1/s."""
    if p_torr < 0:
        raise ValueError("pressure must be >= 0")
    return gamma0_s + coef_s_per_torr * p_torr

def gamma_to_atomic(gamma_s: float) -> float:
    """Convert a rate in 1/s to inverse atomic time."""
    return gamma_s * ATOMIC_TIME_S


@dataclass(frozen=True)
class RateResult:
    temperature_k: float
    gamma: float  # inverse atomic time
    k_se_cm3_s: float
    method: str  # "quantum" | "classical"
    n_grid_points: int
    n_windows: int
    l_max: int | None
    est_rel_error: float
    degraded: bool


def rate_coefficient(
    sigma_cm2_of_e,
    temperature_k: float,
    mu: float,
    gamma: float = 0.0,
    method: str = "quantum",
    resonance_windows: list[tuple[float, float]] | None = None,
    n_base: int = 400,
    points_per_window: int = 50,
    span_kt: tuple[float, float] = (1e-3, 25.0),
    l_max: int | None = None,
    max_refinements: int = 2,
) -> RateResult:
    """Boltzmann-average a cross-section source into a rate coefficient.

    ``sigma_cm2_of_e`` maps an energy array (hartree) to cross-sections
    in cm^2; ``resonance_windows`` lists (center, width) pairs in hartree
    for narrow structures needing dense coverage.
    """
    if temperature_k <= 0:
        raise ValueError("temperature must be positive")
    kt = convert_value(temperature_k, "kelvin", "hartree")
    e_lo, e_hi = span_kt[0] * kt, span_kt[1] * kt

    windows = []
    for center, width in resonance_windows or ():
        if e_lo < center < e_hi:
            windows.append((center, max(10.0 * width, MIN_WINDOW_HARTREE)))

    points = points_per_window
    for _ in range(max_refinements + 1):
        grid = _build_grid(e_lo, e_hi, n_base, windows, points)
        sigma = np.asarray(sigma_cm2_of_e(grid), dtype=float) / BOHR2_CM2
        integrand = sigma * grid * np.exp(-grid / kt)
        full = np.trapezoid(integrand, grid)
        half = np.trapezoid(integrand[::2], grid[::2])
        err = abs(full - half) / (3.0 * abs(full)) if full != 0.0 else 0.0
        if err < 1e-3 or full == 0.0:
            break
        points *= 2
        n_base *= 2
    degraded = err >= 1e-3

    k_au = math.sqrt(8.0 / (math.pi * mu)) * kt ** (-1.5) * full
    if degraded:
        warnings.warn(
            f"rate integral error estimate {err:.2e} above target after refinement"
        )
    return RateResult(
        temperature_k=temperature_k,
        gamma=gamma,
        k_se_cm3_s=k_au * AU_RATEVOL_CM3_S,
        method=method,
        n_grid_points=len(grid),
        n_windows=len(windows),
        l_max=l_max,
        est_rel_error=float(err),
        degraded=degraded,
    )


def _build_grid(e_lo, e_hi, n_base, windows, points_per_window) -> np.ndarray:
    parts = [np.geomspace(e_lo, e_hi, n_base)]
    for center, width in windows:
        lo = max(center - 0.5 * width, e_lo)
        hi = min(center + 0.5 * width, e_hi)
        parts.append(np.linspace(lo, hi, points_per_window))
    grid = np.unique(np.concatenate(parts))
    return grid


def quantum_rate(
    engine: PoleEngine,
    state: str,
    temperature_k: float,
    gamma: float,
    l_max: int = 60,
    mu: float | None = None,
    **kw,
) -> RateResult:
    """Rate coefficient from the pole-derived quantum cross-section."""
    model = ScatteringModel(engine, state, gamma=gamma, l_max=l_max, mu=mu)
    kt = convert_value(temperature_k, "kelvin", "hartree")
    windows = model.narrow_pole_energies(
        e_lo=1e-3 * kt, e_hi=25.0 * kt, max_width_hartree=NARROW_WIDTH_HARTREE
    )
    return rate_coefficient(
        model.sigma_se,
        temperature_k,
        mu=model.mu,
        gamma=gamma,
        method="quantum",
        resonance_windows=windows,
        l_max=l_max,
        **kw,
    )


def classical_rate(
    model: ClassicalModel,
    temperature_k: float,
    n_base: int = 400,
    **kw,
) -> RateResult:
    """Rate coefficient from the classical trajectory cross-section."""

    def sigma(e_grid):
        return np.array([model.sigma_se(float(e)) for e in np.atleast_1d(e_grid)])

    return rate_coefficient(
        sigma,
        temperature_k,
        mu=model.mu,
        gamma=0.0,
        method="classical",
        resonance_windows=[],
        n_base=n_base,
        **kw,
    )


def enhancement_ratio(k_quantum: RateResult, k_classical: RateResult) -> float:
    """Quantum over classical rate; +inf when the classical rate vanishes."""
    if k_classical.k_se_cm3_s == 0.0:
        warnings.warn("classical rate is zero; enhancement ratio is infinite")
        return math.inf
    return k_quantum.k_se_cm3_s / k_classical.k_se_cm3_s
