"""Independent numerical reference: Numerov propagation and node counting.

Validation-only module.  It never feeds the production pipeline; phase
shifts computed here (mod pi) cross-check the pole-derived S-matrices,
and node counting fixes bound-state counts.  Runs at zero dissociation
only, which is why it cannot replace the pole formulation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from spinx.potential import ChannelPotential
from spinx.units import wavenumber

__all__ = ["OracleResult", "numerov_phase_shift", "count_bound_states"]

# Numerov factor h^2 f / 12 must stay well below 1 for the recurrence to
# track the regular solution; the start radius is pushed outward until
# the wall and centrifugal terms satisfy this.
_STABILITY_T = 0.05


@dataclass(frozen=True)
class OracleResult:
    delta_mod_pi: float  # radians in [0, pi)
    nodes: int
    energy_hartree: float
    l: int
    j: int
    r_max: float


def _riccati_j(l: int, z) -> np.ndarray:
    return z * spherical_jn(l, np.asarray(z, dtype=float))


def _riccati_c(l: int, z) -> np.ndarray:
    # cosine-like partner, C_l(z) -> cos(z - l pi/2)
    z = np.asarray(z, dtype=float)
    return -z * spherical_yn(l, z)


def _start_index(t_abs: np.ndarray) -> int:
    ok = np.nonzero(t_abs < _STABILITY_T)[0]
    if len(ok) == 0:
        raise ValueError("no stable starting radius; decrease the step")
    return int(ok[0])


def numerov_phase_shift(
    cp: ChannelPotential,
    energy_hartree,
    step: float = 0.002,
    r_start: float = 1e-3,
    r_max: float | None = None,
) -> float | np.ndarray:
    """Scattering phase shift mod pi by outward Numerov integration.

    Integrates u'' = 2 mu (W - E) u outward from u ~ r^(l+1) and matches
    the solution against Riccati-Bessel functions at two radii beyond the
    potential truncation, a quarter local wavelength apart.  Accepts a
    scalar energy or an array (propagated together).
    """
    energies = np.atleast_1d(np.asarray(energy_hartree, dtype=float))
    if np.any(energies <= 0):
        raise ValueError("scattering energies must be positive")
    mu, l, a = cp.mu, cp.l, cp.truncation_radius

    k = np.sqrt(2.0 * mu * energies)
    k_max = float(k.max())
    if k_max * step > 0.5:
        raise ValueError(
            f"step {step} unstable at this energy; suggest step <= {0.5 / k_max:.4g}"
        )

    # matching radii: beyond the truncation, a quarter local wavelength apart
    dr = float(np.clip(np.max(np.pi / (2.0 * k)), 0.25, 30.0))
    r1 = a + 2.0
    r2 = r1 + dr
    r_end = r_max if r_max is not None else r2 + step
    if r_end < r2:
        raise ValueError(f"r_max={r_end} too small; need at least {r2:.2f}")

    n_steps = int(math.ceil((r_end - r_start) / step))
    grid = r_start + step * np.arange(n_steps + 1)
    f = 2.0 * mu * (cp.w(grid)[:, None] - energies[None, :])  # u'' = f u
    t = (step * step / 12.0) * f

    i0 = _start_index(np.abs(t).max(axis=1))
    if np.all(np.abs(cp.w(grid[i0 : i0 + 2])) < 1e-300):
        # free region at the start: seed with the exact regular solution
        u_prev = _riccati_j(l, k * grid[i0])
        u_cur = _riccati_j(l, k * grid[i0 + 1])
    else:
        u_prev = np.full(len(energies), grid[i0] ** (l + 1))
        u_cur = np.full(len(energies), grid[i0 + 1] ** (l + 1))

    i1 = int(round((r1 - r_start) / step))
    i2 = int(round((r2 - r_start) / step))
    r1, r2 = grid[i1], grid[i2]
    if i1 <= i0 + 1:
        raise ValueError("matching radii inside the starting region")
    u1 = np.zeros_like(u_cur)
    u2 = np.zeros_like(u_cur)

    for i in range(i0 + 1, n_steps):
        u_next = ((2.0 + 10.0 * t[i]) * u_cur - (1.0 - t[i - 1]) * u_prev) / (1.0 - t[i + 1])
        u_prev, u_cur = u_cur, u_next
        if i + 1 == i1:
            u1 = u_cur.copy()
        if i + 1 == i2:
            u2 = u_cur.copy()
        # renormalize against overflow through classically forbidden regions,
        # but only before the first matching sample is frozen
        if (i % 500) == 0 and i + 1 < i1:
            scale = np.abs(u_cur)
            scale[scale == 0] = 1.0
            u_prev = u_prev / scale
            u_cur = u_cur / scale

    # u(r) = C [ S_l(kr) cos d + C_l(kr) sin d ]
    s1, c1 = _riccati_j(l, k * r1), _riccati_c(l, k * r1)
    s2, c2 = _riccati_j(l, k * r2), _riccati_c(l, k * r2)
    tan_d = (u2 * s1 - u1 * s2) / (u1 * c2 - u2 * c1)
    delta = np.mod(np.arctan(tan_d), np.pi)

    if np.isscalar(energy_hartree):
        return float(delta[0])
    return delta


def count_bound_states(cp: ChannelPotential, step: float = 0.002, r_start: float = 1e-3) -> int:
    """Bound states of the channel via zero-energy node counting.

    Counts nodes of the regular E=0 solution, including the at most one
    node the free-region tail c1 r^(l+1) + c2 r^(-l) can add beyond the
    truncation radius.
    """
    mu, l, a = cp.mu, cp.l, cp.truncation_radius
    n_steps = int(math.ceil((a - r_start) / step))
    grid = r_start + step * np.arange(n_steps + 1)
    f = 2.0 * mu * cp.w(grid)
    t = (step * step / 12.0) * f

    i0 = _start_index(np.abs(t))
    u_prev = grid[i0] ** (l + 1) if l < 100 else 1e-200
    u_cur = grid[i0 + 1] ** (l + 1) if l < 100 else 1.1e-200

    nodes = 0
    last_sign = math.copysign(1.0, u_cur)
    for i in range(i0 + 1, n_steps):
        u_next = ((2.0 + 10.0 * t[i]) * u_cur - (1.0 - t[i - 1]) * u_prev) / (1.0 - t[i + 1])
        u_prev, u_cur = u_cur, u_next
        if u_cur != 0.0:
            sign = math.copysign(1.0, u_cur)
            if sign != last_sign:
                nodes += 1
                last_sign = sign
        mag = abs(u_cur)
        if mag > 1e250 or (0.0 < mag < 1e-250):
            u_prev /= mag
            u_cur /= mag

    # tail analysis: u = c1 r^(l+1) + c2 r^(-l) for r >= a
    r_a = grid[n_steps]
    du = (u_cur - u_prev) / step  # first-order is enough for a sign test
    denom = (2 * l + 1) / r_a
    c1 = (du + l * u_cur / r_a) / (denom * r_a**l)
    c2 = (u_cur - c1 * r_a ** (l + 1)) * r_a**l
    if c1 != 0.0 and (-c2 / c1) > 0:
        r_cross = (-c2 / c1) ** (1.0 / (2 * l + 1))
        if r_cross > r_a:
            nodes += 1
    return nodes


def oracle_result(cp: ChannelPotential, energy_hartree: float, **kw) -> OracleResult:
    """Bundle phase shift and node count into one report row."""
    delta = numerov_phase_shift(cp, energy_hartree, **kw)
    nodes = count_bound_states(cp)
    if not (0.0 <= delta < math.pi):
        warnings.warn(f"phase {delta} outside [0, pi); wrapping")
        delta = math.fmod(delta, math.pi)
    return OracleResult(
        delta_mod_pi=float(delta),
        nodes=nodes,
        energy_hartree=energy_hartree,
        l=cp.l,
        j=cp.j,
        r_max=cp.truncation_radius,
    )
