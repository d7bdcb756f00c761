"""Semi-classical spin-exchange baseline from classical trajectories.

The non-resonant estimate integrates the hyperfine precession along
classical paths on the spin-independent potential:

    sigma_c(E) = (pi/2) * integral_0^bmax b db |A(E, b)|^2,
    A(E, b)    = 2 * integral_{R_t}^{a} alpha(R) / v_r(R) dR,

with radial speed v_r = sqrt((2/mu)(E - V(R) - E b^2 / R^2)) and the
outermost classical turning point R_t.  The inverse-square-root
singularity at R_t is removed by the substitution R = R_t + s^2.
Orbiting trajectories (arbitrarily long dwell near a centrifugal-well
maximum) are truncated at a configurable total path time and flagged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from spinx.potential import ElectronicState, interpolate
from spinx.units import ATOMIC_TIME_S, BOHR2_CM2, MHZ_HARTREE, convert_value, mu_khe

__all__ = [
    "TrajectoryIntegral",
    "ClassicalModel",
    "classical_phase_integral",
    "sigma_se_classical",
]

DEFAULT_TIME_CAP_S = 100e-12
_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TrajectoryIntegral:
    energy_hartree: float
    impact_parameter: float  # bohr
    phase: float  # accumulated spin phase, radians
    turning_point: float  # bohr; >= a means a grazing miss
    path_time_s: float
    capped: bool


class ClassicalModel:
    """Dense-grid classical integrator for one electronic state."""

    def __init__(
        self,
        state: ElectronicState,
        mu: float | None = None,
        time_cap_s: float = DEFAULT_TIME_CAP_S,
        n_grid: int = 8192,
    ):
        self.state = state
        self.mu = mu if mu is not None else mu_khe()
        self.a = state.v.truncation_radius
        self.time_cap_s = time_cap_s
        self.r_grid = np.linspace(0.25, self.a, n_grid)
        f_v = convert_value(1.0, "meV", "hartree")
        self.v_grid = interpolate(state.v, self.r_grid) * f_v
        # tabulated alpha is a cyclic frequency in MHz; as an angular
        # rate in atomic units it equals the h*nu energy in hartree
        self.alpha_grid = interpolate(state.alpha, self.r_grid) * MHZ_HARTREE
        self.orbit_events = 0

    def _v(self, r):
        return np.interp(r, self.r_grid, self.v_grid)

    def _alpha(self, r):
        return np.interp(r, self.r_grid, self.alpha_grid)

    def _radial_func(self, r, energy, b):
        return energy - self._v(r) - energy * b * b / (r * r)

    def b_max(self, energy: float) -> float:
        v_a = float(self.v_grid[-1])
        return self.a * math.sqrt(max(0.0, 1.0 - v_a / energy))

    def turning_point(self, energy: float, b: float) -> float:
        """Outermost root of E - V - E b^2/R^2, or a when none is below it."""
        return float(self.turning_points(energy, np.array([b]))[0])

    def turning_points(self, energy: float, bs: np.ndarray) -> np.ndarray:
        """Vectorized outermost turning points for a batch of impact parameters."""
        f = (
            (energy - self.v_grid)[None, :]
            - energy * (bs[:, None] ** 2) / (self.r_grid[None, :] ** 2)
        )
        out = np.full(len(bs), self.a)
        open_at_a = f[:, -1] > 0.0
        # last non-positive sample marks the outermost sign change
        neg = f <= 0.0
        has_neg = neg.any(axis=1)
        idx = self.r_grid.size - 1 - np.argmax(neg[:, ::-1], axis=1)
        active = open_at_a & has_neg
        lo = np.where(active, self.r_grid[idx], self.r_grid[0])
        hi = np.where(active, self.r_grid[np.minimum(idx + 1, self.r_grid.size - 1)], self.r_grid[0])
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            f_mid = energy - self._v(mid) - energy * bs**2 / mid**2
            neg_mid = f_mid <= 0.0
            lo = np.where(neg_mid, mid, lo)
            hi = np.where(neg_mid, hi, mid)
        out[active] = hi[active]
        out[open_at_a & ~has_neg] = self.r_grid[0]
        return out

    def phase_integral(self, energy: float, b: float, n_panels: int = 12) -> TrajectoryIntegral:
        """Accumulated spin phase A(E, b) with the orbiting time cap."""
        if energy <= 0:
            raise ValueError("collision energy must be positive")
        if b < 0:
            raise ValueError("impact parameter must be >= 0")
        phases, times, r_ts, capped = self._phase_batch(energy, np.array([b]), n_panels)
        return TrajectoryIntegral(
            energy, b, float(phases[0]), float(r_ts[0]), float(times[0]) * ATOMIC_TIME_S,
            bool(capped[0]),
        )

    def _phase_batch(self, energy: float, bs: np.ndarray, n_panels: int = 12):
        """Vectorized phase/time integrals for a batch of impact parameters."""
        r_ts = self.turning_points(energy, bs)
        nodes, wq = _GL16
        cap_au = self.time_cap_s / ATOMIC_TIME_S
        miss = r_ts >= self.a
        s_max = np.sqrt(np.maximum(self.a - r_ts, 0.0))
        phases = np.zeros(len(bs))
        times = np.zeros(len(bs))
        capped = np.zeros(len(bs), dtype=bool)
        panel_edges = np.linspace(0.0, 1.0, n_panels + 1)
        for lo_f, hi_f in zip(panel_edges[:-1], panel_edges[1:]):
            lo = lo_f * s_max
            hi = hi_f * s_max
            half = 0.5 * (hi - lo)
            s = half[:, None] * nodes[None, :] + 0.5 * (hi + lo)[:, None]
            w = half[:, None] * wq[None, :]
            r = r_ts[:, None] + s * s
            f = (energy - self._v(r)) - energy * (bs[:, None] ** 2) / (r * r)
            v_r = np.sqrt(np.maximum(2.0 * f / self.mu, 0.0))
            integrand_t = np.where(v_r > 0.0, 4.0 * s / np.where(v_r > 0.0, v_r, 1.0), 0.0)
            live = ~(capped | miss)
            phases += live * np.sum(w * integrand_t * self._alpha(r), axis=1)
            times += live * np.sum(w * integrand_t, axis=1)
            newly = live & (times > cap_au)
            if np.any(newly):
                self.orbit_events += int(newly.sum())
                capped |= newly
        phases[miss] = 0.0
        times[miss] = 0.0
        return phases, times, r_ts, capped

    # -- cross-section --------------------------------------------------------

    def sigma_se(self, energy: float, rel_tol: float = 1e-4) -> float:
        """Classical spin-exchange cross-section in cm^2."""
        b_hi = self.b_max(energy)
        if b_hi == 0.0:
            return 0.0
        breakpoints = self._breakpoints(energy, b_hi)
        pairs = list(zip(breakpoints[:-1], breakpoints[1:]))
        coarse = sum(self._gl_panel(energy, lo, hi, 16) for lo, hi in pairs)
        total = 0.0
        for lo, hi in pairs:
            total += self._panel(energy, lo, hi, rel_tol, depth=0, floor=abs(coarse))
        return 0.5 * math.pi * total * BOHR2_CM2

    def _breakpoints(self, energy: float, b_hi: float) -> np.ndarray:
        """Panel edges of the b integral: the turning-point jump locations
        (orbiting window borders), each bisected down to ~1e-9 bohr so no
        quadrature panel straddles a discontinuity of A(b)."""
        bs = np.linspace(0.0, b_hi, 193)
        r_ts = self.turning_points(energy, bs)
        jump = np.nonzero(np.abs(np.diff(r_ts)) > 0.5)[0]
        pts = [0.0, b_hi]
        for i in jump:
            lo, hi = bs[i], bs[i + 1]
            r_lo = r_ts[i]
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                r_mid = self.turning_points(energy, np.array([mid]))[0]
                if abs(r_mid - r_lo) < 0.5:
                    lo, r_lo = mid, r_mid
                else:
                    hi = mid
            pts.extend([lo, hi])
        return np.unique(np.clip(pts, 0.0, b_hi))

    def _panel(self, energy, lo, hi, rel_tol, depth, floor=0.0) -> float:
        coarse = self._gl_panel(energy, lo, hi, 16)
        fine = self._gl_panel(energy, lo, hi, 32)
        scale = max(abs(fine), floor)
        if scale == 0.0 or abs(fine - coarse) <= rel_tol * scale:
            return fine
        if depth >= 12:
            if abs(fine) > 1e-3 * floor:
                warnings.warn(
                    f"impact-parameter quadrature not converged on [{lo:.4f},{hi:.4f}] "
                    f"({abs(fine - coarse) / scale:.1e} relative); keeping dense value"
                )
            return self._gl_panel(energy, lo, hi, 64)
        mid = 0.5 * (lo + hi)
        return self._panel(energy, lo, mid, rel_tol, depth + 1, floor) + self._panel(
            energy, mid, hi, rel_tol, depth + 1, floor
        )

    def _gl_panel(self, energy, lo, hi, n) -> float:
        nodes, wq = np.polynomial.legendre.leggauss(n)
        b = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * wq
        phases, _, _, _ = self._phase_batch(energy, b)
        return float(np.sum(w * b * phases**2))


def classical_phase_integral(
    state: ElectronicState,
    energy_hartree: float,
    b: float,
    mu: float | None = None,
    time_cap_s: float = DEFAULT_TIME_CAP_S,
) -> TrajectoryIntegral:
    return ClassicalModel(state, mu=mu, time_cap_s=time_cap_s).phase_integral(energy_hartree, b)


def sigma_se_classical(
    state: ElectronicState,
    energy_hartree,
    mu: float | None = None,
    time_cap_s: float = DEFAULT_TIME_CAP_S,
) -> float | np.ndarray:
    model = ClassicalModel(state, mu=mu, time_cap_s=time_cap_s)
    if np.isscalar(energy_hartree):
        return model.sigma_se(float(energy_hartree))
    return np.array([model.sigma_se(float(e)) for e in np.asarray(energy_hartree)])
