"""Scattering observables from pole sets.

Everything here is a function of the Siegert spectra alone: the partial
amplitude of a channel is the product over its 2N + l poles,

    S_l^j(E) = exp(-2 i k a) * prod_n (k_n + k) / (k_n - k),  k = sqrt(2 mu E),

evaluated as a sum of complex logarithms.  Phase shifts are the
continuous branch of -(i/2) log S; partial delays come from the analytic
energy derivative

    tau_l = (mu/k) * (-2 a + sum_n Im[1/(k_n + k) + 1/(k_n - k)]),

and the spin-exchange cross-section from the singlet/triplet difference

    sigma_se(E) = pi/(4 k^2) * sum_l (2l+1) |S_l^1 - S_l^0|^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from spinx.engine import PoleEngine
from spinx.siegert import PoleSet, apply_dissociation
from spinx.units import ATOMIC_TIME_S, BOHR2_CM2

__all__ = [
    "s_matrix",
    "PhaseDelay",
    "phase_and_delay",
    "sigma_se",
    "mean_time_delay",
    "SpectrumTable",
    "ScatteringModel",
]

# stop criterion for the adaptive partial-wave sum
ADAPTIVE_REL_CONTRIBUTION = 1e-8
ADAPTIVE_QUIET_WAVES = 3


def _k_of(ps: PoleSet, energy_hartree) -> np.ndarray:
    e = np.atleast_1d(np.asarray(energy_hartree, dtype=float))
    if np.any(e <= 0):
        raise ValueError("scattering energies must be positive")
    return np.sqrt(2.0 * ps.mu * e)


def s_matrix(ps: PoleSet, energy_hartree) -> complex | np.ndarray:
    """Partial amplitude at one or many energies.

    Warns when the evaluation point sits within 1e-12 of a pole that has
    no imaginary width to regularize it.
    """
    if len(ps.poles) == 0:
        raise ValueError("empty pole set")
    k = _k_of(ps, energy_hartree)
    dangerous = np.abs(ps.poles.imag) < 1e-12
    if np.any(dangerous):
        close = np.min(
            np.abs(ps.poles.real[dangerous][None, :] - k[:, None]), initial=np.inf
        )
        if close < 1e-12:
            warnings.warn("near-singular S-matrix evaluation at a real-axis pole")
    # chunked direct product with log-domain carry: individual factors are
    # O(1) but the running product can overflow near sharp resonances
    s = np.ones_like(k, dtype=complex)
    log_carry = np.zeros_like(k)
    for lo in range(0, len(ps.poles), 64):
        chunk = ps.poles[lo : lo + 64]
        s = s * np.prod(
            (chunk[None, :] + k[:, None]) / (chunk[None, :] - k[:, None]), axis=1
        )
        mag = np.abs(s)
        big = (mag > 1e100) | ((mag > 0) & (mag < 1e-100))
        if np.any(big):
            log_carry = log_carry + np.where(big, np.log(np.where(big, mag, 1.0)), 0.0)
            s = np.where(big, s / np.where(big, mag, 1.0), s)
    s = s * np.exp(log_carry - 2j * k * ps.spec.a)
    if np.isscalar(energy_hartree):
        return complex(s[0])
    return s


def partial_delay(ps: PoleSet, energy_hartree) -> np.ndarray:
    """Analytic Wigner delay 2 d(delta)/dE of one channel, in seconds."""
    k = _k_of(ps, energy_hartree)
    terms = 1.0 / (ps.poles[None, :] + k[:, None]) + 1.0 / (ps.poles[None, :] - k[:, None])
    tau_au = (ps.mu / k) * (-2.0 * ps.spec.a + np.sum(terms, axis=1).imag)
    return tau_au * ATOMIC_TIME_S


@dataclass(frozen=True)
class PhaseDelay:
    energy_hartree: np.ndarray
    delta: np.ndarray  # radians, continuous branch along the grid
    tau_seconds: np.ndarray  # analytic derivative

    def finite_difference_tau(self) -> np.ndarray:
        """Central-difference cross-check of tau on the same grid (seconds)."""
        e, d = self.energy_hartree, self.delta
        tau = np.gradient(d, e) * 2.0
        return tau * ATOMIC_TIME_S


def phase_and_delay(
    ps: PoleSet,
    energy_grid_hartree: np.ndarray,
    max_refinement_rounds: int = 18,
) -> PhaseDelay:
    """Continuous-branch phase shift and partial delay on a grid.

    The branch is tracked by accumulating principal-value increments of
    arg S; a jump beyond pi/2 between neighbours triggers midpoint
    insertion (internally only) until resolved or the cap is reached.
    """
    e = np.asarray(energy_grid_hartree, dtype=float)
    if len(e) < 2 or np.any(np.diff(e) <= 0):
        raise ValueError("energy grid must be strictly increasing with >= 2 points")

    grid = e.copy()
    for _ in range(max_refinement_rounds):
        args = np.angle(s_matrix(ps, grid))
        jumps = np.abs(_wrap_pi(np.diff(args)))
        bad = np.nonzero(jumps > 0.5 * math.pi)[0]
        if len(bad) == 0:
            break
        mids = 0.5 * (grid[bad] + grid[bad + 1])
        grid = np.sort(np.concatenate([grid, mids]))
    else:
        warnings.warn("phase branch tracking hit the refinement cap; branch may slip")
        args = np.angle(s_matrix(ps, grid))

    increments = _wrap_pi(np.diff(args))
    cum = np.concatenate([[args[0]], args[0] + np.cumsum(increments)])
    delta_full = 0.5 * cum
    idx = np.searchsorted(grid, e)
    delta = delta_full[idx]
    return PhaseDelay(energy_hartree=e, delta=delta, tau_seconds=partial_delay(ps, e))


def _wrap_pi(x: np.ndarray) -> np.ndarray:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def sigma_se(
    polesets: dict[tuple[int, int], PoleSet],
    energy_hartree,
    l_max: int,
) -> np.ndarray:
    """Spin-exchange cross-section in cm^2 summed over l = 0..l_max.

    ``polesets`` maps (j, l) to the channel pole set at a common gamma.
    Fixed ascending-l order with compensated accumulation keeps the
    result bit-stable.
    """
    e = np.atleast_1d(np.asarray(energy_hartree, dtype=float))
    total = np.zeros_like(e)
    comp = np.zeros_like(e)
    for l in range(l_max + 1):
        term = _sigma_term(polesets, l, e)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    mu = polesets[(0, 0)].mu
    k2 = 2.0 * mu * e
    out = (math.pi / (4.0 * k2)) * total * BOHR2_CM2
    if np.isscalar(energy_hartree):
        return float(out[0])
    return out


def _sigma_term(polesets, l, e) -> np.ndarray:
    for j in (0, 1):
        if (j, l) not in polesets:
            raise KeyError(f"missing pole set for channel (j={j}, l={l})")
    s0 = s_matrix(polesets[(0, l)], e)
    s1 = s_matrix(polesets[(1, l)], e)
    return (2 * l + 1) * np.abs(s1 - s0) ** 2


def adaptive_l_cutoff(
    polesets: dict[tuple[int, int], PoleSet],
    energy_hartree,
    l_cap: int,
) -> int:
    """Smallest l cutoff after which three consecutive waves each add
    less than 1e-8 of the running sum (evaluated on the given energies)."""
    e = np.atleast_1d(np.asarray(energy_hartree, dtype=float))
    total = np.zeros_like(e)
    quiet = 0
    for l in range(l_cap + 1):
        term = _sigma_term(polesets, l, e)
        total = total + term
        rel = np.max(term / np.maximum(total, 1e-300))
        if rel < ADAPTIVE_REL_CONTRIBUTION:
            quiet += 1
            if quiet >= ADAPTIVE_QUIET_WAVES:
                return l
        else:
            quiet = 0
    return l_cap


def mean_time_delay(
    polesets_j: dict[int, PoleSet] | dict[tuple[int, int], PoleSet],
    energy_hartree,
    l_max: int,
    j: int,
) -> np.ndarray:
    """Cross-section-weighted mean of the partial delays, in seconds.

    Weights are (2l+1)|1 - S_l|^2, the elastic partial cross-sections up
    to a constant that cancels in the ratio (equal to (2l+1) sin^2 delta
    at unit |S|).  All-zero weights return 0 with a warning.
    """
    e = np.atleast_1d(np.asarray(energy_hartree, dtype=float))
    num = np.zeros_like(e)
    den = np.zeros_like(e)
    for l in range(l_max + 1):
        ps = polesets_j[(j, l)]
        s = s_matrix(ps, e)
        w = (2 * l + 1) * np.abs(1.0 - s) ** 2
        num = num + w * partial_delay(ps, e)
        den = den + w
    if np.any(den == 0.0):
        warnings.warn("all partial-wave weights vanish at some energies; delay set to 0")
    out = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    if np.isscalar(energy_hartree):
        return float(out[0])
    return out


@dataclass(frozen=True)
class SpectrumTable:
    """Per-energy observables of one electronic state at fixed gamma."""

    state: str
    gamma: float
    l_max: int
    energy_hartree: np.ndarray
    sigma_se_cm2: np.ndarray
    tau_mean_s: dict[int, np.ndarray]  # per j
    unitarity_defect: float  # max | |S|-1 | seen while assembling (gamma=0 only)


class ScatteringModel:
    """Engine-backed observable calculator for one state at fixed gamma."""

    def __init__(
        self,
        engine: PoleEngine,
        state: str,
        gamma: float = 0.0,
        l_max: int = 60,
        mu: float | None = None,
    ):
        self.engine = engine
        self.state = state
        self.gamma = gamma
        self.l_max = l_max
        self.mu = mu if mu is not None else engine.mu_default
        self._channels: dict[tuple[int, int], PoleSet] = {}

    def channels(self, l_max: int | None = None) -> dict[tuple[int, int], PoleSet]:
        l_max = l_max if l_max is not None else self.l_max
        self.engine.prefetch(self.state, (0, 1), range(l_max + 1), mu=self.mu)
        for j in (0, 1):
            for l in range(l_max + 1):
                if (j, l) not in self._channels:
                    base = self.engine.poles(self.state, j, l, mu=self.mu)
                    self._channels[(j, l)] = apply_dissociation(base, self.gamma)
        return self._channels

    def narrow_pole_energies(
        self, e_lo: float, e_hi: float, max_width_hartree: float
    ) -> list[tuple[float, float]]:
        """(Re E, Gamma) of narrow decaying poles inside [e_lo, e_hi]."""
        out = []
        for (j, l), ps in self.channels().items():
            k = ps.poles
            e_res = (k**2).real / (2.0 * ps.mu)
            width = -2.0 * k.real * k.imag / ps.mu
            sel = (
                (k.real > 0)
                & (width > 0)
                & (width < max_width_hartree)
                & (e_res > e_lo)
                & (e_res < e_hi)
            )
            out.extend(zip(e_res[sel].tolist(), width[sel].tolist()))
        return sorted(out)

    def sigma_se(self, energy_hartree) -> np.ndarray:
        return sigma_se(self.channels(), energy_hartree, self.l_max)

    def mean_delay(self, j: int, energy_hartree) -> np.ndarray:
        return mean_time_delay(self.channels(), energy_hartree, self.l_max, j=j)

    def spectrum(self, energy_hartree: np.ndarray) -> SpectrumTable:
        chans = self.channels()
        defect = 0.0
        if self.gamma == 0.0:
            probe = np.atleast_1d(energy_hartree)[:: max(1, len(np.atleast_1d(energy_hartree)) // 8)]
            for ps in chans.values():
                defect = max(defect, float(np.max(np.abs(np.abs(s_matrix(ps, probe)) - 1.0))))
        return SpectrumTable(
            state=self.state,
            gamma=self.gamma,
            l_max=self.l_max,
            energy_hartree=np.asarray(energy_hartree, dtype=float),
            sigma_se_cm2=self.sigma_se(energy_hartree),
            tau_mean_s={j: self.mean_delay(j, energy_hartree) for j in (0, 1)},
            unitarity_defect=defect,
        )
