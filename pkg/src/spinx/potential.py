"""Tabulated potential / hyperfine curves and effective channel potentials.

The bundled data files hold the ab-initio tables for the K-He complex:
potential energy curves V(R) in meV and Fermi-contact hyperfine couplings
alpha(R) in MHz, both on a common bohr grid.  This module parses them,
builds natural cubic-spline interpolants, and assembles the effective
single-channel radial potential

    W(R) = V(R) + c_j * alpha(R) + l(l+1) / (2 mu R^2)     [hartree]

with c_0 = -3/4 and c_1 = +1/4, the I.S eigenvalues for two spin-1/2
particles.  V and alpha are clamped to zero beyond the truncation radius.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from spinx.units import convert_value

__all__ = [
    "TableError",
    "RawTable",
    "TabulatedCurve",
    "ElectronicState",
    "ChannelPotential",
    "BarrierProfile",
    "SPIN_COEFF",
    "load_raw_table",
    "parse_state_tables",
    "load_bundled_dataset",
    "interpolate",
    "channel_potential",
    "barrier_profile",
]

DEFAULT_TRUNCATION_BOHR = 40.0

# I.S eigenvalues for I = S = 1/2: singlet (j=0) and triplet (j=1).
SPIN_COEFF = {0: -0.75, 1: +0.25}

_INF_TOKENS = {"inf", "Inf", "INF", "∞", "infinity"}


class TableError(ValueError):
    """Malformed or inconsistent input table."""


@dataclass(frozen=True)
class RawTable:
    """A delimited table exactly as read: header names, R rows, values."""

    headers: list[str]  # state column names, R excluded
    r_values: np.ndarray  # finite R rows only, in file order
    columns: dict[str, np.ndarray]  # per header, aligned with r_values
    asymptote_row: dict[str, float] | None  # the 'inf' row if present

    @property
    def n_rows(self) -> int:
        """Number of R rows including the asymptote row when present."""
        return len(self.r_values) + (1 if self.asymptote_row is not None else 0)


def _detect_delimiter(line: str) -> str:
    for cand in ("\t", ",", ";"):
        if cand in line:
            return cand
    raise TableError("could not detect delimiter (expected tab, comma or semicolon)")


def load_raw_table(text: str) -> RawTable:
    """Parse delimited text with a header row naming the states.

    Lines starting with '#' are comments.  One row may carry an infinity
    token in the R column; it is stored separately as the asymptote row.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2:
        raise TableError("table needs a header row and at least one data row")
    delim = _detect_delimiter(lines[0])
    headers = [h.strip() for h in lines[0].split(delim)]
    if headers[0].upper() != "R":
        raise TableError(f"first column must be R, got {headers[0]!r}")
    state_names = headers[1:]

    r_list: list[float] = []
    rows: list[list[float]] = []
    asym: dict[str, float] | None = None
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(delim)]
        if len(cells) != len(headers):
            raise TableError(f"row has {len(cells)} cells, expected {len(headers)}: {ln!r}")
        values = []
        for name, cell in zip(headers[1:], cells[1:]):
            try:
                values.append(float(cell))
            except ValueError:
                raise TableError(f"malformed number {cell!r} in column {name!r}") from None
        if cells[0] in _INF_TOKENS:
            if asym is not None:
                raise TableError("multiple asymptote rows")
            asym = dict(zip(state_names, values))
            continue
        try:
            r = float(cells[0])
        except ValueError:
            raise TableError(f"malformed R value {cells[0]!r}") from None
        r_list.append(r)
        rows.append(values)

    r_arr = np.asarray(r_list)
    if np.any(np.diff(r_arr) <= 0):
        bad = int(np.argmax(np.diff(r_arr) <= 0))
        raise TableError(f"R values not strictly increasing near R={r_arr[bad]}")
    data = np.asarray(rows)
    columns = {name: data[:, i].copy() for i, name in enumerate(state_names)}
    return RawTable(headers=state_names, r_values=r_arr, columns=columns, asymptote_row=asym)


@dataclass(frozen=True)
class TabulatedCurve:
    """A sampled radial function on a strictly increasing bohr grid.

    ``values`` keep the tabulated unit (meV for potentials, MHz for
    hyperfine couplings).  Beyond ``truncation_radius`` the curve is
    defined as zero; below the first node it follows an exponential fit
    through the first two nodes.
    """

    name: str
    r_nodes: np.ndarray
    values: np.ndarray
    asymptote: float
    unit: str
    truncation_radius: float = DEFAULT_TRUNCATION_BOHR
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    _wall: tuple[float, float, float] | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.r_nodes) < 4:
            raise TableError(f"curve {self.name!r} needs >= 4 nodes, got {len(self.r_nodes)}")
        if np.any(np.diff(self.r_nodes) <= 0):
            raise TableError(f"curve {self.name!r} has non-increasing R nodes")
        object.__setattr__(
            self, "_spline", CubicSpline(self.r_nodes, self.values, bc_type="natural")
        )
        object.__setattr__(self, "_wall", self._fit_wall())

    def _fit_wall(self) -> tuple[float, float, float] | None:
        # exp fit v = sign * exp(c0 + c1 R) through the first two nodes;
        # None falls back to linear extrapolation (mixed signs or zeros)
        v0, v1 = self.values[0], self.values[1]
        if v0 == 0.0 or v1 == 0.0 or (v0 > 0) != (v1 > 0):
            return None
        r0, r1 = self.r_nodes[0], self.r_nodes[1]
        c1 = (math.log(abs(v1)) - math.log(abs(v0))) / (r1 - r0)
        c0 = math.log(abs(v0)) - c1 * r0
        return (math.copysign(1.0, v0), c0, c1)

    def __call__(self, r):
        return interpolate(self, r)


def interpolate(curve: TabulatedCurve, r):
    """Evaluate a curve at radius ``r`` (scalar or array), in table units.

    Natural cubic spline inside [first node, truncation radius], zero
    beyond the truncation radius, exponential wall extrapolation below
    the first node.  Raises for r <= 0.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("radius must be positive")
    out = np.zeros_like(r_arr)
    inside = (r_arr >= curve.r_nodes[0]) & (r_arr <= curve.truncation_radius)
    below = r_arr < curve.r_nodes[0]
    if np.any(inside):
        out[inside] = curve._spline(r_arr[inside])
    if np.any(below):
        if curve._wall is not None:
            sign, c0, c1 = curve._wall
            out[below] = sign * np.exp(c0 + c1 * r_arr[below])
        else:
            # linear continuation of the first segment
            slope = (curve.values[1] - curve.values[0]) / (curve.r_nodes[1] - curve.r_nodes[0])
            out[below] = curve.values[0] + slope * (r_arr[below] - curve.r_nodes[0])
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ElectronicState:
    """One electronic state: its PEC and hyperfine curve, same label."""

    label: str
    v: TabulatedCurve
    alpha: TabulatedCurve


def parse_state_tables(
    v_table_text: str,
    alpha_table_text: str,
    truncation_radius: float = DEFAULT_TRUNCATION_BOHR,
) -> list[ElectronicState]:
    """Build ElectronicStates from the two delimited tables.

    One state per column shared by both tables (columns present only in
    the potential table, like the cation, carry no hyperfine data and are
    skipped).  A hyperfine column without a potential counterpart is an
    error.  Rows beyond the truncation radius are dropped; the potential
    table's infinity row is stored as the asymptote, the hyperfine
    asymptote defaults to zero.
    """
    v_raw = load_raw_table(v_table_text)
    a_raw = load_raw_table(alpha_table_text)
    extra = [h for h in a_raw.headers if h not in v_raw.headers]
    if extra:
        raise TableError(f"hyperfine table has states missing from the potential table: {extra}")

    states = []
    for name in v_raw.headers:
        if name not in a_raw.headers:
            continue
        v_curve = _make_curve(v_raw, name, "meV", truncation_radius)
        a_curve = _make_curve(a_raw, name, "MHz", truncation_radius)
        states.append(ElectronicState(label=name, v=v_curve, alpha=a_curve))
    return states


def _make_curve(raw: RawTable, name: str, unit: str, a: float) -> TabulatedCurve:
    keep = raw.r_values <= a
    asym = 0.0
    if raw.asymptote_row is not None:
        asym = raw.asymptote_row[name]
    return TabulatedCurve(
        name=name,
        r_nodes=raw.r_values[keep],
        values=raw.columns[name][keep],
        asymptote=asym,
        unit=unit,
        truncation_radius=a,
    )


@dataclass(frozen=True)
class Dataset:
    """The parsed bundled tables plus the raw layers for reporting."""

    states: dict[str, ElectronicState]
    v_raw: RawTable
    alpha_raw: RawTable
    truncation_radius: float
    source_digest: str

    def state(self, label: str) -> ElectronicState:
        key = resolve_state_label(label, self.states)
        return self.states[key]


_SHORTHAND = {"4S": "4S:2Sigma", "5S": "5S:2Sigma"}


def resolve_state_label(label: str, states: dict[str, ElectronicState]) -> str:
    full = _SHORTHAND.get(label, label)
    if full not in states:
        raise KeyError(f"unknown state label {label!r}; available: {sorted(states)}")
    return full


def load_bundled_dataset(truncation_radius: float = DEFAULT_TRUNCATION_BOHR) -> Dataset:
    """Load the packaged K-He tables."""
    import hashlib

    pkg = importlib.resources.files("spinx.data")
    v_text = (pkg / "pec_khe.tsv").read_text()
    a_text = (pkg / "hyperfine_khe.tsv").read_text()
    digest = hashlib.sha256((v_text + a_text).encode()).hexdigest()
    states = parse_state_tables(v_text, a_text, truncation_radius)
    return Dataset(
        states={s.label: s for s in states},
        v_raw=load_raw_table(v_text),
        alpha_raw=load_raw_table(a_text),
        truncation_radius=truncation_radius,
        source_digest=digest,
    )


@dataclass(frozen=True)
class ChannelPotential:
    """Effective radial potential for one (state, j, l) channel.

    The evaluator returns hartree.  ``v_of_r`` and ``alpha_of_r`` are the
    spin-independent and hyperfine parts already converted to hartree.
    """

    label: str
    j: int
    l: int
    mu: float  # electron masses
    v_of_r: Callable  # hartree
    alpha_of_r: Callable  # hartree
    truncation_radius: float = DEFAULT_TRUNCATION_BOHR

    def w(self, r):
        r_arr = np.asarray(r, dtype=float)
        w = self.v_of_r(r_arr) + SPIN_COEFF[self.j] * self.alpha_of_r(r_arr)
        if self.l:
            w = w + self.l * (self.l + 1) / (2.0 * self.mu * r_arr**2)
        if np.isscalar(r) or r_arr.ndim == 0:
            return float(w)
        return w

    def __call__(self, r):
        return self.w(r)

    def interior(self, r):
        """V + c_j alpha without the centrifugal term, in hartree."""
        r_arr = np.asarray(r, dtype=float)
        w = self.v_of_r(r_arr) + SPIN_COEFF[self.j] * self.alpha_of_r(r_arr)
        if np.isscalar(r) or r_arr.ndim == 0:
            return float(w)
        return w


def channel_potential(state: ElectronicState, j: int, l: int, mu: float) -> ChannelPotential:
    """Assemble W(R) = V + c_j alpha + centrifugal for one channel."""
    if j not in SPIN_COEFF:
        raise ValueError(f"j must be 0 or 1, got {j}")
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    v_mev = state.v
    a_mhz = state.alpha
    f_v = convert_value(1.0, "meV", "hartree")
    f_a = convert_value(1.0, "MHz", "hartree")

    def v_of_r(r):
        return interpolate(v_mev, r) * f_v

    def alpha_of_r(r):
        return interpolate(a_mhz, r) * f_a

    return ChannelPotential(
        label=state.label,
        j=j,
        l=l,
        mu=mu,
        v_of_r=v_of_r,
        alpha_of_r=alpha_of_r,
        truncation_radius=v_mev.truncation_radius,
    )


def synthetic_channel(
    w_hartree: Callable,
    mu: float,
    l: int = 0,
    j: int = 1,
    label: str = "synthetic",
    truncation_radius: float = DEFAULT_TRUNCATION_BOHR,
) -> ChannelPotential:
    """Channel with a caller-supplied interior potential (tests, checks).

    ``w_hartree`` is treated as the spin-independent part; the hyperfine
    part is zero and the centrifugal term is added for l > 0 as usual.
    """

    def zero(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return ChannelPotential(
        label=label,
        j=j,
        l=l,
        mu=mu,
        v_of_r=lambda r: np.asarray(w_hartree(np.asarray(r, dtype=float)), dtype=float),
        alpha_of_r=zero,
        truncation_radius=truncation_radius,
    )


@dataclass(frozen=True)
class BarrierProfile:
    """Interior well plus the barrier between it and the truncation radius."""

    well_depth_mev: float
    well_r_bohr: float
    barrier_height_mev: float
    barrier_r_bohr: float


# Tabulated tail noise sits below ~0.01 meV; a "barrier" under that floor
# does not count as structure.
BARRIER_NOISE_FLOOR_MEV = 0.01


def barrier_profile(
    cp: ChannelPotential,
    scan_step: float = 0.01,
    r_min: float | None = None,
) -> BarrierProfile | None:
    """Locate the well and barrier of a channel potential.

    Dense scan (step <= 0.01 bohr) plus parabolic refinement.  Returns
    None when the channel has no well/barrier structure above the noise
    floor ("monotone" in the well-region sense).
    """
    a = cp.truncation_radius
    lo = r_min if r_min is not None else 0.5
    n = max(int(math.ceil((a - lo) / scan_step)) + 1, 16)
    r = np.linspace(lo, a, n)
    w = cp.w(r)

    is_min = (w[1:-1] < w[:-2]) & (w[1:-1] <= w[2:])
    if not np.any(is_min):
        return None
    idx_min = np.where(is_min)[0] + 1
    i_well = idx_min[np.argmin(w[idx_min])]
    well_r, well_w = _refine_extremum(r, w, i_well, cp.w, minimum=True)

    tail = slice(i_well, None)
    i_bar = i_well + int(np.argmax(w[tail]))
    bar_r, bar_w = _refine_extremum(r, w, i_bar, cp.w, minimum=False)

    f = convert_value(1.0, "hartree", "meV")
    height_mev = bar_w * f
    if height_mev <= BARRIER_NOISE_FLOOR_MEV or bar_w <= well_w:
        return None
    return BarrierProfile(
        well_depth_mev=well_w * f,
        well_r_bohr=well_r,
        barrier_height_mev=height_mev,
        barrier_r_bohr=bar_r,
    )


def _refine_extremum(r, w, i, func, minimum: bool):
    if i <= 0 or i >= len(r) - 1:
        return float(r[i]), float(w[i])
    # golden-section polish on the bracketing triple
    lo, hi = r[i - 1], r[i + 1]
    sign = 1.0 if minimum else -1.0
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = sign * func(x1), sign * func(x2)
    for _ in range(60):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = sign * func(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = sign * func(x2)
        if hi - lo < 1e-10:
            break
    x = 0.5 * (lo + hi)
    return float(x), float(func(x))
