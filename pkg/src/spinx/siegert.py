"""Siegert pseudo-state solver: complex wave numbers of one radial channel.

The radial problem on [0, a],

    (-1/(2 mu) d^2/dR^2 + W(R) - k^2/(2 mu)) u = 0,   u(0) = 0,

closed with a purely outgoing wave at R = a, turns into a quadratic
eigenvalue problem in k after discretization in a polynomial basis
phi_i(R) that vanishes at the origin:

    [A - (i k + rho_l(k)) b b^T - k^2 S] u = 0.

For l = 0 the outgoing log-derivative is exactly i k.  For l > 0 it is
the log-derivative of the Riccati-Hankel function, i k plus a strictly
proper rational function rho_l with l simple poles (the zeros of the
Hankel polynomial scaled by 1/a).  Realizing rho_l with l auxiliary
variables and the usual companion trick for the k^2 term gives one dense
complex eigenproblem of size 2N + l, so every channel carries exactly
2N + l poles.

The external-dissociation correction maps every pole to

    k -> Re(k) + i (Im(k) - mu * gamma / |k|),

the mass-explicit form of the mass-scaled shift Im(k) - gamma/|k| (this
package keeps mu explicit; see the units module).  The shift broadens
resonances without absorbing flux: |S| stays exactly unimodular.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    import contextlib

    def threadpool_limits(*a, **kw):
        return contextlib.nullcontext()

from spinx.potential import ChannelPotential

__all__ = [
    "SiegertSpec",
    "PoleSet",
    "SolverError",
    "solve_poles",
    "apply_dissociation",
    "hankel_polynomial_zeros",
    "pair_symmetry_defect",
]


class SolverError(RuntimeError):
    """Eigendecomposition failed or produced an unusable pole set."""


@dataclass(frozen=True)
class SiegertSpec:
    """Discretization parameters: basis size, box radius, boundary mode."""

    n_basis: int = 200
    a: float = 40.0
    boundary: str = "hankel"  # "hankel" (exact l>0 tail) or "plain" (ik for all l)

    def __post_init__(self) -> None:
        if self.n_basis < 20:
            raise ValueError(f"basis size must be >= 20, got {self.n_basis}")
        if self.a < 0:
            raise ValueError(f"box radius must be >= 0, got {self.a}")
        if self.boundary not in ("hankel", "plain"):
            raise ValueError(f"boundary must be 'hankel' or 'plain', got {self.boundary!r}")


@dataclass(frozen=True)
class PoleSet:
    """All complex wave numbers of one (state, j, l, gamma) channel."""

    label: str
    j: int
    l: int
    gamma: float  # inverse atomic time
    mu: float  # electron masses
    poles: np.ndarray  # complex, bohr^-1
    spec: SiegertSpec
    real_axis_flags: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    @property
    def expected_count(self) -> int:
        if self.spec.boundary == "plain":
            return 2 * self.spec.n_basis
        return 2 * self.spec.n_basis + self.l

    def energies(self) -> np.ndarray:
        """Complex pole energies k^2 / (2 mu) in hartree."""
        return self.poles**2 / (2.0 * self.mu)

    def to_json(self) -> str:
        doc = {
            "state": self.label,
            "j": self.j,
            "l": self.l,
            "gamma": self.gamma,
            "N": self.spec.n_basis,
            "a": self.spec.a,
            "boundary": self.spec.boundary,
            "mu": self.mu,
            "poles": [{"re": float(p.real), "im": float(p.imag)} for p in self.poles],
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "PoleSet":
        doc = json.loads(text)
        poles = np.array([complex(p["re"], p["im"]) for p in doc["poles"]])
        return PoleSet(
            label=doc["state"],
            j=int(doc["j"]),
            l=int(doc["l"]),
            gamma=float(doc["gamma"]),
            mu=float(doc["mu"]),
            poles=poles,
            spec=SiegertSpec(
                n_basis=int(doc["N"]), a=float(doc["a"]), boundary=doc.get("boundary", "hankel")
            ),
        )


# ---------------------------------------------------------------------------
# outgoing-wave boundary data: zeros of the Riccati-Hankel polynomial part
# ---------------------------------------------------------------------------


# largest l with reliable outgoing-wave zeros; beyond this the solver
# falls back to the plain (d/dR - ik) boundary, which leaves narrow
# below-barrier poles essentially untouched
HANKEL_BC_MAX_L = 60


@functools.lru_cache(maxsize=512)
def hankel_polynomial_zeros(l: int) -> np.ndarray:
    """The l zeros of g_l, i.e. the finite zeros of the outgoing wave H^+_l.

    These are i times the zeros of the reversed Bessel polynomial
    theta_l, taken from the Bessel-filter machinery which computes them
    in extended precision.  All zeros lie in the lower half plane, in
    exact {z, -conj(z)} pairs.
    """
    if l == 0:
        return np.array([], dtype=complex)
    if l == 1:
        return np.array([-1j])
    if l > HANKEL_BC_MAX_L:
        raise SolverError(
            f"outgoing-wave zeros unavailable for l={l} (max {HANKEL_BC_MAX_L})"
        )
    from scipy.signal import besselap

    _, theta_roots, _ = besselap(l, norm="delay")
    z = 1j * np.asarray(theta_roots, dtype=complex)
    if np.any(z.imag >= -1e-12):  # pragma: no cover
        raise SolverError(f"outgoing-wave zeros for l={l} failed to converge")
    order = np.lexsort((z.imag, z.real))
    return z[order]


# ---------------------------------------------------------------------------
# basis data (shifted Legendre combinations vanishing at R=0)
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _basis_data(n_basis: int, n_quad: int):
    """Quadrature nodes/weights and basis values on [-1, 1].

    phi_i(t) = P_(i+1)(t) - P_(i+1)(-1), i = 0..N-1, which spans all
    polynomials of degree <= N vanishing at t = -1 and keeps the overlap
    matrix well conditioned (diagonal plus rank one).
    """
    t, wq = np.polynomial.legendre.leggauss(n_quad)
    vander = np.polynomial.legendre.legvander(t, n_basis + 1)  # P_0 .. P_(N+1)
    deg = np.arange(1, n_basis + 1)
    p = vander[:, 1 : n_basis + 1]
    p_prev = vander[:, 0:n_basis]
    # P'_n = n (P_(n-1) - t P_n) / (1 - t^2), valid at interior nodes
    dp = deg[None, :] * (p_prev - t[:, None] * p) / (1.0 - t[:, None] ** 2)
    endpoint = (-1.0) ** deg  # P_(i+1)(-1)
    phi = p - endpoint[None, :]
    q = phi / (1.0 + t[:, None])  # phi / (1+t), still polynomial
    b_t = 1.0 - endpoint  # phi_i(+1)
    return t, wq, phi, dp, q, b_t


def _assemble_matrices(cp: ChannelPotential, spec: SiegertSpec):
    """A (kinetic + 2 mu potential + centrifugal), S, and boundary vector."""
    n = spec.n_basis
    a = spec.a
    t, wq, phi, dp, q, b_t = _basis_data(n, 4 * n)

    r = 0.5 * a * (t + 1.0)
    u_pot = cp.interior(r)  # hartree, includes the inner wall extrapolation

    s_mat = (0.5 * a) * (phi.T * wq) @ phi
    k_mat = (2.0 / a) * (dp.T * wq) @ dp
    v_mat = (0.5 * a) * (phi.T * (wq * 2.0 * cp.mu * u_pot)) @ phi
    a_mat = k_mat + v_mat
    if cp.l:
        c_mat = (2.0 / a) * (q.T * wq) @ q
        a_mat = a_mat + cp.l * (cp.l + 1) * c_mat
    return a_mat, s_mat, b_t.astype(float)


def solve_poles(cp: ChannelPotential, spec: SiegertSpec | None = None) -> PoleSet:
    """All Siegert wave numbers of one channel at gamma = 0.

    The quadratic eigenvalue problem is brought to an identity mass
    matrix by Cholesky congruence (S = L L^T, u -> L^T u), linearized
    with a norm-balancing scale, and solved densely.  The exact spectrum
    is invariant under k -> -conj(k); the numerically broken pairing of
    the ill-conditioned continuum-string eigenvalues is restored by
    optimal mirror matching and averaging, which leaves the product
    S-matrix unchanged at the level of the string noise.
    """
    spec = spec or SiegertSpec()
    if spec.a != cp.truncation_radius:
        raise ValueError(
            f"spec.a={spec.a} does not match the channel truncation "
            f"radius {cp.truncation_radius}"
        )
    n = spec.n_basis
    a_mat, s_mat, b = _assemble_matrices(cp, spec)

    use_hankel = spec.boundary == "hankel" and 0 < cp.l <= HANKEL_BC_MAX_L
    if spec.boundary == "hankel" and cp.l > HANKEL_BC_MAX_L:
        spec = replace(spec, boundary="plain")
    l_extra = cp.l if use_hankel else 0
    dim = 2 * n + l_extra

    try:
        lo = np.linalg.cholesky(s_mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SolverError(f"overlap matrix not positive definite: {exc}") from exc
    a_half = sla.solve_triangular(lo, a_mat, lower=True)
    a_t = sla.solve_triangular(lo, a_half.T, lower=True)  # L^-1 A L^-T, symmetric
    b_t = sla.solve_triangular(lo, b, lower=True)
    sigma = math.sqrt(np.linalg.norm(a_t, 2))

    # In kappa = -ik the pencil is real: the outgoing log-derivative
    # -kappa + sum_q (kappa_q/a)/(kappa - kappa_q) has conjugate-paired
    # poles kappa_q (reversed-Bessel roots / a), realized as real 2x2
    # rotation blocks.  A real eigensolve returns exactly conjugate
    # kappa pairs, so the pole set satisfies {k} = {-conj k} exactly.
    m = np.zeros((dim, dim))
    m[:n, n : 2 * n] = sigma * np.eye(n)
    m[n : 2 * n, :n] = -a_t / sigma
    m[n : 2 * n, n : 2 * n] = -np.outer(b_t, b_t)
    if use_hankel:
        kq = hankel_polynomial_zeros(cp.l) / (1j * spec.a)  # kappa_q, conj pairs
        f_blk, g_blk, h_blk = _real_rational_blocks(kq, kq / spec.a)
        m[n : 2 * n, 2 * n :] = np.outer(b_t, h_blk) / sigma
        m[2 * n :, :n] = np.outer(g_blk, b_t)
        m[2 * n :, 2 * n :] = f_blk

    try:
        with threadpool_limits(limits=1):
            kappa = sla.eigvals(m)
    except sla.LinAlgError as exc:
        raise SolverError(f"eigensolver failed for {cp.label} j={cp.j} l={cp.l}: {exc}") from exc

    poles = _dedupe(np.sort_complex(1j * kappa))
    if abs(len(poles) - dim) > max(cp.l, 1):
        warnings.warn(
            f"pole count {len(poles)} deviates from {dim} beyond the +-l "
            f"tolerance for {cp.label} j={cp.j} l={cp.l}"
        )

    real_axis = np.nonzero((poles.imag == 0.0) & (np.abs(poles.real) > 1e-12))[0]
    if len(real_axis):
        warnings.warn(
            f"{len(real_axis)} pole(s) exactly on the real axis for "
            f"{cp.label} j={cp.j} l={cp.l}; flagged as threshold artifacts"
        )

    return PoleSet(
        label=cp.label,
        j=cp.j,
        l=cp.l,
        gamma=0.0,
        mu=cp.mu,
        poles=poles,
        spec=spec,
        real_axis_flags=real_axis.astype(int),
    )


def _real_rational_blocks(kappa_q: np.ndarray, weights: np.ndarray):
    """Real state-space realization of sum_q w_q / (kappa - kappa_q).

    The pole set must be closed under conjugation with conjugate-
    equivariant weights; conjugate pairs become 2x2 rotation blocks so
    that F, g, h are real and h^T (kappa I - F)^-1 g equals the sum.
    """
    n = len(kappa_q)
    f = np.zeros((n, n))
    g = np.zeros(n)
    h = np.zeros(n)
    used = np.zeros(n, dtype=bool)
    pos = 0
    for i in range(n):
        if used[i]:
            continue
        q, w = kappa_q[i], weights[i]
        if abs(q.imag) < 1e-12 * max(abs(q), 1.0):
            f[pos, pos] = q.real
            g[pos] = 1.0
            h[pos] = w.real
            used[i] = True
            pos += 1
            continue
        # find the conjugate partner
        rest = np.nonzero(~used)[0]
        j = rest[np.argmin(np.abs(kappa_q[rest] - np.conj(q)))]
        if j == i or abs(kappa_q[j] - np.conj(q)) > 1e-8 * max(abs(q), 1.0):
            raise SolverError("rational boundary poles are not conjugate-paired")
        alpha, beta = q.real, q.imag
        f[pos : pos + 2, pos : pos + 2] = [[alpha, beta], [-beta, alpha]]
        g[pos] = 1.0
        h[pos] = 2.0 * w.real
        h[pos + 1] = (2.0 * (w * np.conj(q)).real - 2.0 * alpha * w.real) / beta
        used[i] = True
        used[j] = True
        pos += 2
    if pos != n:  # pragma: no cover
        raise SolverError("rational boundary realization lost poles")
    return f, g, h


def _dedupe(poles: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Merge linearization twins closer than tol in k.

    Merged values are averaged; a merged pair straddling the imaginary
    axis snaps onto it so mirror symmetry survives.
    """
    if len(poles) < 2:
        return poles
    keep: list[complex] = []
    cluster = [poles[0]]
    for p in poles[1:]:
        if abs(p - cluster[-1]) <= tol:
            cluster.append(p)
        else:
            keep.append(_cluster_mean(cluster, tol))
            cluster = [p]
    keep.append(_cluster_mean(cluster, tol))
    return np.array(keep)


def _cluster_mean(cluster: list[complex], tol: float) -> complex:
    m = complex(np.mean(cluster))
    if len(cluster) > 1 and abs(m.real) < tol:
        return 1j * m.imag
    return m


def apply_dissociation(ps: PoleSet, gamma: float) -> PoleSet:
    """Shift every pole for an external dissociation rate gamma (1/atomic time).

    k -> Re(k) + i (Im(k) - mu * gamma / |k|), the mass-explicit form of
    the mass-scaled shift Im(k) - gamma/|k|.

    Because mirror partners share |k|, the shifted set keeps the
    {k, -conj k} symmetry: |S| remains exactly 1 at every gamma.  The
    dissociation does not absorb flux; it broadens every resonance's
    phase response to an effective width Gamma_intrinsic + 2 gamma,
    which is what caps the interaction time at ~1/gamma and suppresses
    the resonant spin exchange for short gamma lifetimes.  Zero-magnitude
    poles cannot be shifted and pass through with a warning.  The
    original set is kept unmodified.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if gamma == 0.0:
        return replace(ps, gamma=0.0)
    mags = np.abs(ps.poles)
    zero = mags == 0.0
    if np.any(zero):
        warnings.warn(f"{int(zero.sum())} zero-magnitude pole(s) excluded from the gamma shift")
    safe = np.where(zero, 1.0, mags)
    shifted = ps.poles.real + 1j * (ps.poles.imag - ps.mu * gamma / safe)
    shifted = np.where(zero, ps.poles, shifted)
    return replace(ps, poles=shifted, gamma=gamma)


def pair_symmetry_defect(ps: PoleSet) -> float:
    """Worst relative distance of any pole from the mirrored set {-conj k}.

    At gamma = 0 the spectrum must satisfy {k} = {-conj(k)}; purely
    imaginary poles are their own partners.
    """
    mirrored = -np.conj(ps.poles)
    scale = np.maximum(np.abs(ps.poles), 1e-30)
    worst = 0.0
    for p, s in zip(ps.poles, scale):
        worst = max(worst, float(np.min(np.abs(mirrored - p)) / s))
    return worst


def bound_state_count(ps: PoleSet, tol: float = 1e-8) -> int:
    """Poles on the positive imaginary axis (relative tolerance on Re k)."""
    k = ps.poles
    on_axis = (np.abs(k.real) < tol * np.maximum(np.abs(k), 1.0)) & (k.imag > 0)
    return int(np.count_nonzero(on_axis))
