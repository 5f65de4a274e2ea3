"""Second-level quantum mechanics at desk scale: the two-particle molecule.

The joint wavefunction Psi(x1, x2) evolves under

    H = p1^2/2 + p2^2/2 + x1^2/2 + x2^2/2 + (lam/4!)(x1^4 + x2^4) + V(x1 - x2)

with a Strang split-step spectral integrator on a periodic grid, which is
norm-preserving up to roundoff.  The induced one-level (center-of-mass)
wavefunction comes from ket erasure,

    phi(c) = integral dx1 Psi(x1, 2c - x1),

normalized once at t = 0 and never again, so any drift of its norm is the
observable non-unitarity of the dragged-along one-level evolution.  For
lam = 0 the Hamiltonian separates in center-of-mass and relative coordinates
and the one-level evolution stays unitary; the quartic couples them.

The ket-erasure maps of the finite nested model live here too: erasing kets
of a formal combination one level down, conjugating amplitudes at odd levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import IntegratorError, StructureError, ZeroStateError


@dataclass(frozen=True)
class TwoFieldParams:
    lam: float = 0.0
    v_depth: float = 0.0  # Gaussian well V(r) = -depth * exp(-(r/width)^2)
    v_width: float = 1.0
    dt: float = 1e-3
    steps: int = 1000
    grid_n: int = 256
    grid_l: float = 8.0
    sample_stride: int = 50
    max_norm_drift: float = 1e-6

    def __post_init__(self):
        if self.grid_n < 16 or self.grid_n & (self.grid_n - 1):
            raise StructureError("grid size must be a power of two, at least 16")
        if self.dt <= 0 or self.steps < 0:
            raise StructureError("need positive dt and nonnegative steps")
        if self.v_width <= 0:
            raise StructureError("potential width must be positive")


def grid_points(p: TwoFieldParams) -> np.ndarray:
    return -p.grid_l + (2.0 * p.grid_l / p.grid_n) * np.arange(p.grid_n)


def grid_dx(p: TwoFieldParams) -> float:
    return 2.0 * p.grid_l / p.grid_n


def gaussian_packet(p: TwoFieldParams, center: float = 0.0, width: float = 1.0) -> np.ndarray:
    """Unit-normalized Gaussian on the grid."""
    x = grid_points(p)
    psi = np.exp(-((x - center) ** 2) / (2.0 * width * width)).astype(complex)
    return psi / math.sqrt(float(np.sum(np.abs(psi) ** 2) * grid_dx(p)))


@dataclass
class TwoFieldState:
    """Joint two-coordinate wavefunction on the periodic grid."""

    psi: np.ndarray  # (n, n), axis 0 = x1, axis 1 = x2
    params: TwoFieldParams
    t: float = 0.0

    def norm(self) -> float:
        dx = grid_dx(self.params)
        return math.sqrt(float(np.sum(np.abs(self.psi) ** 2)) * dx * dx)


def product_state(p: TwoFieldParams, psi1: np.ndarray, psi2: np.ndarray) -> TwoFieldState:
    return TwoFieldState(np.outer(psi1, psi2), p)


def _phases(p: TwoFieldParams):
    x = grid_points(p)
    x1 = x[:, None]
    x2 = x[None, :]
    v = 0.5 * x1 * x1 + 0.5 * x2 * x2
    if p.lam != 0.0:
        v = v + (p.lam / 24.0) * (x1 ** 4 + x2 ** 4)
    if p.v_depth != 0.0:
        r = x1 - x2
        v = v - p.v_depth * np.exp(-((r / p.v_width) ** 2))
    k = 2.0 * math.pi * np.fft.fftfreq(p.grid_n, d=grid_dx(p))
    k2 = 0.5 * (k[:, None] ** 2 + k[None, :] ** 2)
    half_v = np.exp(-0.5j * p.dt * v)
    kin = np.exp(-1j * p.dt * k2)
    return half_v, kin


@dataclass
class Trajectory:
    """Sampled time series of the evolution."""

    times: List[float] = field(default_factory=list)
    joint_norms: List[float] = field(default_factory=list)
    erased_norms: List[float] = field(default_factory=list)
    com_means: List[float] = field(default_factory=list)
    final: Optional[TwoFieldState] = None

    def max_joint_drift(self) -> float:
        return max(abs(n - self.joint_norms[0]) for n in self.joint_norms)

    def max_erased_drift(self) -> float:
        return max(abs(n - self.erased_norms[0]) for n in self.erased_norms)


def evolve(state: TwoFieldState, p: TwoFieldParams) -> Trajectory:
    """Strang split-step evolution with per-sample norm monitoring.

    Raises :class:`IntegratorError` when the joint norm drifts by more than
    the configured bound (the joint evolution is exactly unitary; drift beyond
    roundoff signals a broken configuration).
    """
    half_v, kin = _phases(p)
    psi = state.psi.copy()
    dx = grid_dx(p)
    norm0 = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx * dx)
    erase_scale = None
    traj = Trajectory()

    def record(step_idx: int, psi_now: np.ndarray):
        nonlocal erase_scale
        t = state.t + step_idx * p.dt
        n = math.sqrt(float(np.sum(np.abs(psi_now) ** 2)) * dx * dx)
        raw = _erase_raw(psi_now, dx)
        raw_norm = math.sqrt(float(np.sum(np.abs(raw) ** 2)) * dx)
        if erase_scale is None:
            if raw_norm == 0.0:
                raise ZeroStateError("erased wavefunction vanishes at t = 0")
            erase_scale = 1.0 / raw_norm
        # mean of (x1 + x2)/2 from the coordinate marginals; the anti-diagonal
        # density is L-periodic on the torus and would fold the mean
        x = grid_points(p)
        prob = np.abs(psi_now) ** 2 * dx * dx
        total = float(prob.sum())
        mean = float((x @ prob.sum(axis=1) + x @ prob.sum(axis=0)) / (2.0 * total))
        traj.times.append(t)
        traj.joint_norms.append(n)
        traj.erased_norms.append(raw_norm * erase_scale)
        traj.com_means.append(mean)
        if abs(n - norm0) > p.max_norm_drift:
            raise IntegratorError(
                f"joint norm drifted by {abs(n - norm0):.3e} at t = {t:.4f}"
            )

    record(0, psi)
    for s in range(1, p.steps + 1):
        psi *= half_v
        psi = np.fft.ifft2(np.fft.fft2(psi) * kin)
        psi *= half_v
        if s % p.sample_stride == 0 or s == p.steps:
            record(s, psi)
    traj.final = TwoFieldState(psi, p, state.t + p.steps * p.dt)
    return traj


def _erase_raw(psi: np.ndarray, dx: float) -> np.ndarray:
    """phi(c_m) = sum_j Psi[j, (2m - j) mod n] dx (anti-diagonal transform)."""
    n = psi.shape[0]
    j = np.arange(n)
    out = np.empty(n, dtype=complex)
    for m in range(n):
        out[m] = psi[j, (2 * m - j) % n].sum() * dx
    return out


def ket_erase(state: TwoFieldState, normalize_scale: Optional[float] = None) -> np.ndarray:
    """Induced center-of-mass wavefunction of the state.

    With ``normalize_scale`` None the raw integral is scaled to unit norm (the
    t = 0 convention); to observe drift pass the scale captured at t = 0.
    """
    dx = grid_dx(state.params)
    raw = _erase_raw(state.psi, dx)
    nrm = math.sqrt(float(np.sum(np.abs(raw) ** 2)) * dx)
    if normalize_scale is not None:
        return raw * normalize_scale
    if nrm == 0.0:
        raise ZeroStateError("erased wavefunction has zero norm")
    return raw / nrm


def erase_scale_at(state: TwoFieldState) -> float:
    dx = grid_dx(state.params)
    raw = _erase_raw(state.psi, dx)
    nrm = math.sqrt(float(np.sum(np.abs(raw) ** 2)) * dx)
    if nrm == 0.0:
        raise ZeroStateError("erased wavefunction has zero norm")
    return 1.0 / nrm


def _com_density(psi: np.ndarray, dx: float) -> np.ndarray:
    n = psi.shape[0]
    j = np.arange(n)
    dens = np.empty(n)
    for m in range(n):
        dens[m] = float(np.sum(np.abs(psi[j, (2 * m - j) % n]) ** 2)) * dx
    total = dens.sum() * dx
    return dens / total if total > 0 else dens


def com_density(state: TwoFieldState) -> np.ndarray:
    """Probability density of the center-of-mass coordinate on the grid.

    Sampled along anti-diagonals of the periodic grid, so it repeats with
    period L in the coordinate; for states localized within |c| < L/2 the
    physical window is the central half of the grid.
    """
    return _com_density(state.psi, grid_dx(state.params))


def fidelity(a: TwoFieldState, b: TwoFieldState) -> float:
    """|<a|b>|^2 with the grid measure."""
    dx = grid_dx(a.params)
    ov = complex(np.sum(np.conj(a.psi) * b.psi)) * dx * dx
    return abs(ov) ** 2


# -- ket erasure on the finite nested model ----------------------------------------


@dataclass(frozen=True)
class NestedVector:
    """Formal combination at level >= 2 over lower-level payloads.

    Level-2 terms hold plain vectors; level-(k+1) terms hold level-k
    combinations.  This is the smallest structure on which erasing kets and
    extending linearly is faithful.
    """

    level: int
    terms: Tuple[Tuple[complex, object], ...]

    def __post_init__(self):
        if self.level < 2:
            raise StructureError("nested vectors start at level 2")
        for _, payload in self.terms:
            if self.level == 2:
                if not isinstance(payload, np.ndarray):
                    raise StructureError("level-2 kets must hold vectors")
            else:
                if not isinstance(payload, NestedVector) or payload.level != self.level - 1:
                    raise StructureError("nested levels must decrease by one")


def alpha_erase(v: NestedVector, n: Optional[int] = None) -> Union[np.ndarray, NestedVector]:
    """Erase kets and extend linearly, conjugating amplitudes when n is odd.

    ``n`` names the erasure map (defaults to v.level - 1, the map that lands
    on the level below).  The result is a plain vector from level 2 or the
    merged combination one level down otherwise.
    """
    if n is None:
        n = v.level - 1
    def tilde(a: complex) -> complex:
        return np.conj(a) if n % 2 == 1 else a

    if v.level == 2:
        out = None
        for a, vec in v.terms:
            contrib = tilde(a) * vec
            out = contrib if out is None else out + contrib
        if out is None:
            raise ZeroStateError("erasing an empty combination")
        return out
    merged: List[Tuple[complex, object]] = []
    for a, sub in v.terms:
        for b, payload in sub.terms:
            merged.append((tilde(a) * b, payload))
    return NestedVector(v.level - 1, tuple(merged))


def frame_vectors(frame: np.ndarray) -> List[NestedVector]:
    """Level-2 vectors 2psi_i = sum_j frame[i, j] |e_j>."""
    r, m = frame.shape
    basis = [np.eye(m, dtype=complex)[j] for j in range(m)]
    return [
        NestedVector(2, tuple((complex(frame[i, j]), basis[j]) for j in range(m)))
        for i in range(r)
    ]


def eval_embed(frame: np.ndarray, component: int = 0) -> NestedVector:
    """The evaluation embedding of basis vector e_component at level 3.

    The level-3 combination weights each frame vector by the conjugated
    coefficient it assigns to the component, so that erasing twice returns
    sum_i b_i0 conj(b_ij) e_j.
    """
    vecs = frame_vectors(frame)
    terms = tuple(
        (complex(np.conj(frame[i, component])), vecs[i]) for i in range(frame.shape[0])
    )
    return NestedVector(3, terms)


def erase_twice(frame: np.ndarray, component: int = 0) -> np.ndarray:
    """alpha_1 after alpha_2 after the evaluation embedding of e_component.

    For an orthonormal frame the result is c * e_component with
    c = sum_i |b_{i, component}|^2 and vanishing cross terms.
    """
    v3 = eval_embed(frame, component)
    v2 = alpha_erase(v3, n=2)
    return alpha_erase(v2, n=1)


def random_unitary(m: int, seed: int) -> np.ndarray:
    """Haar-ish unitary via QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
