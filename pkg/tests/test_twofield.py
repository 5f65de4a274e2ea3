"""Two-particle molecule evolution and ket-erasure maps."""

import math

import numpy as np
import pytest

from formalchain.errors import StructureError, ZeroStateError
from formalchain.twofield import (
    NestedVector,
    TwoFieldParams,
    alpha_erase,
    com_density,
    erase_twice,
    eval_embed,
    evolve,
    fidelity,
    gaussian_packet,
    grid_dx,
    grid_points,
    ket_erase,
    product_state,
    random_unitary,
)

TWO_PI = 2 * math.pi


def small_params(**kw):
    base = dict(grid_n=64, dt=2e-3, steps=500, sample_stride=100)
    base.update(kw)
    return TwoFieldParams(**base)


def test_zero_steps_identity():
    p = small_params(steps=0)
    psi = gaussian_packet(p, 0.5)
    st = product_state(p, psi, psi)
    traj = evolve(st, p)
    assert np.allclose(traj.final.psi, st.psi)


def test_joint_norm_conserved():
    p = small_params(lam=0.7, v_depth=0.3)
    st = product_state(p, gaussian_packet(p, 1.0), gaussian_packet(p, -0.5))
    traj = evolve(st, p)
    assert traj.max_joint_drift() < 1e-10 * (p.steps * p.dt + 1)


def test_sho_coherent_state_returns():
    p = TwoFieldParams(grid_n=128, dt=1e-3, steps=int(round(TWO_PI / 1e-3)),
                       sample_stride=500)
    psi = gaussian_packet(p, center=1.0)
    st = product_state(p, psi, psi)
    traj = evolve(st, p)
    assert fidelity(st, traj.final) > 1 - 1e-6


def test_com_oscillates_with_period_two_pi():
    p = TwoFieldParams(grid_n=128, dt=2e-3, steps=int(round(math.pi / 2e-3)),
                       sample_stride=100)
    psi = gaussian_packet(p, center=1.0)
    traj = evolve(product_state(p, psi, psi), p)
    assert traj.com_means[0] == pytest.approx(1.0, abs=1e-6)
    # after half a period the center sits at -1
    assert traj.com_means[-1] == pytest.approx(-1.0, abs=1e-3)


def test_erased_wavefunction_is_midpoint_gaussian():
    # identical Gaussians at a and b: the convolution is a Gaussian at a+b,
    # i.e. the center-of-mass wavefunction peaks at the midpoint; the erased
    # function repeats with period L on the torus, so compare on the central
    # half-window where the physical copy lives
    p = small_params()
    a, b = -0.8, 1.4
    st = product_state(p, gaussian_packet(p, a), gaussian_packet(p, b))
    phi = ket_erase(st)
    x = grid_points(p)
    window = np.abs(x) < p.grid_l / 2
    phi_w = phi[window]
    phi_w = phi_w / math.sqrt(float(np.sum(np.abs(phi_w) ** 2) * grid_dx(p)))
    xw = x[window]
    peak = xw[int(np.argmax(np.abs(phi_w)))]
    assert peak == pytest.approx((a + b) / 2, abs=2 * grid_dx(p))
    # oracle: convolving two unit-width Gaussians in x1, sampled at 2c, gives
    # a Gaussian of width sqrt(1/2) in c at the midpoint
    width2 = 0.5
    oracle = np.exp(-((xw - (a + b) / 2) ** 2) / (2 * width2)).astype(complex)
    oracle /= math.sqrt(float(np.sum(np.abs(oracle) ** 2) * grid_dx(p)))
    overlap = abs(complex(np.vdot(oracle, phi_w)) * grid_dx(p))
    assert overlap > 1 - 1e-6


def test_lambda_zero_erased_norm_constant():
    p = small_params(lam=0.0, steps=1500)
    psi = gaussian_packet(p, 1.0)
    traj = evolve(product_state(p, psi, psi), p)
    assert traj.max_erased_drift() < 1e-6


def test_lambda_couples_levels():
    p0 = small_params(lam=0.0, steps=1000)
    p5 = small_params(lam=0.5, steps=1000)
    psi0 = gaussian_packet(p0, 1.0)
    psi5 = gaussian_packet(p5, 1.0)
    d0 = evolve(product_state(p0, psi0, psi0), p0).max_erased_drift()
    d5 = evolve(product_state(p5, psi5, psi5), p5).max_erased_drift()
    assert d5 > 10 * d0


def test_com_reduced_density_independent_of_v():
    # lambda = 0: the center-of-mass density must not feel V(x1 - x2)
    outs = []
    for depth in (0.0, 0.8):
        p = small_params(lam=0.0, v_depth=depth, steps=800)
        psi = gaussian_packet(p, 1.0)
        traj = evolve(product_state(p, psi, psi), p)
        outs.append(com_density(traj.final))
    dx = 2 * 8.0 / 64
    trace_distance = 0.5 * float(np.sum(np.abs(outs[0] - outs[1]))) * dx
    assert trace_distance < 1e-6


def test_grid_refinement_consistency():
    drifts = []
    for n, dt in ((64, 2e-3), (128, 1e-3)):
        steps = int(round(2.0 / dt))
        p = TwoFieldParams(lam=0.5, grid_n=n, dt=dt, steps=steps, sample_stride=50)
        psi = gaussian_packet(p, 1.0)
        drifts.append(evolve(product_state(p, psi, psi), p).max_erased_drift())
    assert abs(drifts[1] - drifts[0]) / drifts[1] < 0.10


def test_params_validation():
    with pytest.raises(StructureError):
        TwoFieldParams(grid_n=100)
    with pytest.raises(StructureError):
        TwoFieldParams(grid_n=8)
    with pytest.raises(StructureError):
        TwoFieldParams(dt=-1.0)


def test_erase_zero_state_raises():
    p = small_params()
    st = product_state(p, np.zeros(p.grid_n, complex), np.zeros(p.grid_n, complex))
    with pytest.raises(ZeroStateError):
        ket_erase(st)


# -- nested erasure ------------------------------------------------------------------


def test_alpha_even_level_passes_amplitude():
    vec = np.array([1.0, 0.0], complex)
    v = NestedVector(2, ((0.5 + 0.5j, vec),))
    out = alpha_erase(v, n=2)
    assert np.allclose(out, (0.5 + 0.5j) * vec)


def test_alpha_odd_level_conjugates():
    vec = np.array([0.0, 1.0], complex)
    v = NestedVector(2, ((1j, vec),))
    out = alpha_erase(v, n=1)
    assert np.allclose(out, -1j * vec)


def test_alpha_level3_with_odd_index_conjugates():
    vec = np.array([1.0, 0.0], complex)
    lvl2 = NestedVector(2, ((1.0 + 0j, vec),))
    v3 = NestedVector(3, ((1j, lvl2),))
    # the erasure map indexed by an odd n conjugates the outer amplitudes
    out = alpha_erase(v3, n=3)
    assert isinstance(out, NestedVector) and out.level == 2
    assert out.terms[0][0] == -1j
    # the paper-proof composite uses the even map at this level: no conjugation
    out_even = alpha_erase(v3, n=2)
    assert out_even.terms[0][0] == 1j


def test_alpha_is_linear():
    rng = np.random.default_rng(2)
    vecs = [rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(2)]
    a, b = 0.3 - 0.7j, -1.1 + 0.2j
    v = NestedVector(2, ((a, vecs[0]),))
    w = NestedVector(2, ((b, vecs[1]),))
    combined = NestedVector(2, ((a, vecs[0]), (b, vecs[1])))
    for n in (1, 2):
        tilde = np.conj if n % 2 else (lambda z: z)
        lhs = alpha_erase(combined, n=n)
        rhs = alpha_erase(v, n=n) + alpha_erase(w, n=n)
        assert np.allclose(lhs, rhs)


def test_erase_twice_identity_on_unitary_frames():
    for m in (2, 4, 8):
        frame = random_unitary(m, seed=100 + m)
        out = erase_twice(frame, component=0)
        c = float(np.sum(np.abs(frame[:, 0]) ** 2))
        basis = np.zeros(m, complex)
        basis[0] = 1.0
        off = np.linalg.norm(out - out[0] * basis)
        assert off < 1e-10
        assert abs(out[0] - c) < 1e-10


def test_erase_twice_other_components():
    frame = random_unitary(5, seed=9)
    for j in range(5):
        out = erase_twice(frame, component=j)
        c = float(np.sum(np.abs(frame[:, j]) ** 2))
        assert abs(out[j] - c) < 1e-10
        out[j] = 0.0
        assert np.linalg.norm(out) < 1e-10


def test_nested_structure_validation():
    with pytest.raises(StructureError):
        NestedVector(1, ())
    with pytest.raises(StructureError):
        NestedVector(2, ((1.0, "not a vector"),))
    vec = np.zeros(2, complex)
    lvl2 = NestedVector(2, ((1.0, vec),))
    with pytest.raises(StructureError):
        NestedVector(4, ((1.0, lvl2),))
