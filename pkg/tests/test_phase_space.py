import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridqc.phase_space import (
    QuadraticObservable,
    QuantumPhasePoint,
    check_normalized,
    coords_to_state,
    eval_observable,
    expectation_sigma,
    gradient,
    quantum_norm,
    random_normalized_state,
    state_to_coords,
)

SQRT2 = math.sqrt(2.0)
H_SYM = QuadraticObservable(np.diag([7.0, -5.0, -5.0, 3.0]).astype(complex))

UNIFORM = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)


def random_hermitian(rng):
    r = rng.standard_normal((4, 4))
    s = rng.standard_normal((4, 4))
    return (r + r.T) / 2 + 1j * (s - s.T) / 2


def fd_gradient(obs, point, hbar, h=1e-5):
    """Central finite differences of eval_observable, the gradient oracle."""
    gx = np.empty(4)
    gy = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        gx[i] = (
            eval_observable(obs, QuantumPhasePoint(point.x + e, point.y), hbar)
            - eval_observable(obs, QuantumPhasePoint(point.x - e, point.y), hbar)
        ) / (2 * h)
        gy[i] = (
            eval_observable(obs, QuantumPhasePoint(point.x, point.y + e), hbar)
            - eval_observable(obs, QuantumPhasePoint(point.x, point.y - e), hbar)
        ) / (2 * h)
    return gx, gy


def test_real_amplitude_maps_to_x():
    p = state_to_coords(np.array([1, 0, 0, 0], dtype=complex))
    np.testing.assert_allclose(p.x, [SQRT2, 0, 0, 0], atol=0)
    np.testing.assert_array_equal(p.y, np.zeros(4))


def test_imaginary_amplitude_maps_to_y():
    p = state_to_coords(np.array([1j, 0, 0, 0]))
    np.testing.assert_array_equal(p.x, np.zeros(4))
    np.testing.assert_allclose(p.y, [SQRT2, 0, 0, 0], atol=0)


def test_uniform_superposition_coords():
    p = state_to_coords(UNIFORM)
    np.testing.assert_allclose(p.x, np.full(4, 1 / SQRT2), atol=1e-16)
    np.testing.assert_array_equal(p.y, np.zeros(4))


def test_coords_to_state_inverts_the_example():
    p = QuantumPhasePoint(np.array([SQRT2, 0, 0, 0]), np.zeros(4))
    np.testing.assert_allclose(
        coords_to_state(p), [1, 0, 0, 0], atol=1e-16
    )


def test_zero_point_maps_to_zero_vector():
    p = QuantumPhasePoint(np.zeros(4), np.zeros(4))
    np.testing.assert_array_equal(coords_to_state(p), np.zeros(4, dtype=complex))


def test_round_trip_random_states():
    rng = np.random.default_rng(3)
    for _ in range(100):
        psi = random_normalized_state(rng)
        back = coords_to_state(state_to_coords(psi))
        np.testing.assert_allclose(back, psi, atol=1e-14)


@given(hbar=st.floats(0.1, 10))
def test_normalized_state_has_norm_two_hbar(hbar):
    p = state_to_coords(UNIFORM, hbar)
    assert abs(quantum_norm(p) - 2 * hbar) < 1e-10
    check_normalized(p, hbar)  # must not raise


def test_check_normalized_rejects_bad_norm():
    p = QuantumPhasePoint(np.array([1.0, 0, 0, 0]), np.zeros(4))
    with pytest.raises(ValueError, match="not normalized"):
        check_normalized(p)


def test_state_to_coords_rejects_bad_shape_and_hbar():
    with pytest.raises(ValueError):
        state_to_coords(np.ones(3, dtype=complex))
    with pytest.raises(ValueError):
        state_to_coords(UNIFORM, hbar=0.0)


def test_eval_symmetric_hamiltonian_on_basis_state():
    p = state_to_coords(np.array([1, 0, 0, 0], dtype=complex))
    assert eval_observable(H_SYM, p) == pytest.approx(7.0, abs=1e-13)


def test_eval_sigma_z1_balanced_superposition():
    from hybridqc.phase_space import sigma_observable

    p = state_to_coords(UNIFORM)
    assert eval_observable(sigma_observable("z", 1), p) == pytest.approx(0.0, abs=1e-14)


def test_eval_identity_is_one_for_normalized_points():
    rng = np.random.default_rng(5)
    ident = QuadraticObservable(np.eye(4, dtype=complex))
    for _ in range(10):
        p = state_to_coords(random_normalized_state(rng))
        assert eval_observable(ident, p) == pytest.approx(1.0, abs=1e-12)


def test_eval_matches_bra_ket_expectation():
    rng = np.random.default_rng(11)
    for _ in range(25):
        a = random_hermitian(rng)
        psi = random_normalized_state(rng)
        want = (psi.conj() @ a @ psi).real
        got = eval_observable(QuadraticObservable(a), state_to_coords(psi))
        assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=60)
@given(theta=st.floats(-math.pi, math.pi))
def test_eval_invariant_under_global_phase(theta):
    psi = np.array([0.5, 0.5j, -0.5, 0.5], dtype=complex)
    base = eval_observable(H_SYM, state_to_coords(psi))
    rotated = eval_observable(H_SYM, state_to_coords(np.exp(1j * theta) * psi))
    assert abs(rotated - base) < 1e-12


def test_gradient_of_diagonal_form_on_axis_state():
    p = QuantumPhasePoint(np.array([SQRT2, 0, 0, 0]), np.zeros(4))
    gx, gy = gradient(H_SYM, p)
    np.testing.assert_allclose(gx, [7.0 * SQRT2, 0, 0, 0], atol=1e-14)
    np.testing.assert_array_equal(gy, np.zeros(4))


def test_gradient_vanishes_at_zero_point():
    p = QuantumPhasePoint(np.zeros(4), np.zeros(4))
    gx, gy = gradient(H_SYM, p)
    np.testing.assert_array_equal(gx, np.zeros(4))
    np.testing.assert_array_equal(gy, np.zeros(4))


def test_gradient_matches_finite_differences():
    # 100 random (observable, point) pairs, central differences at step 1e-5
    rng = np.random.default_rng(17)
    for _ in range(100):
        obs = QuadraticObservable(random_hermitian(rng))
        point = state_to_coords(random_normalized_state(rng))
        gx, gy = gradient(obs, point)
        fx, fy = fd_gradient(obs, point, 1.0)
        scale = max(np.abs(gx).max(), np.abs(gy).max(), 1.0)
        assert np.abs(gx - fx).max() / scale < 1e-8
        assert np.abs(gy - fy).max() / scale < 1e-8


def test_gradient_scales_inversely_with_hbar():
    p = state_to_coords(UNIFORM, hbar=2.0)
    gx1, gy1 = gradient(H_SYM, p, hbar=1.0)
    gx2, gy2 = gradient(H_SYM, p, hbar=2.0)
    np.testing.assert_allclose(gx2, gx1 / 2.0, atol=1e-15)
    np.testing.assert_allclose(gy2, gy1 / 2.0, atol=1e-15)


def test_observable_rejects_non_hermitian_matrix():
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0
    with pytest.raises(ValueError, match="Hermitian"):
        QuadraticObservable(bad)


def test_observable_rejects_non_square_matrix():
    with pytest.raises(ValueError):
        QuadraticObservable(np.zeros((4, 3), dtype=complex))


def test_sigma_z_expectations_on_basis_states():
    top = state_to_coords(np.array([1, 0, 0, 0], dtype=complex))
    bottom = state_to_coords(np.array([0, 0, 0, 1], dtype=complex))
    assert expectation_sigma("z", 1, top) == pytest.approx(1.0, abs=1e-14)
    assert expectation_sigma("z", 2, top) == pytest.approx(1.0, abs=1e-14)
    assert expectation_sigma("z", 1, bottom) == pytest.approx(-1.0, abs=1e-14)
    assert expectation_sigma("z", 2, bottom) == pytest.approx(-1.0, abs=1e-14)


def test_sigma_x_expectation_on_uniform_superposition():
    p = state_to_coords(UNIFORM)
    assert expectation_sigma("x", 1, p) == pytest.approx(1.0, abs=1e-14)


def test_sigma_expectations_stay_in_unit_interval():
    rng = np.random.default_rng(23)
    for _ in range(50):
        p = state_to_coords(random_normalized_state(rng))
        for axis in "xyz":
            for qubit in (1, 2):
                v = expectation_sigma(axis, qubit, p)
                assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12


def test_random_state_is_seeded_and_normalized():
    a = random_normalized_state(np.random.default_rng(99))
    b = random_normalized_state(np.random.default_rng(99))
    np.testing.assert_array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-14


def test_phase_point_rejects_wrong_shapes():
    with pytest.raises(ValueError):
        QuantumPhasePoint(np.zeros(3), np.zeros(4))
