import numpy as np
import pytest

from hybridqc.hybrid import (
    HybridModel,
    HybridState,
    ObservableFunction,
    conserved_set,
    diagnostic_observables,
    energy_gradient,
    poisson_bracket,
    total_energy,
    vector_field,
)
from hybridqc.operators import ModelKind
from hybridqc.phase_space import random_normalized_state, state_to_coords

SYMMETRIC = HybridModel(kind=ModelKind.SYMMETRIC)
NS1 = HybridModel(kind=ModelKind.NONSYMMETRIC_1)
NS2 = HybridModel(kind=ModelKind.NONSYMMETRIC_2)

TOP = np.array([1, 0, 0, 0], dtype=complex)


def make_state(psi, q=0.0, p=0.0, hbar=1.0):
    return HybridState(point=state_to_coords(psi, hbar), q=q, p=p)


def random_state(rng, q_scale=2.0, p_scale=2.0):
    psi = random_normalized_state(rng)
    return make_state(
        psi, q=q_scale * rng.uniform(-1, 1), p=p_scale * rng.uniform(-1, 1)
    )


def test_energy_of_top_state_at_origin():
    # quantum part only: <1,1| H |1,1> with the canonical couplings
    s = make_state(TOP, q=0.0, p=0.0)
    assert total_energy(SYMMETRIC, s) == pytest.approx(7.0, abs=1e-12)


def test_energy_of_top_state_displaced_oscillator():
    # 7 (quantum) + 1 (k*q^2) + 16 (q * (c1 + c2) with both <sz> = 1)
    s = make_state(TOP, q=1.0, p=0.0)
    assert total_energy(SYMMETRIC, s) == pytest.approx(24.0, abs=1e-12)


def test_energy_of_empty_quantum_sector_is_kinetic():
    zero_point = state_to_coords(np.zeros(4, dtype=complex))
    for p0 in (0.5, -3.0):
        s = HybridState(point=zero_point, q=0.0, p=p0)
        assert total_energy(SYMMETRIC, s) == pytest.approx(
            p0**2 / (2.0 * SYMMETRIC.m), abs=1e-15
        )


def test_oscillator_term_is_k_q_squared():
    # the potential carries no 1/2: moving q by 1 with everything else off
    # must add exactly k
    model = HybridModel(kind=ModelKind.SYMMETRIC, c1=0.0, c2=0.0, k=3.0)
    zero_point = state_to_coords(np.zeros(4, dtype=complex))
    at_origin = HybridState(point=zero_point, q=0.0, p=0.0)
    displaced = HybridState(point=zero_point, q=1.0, p=0.0)
    assert total_energy(model, displaced) - total_energy(model, at_origin) == 3.0


def test_force_on_top_state_at_origin():
    s = make_state(TOP, q=0.0, p=0.0)
    d = vector_field(SYMMETRIC, s)
    assert d.dq == 0.0
    assert d.dp == pytest.approx(-16.0, abs=1e-13)


def test_decoupled_model_runs_an_isolated_oscillator():
    model = HybridModel(kind=ModelKind.SYMMETRIC, c1=0.0, c2=0.0)
    s = make_state(TOP, q=0.7, p=-1.3)
    d = vector_field(model, s)
    assert d.dq == pytest.approx(s.p / model.m, abs=1e-15)
    assert d.dp == pytest.approx(-2.0 * model.k * s.q, abs=1e-15)
    # and the quantum flow no longer sees q
    d0 = vector_field(model, make_state(TOP, q=0.0, p=0.0))
    np.testing.assert_array_equal(d.dx, d0.dx)
    np.testing.assert_array_equal(d.dy, d0.dy)


def test_flow_is_tangent_to_energy_level_sets():
    # grad(H) . F = 0 pointwise, the Hamiltonian structure in one line
    rng = np.random.default_rng(29)
    for model in (SYMMETRIC, NS1, NS2):
        for _ in range(100):
            s = random_state(rng)
            g = energy_gradient(model, s)
            f = vector_field(model, s).as_vector()
            scale = max(np.abs(g).max() * np.abs(f).max(), 1.0)
            assert abs(g @ f) / scale < 1e-10


def test_vector_field_is_symplectic_rotation_of_gradient():
    rng = np.random.default_rng(31)
    for model in (SYMMETRIC, NS1, NS2):
        s = random_state(rng)
        g = energy_gradient(model, s)
        d = vector_field(model, s)
        np.testing.assert_allclose(d.dx, g[4:8], atol=1e-13)
        np.testing.assert_allclose(d.dy, -g[0:4], atol=1e-13)
        assert d.dq == pytest.approx(g[9], abs=1e-15)
        assert d.dp == pytest.approx(-g[8], abs=1e-13)


def test_bracket_of_energy_with_conserved_sigma_z():
    rng = np.random.default_rng(37)
    energy = ObservableFunction("h", lambda s: total_energy(SYMMETRIC, s))
    sz1 = conserved_set(SYMMETRIC)[1]
    assert sz1.label == "sigma_z1"
    for _ in range(5):
        s = random_state(rng)
        assert abs(poisson_bracket(energy, sz1, s)) < 1e-6


def test_bracket_of_the_two_sigma_z_expectations():
    rng = np.random.default_rng(41)
    _, sz1, sz2, _ = conserved_set(SYMMETRIC)
    for _ in range(5):
        s = random_state(rng)
        assert abs(poisson_bracket(sz1, sz2, s)) < 1e-6


def test_bracket_of_classical_coordinates_is_canonical():
    rng = np.random.default_rng(43)
    coord_q = ObservableFunction("q", lambda s: s.q)
    coord_p = ObservableFunction("p", lambda s: s.p)
    for _ in range(5):
        s = random_state(rng)
        assert poisson_bracket(coord_q, coord_p, s) == pytest.approx(1.0, abs=1e-6)


def test_bracket_accepts_plain_callables():
    s = make_state(TOP, q=0.3, p=0.9)
    assert poisson_bracket(lambda t: t.q, lambda t: t.p, s) == pytest.approx(
        1.0, abs=1e-6
    )


def test_bracket_antisymmetry():
    rng = np.random.default_rng(47)
    energy = ObservableFunction("h", lambda s: total_energy(NS2, s))
    coord_q = ObservableFunction("q", lambda s: s.q)
    s = random_state(rng)
    forward = poisson_bracket(energy, coord_q, s)
    backward = poisson_bracket(coord_q, energy, s)
    assert forward == pytest.approx(-backward, abs=1e-8)


def test_conserved_set_sizes_follow_the_symmetry_ladder():
    assert [o.label for o in conserved_set(SYMMETRIC)] == [
        "total_energy",
        "sigma_z1",
        "sigma_z2",
        "quantum_norm",
    ]
    assert [o.label for o in conserved_set(NS1)] == [
        "total_energy",
        "sigma_z2",
        "quantum_norm",
    ]
    assert [o.label for o in conserved_set(NS2)] == ["total_energy", "quantum_norm"]


def test_conserved_set_commutes_with_the_flow():
    # every registered invariant must bracket to zero with the energy
    rng = np.random.default_rng(53)
    for model in (SYMMETRIC, NS1, NS2):
        energy = ObservableFunction("h", lambda s, m=model: total_energy(m, s))
        s = random_state(rng)
        for obs in conserved_set(model):
            assert abs(poisson_bracket(energy, obs, s)) < 1e-6


def test_diagnostic_observables_record_broken_symmetries():
    assert [o.label for o in diagnostic_observables(SYMMETRIC)] == ["quantum_energy"]
    assert [o.label for o in diagnostic_observables(NS1)] == [
        "quantum_energy",
        "sigma_z1",
    ]
    assert [o.label for o in diagnostic_observables(NS2)] == [
        "quantum_energy",
        "sigma_z1",
        "sigma_z2",
    ]


def test_observable_batch_matches_scalar_path():
    rng = np.random.default_rng(59)
    states = [random_state(rng) for _ in range(8)]
    rows = np.stack([s.as_vector() for s in states])
    for model in (SYMMETRIC, NS1, NS2):
        for obs in conserved_set(model) + diagnostic_observables(model):
            assert obs.batch is not None
            batched = obs.batch(rows)
            scalar = np.array([obs(s) for s in states])
            np.testing.assert_allclose(batched, scalar, atol=1e-12)


def test_state_vector_round_trip():
    s = make_state(TOP, q=0.25, p=-0.75)
    back = HybridState.from_vector(s.as_vector())
    np.testing.assert_array_equal(back.point.x, s.point.x)
    np.testing.assert_array_equal(back.point.y, s.point.y)
    assert (back.q, back.p) == (s.q, s.p)


def test_state_from_vector_rejects_wrong_length():
    with pytest.raises(ValueError, match="10"):
        HybridState.from_vector(np.zeros(9))


def test_model_rejects_nonpositive_scale_parameters():
    for name in ("m", "k", "hbar"):
        with pytest.raises(ValueError, match=name):
            HybridModel(**{name: 0.0})


def test_model_rejects_non_finite_couplings():
    with pytest.raises(ValueError, match="c1"):
        HybridModel(c1=float("nan"))


def test_model_parses_kind_strings():
    assert HybridModel(kind="nonsymmetric2").kind is ModelKind.NONSYMMETRIC_2
