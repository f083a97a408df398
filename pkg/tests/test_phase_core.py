import json

import numpy as np
import pytest

from calogero.errors import NotCMPair, PositionCollision
from calogero.phase_core import (Coupling, LaxPair, PhaseState, build_lax, commutation_residual,
                                 hamiltonian, random_state, recover_state)

from conftest import states


def test_coupling_constants():
    assert Coupling.REAL.c == 1 and Coupling.REAL.g == -1
    assert Coupling.IMAGINARY.c == 1j and Coupling.IMAGINARY.g == 1
    assert Coupling.parse("Imaginary") is Coupling.IMAGINARY
    with pytest.raises(ValueError):
        Coupling.parse("complex")


def test_single_particle_lax():
    pair = build_lax(PhaseState([5.0], [3.0]))
    np.testing.assert_array_equal(pair.L, [[3.0]])
    np.testing.assert_array_equal(pair.X, [[5.0]])


def test_two_body_lax(two_body):
    pair = build_lax(two_body)
    np.testing.assert_allclose(pair.L, [[0, 0.5j], [-0.5j, 0]], atol=1e-15)
    np.testing.assert_array_equal(pair.X, np.diag([1.0, -1.0]))


def test_collision_rejected():
    with pytest.raises(PositionCollision):
        PhaseState([1.0, 1.0 - 1e-12], [0.0, 0.0])
    # a looser threshold can be configured
    with pytest.raises(PositionCollision):
        PhaseState([0.0, 1e-3], [0.0, 0.0], eps_pos=1e-2)


@pytest.mark.parametrize("coupling, expected", [(Coupling.IMAGINARY, 0.25), (Coupling.REAL, -0.25)])
def test_hamiltonian_two_body(coupling, expected):
    assert hamiltonian(PhaseState([1.0, -1.0], [0.0, 0.0], coupling)) == pytest.approx(expected)


def test_hamiltonian_free_particle():
    assert hamiltonian(PhaseState([0.7], [3.0])) == 4.5


@pytest.mark.parametrize("coupling", list(Coupling))
def test_hamiltonian_is_half_trace_L_squared(rng, coupling):
    for n in range(1, 9):
        for s in states(rng, n, 3, coupling):
            L = build_lax(s).L
            half_tr = 0.5 * np.trace(L @ L)
            assert abs(half_tr.imag) < 1e-12
            assert hamiltonian(s) == pytest.approx(half_tr.real, rel=1e-12, abs=1e-12)


def test_commutation_examples(two_body):
    assert commutation_residual(build_lax(PhaseState([0.3], [1.0]))) == 0
    assert commutation_residual(build_lax(two_body)) == 0
    comm = -build_lax(two_body).L @ np.diag([1, -1]) + np.diag([1, -1]) @ build_lax(two_body).L
    np.testing.assert_allclose(comm, [[0, 1j], [1j, 0]])


def test_commutation_random(rng):
    for coupling in Coupling:
        for s in states(rng, 3, 5, coupling):
            pair = build_lax(s)
            for lam in (0.0, 1.7, -2 + 1j):
                assert commutation_residual(pair, lam) <= 1e-12


def test_hermitian_for_imaginary(rng):
    for n in range(2, 9):
        L = build_lax(random_state(n, rng)).L
        assert np.max(np.abs(L - L.conj().T)) <= 1e-15 * np.max(np.abs(L))


@pytest.mark.parametrize("coupling", list(Coupling))
def test_round_trip(rng, coupling):
    for n in range(2, 7):
        s = random_state(n, rng, coupling)
        back = recover_state(build_lax(s))
        assert back.coupling is coupling
        np.testing.assert_allclose(back.x, s.x, atol=1e-14)
        np.testing.assert_allclose(back.p, s.p, atol=1e-14)


def test_recover_rejects_perturbed(two_body):
    pair = build_lax(two_body)
    L = pair.L.copy()
    L[0, 1] += 1e-3
    with pytest.raises(NotCMPair):
        recover_state(LaxPair(L, pair.X, pair.coupling))


def test_recover_rejects_non_diagonal_X(two_body):
    pair = build_lax(two_body)
    X = pair.X.astype(float).copy()
    X[0, 1] = 0.1
    with pytest.raises(NotCMPair):
        recover_state(LaxPair(pair.L, X, pair.coupling))


def test_recover_single_particle_defaults_to_imaginary():
    s = recover_state(LaxPair(np.array([[2.5 + 0j]]), np.array([[-1.0]]), Coupling.REAL))
    assert s.x.tolist() == [-1.0] and s.p.tolist() == [2.5]
    assert s.coupling is Coupling.IMAGINARY


def test_json_round_trip(rng):
    s = random_state(4, rng, Coupling.REAL)
    d = json.loads(s.to_json())
    assert set(d) == {"n", "coupling", "x", "p"}
    assert d["n"] == 4 and d["coupling"] == "real"
    back = PhaseState.from_json(s.to_json())
    np.testing.assert_array_equal(back.x, s.x)
    np.testing.assert_array_equal(back.p, s.p)


def test_json_rejects_inconsistent_n():
    with pytest.raises(ValueError):
        PhaseState.from_dict({"n": 3, "x": [0, 1], "p": [0, 0]})
    with pytest.raises(ValueError):
        PhaseState.from_dict({"x": [0, 1]})


def test_state_is_immutable(two_body):
    with pytest.raises(ValueError):
        two_body.x[0] = 5.0


def test_random_state_respects_gap(rng):
    for n in (1, 3, 8):
        s = random_state(n, rng)
        assert np.all(np.abs(s.x) <= n) and np.all(np.abs(s.p) <= 1)
        if n > 1:
            assert np.min(np.diff(s.x)) >= 0.2
    with pytest.raises(ValueError):
        random_state(0, rng)
