"""Property-based checks of the structural invariants."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from calogero import dynamics as D
from calogero import poisson as P
from calogero.phase_core import (Coupling, PhaseState, build_lax, commutation_residual, hamiltonian,
                                 recover_state)
from calogero.spectral import (adjugate_residual, eigenvector_coords, faddeev_leverrier, spectral_coords,
                               spectral_order)

unit = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def phase_states(draw, max_n=6, couplings=tuple(Coupling)):
    n = draw(st.integers(1, max_n))
    start = draw(st.floats(-3.0, 3.0))
    gaps = draw(st.lists(st.floats(0.2, 2.0), min_size=n - 1, max_size=n - 1))
    x = start + np.concatenate([[0.0], np.cumsum(gaps)])
    p = draw(st.lists(unit, min_size=n, max_size=n))
    return PhaseState(x, p, draw(st.sampled_from(couplings)))


repulsive = phase_states(couplings=(Coupling.IMAGINARY,))


@given(phase_states(max_n=8))
def test_energy_is_half_trace(s):
    L = build_lax(s).L
    ref = 0.5 * np.trace(L @ L).real
    assert abs(hamiltonian(s) - ref) <= 1e-12 * max(1.0, abs(ref))


@given(phase_states(max_n=8), st.complex_numbers(max_magnitude=5, allow_nan=False))
def test_commutation_identity(s, lam):
    assert commutation_residual(build_lax(s), lam) <= 1e-12


@given(phase_states())
def test_lax_round_trip(s):
    if s.n < 2:
        return
    back = recover_state(build_lax(s))
    assert back.coupling is s.coupling
    assert np.max(np.abs(back.x - s.x)) <= 1e-14 * max(1.0, np.max(np.abs(s.x)))
    assert np.max(np.abs(back.p - s.p)) <= 1e-14


@given(phase_states(max_n=8))
def test_adjugate_identity(s):
    L = build_lax(s).L
    ch = faddeev_leverrier(L)
    for lam in np.linspace(-2.0, 2.0, s.n + 1) + 0.3j:
        assert adjugate_residual(ch, L, lam) <= 1e-9


@given(repulsive)
def test_coordinates_and_routes(s):
    pair = build_lax(s)
    c = spectral_coords(pair)
    assert c.denominator_residual <= 1e-9
    assert np.max(np.abs(c.lambdas.imag)) <= 1e-10 * max(1.0, np.linalg.norm(pair.L, 2))
    np.testing.assert_array_equal(spectral_order(c.lambdas), np.arange(s.n))
    ev = eigenvector_coords(pair)
    assert np.max(np.abs(ev - c.mu_tilde) / np.maximum(1, np.abs(c.mu_tilde))) <= 1e-9


@given(repulsive, st.floats(-5.0, 5.0))
def test_flow_is_reversible_and_isospectral(s, t):
    fwd = D.exact_flow(s, t)
    back = D.exact_flow(fwd, -t)
    assert np.max(np.abs(back.x - s.x)) <= 1e-9
    assert np.max(np.abs(back.p - s.p)) <= 1e-9
    lam0 = spectral_coords(build_lax(s)).lambdas
    assert np.max(np.abs(spectral_coords(build_lax(fwd)).lambdas - lam0)) <= 1e-9
    assert abs(hamiltonian(fwd) - hamiltonian(s)) <= 1e-9 * max(1.0, abs(hamiltonian(s)))


@settings(max_examples=15, deadline=None)
@given(phase_states(max_n=3, couplings=(Coupling.IMAGINARY,)))
def test_canonicity_single_sign(s):
    r = P.verify_canonicity(s)
    assert r.passed and r.notes["sigma"] == -1


@settings(max_examples=15, deadline=None)
@given(phase_states(max_n=4, couplings=(Coupling.IMAGINARY,)))
def test_translation_moves_momenta_uniformly(s):
    assert P.verify_euler_field(s).passed


@given(st.lists(st.floats(0, 1e-3), min_size=1, max_size=20), st.floats(1e-6, 1e-3))
def test_report_pass_iff_within_tolerance(errs, tol):
    r = P.BracketReport("prop", tol)
    for k, e in enumerate(errs):
        r.add(k, 0, e, 0.0)
    assert r.passed == (max(errs) <= tol)
