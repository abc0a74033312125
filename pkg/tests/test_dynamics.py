import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from rydberg_cavity import dynamics, hilbert
from rydberg_cavity.hilbert import BasisKind
from rydberg_cavity.models import ModelSystem, Variant, build_cavity_only, build_model, build_spin_bubble
from rydberg_cavity.params import derive_effective, default_params


@pytest.fixture(scope="module")
def spin():
    p = default_params()
    m = build_model(Variant.SPIN, p)
    return m, dynamics.build_liouvillian(m)


def random_density(d, rng):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def test_vec_round_trip_and_kron_identity():
    rng = np.random.default_rng(0)
    A, B, R = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
    assert np.allclose(dynamics.unvec(dynamics.vec(R)), R)
    assert np.allclose(np.kron(B.T, A) @ dynamics.vec(R), dynamics.vec(A @ R @ B))


def test_liouvillian_preserves_trace(spin):
    m, L = spin
    rng = np.random.default_rng(1)
    row = dynamics.trace_row(m.basis.dim)
    for _ in range(100):
        rho = random_density(m.basis.dim, rng)
        assert abs(row @ (L @ dynamics.vec(rho))) < 1e-12
    # trace functional is a left null vector
    assert np.abs(row @ L).max() < 1e-12


def test_liouvillian_matches_direct_master_equation(spin):
    m, L = spin
    rho = random_density(m.basis.dim, np.random.default_rng(2))
    H = m.hamiltonian.toarray()
    drho = -1j * (H @ rho - rho @ H)
    for rate, c in m.collapse_ops:
        c = c.toarray()
        cd = c.conj().T
        drho += rate * (2 * c @ rho @ cd - cd @ c @ rho - rho @ cd @ c)
    assert np.allclose(dynamics.unvec(L @ dynamics.vec(rho)), drho, atol=1e-13)


def test_cavity_steady_state_oracle():
    p = default_params()
    for dc in (-3.0, 0.0, 2.5):
        q = p.replace(delta_c=dc)
        m = build_cavity_only(q)
        L = dynamics.build_liouvillian(m)
        rho = dynamics.steady_state(L)
        assert np.abs(L @ dynamics.vec(rho)).max() < 1e-10
        n = dynamics.photon_moments(m, rho)[0]
        assert n == pytest.approx(q.alpha**2 / (dc**2 + q.gamma_c**2), rel=1e-8)
        assert dynamics.g2_zero(m, rho) == pytest.approx(1.0, abs=1e-8)


def test_undriven_damped_system_relaxes_to_vacuum():
    p = default_params().replace(alpha=0.0)
    m = build_cavity_only(p)
    rho = dynamics.steady_state(dynamics.build_liouvillian(m))
    assert dynamics.trace_distance(rho, dynamics.vacuum(m.basis.dim)) < 1e-12


def test_degenerate_steady_state_detected():
    # H = 0 with no dissipation: every diagonal state is stationary
    L = dynamics.liouvillian_from(sp.csr_matrix((4, 4), dtype=complex), ())
    with pytest.raises(dynamics.DegenerateSteadyStateError):
        dynamics.steady_state(L)
    assert issubclass(dynamics.DegenerateSteadyStateError, dynamics.ConvergenceError)
    with pytest.raises(ValueError):
        dynamics.steady_state(L, method="magic")


def test_propagation_basics(spin):
    m, L = spin
    prop = dynamics.Propagator(L)
    rho0 = random_density(m.basis.dim, np.random.default_rng(3))
    assert np.array_equal(prop.propagate(rho0, 0.0), rho0)
    direct = prop.propagate(rho0, 1.7)
    two_step = prop.propagate(prop.propagate(rho0, 0.5), 1.2)
    assert np.abs(direct - two_step).max() < 1e-12
    assert np.abs(dynamics.propagate(L, rho0, 1.7) - direct).max() < 1e-14
    rho_ss = dynamics.steady_state(L)
    assert dynamics.trace_distance(prop.propagate(rho0, 400.0), rho_ss) < 1e-8
    with pytest.raises(ValueError):
        prop.propagate(rho0, -1.0)
    with pytest.raises(ValueError):
        prop.evolve(rho0, [1.0, 0.5])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 30.0))
def test_propagation_keeps_trace_hermiticity_positivity(seed, t):
    m = build_model(Variant.SPIN, default_params())
    rho0 = random_density(m.basis.dim, np.random.default_rng(seed))
    rho = dynamics.propagate(dynamics.build_liouvillian(m), rho0, t)
    assert abs(np.trace(rho) - 1) < 1e-9
    assert np.abs(rho - rho.conj().T).max() < 1e-9
    assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() > -1e-9


def test_large_liouvillian_uses_krylov_path():
    p = default_params().replace(bubble_count=40)
    m = build_spin_bubble(derive_effective(p), p, cutoff=12)
    L = dynamics.build_liouvillian(m)
    assert L.shape[0] > dynamics.DENSE_LIMIT
    prop = dynamics.Propagator(L)
    rho = prop.propagate(dynamics.vacuum(m.basis.dim), 2.0)
    assert abs(np.trace(rho) - 1) < 1e-9


def test_drift_check_raises():
    # a non-trace-preserving generator must be flagged
    L = -sp.identity(4, dtype=complex, format="csc")
    with pytest.raises(dynamics.ConvergenceError):
        dynamics.propagate(L, dynamics.vacuum(2), 1.0)


def test_two_steady_state_methods_agree(spin):
    m, L = spin
    a = dynamics.steady_state(L)
    b = dynamics.steady_state(L, method="propagation")
    assert dynamics.trace_distance(a, b) < 1e-8
    assert np.abs(L @ dynamics.vec(b)).max() < 1e-8


def test_truncation_boundary_population(spin):
    m, L = spin
    rho = dynamics.steady_state(L)
    edge = [i for (n_r, n_c), i in m.basis.index.items() if n_r + n_c == m.basis.max_total_excitations]
    assert np.real(np.diag(rho)[edge]).sum() < 1e-10


def test_g2_zero_on_single_excitation_space_vanishes():
    # cutoff 1 cannot hold two photons; built by hand since builders require cutoff >= 2
    b = hilbert.build_basis(BasisKind.SPIN_FOCK, 1, 2)
    a = hilbert.cavity_annihilation(b)
    ad = hilbert.adjoint(a)
    h = 0.01 * (a + ad) + 1.0 * ad @ a
    decay = ((1 / 3, a), (0.03, hilbert.matter_decay_jump(b)))
    m = ModelSystem(h.tocsr(), decay, a, b, Variant.SPIN, 0.01)
    rho = dynamics.steady_state(dynamics.build_liouvillian(m))
    assert dynamics.g2_zero(m, rho) == 0.0


def test_g2_zero_refuses_empty_cavity():
    m = build_cavity_only(default_params().replace(alpha=0.0))
    rho = dynamics.steady_state(dynamics.build_liouvillian(m))
    with pytest.raises(ZeroDivisionError):
        dynamics.g2_zero(m, rho)


def test_g2_tau_limits(spin):
    m, L = spin
    rho = dynamics.steady_state(L)
    trace = dynamics.g2_tau(m, rho, np.linspace(0, 300, 601), L)
    assert trace.g2[0] == pytest.approx(dynamics.g2_zero(m, rho), rel=1e-12)
    assert abs(trace.g2[-1] - 1) < 1e-6


def test_cavity_g2_tau_flat():
    p = default_params()
    m = build_cavity_only(p)
    L = dynamics.build_liouvillian(m)
    rho = dynamics.steady_state(L)
    trace = dynamics.g2_tau(m, rho, np.linspace(0, 20, 101), L)
    assert np.abs(trace.g2 - 1).max() < 1e-8


def test_perturbative_trivial_cases():
    p = default_params()
    assert dynamics.g2_zero_perturbative(build_cavity_only(p)) == pytest.approx(1.0, abs=1e-10)
    from rydberg_cavity.models import build_two_boson

    m = build_two_boson(derive_effective(p), p, cutoff=6, kappa=0.0)
    assert dynamics.g2_zero_perturbative(m) == pytest.approx(1.0, abs=1e-10)


def test_perturbative_coefficients_are_traceless(spin):
    m, _ = spin
    rho = dynamics.perturbative_moments(m)
    assert np.trace(rho[0]) == pytest.approx(1.0)
    for r in rho[1:]:
        assert abs(np.trace(r)) < 1e-12


def test_perturbative_error_is_second_order_in_drive():
    p = default_params()
    gaps = []
    for alpha in (0.01, 0.005):
        m = build_model(Variant.SPIN, p.replace(delta_c=-6.1 - 4.85, alpha=alpha))
        numeric = dynamics.g2_zero(m, dynamics.steady_state(dynamics.build_liouvillian(m)))
        gaps.append(abs(dynamics.g2_zero_perturbative(m) - numeric) / numeric)
    assert 3.0 < gaps[0] / gaps[1] < 4.1


def test_expectation():
    rho = dynamics.vacuum(3)
    assert dynamics.expectation(np.eye(3), rho) == 1
    assert dynamics.expectation(sp.identity(3, format="csr"), rho) == 1
    with pytest.raises(ValueError):
        dynamics.expectation(np.eye(4), rho)


def test_h3_amplitudes():
    p = default_params()
    from rydberg_cavity.models import build_h3

    h3 = build_h3(derive_effective(p), p)
    psi = dynamics.h3_amplitudes(h3, [0, 1, 0], [0.0, 1.0, 5.0])
    assert np.allclose(psi[0], [0, 1, 0])
    norms = np.linalg.norm(psi, axis=1)
    assert np.all(np.diff(norms) < 0)
    with pytest.raises(ValueError):
        dynamics.h3_amplitudes(h3, [0, 1, 0], [1.0, 0.0])
