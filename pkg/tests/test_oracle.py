import numpy as np
import pytest
import scipy.sparse as sp

from kerrcrit.correlations import CorrelationKernel, phi2, phi4
from kerrcrit.errors import DegenerateLiouvillian, DimensionOverflow, KerrcritError
from kerrcrit.model import LinearizedModel
from kerrcrit.oracle import (build, destroy, g2_from_density, photon_block,
                             polaron_displacement, propagate,
                             regression_correlator, steady_state,
                             two_photon_kerr_gap)
from kerrcrit.spectrum import diagonalize, kerr_strength


def normal_modes_at(G=0.5, Delta_c=1.251):
    lin = LinearizedModel(G=G, Delta_c=Delta_c, omega_a_tilde=1.0,
                          alpha=0j, beta=0j)
    return diagonalize(lin, 1.0, 1e-3)


def test_build_validates_dims():
    with pytest.raises(DimensionOverflow):
        build("full", (100, 100, 100), omega_a=1.0, omega_b=1.0, delta_c=1.0,
              g_a=0.0, g_c=0.0, epsilon_c=0.0)
    with pytest.raises(ValueError):
        build("full", (0, 2, 2), omega_a=1.0, omega_b=1.0, delta_c=1.0,
              g_a=0.0, g_c=0.0, epsilon_c=0.0)
    with pytest.raises(ValueError):
        build("nonsense", (2, 2, 2))


def test_linearized_block_diagonal_at_zero_coupling():
    sys = build("linearized", (2, 4, 4), omega_a_tilde=1.0, omega_b=1.0,
                Delta_c=1.251, g_a=1e-3, G=0.0, kappa_a=0.1)
    n_c = sys.number(1)
    comm = sys.hamiltonian @ n_c - n_c @ sys.hamiltonian
    assert abs(comm).max() < 1e-14


def test_electromechanical_spectrum_matches_normal_modes():
    # Photon-vacuum block of the drive-displaced quadratic form: low
    # eigenvalues must match n_- w_- + n_+ w_+ above the ground state.
    # Bogoliubov-squeezed tails converge slowly this close to the critical
    # coupling: the truncation floor is ~5e-5 at 12 levels per mode and the
    # 1e-6 agreement needs ~24 (verified by a dims-doubling study).
    nm = normal_modes_at()
    levels = sorted(n_m * nm.omega_minus + n_p * nm.omega_plus
                    for n_m in range(10) for n_p in range(4))
    for dims_b, n_levels, tol in ((12, 2, 1e-4), (24, 3, 1e-6)):
        sys = build("linearized", (1, dims_b, dims_b), omega_a_tilde=1.0,
                    omega_b=1.0, Delta_c=1.251, g_a=1e-3, G=0.5)
        evals = np.linalg.eigvalsh(sys.hamiltonian.toarray())
        gaps = evals[:n_levels] - evals[0]
        for expected, got in zip(levels[:n_levels], sorted(gaps)):
            assert got == pytest.approx(expected, abs=tol)
    # Ground energy equals the Bogoliubov vacuum shift.
    assert evals[0] == pytest.approx(
        0.5 * (nm.omega_minus + nm.omega_plus - 1.251 - 1.0), abs=1e-9)


def test_two_photon_kerr_gap_matches_eta():
    nm = normal_modes_at()
    frame = kerr_strength(nm, 1e-3, 0.5, 1.251, 1.0)
    gap = two_photon_kerr_gap(1.0, (nm.omega_minus, nm.omega_plus),
                              (nm.g_minus, nm.g_plus), dims_b=(12, 12))
    assert gap == pytest.approx(-2.0 * frame.eta, abs=1e-8)


def test_photon_block_requires_conservation():
    # An optical drive breaks photon-number conservation.
    sys = build("driven", (3, 3, 1), Delta_a=0.1, eta=0.0, epsilon_a=0.2,
                omegas=(0.3, 1.0), kappas=(0.0, 0.0), zetas=(0.0, 0.0),
                kappa_a=0.1)
    with pytest.raises(KerrcritError):
        photon_block(sys, 1)


def test_undriven_steady_state_is_vacuum():
    sys = build("normal_mode", (1, 8, 8), omega_a_tilde=0.0,
                omegas=(0.36, 1.56), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.05, 0.05))
    rho = steady_state(sys, check_unique=False)
    assert rho[0, 0].real == pytest.approx(1.0, abs=1e-10)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)


def test_driven_linear_cavity_coherent_occupation():
    eps, delta, kappa = 0.02, 0.3, 0.1
    sys = build("driven", (12, 1, 1), Delta_a=delta, eta=0.0, epsilon_a=eps,
                omegas=(1.0, 1.0), kappas=(0.0, 0.0), zetas=(0.0, 0.0),
                kappa_a=kappa)
    rho = steady_state(sys, check_unique=False)
    a = sys.lowering(0).toarray()
    n_mean = np.trace(a.conj().T @ a @ rho).real
    assert n_mean == pytest.approx(eps**2 / (kappa**2 + delta**2), abs=1e-6)
    # Coherent state: g2 = 1.
    assert g2_from_density(sys, rho) == pytest.approx(1.0, abs=1e-3)


def test_degenerate_liouvillian_detected():
    # Collapse on one mode only: the second mode's populations are conserved,
    # so the null space is multi-dimensional.
    sys = build("normal_mode", (1, 3, 3), omega_a_tilde=0.0,
                omegas=(0.5, 1.5), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.05, 0.0))
    with pytest.raises(DegenerateLiouvillian):
        steady_state(sys, check_unique=True)


def test_propagation_preserves_trace_and_hermiticity():
    sys = build("normal_mode", (1, 10, 1), omega_a_tilde=0.0,
                omegas=(0.36, 1.0), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.05, 0.0))
    rho0 = np.zeros((10, 10), dtype=complex)
    rho0[3, 3] = 1.0
    rho_t = propagate(sys, rho0, 7.0)
    assert np.trace(rho_t).real == pytest.approx(1.0, abs=1e-8)
    assert np.max(np.abs(rho_t - rho_t.conj().T)) < 1e-9
    assert np.linalg.eigvalsh(rho_t).min() > -1e-9


def test_regression_linear_cavity_analytic():
    # <a+(tau) a(0)> = exp((i delta - kappa) tau) <n> for a damped mode from
    # any initial state; validates the regression engine's core rule.
    delta, kappa = 0.3, 0.1
    n = 8
    a = destroy(n)
    H = delta * (a.getH() @ a)
    sys = build("normal_mode", (1, n, 1), omega_a_tilde=0.0,
                omegas=(delta, 1.0), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(2.0 * kappa, 0.0))
    rho0 = np.zeros((n, n), dtype=complex)
    rho0[2, 2] = 1.0  # Fock |2>: <n> = 2
    ad = sys.lowering(1).getH().toarray()
    a_full = sys.lowering(1).toarray()
    for tau in (0.5, 2.0, 8.0):
        val = regression_correlator(sys, [ad, a_full], [tau, 0.0], rho0=rho0)
        expected = 2.0 * np.exp((1j * delta - kappa) * tau)
        assert val == pytest.approx(expected, abs=1e-8)


def test_regression_rejects_non_unimodal():
    n = 4
    sys = build("normal_mode", (1, n, 1), omega_a_tilde=0.0,
                omegas=(0.3, 1.0), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.1, 0.0))
    op = sys.lowering(1).toarray()
    rho0 = np.zeros((n, n), dtype=complex)
    rho0[0, 0] = 1.0
    # Times dip between two later-time blocks: <A(2) B(0) C(2)> is fine,
    # but <A(2) B(0) C(2) D(0)> leaves non-contiguous later operators.
    with pytest.raises(ValueError):
        regression_correlator(sys, [op, op, op, op], [2.0, 0.0, 2.0, 0.0],
                              rho0=rho0)


def test_phi2_against_regression():
    kernel = CorrelationKernel(zetas=(0.3, 0.0), omegas=(0.36, 1.56),
                               kappas=(0.05, 0.05))
    sys = build("normal_mode", (1, 60, 1), omega_a_tilde=0.0,
                omegas=(0.36, 1.56), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.05, 0.05))
    rho = steady_state(sys, check_unique=False)
    e_plus = polaron_displacement(sys, (0.3, 0.0)).toarray()
    e_minus = polaron_displacement(sys, (0.3, 0.0), sign=-1.0).toarray()
    for tau in (1.0, 5.0, 20.0):
        oracle_val = regression_correlator(sys, [e_plus, e_minus], [tau, 0.0],
                                           rho0=rho)
        analytic = complex(np.exp(-phi2(tau, kernel)))
        assert abs(oracle_val - analytic) / abs(analytic) < 1e-3


def test_phi4_against_regression_generic_times():
    kernel = CorrelationKernel(zetas=(0.3, 0.0), omegas=(0.36, 1.56),
                               kappas=(0.05, 0.05))
    sys = build("normal_mode", (1, 30, 1), omega_a_tilde=0.0,
                omegas=(0.36, 1.56), couplings=(0.0, 0.0),
                kappa_a=0.0, kappas=(0.05, 0.05))
    rho = steady_state(sys, check_unique=False)
    e_p = polaron_displacement(sys, (0.3, 0.0)).toarray()
    e_m = polaron_displacement(sys, (0.3, 0.0), sign=-1.0).toarray()
    for t1, t2, t3 in [(1.0, 0.7, 1.3), (0.5, 2.0, 0.9), (2.5, 2.5, 2.5)]:
        oracle_val = regression_correlator(
            sys, [e_p, e_p, e_m, e_m], [t1 - t2, t1, 0.0, -t3], rho0=rho)
        analytic = complex(np.exp(-phi4(t1, t2, t3, kernel)))
        assert abs(oracle_val - analytic) / abs(analytic) < 1e-3


def test_phi4_factorization_against_regression():
    rng = np.random.default_rng(5)
    for _ in range(5):
        zeta = rng.uniform(0.1, 0.4)
        omega = rng.uniform(0.2, 0.6)
        kappa = rng.uniform(0.05, 0.15)
        kernel = CorrelationKernel(zetas=(zeta, 0.0), omegas=(omega, 1.0),
                                   kappas=(kappa, 0.1))
        sys = build("normal_mode", (1, 25, 1), omega_a_tilde=0.0,
                    omegas=(omega, 1.0), couplings=(0.0, 0.0),
                    kappa_a=0.0, kappas=(kappa, 0.1))
        rho = steady_state(sys, check_unique=False)
        e_p = polaron_displacement(sys, (zeta, 0.0)).toarray()
        e_m = polaron_displacement(sys, (zeta, 0.0), sign=-1.0).toarray()
        t1 = 40.0 / kappa  # deep saturation
        t2, t3 = rng.uniform(0.5, 3.0, size=2)
        oracle_val = regression_correlator(
            sys, [e_p, e_p, e_m, e_m], [t1 - t2, t1, 0.0, -t3], rho0=rho)
        limit = (np.conj(np.exp(phi2(t2, kernel))) * np.exp(phi2(t3, kernel))
                 * np.exp(4.0 * kernel.corr(0.0)))
        assert abs(oracle_val - limit) / abs(limit) < 1e-3


def test_driven_system_g2_matches_quadrature():
    # End-to-end check of the weak-drive correlation pipeline: the full
    # polaron-frame system (photon + damped normal mode + displacement-
    # dressed drive, plain photon dissipator) against the kernel quadrature.
    from kerrcrit.correlations import DriveConfig, g2_zero_kernel
    eta = 4.98e-6
    sys = build("driven", (5, 20, 1), Delta_a=eta, eta=eta, epsilon_a=0.005,
                omegas=(0.36, 1.56), kappas=(0.05, 0.05), zetas=(0.3, 0.0),
                kappa_a=0.1)
    rho = steady_state(sys, check_unique=False)
    sys.check_leakage(rho)
    g2_full = g2_from_density(sys, rho)
    kernel = CorrelationKernel(zetas=(0.3, 0.0), omegas=(0.36, 1.56),
                               kappas=(0.05, 0.05))
    quad = g2_zero_kernel(kernel, eta, DriveConfig(Delta_a=eta, kappa_a=0.1))
    assert quad.value == pytest.approx(g2_full, rel=1e-2)


def test_driven_build_gauge_invariance():
    # Flipping the displacement sign convention relabels B -> -B and leaves
    # every observable unchanged.
    kwargs = dict(Delta_a=0.01, eta=0.01, epsilon_a=0.01, omegas=(0.3, 1.0),
                  kappas=(0.05, 0.0), kappa_a=0.1)
    sys_a = build("driven", (3, 12, 1), zetas=(0.4, 0.0), signs=(1, -1), **kwargs)
    sys_b = build("driven", (3, 12, 1), zetas=(0.4, 0.0), signs=(-1, -1), **kwargs)
    g2_a = g2_from_density(sys_a, steady_state(sys_a, check_unique=False))
    g2_b = g2_from_density(sys_b, steady_state(sys_b, check_unique=False))
    assert g2_a == pytest.approx(g2_b, rel=1e-10)


def test_truncation_stability_under_dims_growth():
    nm = normal_modes_at()
    gap_small = two_photon_kerr_gap(1.0, (nm.omega_minus, nm.omega_plus),
                                    (nm.g_minus, nm.g_plus), dims_b=(12, 12))
    gap_big = two_photon_kerr_gap(1.0, (nm.omega_minus, nm.omega_plus),
                                  (nm.g_minus, nm.g_plus), dims_b=(14, 14))
    assert gap_big == pytest.approx(gap_small, abs=1e-10)


def test_leakage_flagging():
    sys = build("driven", (3, 4, 1), Delta_a=0.0, eta=0.0, epsilon_a=0.0,
                omegas=(0.3, 1.0), kappas=(0.05, 0.0), zetas=(0.0, 0.0),
                kappa_a=0.1)
    # A state parked in the top Fock level of the B_minus mode must flag.
    rho = np.zeros((12, 12), dtype=complex)
    rho[3, 3] = 1.0  # (n_a, n_m, n_p) = (0, 3, 0)
    with pytest.raises(DimensionOverflow):
        sys.check_leakage(rho)


def test_hamiltonian_hermiticity_enforced():
    bad = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    from kerrcrit.oracle import TruncatedSystem
    with pytest.raises(KerrcritError):
        TruncatedSystem(dims=(2,), hamiltonian=bad, collapse_ops=[],
                        labels=("x",))
