import math

import numpy as np
import pytest

from kerrcrit.catstate import (CatState, cat_regime_map, coherent_amplitudes,
                               component_count, decompose_cat,
                               displacement_closure_coefficient, evolve_cat,
                               gauss_sum_weights, kappa_validity_margin,
                               rational_kerr_phase, reconstruct, wigner)
from kerrcrit.errors import (InsufficientTruncation, NonStroboscopicPhase,
                             UnresolvableComponents)


def normalized_coherent(upsilon, n):
    c = coherent_amplitudes(upsilon, n)
    return c / np.linalg.norm(c)


def test_integer_ratio_returns_coherent():
    st = evolve_cat(2.0, 1.0, 1, 40)
    target = normalized_coherent(2.0, 40)
    assert abs(np.vdot(target, st.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_half_ratio_gives_minus_coherent():
    # theta_K = pi: parity identity e^{i pi m^2} = e^{i pi m}.
    st = evolve_cat(2.0, 0.5, 1, 40)
    target = normalized_coherent(-2.0, 40)
    assert abs(np.vdot(target, st.amplitudes)) ** 2 > 1.0 - 1e-10


def test_quarter_ratio_two_component_cat():
    # theta_K = pi/2: [(1+i)|Y> + (1-i)|-Y>]/2.
    st = evolve_cat(2.0, 0.25, 1, 40)
    manual = 0.5 * ((1 + 1j) * coherent_amplitudes(2.0, 40)
                    + (1 - 1j) * coherent_amplitudes(-2.0, 40))
    manual /= np.linalg.norm(manual)
    assert abs(np.vdot(manual, st.amplitudes)) ** 2 > 0.999


def test_normalization_and_loss_reporting():
    st = evolve_cat(2.0, 0.25, 1, 40)
    assert np.sum(np.abs(st.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-10)
    assert 0.0 <= st.truncation_loss < 1e-8


def test_truncation_guard():
    with pytest.raises(ValueError):
        evolve_cat(2.0, 0.25, 1, 10)  # below the coherent-tail rule
    with pytest.raises(InsufficientTruncation):
        evolve_cat(3.0, 0.25, 1, 28)  # tail rule met, loss above 1e-8


def test_displacement_closure_exact_zero():
    for n in (1, 2, 7):
        assert displacement_closure_coefficient(n) == 0.0
    # Generic (non-stroboscopic) time does not cancel.
    assert abs(1.0 - np.exp(-1j * 0.36 * 5.0)) > 0.1


def test_validity_margin():
    assert kappa_validity_margin(10.0, (0.1, 0.127, 1e-4)) == pytest.approx(1.27)


@pytest.mark.parametrize("ratio,expected_count,expected_q", [
    (0.5, 1, 2),        # theta = pi
    (0.25, 2, 2),       # theta = pi/2
    (1.0 / 3.0, 3, 3),  # theta = 2 pi/3
    (0.125, 4, 4),      # theta = pi/4
])
def test_decomposition_counts(ratio, expected_count, expected_q):
    st = evolve_cat(2.0, ratio, 1, 40)
    d = decompose_cat(st)
    assert d.count == expected_count
    assert d.q == expected_q
    assert d.residual < 1e-6
    rec = reconstruct(d, st.upsilon, st.n_trunc)
    assert np.linalg.norm(rec - st.amplitudes) < 1e-6
    fid = abs(np.vdot(rec / np.linalg.norm(rec), st.amplitudes)) ** 2
    assert fid > 0.999


def test_single_component_phase_is_pi():
    st = evolve_cat(2.0, 0.5, 1, 40)
    d = decompose_cat(st)
    (phase, weight), = d.components
    assert phase == pytest.approx(math.pi)
    assert abs(weight) == pytest.approx(1.0, abs=1e-10)


def test_decompose_trivial_identity_phase():
    st = evolve_cat(2.0, 1.0, 1, 40)
    d = decompose_cat(st)
    assert d.count == 1
    assert d.components[0][0] == pytest.approx(0.0)


def test_gauss_sum_weights_match_lstsq():
    st = evolve_cat(2.0, 0.25, 1, 40)
    d = decompose_cat(st)
    weights = gauss_sum_weights(1, 4)
    # Period-4 pattern collapses to two components {0, pi}: compare the
    # nonzero DFT bins against the fitted weights.
    big = {k: w for k, w in enumerate(weights) if abs(w) > 1e-6}
    assert set(big) == {0, 2}
    fitted = dict()
    for phase, w in d.components:
        fitted[round(phase / (2 * math.pi / 2))] = w
    assert fitted[0] == pytest.approx(big[0], rel=1e-9)
    assert fitted[1] == pytest.approx(big[2], rel=1e-9)


def test_non_stroboscopic_phase():
    st = evolve_cat(2.0, 1.0 / 16.0, 1, 40)  # q = 16 > q_max
    with pytest.raises(NonStroboscopicPhase):
        decompose_cat(st, q_max=12)
    with pytest.raises(NonStroboscopicPhase):
        rational_kerr_phase(2.0 * math.pi * 0.1234567, q_max=12)


def test_unresolvable_components_small_upsilon():
    # At tiny |upsilon| the coherent basis is numerically degenerate; any
    # amplitude content that a low-q span cannot absorb (here a high-Fock
    # perturbation standing in for truncation noise) becomes unresolvable.
    st = evolve_cat(1e-5, 1.0 / 3.0, 1, 12)
    amps = st.amplitudes.copy()
    amps[7] += 1e-4
    amps /= np.linalg.norm(amps)
    noisy = CatState(amplitudes=amps, upsilon=st.upsilon, theta_K=st.theta_K,
                     n_period=1, truncation_loss=0.0)
    with pytest.raises(UnresolvableComponents):
        decompose_cat(noisy)


def test_component_count_gauss_route():
    assert component_count(0.5, 1) == 1
    assert component_count(0.25, 1) == 2
    assert component_count(1.0 / 3.0, 1) == 3
    assert component_count(0.125, 1) == 4
    # n multiplies the phase: n=2 at ratio 1/4 gives theta = pi -> one component.
    assert component_count(0.25, 2) == 1


def test_wigner_vacuum():
    st = evolve_cat(0.0, 0.3, 1, 10)
    axis = np.linspace(-4.5, 4.5, 91)
    grid = wigner(st, axis, axis)
    center = grid.values[45, 45]
    assert center == pytest.approx(1.0 / math.pi, abs=1e-8)
    expected = np.exp(-(axis[None, :] ** 2 + axis[:, None] ** 2)) / math.pi
    assert np.max(np.abs(grid.values - expected)) < 1e-8


def test_wigner_coherent_displaced_gaussian():
    st = evolve_cat(2.0, 1.0, 1, 40)
    axis = np.linspace(-7.2, 7.2, 145)
    grid = wigner(st, axis, axis)
    iy, ix = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert axis[ix] == pytest.approx(2.0 * math.sqrt(2.0), abs=0.06)
    assert axis[iy] == pytest.approx(0.0, abs=0.06)
    assert grid.normalization() == pytest.approx(1.0, abs=1e-3)


def test_wigner_two_component_cat():
    st = evolve_cat(2.0, 0.25, 1, 40)
    axis = np.linspace(-7.2, 7.2, 145)
    grid = wigner(st, axis, axis)
    assert grid.normalization() == pytest.approx(1.0, abs=1e-3)
    # Parity identity at the origin.
    parity = sum((-1.0) ** m * abs(st.amplitudes[m]) ** 2
                 for m in range(st.n_trunc + 1)) / math.pi
    assert grid.values[72, 72] == pytest.approx(parity, abs=1e-6)
    # Nonclassicality witness and lobe geometry: components sit at +-Y on
    # the x axis, interference fringes in between.
    assert grid.values.min() < -0.05
    x_lobe = 2.0 * math.sqrt(2.0)
    jx = np.argmin(np.abs(axis - x_lobe))
    j0 = np.argmin(np.abs(axis))
    lobe_value = grid.values[j0, jx]
    assert lobe_value > 0.1
    fringe_strip = grid.values[:, j0]
    assert fringe_strip.min() < -0.05


@pytest.mark.parametrize("ratio", [0.25, 1.0 / 3.0, 0.125])
def test_wigner_multicomponent_negativity(ratio):
    st = evolve_cat(2.0, ratio, 1, 40)
    axis = np.linspace(-7.2, 7.2, 121)
    grid = wigner(st, axis, axis)
    assert grid.normalization() == pytest.approx(1.0, abs=1e-3)
    assert grid.values.min() < -0.02


def test_wigner_grid_coverage_guard():
    st = evolve_cat(2.0, 0.25, 1, 40)
    small = np.linspace(-3.0, 3.0, 61)
    with pytest.raises(ValueError):
        wigner(st, small, small)


def test_wigner_coarse_grid_flag():
    st = evolve_cat(0.0, 0.25, 1, 10)
    axis = np.linspace(-4.5, 4.5, 25)  # step 0.375 > 0.25
    grid = wigner(st, axis, axis)
    assert "coarse_grid" in grid.meta


def test_wigner_density_matrix_input():
    st = evolve_cat(1.0, 0.5, 1, 20)
    axis = np.linspace(-5.5, 5.5, 111)
    pure = wigner(st, axis, axis)
    mixed = wigner(st.density_matrix(), axis, axis)
    assert np.max(np.abs(pure.values - mixed.values)) < 1e-12


def test_purity_of_generated_states():
    st = evolve_cat(2.0, 1.0 / 3.0, 1, 40)
    rho = st.density_matrix()
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)


def test_cat_regime_map_markers():
    gs = np.array([0.2, 0.559, 0.60])
    ds = np.array([1.251])
    counts = cat_regime_map(gs, ds, n=1, q_max=12)
    assert counts.shape == (3, 1)
    assert counts[2, 0] == -1  # unstable beyond the critical coupling
    # Generic interior points are non-stroboscopic at tight tolerance.
    assert counts[0, 0] == 0


def test_cat_regime_map_hits_rationals():
    # Build a point whose eta/omega_minus is known, then confirm the map
    # logic classifies the corresponding ratio through the same route.
    assert component_count(0.5, 1, phase_tol=1e-9) == 1
    assert component_count(0.25, 1, phase_tol=1e-9) == 2
