"""Stroboscopic Kerr evolution of the cavity field and its cat structure.

Left alone, a cavity photon drags the soft normal mode with it; once per
soft-mode period the drag closes exactly and the cavity state returns to a
pure Kerr-evolved form whose only memory of the interaction is the phase
exp(i theta m^2) on each Fock amplitude, theta = 2 pi n eta/omega_-.
Rational theta/2pi turns a coherent state into a superposition of finitely
many coherent components; this module generates those states, decomposes
them into components, and rasterizes Wigner functions from the Fock
amplitudes via the displaced-parity representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import (InsufficientTruncation, NonStroboscopicPhase,
                     UnresolvableComponents)


@dataclass(frozen=True)
class CatState:
    """Pure cavity state with Fock amplitudes c_m, m = 0..N_trunc.

    ``truncation_loss`` is the probability weight lost to truncation before
    renormalization; amplitudes are stored normalized.
    """

    amplitudes: np.ndarray
    upsilon: complex
    theta_K: float
    n_period: int
    truncation_loss: float

    @property
    def n_trunc(self) -> int:
        return self.amplitudes.size - 1

    def density_matrix(self) -> np.ndarray:
        c = self.amplitudes
        return np.outer(c, c.conj())


@dataclass(frozen=True)
class WignerGrid:
    """Raster of W(x, y) on quadratures x = (a + a+)/sqrt(2), y = -i(a - a+)/sqrt(2).

    ``values[i, j]`` is W(x_axis[j], y_axis[i]).
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def normalization(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.x_axis, axis=1),
                                  self.y_axis))


def coherent_amplitudes(upsilon: complex, n_trunc: int) -> np.ndarray:
    """Unnormalized coherent-state Fock amplitudes up to n_trunc (log-stable)."""
    m = np.arange(n_trunc + 1)
    if upsilon == 0:
        out = np.zeros(n_trunc + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(upsilon) ** 2 + m * math.log(abs(upsilon)) \
        - 0.5 * gammaln(m + 1.0)
    phase = m * np.angle(upsilon)
    return np.exp(log_mag + 1j * phase)


def displacement_closure_coefficient(n: int) -> complex:
    """Residual soft-mode displacement factor 1 - exp(-i omega t) at t = 2 pi n/omega.

    The phase is an exact integer multiple of 2 pi, so the coefficient is
    identically zero; returning the exact 0 records that the stroboscopic
    cancellation is structural, not numerical.
    """
    if n != int(n):
        raise ValueError("n must be an integer number of soft-mode periods")
    return 0.0 + 0.0j


def kappa_validity_margin(t_n: float, kappas) -> float:
    """Dimensionless damping margin max(kappa) * t_n for the closed evolution.

    The generated state is trustworthy while this is far below 1; the value
    is reported rather than enforced.
    """
    return float(max(kappas) * t_n)


def evolve_cat(upsilon: complex, eta_over_omega: float, n: int,
               N_trunc: int, loss_tol: float = 1e-8) -> CatState:
    """Cavity state after n soft-mode periods of the closed Kerr evolution.

    Starting from |upsilon>, each Fock amplitude acquires exp(i theta m^2)
    with theta = 2 pi n (eta/omega_-); the photon-phonon displacement closes
    exactly at those instants, so the state stays pure. Truncation must hold
    at least the coherent tail (N_trunc >= |u|^2 + 6|u|) and lose less than
    ``loss_tol`` probability, else InsufficientTruncation is raised.
    """
    if n < 1 or n != int(n):
        raise ValueError("n must be a positive integer")
    nbar = abs(upsilon) ** 2
    if N_trunc < nbar + 6.0 * math.sqrt(nbar):
        raise ValueError(
            f"N_trunc={N_trunc} below coherent-tail rule {nbar + 6 * math.sqrt(nbar):.1f}"
        )
    theta = 2.0 * math.pi * n * eta_over_omega
    m = np.arange(N_trunc + 1)
    amps = coherent_amplitudes(upsilon, N_trunc) * np.exp(1j * theta * m**2)
    norm_sq = float(np.sum(np.abs(amps) ** 2))
    loss = 1.0 - norm_sq
    if loss > loss_tol:
        raise InsufficientTruncation(
            f"truncation loss {loss:.3g} exceeds {loss_tol:g} at N_trunc={N_trunc}"
        )
    return CatState(amplitudes=amps / math.sqrt(norm_sq), upsilon=complex(upsilon),
                    theta_K=theta, n_period=int(n), truncation_loss=max(loss, 0.0))


def rational_kerr_phase(theta_K: float, q_max: int,
                        tol: float = 1e-6) -> Fraction:
    """Nearest rational p/q (q <= q_max) to theta_K/2pi, or raise."""
    x = (theta_K / (2.0 * math.pi)) % 1.0
    frac = Fraction(x).limit_denominator(q_max)
    if abs(x - float(frac)) > tol:
        raise NonStroboscopicPhase(
            f"theta_K/2pi = {x:.9f} has no rational approximation with "
            f"denominator <= {q_max} within {tol:g}"
        )
    return frac


def gauss_sum_weights(p: int, q: int) -> np.ndarray:
    """Exact component weights of the phase pattern exp(2 pi i p m^2 / q).

    The pattern is q-periodic in m, so it expands over the q-th roots of
    unity: exp(2 pi i p m^2/q) = sum_k f_k exp(2 pi i k m / q). Because the
    coherent prefactor is untouched, f_k is exactly the weight of the
    component at phase angle 2 pi k/q.
    """
    m = np.arange(q)
    values = np.exp(2j * math.pi * p * m**2 / q)
    return np.fft.fft(values) / q  # f_k = (1/q) sum_m v_m e^{-2pi i k m/q}


@dataclass(frozen=True)
class CatDecomposition:
    components: list[tuple[float, complex]]
    residual: float
    q: int

    @property
    def count(self) -> int:
        return len(self.components)


def decompose_cat(state: CatState, q_max: int = 12,
                  phase_tol: float = 1e-6, residual_tol: float = 1e-6,
                  weight_floor: float = 1e-3) -> CatDecomposition:
    """Resolve the state into coherent components |upsilon e^{2 pi i k/q'}>.

    Finds the rational Kerr phase by continued fractions, then solves a
    least-squares fit of the Fock amplitudes against the coherent-state
    span for the smallest q' reaching the residual tolerance. Components
    below ``weight_floor`` in magnitude are dropped from the list.
    """
    frac = rational_kerr_phase(state.theta_K, q_max, phase_tol)
    c = state.amplitudes
    n_trunc = state.n_trunc
    saw_ill_conditioning = False
    for q in range(1, q_max + 1):
        basis = np.zeros((n_trunc + 1, q), dtype=complex)
        for k in range(q):
            col = coherent_amplitudes(state.upsilon * np.exp(2j * math.pi * k / q),
                                      n_trunc)
            nrm = np.linalg.norm(col)
            if nrm == 0.0:
                raise UnresolvableComponents("coherent basis column vanished")
            basis[:, k] = col / nrm
        svals = np.linalg.svd(basis, compute_uv=False)
        if svals[-1] < 1e-10 * svals[0]:
            saw_ill_conditioning = True
            continue
        weights, *_ = np.linalg.lstsq(basis, c, rcond=None)
        residual = float(np.linalg.norm(basis @ weights - c))
        if residual < residual_tol:
            comps = [(2.0 * math.pi * k / q, complex(weights[k]))
                     for k in range(q) if abs(weights[k]) > weight_floor]
            return CatDecomposition(components=comps, residual=residual, q=q)
    if saw_ill_conditioning:
        raise UnresolvableComponents(
            f"coherent components of |{state.upsilon}| too overlapping to separate "
            f"up to q_max={q_max}"
        )
    raise UnresolvableComponents(
        f"no coherent-component fit below residual {residual_tol:g} up to "
        f"q_max={q_max} (best basis size {frac.denominator})"
    )


def reconstruct(decomp: CatDecomposition, upsilon: complex,
                n_trunc: int) -> np.ndarray:
    """Fock amplitudes rebuilt from a component list (for cross-checks)."""
    out = np.zeros(n_trunc + 1, dtype=complex)
    for phase, weight in decomp.components:
        col = coherent_amplitudes(upsilon * np.exp(1j * phase), n_trunc)
        out += weight * col / np.linalg.norm(col)
    return out


def component_count(eta_over_omega: float, n: int, q_max: int = 12,
                    phase_tol: float = 1e-6, weight_floor: float = 1e-6) -> int:
    """Number of coherent components of the stroboscopic state (exact route).

    Uses the Gauss-sum expansion of the rational Kerr phase instead of a
    least-squares fit, so it is cheap enough for parameter maps. Raises
    NonStroboscopicPhase when no admissible rational fits.
    """
    theta = 2.0 * math.pi * n * eta_over_omega
    frac = rational_kerr_phase(theta, q_max, phase_tol)
    p, q = frac.numerator, frac.denominator
    weights = gauss_sum_weights(p, q)
    return int(np.sum(np.abs(weights) > weight_floor))


def wigner(state: CatState | np.ndarray, x_axis: np.ndarray,
           y_axis: np.ndarray, coarse_step: float = 0.25) -> WignerGrid:
    """Wigner raster from Fock amplitudes via the displaced-parity kernel.

    W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)+] evaluated through
    stabilized associated-Laguerre recurrences (normalized so that the
    marginals integrate to one over dx dy). Accepts a CatState or a density
    matrix in the Fock basis. The grid must cover the coherent components
    (|x|, |y| up to |upsilon| sqrt(2) + 4); steps coarser than
    ``coarse_step`` are flagged in the metadata, not rejected.
    """
    if isinstance(state, CatState):
        rho = state.density_matrix()
        reach = abs(state.upsilon) * math.sqrt(2.0) + 4.0
    else:
        rho = np.asarray(state, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        nbar = float(np.real(np.trace(rho @ np.diag(np.arange(rho.shape[0])))))
        reach = math.sqrt(2.0 * nbar) + 4.0
    for axis, name in ((x_axis, "x"), (y_axis, "y")):
        if axis.min() > -reach or axis.max() < reach:
            raise ValueError(f"{name} axis does not cover the state (need +-{reach:.2f})")

    meta = {}
    steps = [float(np.max(np.diff(ax))) for ax in (x_axis, y_axis)]
    if max(steps) > coarse_step:
        meta["coarse_grid"] = max(steps)

    X, Y = np.meshgrid(x_axis, y_axis)
    values = _wigner_raster(rho, X, Y)
    return WignerGrid(x_axis=np.asarray(x_axis, dtype=float),
                      y_axis=np.asarray(y_axis, dtype=float),
                      values=values, meta=meta)


def _wigner_raster(rho: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Displaced-parity sum with scaled Laguerre functions.

    With beta = 2 alpha, u = |beta|^2, the contribution of the (n, n+k)
    coherence is (-1)^n G_n^k(u) 2 Re[rho_{n,n+k} e^{i k arg beta}] where
    G_n^k = sqrt(n!/(n+k)!) u^{k/2} e^{-u/2} L_n^k(u) stays bounded, making
    the three-term recurrence in n safe for large grids and photon numbers.
    """
    N = rho.shape[0]
    alpha = (X + 1j * Y) / math.sqrt(2.0)
    u = 4.0 * np.abs(alpha) ** 2
    phase = np.exp(1j * np.angle(alpha))

    total = np.zeros_like(u)
    parity = (-1.0) ** np.arange(N)
    for k in range(N):
        coeffs = np.array([rho[n, n + k] for n in range(N - k)])
        if not np.any(np.abs(coeffs) > 1e-18):
            continue
        # Seed G_0^k computed in log space; recurrence upward in n.
        if k == 0:
            g_prev = np.exp(-0.5 * u)
            angular = np.ones_like(u, dtype=complex)
        else:
            with np.errstate(divide="ignore"):
                log_seed = -0.5 * u + 0.5 * k * np.log(np.where(u > 0, u, 1.0)) \
                    - 0.5 * gammaln(k + 1.0)
            g_prev = np.where(u > 0, np.exp(log_seed), 0.0)
            angular = phase**k
        g_prev2 = np.zeros_like(u)
        contrib = np.zeros_like(u, dtype=complex)
        for n in range(N - k):
            if n > 0:
                g_new = ((2 * n - 1 + k - u) * g_prev
                         - math.sqrt((n - 1) * (n - 1 + k)) * g_prev2) \
                    / math.sqrt(n * (n + k))
                g_prev2, g_prev = g_prev, g_new
            if abs(coeffs[n]) > 1e-18:
                contrib += parity[n] * coeffs[n] * g_prev
        if k == 0:
            total += np.real(contrib)
        else:
            total += 2.0 * np.real(contrib * angular)
    return total / math.pi


def cat_regime_map(G_values: np.ndarray, Delta_c_values: np.ndarray, n: int,
                   q_max: int = 12, omega_b: float = 1.0, g_a: float = 1e-3,
                   phase_tol: float = 1e-6,
                   divergence_floor: float = 1e-8) -> np.ndarray:
    """Component counts over a (G, Delta_c) grid.

    Returns an integer array indexed [i_G, j_Delta]: the number of coherent
    components at the n-th stroboscopic instant, 0 where the Kerr phase is
    not stroboscopic (no admissible rational), -1 at unstable points and -2
    where the Kerr strength is beyond the divergence floor. Cells never
    abort the map.
    """
    from .errors import BeyondCriticalPoint, CriticalDivergence
    from .model import LinearizedModel
    from .spectrum import diagonalize, kerr_strength

    out = np.zeros((len(G_values), len(Delta_c_values)), dtype=int)
    for i, G in enumerate(G_values):
        for j, Dc in enumerate(Delta_c_values):
            lin = LinearizedModel(G=float(G), Delta_c=float(Dc),
                                  omega_a_tilde=0.0, alpha=0j, beta=0j)
            try:
                nm = diagonalize(lin, omega_b, g_a)
                frame = kerr_strength(nm, g_a, float(G), float(Dc), omega_b,
                                      divergence_floor=divergence_floor)
                ratio = frame.eta / nm.omega_minus
                out[i, j] = component_count(ratio, n, q_max, phase_tol)
            except BeyondCriticalPoint:
                out[i, j] = -1
            except CriticalDivergence:
                out[i, j] = -2
            except NonStroboscopicPhase:
                out[i, j] = 0
    return out