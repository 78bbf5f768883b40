"""Normal modes of the electromechanical block and the induced Kerr strength.

The quadratic microwave-mechanics Hamiltonian is diagonalized by an explicit
Bogoliubov construction in quadrature coordinates (scale, rotate, rescale),
not by transcribing the closed-form mode expressions; the closed forms are
kept only for cross-checks. The photon couplings to the normal modes are read
off from the transformation, and the photon-photon strength follows from the
displaced-oscillator (polaron) reduction, diverging as the lower mode
frequency approaches zero at the critical drive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BeyondCriticalPoint, CriticalDivergence, InvalidDetuning
from .model import LinearizedModel

# Canonical commutation metric for the ladder ordering (c, c+, b, b+);
# any valid Bogoliubov matrix M satisfies M J M^T = J.
SYMPLECTIC_FORM = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


@dataclass(frozen=True)
class NormalModes:
    """Bogoliubov modes of the coupled microwave-mechanical block.

    ``transform`` maps normal-mode ladder operators (B-, B-+, B+, B++) to the
    original (c, c+, b, b+); couplings are reported non-negative, with the
    gauge fixed by positive mechanical content of each mode. When unstable,
    ``omega_minus`` holds the magnitude of the imaginary frequency and the
    coupling/transform fields are unset.
    """

    omega_minus: float
    omega_plus: float
    g_minus: float
    g_plus: float
    theta: float
    transform: np.ndarray | None
    stable: bool
    G: float
    Delta_c: float
    omega_b: float
    g_a: float


@dataclass(frozen=True)
class PolaronFrame:
    """Displaced-oscillator frame quantities for the optical mode.

    zeta_j = g_j/omega_j are the per-photon displacement ratios; eta is the
    photon-photon (Kerr) strength. The normal-mode decay rates kappa_j are
    direct inputs (energy-decay convention: mode amplitudes damp at
    kappa_j/2), since their mapping onto the bare circuit/mechanics rates is
    not fixed here.
    """

    zeta_minus: float
    zeta_plus: float
    eta: float
    kappa_minus: float
    kappa_plus: float
    omega_minus: float
    omega_plus: float


def critical_point(Delta_c: float, omega_b: float = 1.0) -> float:
    """Drive-enhanced coupling at which the lower normal mode softens to zero."""
    if not (Delta_c > 0.0 and omega_b > 0.0):
        raise ValueError("Delta_c and omega_b must be positive")
    return 0.5 * math.sqrt(Delta_c * omega_b)


def critical_detuning(G: float, omega_b: float = 1.0) -> float:
    """Effective detuning at which a given coupling G becomes critical."""
    if not (G > 0.0 and omega_b > 0.0):
        raise ValueError("G and omega_b must be positive")
    return 4.0 * G**2 / omega_b


def mode_frequencies_closed_form(G: float, Delta_c: float,
                                 omega_b: float = 1.0) -> tuple[float, float]:
    """Closed-form squared-frequency pair (omega_-^2, omega_+^2).

    Used as a cross-check against the constructive diagonalization; the
    lower value goes negative beyond the critical coupling.
    """
    s = Delta_c**2 + omega_b**2
    disc = math.sqrt((omega_b**2 - Delta_c**2) ** 2 + 16.0 * G**2 * Delta_c * omega_b)
    return 0.5 * (s - disc), 0.5 * (s + disc)


def quadrature_form_matrices(G: float, Delta_c: float,
                             omega_b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Potential and kinetic matrices of the block in (x_c, x_b) quadratures.

    H = (1/2) x^T U x + (1/2) p^T T p with the position-position coupling
    -2G x_c x_b; T is diagonal because the coupling involves positions only.
    """
    U = np.array([[Delta_c, -2.0 * G], [-2.0 * G, omega_b]])
    T = np.diag([Delta_c, omega_b])
    return U, T


def dynamical_matrix(G: float, Delta_c: float, omega_b: float = 1.0) -> np.ndarray:
    """First-order equation-of-motion matrix K with dr/dt = K r over (x, p).

    Its eigenvalues are +-i omega_j when stable; used as the independent
    spectral oracle in tests.
    """
    U, T = quadrature_form_matrices(G, Delta_c, omega_b)
    zero = np.zeros((2, 2))
    return np.block([[zero, T], [-U, zero]])


def diagonalize(lin: LinearizedModel, omega_b: float, g_a: float) -> NormalModes:
    """Construct the Bogoliubov transformation of the electromechanical block.

    The quadrature form is reduced in three canonical steps (mass-weighted
    scaling, orthogonal rotation, per-mode rescaling), each symplectic, so the
    composite transform preserves commutators to machine precision. Modes are
    labeled by ascending frequency; at zero coupling this reduces to the bare
    modes with the photon coupling attached entirely to the mechanical-like
    one. At the exact degeneracy Delta_c = omega_b with G = 0 the tie-break is
    to call the mechanical mode the lower one.
    """
    G, Delta_c = lin.G, lin.Delta_c
    if not Delta_c > 0.0:
        raise InvalidDetuning(f"effective detuning must be positive, got {Delta_c:g}")
    if not (omega_b > 0.0 and g_a >= 0.0):
        raise ValueError("omega_b must be positive and g_a non-negative")

    w2_minus, w2_plus = mode_frequencies_closed_form(G, Delta_c, omega_b)
    if w2_minus <= 0.0:
        return NormalModes(
            omega_minus=math.sqrt(-w2_minus) if w2_minus < 0.0 else 0.0,
            omega_plus=math.sqrt(w2_plus),
            g_minus=math.nan, g_plus=math.nan, theta=math.nan,
            transform=None, stable=False,
            G=G, Delta_c=Delta_c, omega_b=omega_b, g_a=g_a,
        )

    U, T = quadrature_form_matrices(G, Delta_c, omega_b)
    t_sqrt = np.sqrt(np.diag(T))
    W = (t_sqrt[:, None] * U) * t_sqrt[None, :]
    evals, O = np.linalg.eigh(W)  # ascending: column 0 is the soft mode

    if G == 0.0 and Delta_c == omega_b:
        # Degenerate uncoupled block: pick the mechanical mode as the lower one.
        O = np.array([[0.0, 1.0], [1.0, 0.0]])
        evals = np.array([omega_b**2, Delta_c**2])

    # Gauge: positive mechanical content per mode; fall back to the microwave
    # row when a mode has no mechanical weight at all.
    for j in range(2):
        pivot = O[1, j] if abs(O[1, j]) > 1e-12 else O[0, j]
        if pivot < 0.0:
            O[:, j] = -O[:, j]

    omega = np.sqrt(evals)

    # x = T^{1/2} O D^{-1/2} X  and  p = T^{-1/2} O D^{1/2} P  (each step
    # rescales x and p inversely, hence symplectic).
    Sx_inv = (t_sqrt[:, None] * O) / np.sqrt(omega)[None, :]
    Sp_inv = (O / t_sqrt[:, None]) * np.sqrt(omega)[None, :]

    # b + b+ = sqrt(2) x_b = sum_j Sx_inv[b, j] * sqrt(2) X_j, and
    # sqrt(2) X_j = B_j + B_j+, so the photon-coupling per mode is direct.
    couplings = g_a * Sx_inv[1, :]

    M = _ladder_transform(Sx_inv, Sp_inv)

    det_O = O[0, 0] * O[1, 1] - O[0, 1] * O[1, 0]
    O_rot = O if det_O > 0 else O * np.array([1.0, -1.0])
    theta = math.atan2(O_rot[1, 0], O_rot[0, 0])

    return NormalModes(
        omega_minus=float(omega[0]), omega_plus=float(omega[1]),
        g_minus=float(couplings[0]), g_plus=float(couplings[1]),
        theta=theta, transform=M, stable=True,
        G=G, Delta_c=Delta_c, omega_b=omega_b, g_a=g_a,
    )


def _ladder_transform(Sx_inv: np.ndarray, Sp_inv: np.ndarray) -> np.ndarray:
    """Assemble R = M B in ladder ordering from the quadrature-block inverses."""
    # Original quadratures from normal-mode quadratures: x = Sx_inv X, p = Sp_inv P.
    # Ladder relations a = (x + i p)/sqrt(2) on both sides give real u, v blocks:
    # original_k = sum_j u[k, j] B_j + v[k, j] B_j+ with
    # u = (Sx_inv + Sp_inv)/2, v = (Sx_inv - Sp_inv)/2.
    u = 0.5 * (Sx_inv + Sp_inv)
    v = 0.5 * (Sx_inv - Sp_inv)
    M = np.zeros((4, 4))
    for k in range(2):        # 0 -> c, 1 -> b
        for j in range(2):    # 0 -> B_-, 1 -> B_+
            M[2 * k, 2 * j] = u[k, j]
            M[2 * k, 2 * j + 1] = v[k, j]
            M[2 * k + 1, 2 * j] = v[k, j]
            M[2 * k + 1, 2 * j + 1] = u[k, j]
    return M


def symplectic_defect(M: np.ndarray) -> float:
    """Max-norm violation of M J M^T = J."""
    return float(np.max(np.abs(M @ SYMPLECTIC_FORM @ M.T - SYMPLECTIC_FORM)))


def kerr_strength(nm: NormalModes, g_a: float, G: float, Delta_c: float,
                  omega_b: float = 1.0, kappa_minus: float = 0.0,
                  kappa_plus: float = 0.0,
                  divergence_floor: float = 1e-8) -> PolaronFrame:
    """Photon-photon interaction strength from the displaced-oscillator frame.

    Evaluates eta = g_a^2/(omega_b - 4 G^2/Delta_c) and cross-checks it
    against the mode-resolved sum g_-^2/omega_- + g_+^2/omega_+; the two are
    the same quantity computed through independent routes, and agreement
    certifies the mode labeling. ``divergence_floor`` (in omega_b units)
    bounds how close to the critical point the denominator may get.
    """
    if not nm.stable:
        raise BeyondCriticalPoint(
            f"normal modes unstable at G={G:g}, Delta_c={Delta_c:g} "
            f"(critical coupling {critical_point(Delta_c, omega_b):g})"
        )
    denom = omega_b - 4.0 * G**2 / Delta_c
    if denom < divergence_floor * omega_b:
        raise CriticalDivergence(
            f"Kerr denominator {denom:g} below floor {divergence_floor:g} omega_b",
            diagnostic_eta=math.inf if denom <= 0.0 else g_a**2 / denom,
        )
    eta = g_a**2 / denom
    mode_sum = nm.g_minus**2 / nm.omega_minus + nm.g_plus**2 / nm.omega_plus
    # The denominator is a difference of near-equal numbers close to the
    # critical point; widen the check by its cancellation conditioning.
    check_tol = 1e-10 + 100.0 * np.finfo(float).eps * omega_b / denom
    if eta > 0.0 and abs(eta - mode_sum) > check_tol * eta:
        raise AssertionError(
            f"mode-sum cross-check failed: eta={eta:.15g} vs sum={mode_sum:.15g}"
        )
    return PolaronFrame(
        zeta_minus=nm.g_minus / nm.omega_minus,
        zeta_plus=nm.g_plus / nm.omega_plus,
        eta=eta, kappa_minus=kappa_minus, kappa_plus=kappa_plus,
        omega_minus=nm.omega_minus, omega_plus=nm.omega_plus,
    )


def eta_locus_coupling(eta_target: float, Delta_c: float, g_a: float,
                       omega_b: float = 1.0) -> float:
    """Coupling G at which the Kerr strength reaches ``eta_target``."""
    if eta_target <= 0.0:
        raise ValueError("eta_target must be positive")
    denom = g_a**2 / eta_target
    arg = Delta_c * (omega_b - denom) / 4.0
    if arg < 0.0:
        raise ValueError("eta_target unreachable below the critical point")
    return math.sqrt(arg)


def eta_exceeds_kappa_windows(kappa_a: float, g_a: float, G: float,
                              Delta_c: float, omega_b: float = 1.0) -> tuple[float, float]:
    """Widths of the stable parameter windows where eta exceeds kappa_a.

    Returns (G-window width at fixed Delta_c, Delta_c-window width at fixed
    G), both in omega_b units. Closed forms from the Kerr denominator:
    the G window is [G at eta=kappa_a, G_cp) and the detuning window sits
    just above the critical detuning.
    """
    x = g_a**2 / (kappa_a * omega_b)
    if not 0.0 < x < 1.0:
        raise ValueError("requires 0 < g_a^2/(kappa_a omega_b) < 1")
    g_cp = critical_point(Delta_c, omega_b)
    g_window = g_cp * (1.0 - math.sqrt(1.0 - x))
    d_cp = critical_detuning(G, omega_b)
    d_window = d_cp * x / (1.0 - x)
    return g_window, d_window


def estimate_normal_mode_decay(nm: NormalModes, kappa_c: float,
                               kappa_b: float) -> tuple[float, float]:
    """Heuristic normal-mode decay rates from mode content (non-normative).

    Weights each bare decay rate by the squared Bogoliubov content of the
    corresponding bare mode in each normal mode. This is a rough estimate
    only; quantitative work should supply kappa_minus/kappa_plus directly.
    """
    if nm.transform is None:
        raise BeyondCriticalPoint("no decay estimate for unstable modes")
    M = nm.transform
    rates = []
    for j in range(2):
        col = 2 * j
        w_c = M[0, col] ** 2 + M[1, col] ** 2
        w_b = M[2, col] ** 2 + M[3, col] ** 2
        total = w_c + w_b
        rates.append((kappa_c * w_c + kappa_b * w_b) / total)
    return rates[0], rates[1]
