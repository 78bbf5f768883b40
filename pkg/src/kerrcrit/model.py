"""Raw system parameters and the drive-dependent linearization.

A strong microwave drive displaces the microwave and mechanical modes to
classical mean fields (alpha, beta). What remains is a quadratic
electromechanical block with a drive-enhanced coupling G and an effective
detuning Delta_c that must be found self-consistently: the mechanical
displacement shifts the microwave resonance, which changes the circulating
power, which changes the displacement. Internally everything is expressed
in units of the mechanical frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FixedPointDivergence, InfeasibleTarget, LinearizationFailure


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the hybrid cavity-mechanics-circuit system.

    Frequencies and decay rates are strictly positive, couplings
    non-negative; epsilon_c is the (non-negative) microwave drive amplitude
    and omega_ci its frequency. All values are in omega_b units; unit
    conversion belongs to the I/O layer, not here.
    """

    omega_b: float
    omega_a: float
    omega_c: float
    g_a: float
    g_c: float
    kappa_a: float
    kappa_c: float
    kappa_b: float
    epsilon_c: float
    omega_ci: float

    def __post_init__(self):
        for name in ("omega_b", "omega_a", "omega_c", "omega_ci",
                     "kappa_a", "kappa_c", "kappa_b"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("g_a", "g_c", "epsilon_c"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def delta_c(self) -> float:
        """Bare microwave drive detuning omega_c - omega_ci."""
        return self.omega_c - self.omega_ci


@dataclass(frozen=True)
class LinearizedModel:
    """Drive-dependent quantities of the linearized Hamiltonian.

    ``G`` is the drive-enhanced electromechanical coupling, ``Delta_c`` the
    self-consistent effective detuning, ``omega_a_tilde`` the shifted optical
    frequency, and ``alpha``/``beta`` the microwave/mechanical mean fields
    (beta is diagnostic only; the mechanical damping is neglected in its
    steady-state balance, consistent with the detuning fixed point).
    """

    G: float
    Delta_c: float
    omega_a_tilde: float
    alpha: complex
    beta: complex
    residual: float = 0.0
    all_real_roots: tuple[float, ...] = field(default_factory=tuple)


def _detuning_cubic(delta_c: float, kappa_c: float, shift: float) -> np.ndarray:
    # Delta*(kappa^2 + Delta^2) = delta_c*(kappa^2 + Delta^2) - shift,
    # with shift = 2 g_c^2 eps^2 / omega_b, written as a monic cubic.
    return np.array([1.0, -delta_c, kappa_c**2, shift - delta_c * kappa_c**2])


def _real_roots(coeffs: np.ndarray) -> np.ndarray:
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    keep = np.abs(roots.imag) < 1e-9 * scale
    return np.sort(roots[keep].real)


def linearize(params: SystemParams, tol: float = 1e-12,
              optical_shift: str = "printed", max_iter: int = 200) -> LinearizedModel:
    """Solve the self-consistent linearization for a given drive.

    The effective detuning solves

        Delta_c = delta_c - 2 g_c^2 eps_c^2 / (omega_b (kappa_c^2 + Delta_c^2)),

    a cubic with up to three real roots. The returned root is the one
    continuously connected to delta_c as the drive is ramped from zero,
    found by a short amplitude continuation with Newton polishing; all real
    roots at the final amplitude are attached as metadata. If the connected
    branch terminates in a fold, the nearest surviving root is followed,
    matching what an upward power sweep would do.

    ``optical_shift`` selects the optical-frequency shift model:
    ``"printed"`` uses the same 2 G^2/omega_b shift as the microwave mode;
    ``"radiation_pressure"`` scales it by g_a/g_c (the static mechanical
    displacement acting through the optomechanical coupling).

    Raises LinearizationFailure if no real root shares the sign of delta_c,
    and FixedPointDivergence if polishing stalls.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if optical_shift not in ("printed", "radiation_pressure"):
        raise ValueError(f"unknown optical_shift mode {optical_shift!r}")

    delta_c = params.delta_c
    omega_b = params.omega_b
    eps = params.epsilon_c
    kc = params.kappa_c
    gc = params.g_c

    if eps == 0.0 or gc == 0.0:
        # Undriven (or uncoupled) limit: no shifts at all, exactly.
        return LinearizedModel(G=0.0, Delta_c=delta_c, omega_a_tilde=params.omega_a,
                               alpha=_mean_field_alpha(eps, kc, delta_c),
                               beta=0.0j, residual=0.0,
                               all_real_roots=(delta_c,))

    shift_full = 2.0 * gc**2 * eps**2 / omega_b

    # Amplitude continuation from the undriven root delta_c.
    current = delta_c
    n_steps = 32
    for k in range(1, n_steps + 1):
        frac = k / n_steps
        coeffs = _detuning_cubic(delta_c, kc, shift_full * frac**2)
        roots = _real_roots(coeffs)
        if roots.size == 0:  # cubic always has one real root; defensive only
            raise LinearizationFailure("no real root during drive continuation")
        current = float(roots[np.argmin(np.abs(roots - current))])

    final_roots = _real_roots(_detuning_cubic(delta_c, kc, shift_full))
    if delta_c != 0.0 and not np.any(np.sign(final_roots) == np.sign(delta_c)):
        raise LinearizationFailure(
            f"no self-consistent detuning with the sign of delta_c={delta_c:g}; "
            f"real roots: {final_roots.tolist()}"
        )
    if delta_c != 0.0 and math.copysign(1.0, current) != math.copysign(1.0, delta_c):
        # Continuation slid onto a wrong-sign branch through a fold.
        same_sign = final_roots[np.sign(final_roots) == np.sign(delta_c)]
        current = float(same_sign[np.argmin(np.abs(same_sign - current))])

    # Newton polish on the cubic, bisection fallback on stagnation.
    coeffs = _detuning_cubic(delta_c, kc, shift_full)
    deriv = np.polyder(coeffs)

    def fixed_point_residual(d):
        return abs(d - (delta_c - shift_full / (kc**2 + d**2)))

    x = current
    for _ in range(max_iter):
        if fixed_point_residual(x) < tol:
            break
        fx = float(np.polyval(coeffs, x))
        dfx = float(np.polyval(deriv, x))
        if dfx == 0.0:
            break
        step = fx / dfx
        x -= step
        if not math.isfinite(x):
            raise FixedPointDivergence("Newton iterate left the real line")
    else:
        raise FixedPointDivergence(
            f"fixed point not polished to {tol:g} after {max_iter} iterations "
            f"(residual {fixed_point_residual(x):g})"
        )
    if fixed_point_residual(x) >= tol:
        raise FixedPointDivergence(
            f"fixed-point residual {fixed_point_residual(x):g} exceeds tol {tol:g}"
        )

    Delta_c = x
    alpha = _mean_field_alpha(eps, kc, Delta_c)
    n_circ = abs(alpha) ** 2
    G = gc * math.sqrt(n_circ)
    beta = -gc * n_circ / omega_b + 0.0j
    if optical_shift == "printed":
        omega_a_tilde = params.omega_a - 2.0 * G**2 / omega_b
    else:
        ratio = params.g_a / gc
        omega_a_tilde = params.omega_a - 2.0 * ratio * G**2 / omega_b

    return LinearizedModel(G=G, Delta_c=Delta_c, omega_a_tilde=omega_a_tilde,
                           alpha=alpha, beta=beta,
                           residual=fixed_point_residual(Delta_c),
                           all_real_roots=tuple(float(r) for r in final_roots))


def _mean_field_alpha(eps: float, kappa_c: float, Delta_c: float) -> complex:
    if eps == 0.0:
        return 0.0j
    return -1j * eps / complex(kappa_c, Delta_c)


def target_drive(params: SystemParams, G_target: float,
                 Delta_c_target: float) -> tuple[float, float]:
    """Invert the linearization: drive settings producing (G, Delta_c).

    Returns (epsilon_c, delta_c) such that ``linearize`` on the modified
    parameters reproduces the requested operating point. Closed form:
    epsilon_c = G sqrt(kappa_c^2 + Delta_c^2)/g_c and
    delta_c = Delta_c + 2 G^2/omega_b.
    """
    if G_target < 0.0:
        raise ValueError("G_target must be non-negative")
    if not Delta_c_target > 0.0:
        raise ValueError("Delta_c_target must be positive")
    if G_target == 0.0:
        return 0.0, Delta_c_target
    if params.g_c == 0.0:
        raise InfeasibleTarget("nonzero G requested with g_c = 0")
    epsilon_c = G_target * math.hypot(params.kappa_c, Delta_c_target) / params.g_c
    delta_c = Delta_c_target + 2.0 * G_target**2 / params.omega_b
    return epsilon_c, delta_c


def with_drive(params: SystemParams, epsilon_c: float, delta_c: float) -> SystemParams:
    """Copy of ``params`` with a new drive amplitude and bare detuning."""
    return SystemParams(
        omega_b=params.omega_b, omega_a=params.omega_a, omega_c=params.omega_c,
        g_a=params.g_a, g_c=params.g_c, kappa_a=params.kappa_a,
        kappa_c=params.kappa_c, kappa_b=params.kappa_b,
        epsilon_c=epsilon_c, omega_ci=params.omega_c - delta_c,
    )


def drive_amplitude_from_power(power_watts: float, kappa_c_rad: float,
                               omega_ci_rad: float) -> float:
    """Microwave drive amplitude from input power, in rad/s.

    |eps_c| = sqrt(2 P kappa_c / (hbar omega_ci)), all arguments in SI
    (kappa_c and omega_ci angular). Convenience for the config layer; the
    math core never sees watts.
    """
    hbar = 1.054571817e-34
    if power_watts < 0.0:
        raise ValueError("power must be non-negative")
    return math.sqrt(2.0 * power_watts * kappa_c_rad / (hbar * omega_ci_rad))
