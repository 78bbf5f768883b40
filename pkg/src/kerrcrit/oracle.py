"""Truncated-Fock-space brute force for validating the analytic pipeline.

Builds sparse Hamiltonians and Lindblad generators for the hybrid system in
several frames, solves for steady states, and evaluates multi-time
correlators by quantum regression. Everything here is deliberately
independent of the closed forms in ``spectrum``/``correlations``: agreement
between the two routes is the package's main correctness evidence.

Decay-rate conventions follow the equations of motion used elsewhere:
optical/microwave/mechanical rates are amplitude decay rates (collapse
operator sqrt(2*kappa)*op, so <op> damps at kappa), while normal-mode rates
are energy decay rates (collapse sqrt(kappa_j)*B_j, amplitude damping
kappa_j/2).

Mode ordering in the product basis is (optical, microwave, mechanical) for
the "full"/"linearized" models and (optical, B_minus, B_plus) for
"normal_mode"/"driven"; kron factors are taken in that order with the
optical index slowest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import expm as dense_expm

from .errors import (DegenerateLiouvillian, DimensionOverflow, IntegratorFailure,
                     KerrcritError)

DIMENSION_BUDGET = 100_000
_DENSE_EXPM_CUTOFF = 400  # vectorized dimension below which dense expm is used


def destroy(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n)), 1, format="csr")


def _embed(op: sp.spmatrix, dims: tuple[int, ...], slot: int) -> sp.csr_matrix:
    factors = [sp.identity(d, format="csr") for d in dims]
    factors[slot] = op.tocsr()
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


@dataclass
class TruncatedSystem:
    """Sparse Hamiltonian + collapse operators on a product Fock basis."""

    dims: tuple[int, ...]
    hamiltonian: sp.csr_matrix
    collapse_ops: list[sp.csr_matrix]
    labels: tuple[str, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        H = self.hamiltonian
        herm_defect = abs(H - H.getH()).max()
        scale = max(1.0, abs(H).max())
        if herm_defect > 1e-12 * scale:
            raise KerrcritError(f"Hamiltonian not Hermitian (defect {herm_defect:g})")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def mode_op(self, slot: int, op: sp.spmatrix) -> sp.csr_matrix:
        return _embed(op, self.dims, slot)

    def lowering(self, slot: int) -> sp.csr_matrix:
        return self.mode_op(slot, destroy(self.dims[slot]))

    def number(self, slot: int) -> sp.csr_matrix:
        a = destroy(self.dims[slot])
        return self.mode_op(slot, (a.getH() @ a).tocsr())

    def liouvillian(self) -> sp.csr_matrix:
        """Generator acting on row-major vectorized density matrices."""
        n = self.size
        eye = sp.identity(n, format="csr")
        H = self.hamiltonian
        L = -1j * (sp.kron(H, eye, format="csr") - sp.kron(eye, H.T, format="csr"))
        for c in self.collapse_ops:
            cd_c = (c.getH() @ c).tocsr()
            L = L + sp.kron(c, c.conj(), format="csr") \
                - 0.5 * (sp.kron(cd_c, eye, format="csr")
                         + sp.kron(eye, cd_c.T, format="csr"))
        return L.tocsr()

    def leakage(self, rho: np.ndarray) -> dict[str, float]:
        """Population in the top two Fock levels of each mode."""
        pops = np.real(np.diag(rho)).reshape(self.dims)
        out = {}
        for slot, label in enumerate(self.labels):
            if self.dims[slot] < 3:
                continue
            axis_pop = np.sum(pops, axis=tuple(i for i in range(len(self.dims))
                                               if i != slot))
            out[label] = float(axis_pop[-2:].sum())
        return out

    def check_leakage(self, rho: np.ndarray, tol: float = 1e-6) -> None:
        leaks = self.leakage(rho)
        bad = {k: v for k, v in leaks.items() if v > tol}
        if bad:
            raise DimensionOverflow(f"truncation leakage over {tol:g}: {bad}")


def build(model: str, dims: tuple[int, ...], budget: int = DIMENSION_BUDGET,
          **params) -> TruncatedSystem:
    """Assemble a truncated model Hamiltonian with its collapse operators.

    ``model`` is one of:
      "full"        three-mode radiation-pressure form with microwave drive;
                    params omega_a, omega_b, delta_c, g_a, g_c, epsilon_c,
                    kappa_a, kappa_c, kappa_b.
      "linearized"  drive-displaced quadratic electromechanical block with
                    the optical Kerr progenitor term; params omega_a_tilde,
                    omega_b, Delta_c, g_a, G, kappa_a, kappa_c, kappa_b.
      "normal_mode" photon coupled to the two Bogoliubov modes (the form the
                    displaced-oscillator transform diagonalizes); params
                    omega_a_tilde, omegas, couplings, kappa_a, kappas.
      "driven"      polaron-frame weakly driven Kerr cavity with
                    displacement-dressed drive; params Delta_a, eta,
                    epsilon_a, omegas, kappas, zetas, signs, kappa_a.

    Unused decay rates may be zero; zero-rate collapse operators are dropped.
    """
    if any(d < 1 for d in dims):
        raise ValueError("all truncations must be at least 1")
    total = int(np.prod(dims))
    if total > budget:
        raise DimensionOverflow(f"product dimension {total} exceeds budget {budget}")

    def low(slot):
        return _embed(destroy(dims[slot]), dims, slot)

    if model in ("full", "linearized"):
        a, c, b = low(0), low(1), low(2)
        n_a = (a.getH() @ a).tocsr()
        n_c = (c.getH() @ c).tocsr()
        n_b = (b.getH() @ b).tocsr()
        x_b = (b + b.getH()).tocsr()
        if model == "full":
            H = (params["delta_c"] * n_c + params["omega_a"] * n_a
                 + params["omega_b"] * n_b + params["g_a"] * (n_a @ x_b)
                 + params["g_c"] * (n_c @ x_b)
                 + params["epsilon_c"] * (c + c.getH()))
        else:
            x_c = (c + c.getH()).tocsr()
            H = (params["Delta_c"] * n_c + params["omega_a_tilde"] * n_a
                 + params["omega_b"] * n_b + params["g_a"] * (n_a @ x_b)
                 - params["G"] * (x_c @ x_b))
        rates = [(math.sqrt(2.0 * params.get("kappa_a", 0.0)), a),
                 (math.sqrt(2.0 * params.get("kappa_c", 0.0)), c),
                 (math.sqrt(2.0 * params.get("kappa_b", 0.0)), b)]
        labels = ("optical", "microwave", "mechanical")
    elif model in ("normal_mode", "driven"):
        a, bm, bp = low(0), low(1), low(2)
        n_a = (a.getH() @ a).tocsr()
        n_m = (bm.getH() @ bm).tocsr()
        n_p = (bp.getH() @ bp).tocsr()
        omegas = params["omegas"]
        kappas = params.get("kappas", (0.0, 0.0))
        H = omegas[0] * n_m + omegas[1] * n_p
        if model == "normal_mode":
            couplings = params["couplings"]
            H = H + params["omega_a_tilde"] * n_a \
                + couplings[0] * (n_a @ (bm + bm.getH()).tocsr()) \
                + couplings[1] * (n_a @ (bp + bp.getH()).tocsr())
        else:
            zetas = params["zetas"]
            signs = params.get("signs", (1, -1))
            P = (signs[0] * zetas[0] * (bm.getH() - bm)
                 + signs[1] * zetas[1] * (bp.getH() - bp)).tocsr()
            exp_minus_P = _matrix_exp(-P)
            H = H + params["Delta_a"] * n_a - params["eta"] * (n_a @ n_a) \
                + params["epsilon_a"] * (a.getH() @ exp_minus_P
                                         + exp_minus_P.getH() @ a)
        rates = [(math.sqrt(2.0 * params.get("kappa_a", 0.0)), a),
                 (math.sqrt(kappas[0]), bm),
                 (math.sqrt(kappas[1]), bp)]
        labels = ("optical", "B_minus", "B_plus")
    else:
        raise ValueError(f"unknown model {model!r}")

    collapse = [(r * op).tocsr() for r, op in rates if r > 0.0]
    H = (H + H.getH()) * 0.5  # symmetrize away kron roundoff
    return TruncatedSystem(dims=tuple(dims), hamiltonian=H.tocsr(),
                           collapse_ops=collapse, labels=labels,
                           meta={"model": model, "params": dict(params)})


def _matrix_exp(op: sp.spmatrix) -> sp.csr_matrix:
    return sp.csr_matrix(dense_expm(op.toarray()))


def polaron_displacement(sys: TruncatedSystem, zetas, signs=(1, -1),
                         sign: float = 1.0) -> sp.csr_matrix:
    """exp(sign * P) on a normal-mode-basis system.

    P = s_- zeta_- (B_-^+ - B_-) + s_+ zeta_+ (B_+^+ - B_+), embedded with
    identity on the optical slot.
    """
    bm, bp = sys.lowering(1), sys.lowering(2)
    P = (signs[0] * zetas[0] * (bm.getH() - bm)
         + signs[1] * zetas[1] * (bp.getH() - bp)).tocsr()
    return _matrix_exp(sign * P)


def steady_state(sys: TruncatedSystem, check_unique: bool | None = None,
                 positivity_floor: float = 1e-9) -> np.ndarray:
    """Null vector of the Liouvillian, normalized to unit trace.

    Solves the rank-deficient system by replacing one row with the trace
    constraint. The result is checked for Hermiticity, positivity (to the
    given eigenvalue floor), residual, and truncation leakage. Uniqueness is
    certified by a dense null-space count for small systems (or when
    ``check_unique`` is forced); otherwise a multi-start residual check is
    used as a best-effort degeneracy probe.
    """
    if not sys.collapse_ops:
        raise ValueError("steady state requires at least one collapse operator")
    n = sys.size
    L_csr = sys.liouvillian()
    L = L_csr.tolil()
    trace_idx = np.arange(n) * (n + 1)
    scale = max(1.0, abs(sys.hamiltonian).max())

    if check_unique is None:
        check_unique = n <= 32
    if check_unique:
        dense = L_csr.toarray()
        svals = np.linalg.svd(dense, compute_uv=False)
        null_dim = int(np.sum(svals < 1e-10 * max(svals[0], 1.0)))
        if null_dim != 1:
            raise DegenerateLiouvillian(
                f"Liouvillian null space has dimension {null_dim}"
            )

    row = np.zeros(n * n)
    row[trace_idx] = 1.0
    L_solve = L
    L_solve[0, :] = row
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    vec = spla.spsolve(L_solve.tocsc(), rhs)

    residual = np.max(np.abs(L_csr @ vec))
    if not np.isfinite(vec).all() or residual > 1e-8 * scale:
        raise DegenerateLiouvillian(
            f"steady-state solve residual {residual:g}; Liouvillian singular "
            f"beyond the trace direction or ill-conditioned"
        )

    rho = vec.reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -positivity_floor:
        raise DegenerateLiouvillian(
            f"steady state not positive (min eigenvalue {evals.min():g})"
        )
    return rho


def propagate(sys: TruncatedSystem, rho: np.ndarray, t: float,
              liouvillian: sp.csr_matrix | None = None) -> np.ndarray:
    """exp(L t) applied to a (generally non-Hermitian) operator."""
    if t < 0.0:
        raise ValueError("propagation time must be non-negative")
    if t == 0.0:
        return rho
    L = sys.liouvillian() if liouvillian is None else liouvillian
    vec = rho.reshape(-1)
    if vec.size <= _DENSE_EXPM_CUTOFF:
        out = dense_expm(L.toarray() * t) @ vec
    else:
        out = spla.expm_multiply(L * t, vec)
    if not np.isfinite(out).all():
        raise IntegratorFailure("propagation produced non-finite values")
    return out.reshape(rho.shape)


def regression_correlator(sys: TruncatedSystem, ops, times,
                          rho0: np.ndarray | None = None) -> complex:
    """Multi-time correlator <X_1(t_1) ... X_m(t_m)> by quantum regression.

    ``ops`` are matrices in string order, ``times`` their Heisenberg times.
    The string must be time-unimodal (times rise toward a single latest
    operator block and fall away from it); scanning times in ascending
    order, operators standing left of the not-yet-applied block
    right-multiply the evolved state and operators standing right of it
    left-multiply, which is the Markovian regression rule. Times may be
    negative; the state is stationary so only differences matter.
    """
    if len(ops) != len(times):
        raise ValueError("ops and times must have equal length")
    if rho0 is None:
        rho0 = steady_state(sys, check_unique=False)
    times = np.asarray(times, dtype=float)
    times = times - times.min()
    L = sys.liouvillian()

    order = sorted(range(len(ops)), key=lambda p: times[p])
    remaining = set(range(len(ops)))
    sigma = np.array(rho0, dtype=complex)
    t_now = 0.0
    t_peak = times.max()

    grouped: list[tuple[float, list[int]]] = []
    for p in order:
        if grouped and times[p] == grouped[-1][0]:
            grouped[-1][1].append(p)
        else:
            grouped.append((times[p], [p]))

    for t, positions in grouped:
        if t == t_peak:
            break
        sigma = propagate(sys, sigma, t - t_now, liouvillian=L)
        t_now = t
        later = remaining.difference(positions)
        lo, hi = min(later), max(later)
        if any(lo < p < hi for p in positions):
            raise ValueError("operator string is not time-unimodal; "
                             "not regression-computable")
        left_side = [p for p in sorted(positions) if p < lo]
        right_side = [p for p in sorted(positions) if p > hi]
        if right_side:
            block = _matmul_chain([ops[p] for p in right_side])
            sigma = block @ sigma
        if left_side:
            block = _matmul_chain([ops[p] for p in left_side])
            sigma = sigma @ block
        remaining.difference_update(positions)

    sigma = propagate(sys, sigma, t_peak - t_now, liouvillian=L)
    peak_positions = sorted(remaining)
    if peak_positions != list(range(peak_positions[0], peak_positions[-1] + 1)):
        raise ValueError("peak-time operators are not contiguous in the string")
    block = _matmul_chain([ops[p] for p in peak_positions])
    return complex(np.trace(block @ sigma))


def _matmul_chain(mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return np.asarray(out.todense()) if sp.issparse(out) else np.asarray(out)


def expectation(op, rho: np.ndarray) -> complex:
    op = op.toarray() if sp.issparse(op) else op
    return complex(np.trace(op @ rho))


def g2_from_density(sys: TruncatedSystem, rho: np.ndarray) -> float:
    """<a+ a+ a a>/<a+ a>^2 with a the optical (slot 0) lowering operator."""
    a = sys.lowering(0).toarray()
    ad = a.conj().T
    n_mean = expectation(ad @ a, rho).real
    pair = expectation(ad @ ad @ a @ a, rho).real
    return pair / n_mean**2


def photon_block(sys: TruncatedSystem, k: int) -> np.ndarray:
    """Dense sub-Hamiltonian at fixed photon number k (slot 0).

    Valid when the Hamiltonian commutes with the photon number, as in the
    "normal_mode" and "linearized" (epsilon_c = 0) models.
    """
    stride = int(np.prod(sys.dims[1:]))
    H = sys.hamiltonian
    block = H[k * stride:(k + 1) * stride, k * stride:(k + 1) * stride]
    off_norm = abs(H[k * stride:(k + 1) * stride, :k * stride]).max() \
        if k > 0 else 0.0
    if off_norm > 1e-12:
        raise KerrcritError("Hamiltonian does not conserve photon number")
    return block.toarray()


def two_photon_kerr_gap(omega_a_tilde: float, omegas, couplings,
                        dims_b=(12, 12)) -> float:
    """E(2) - 2 E(1) + E(0) of the photon-coupled normal-mode model.

    Ground energies of the 0-, 1-, and 2-photon blocks after exact
    diagonalization; equals -2 eta when the displaced-oscillator reduction
    is exact, which independently validates the Kerr-strength formula.
    """
    sys = build("normal_mode", (3, *dims_b), omega_a_tilde=omega_a_tilde,
                omegas=omegas, couplings=couplings, kappa_a=0.0,
                kappas=(0.0, 0.0))
    energies = []
    for k in range(3):
        block = photon_block(sys, k)
        energies.append(float(np.linalg.eigvalsh(block)[0]))
    return energies[2] - 2.0 * energies[1] + energies[0]