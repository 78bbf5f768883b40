"""Exception types raised across the package.

Numerical routines raise these instead of returning sentinel values, so the
CLI can map failure classes onto exit codes (config errors vs numerical
failures vs partially flagged sweeps).
"""


class KerrcritError(Exception):
    """Base class for all package errors."""


class ConfigError(KerrcritError):
    """Malformed parameter file, unknown keys, or ambiguous units."""


class LinearizationFailure(KerrcritError):
    """The self-consistent detuning equation has no physically admissible root."""


class FixedPointDivergence(KerrcritError):
    """The detuning fixed-point iteration did not converge within its budget."""


class InfeasibleTarget(KerrcritError):
    """Requested (coupling, detuning) pair cannot be produced by any drive."""


class InvalidDetuning(KerrcritError):
    """Operation requires a positive effective microwave detuning."""


class BeyondCriticalPoint(KerrcritError):
    """Normal modes are dynamically unstable at the requested point."""


class CriticalDivergence(KerrcritError):
    """Kerr denominator below the configured floor; photon-photon strength diverges.

    Carries the diagnostic value computed with the unclamped denominator.
    """

    def __init__(self, message, diagnostic_eta=None):
        super().__init__(message)
        self.diagnostic_eta = diagnostic_eta


class QuadratureNotConverged(KerrcritError):
    """Estimated quadrature error exceeds the requested tolerance.

    The partial result is attached so callers can still inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InsufficientTruncation(KerrcritError):
    """Fock-space truncation loses more probability than allowed."""


class NonStroboscopicPhase(KerrcritError):
    """Kerr phase is not close to any rational multiple of 2*pi within q_max."""


class UnresolvableComponents(KerrcritError):
    """Coherent-state design matrix too ill-conditioned to separate components."""


class DimensionOverflow(KerrcritError):
    """Requested truncated product space exceeds the dimension budget."""


class DegenerateLiouvillian(KerrcritError):
    """Steady state is not unique (or could not be certified unique)."""


class IntegratorFailure(KerrcritError):
    """Propagation of the master equation was rejected by error control."""
