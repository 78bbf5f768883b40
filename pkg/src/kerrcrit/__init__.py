"""Criticality-enhanced Kerr nonlinearity in a hybrid electro-optomechanical cavity.

Analytic pipeline (linearization, normal modes, Kerr strength, photon
statistics, cat states) plus an independent truncated-Fock-space oracle.
"""

from .catstate import (CatState, WignerGrid, cat_regime_map, decompose_cat,
                       evolve_cat, wigner)
from .correlations import (CorrelationKernel, DriveConfig, G2Result,
                           QuadratureConfig, g2_zero, g2_zero_kernel,
                           kernel_from_frame, phi2, phi4)
from .model import (LinearizedModel, SystemParams, linearize, target_drive,
                    with_drive)
from .spectrum import (NormalModes, PolaronFrame, critical_detuning,
                       critical_point, diagonalize, kerr_strength)

__version__ = "0.1.0"

__all__ = [
    "CatState", "CorrelationKernel", "DriveConfig", "G2Result",
    "LinearizedModel", "NormalModes", "PolaronFrame", "QuadratureConfig",
    "SystemParams", "WignerGrid", "cat_regime_map", "critical_detuning",
    "critical_point", "decompose_cat", "diagonalize", "evolve_cat",
    "g2_zero", "g2_zero_kernel", "kernel_from_frame", "kerr_strength",
    "linearize", "phi2", "phi4", "target_drive", "wigner", "with_drive",
    "__version__",
]
