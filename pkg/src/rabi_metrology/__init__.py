"""Fidelity, quantum and classical Fisher information for a laser-driven
two-level atom with quantized center-of-mass momentum."""

from .exceptions import (
    DegenerateFrequency,
    IndeterminateAtBoundary,
    NonConvergence,
    NumericsError,
    StepTooCoarse,
)
from .params import (
    HBAR_CODATA,
    GaussianPacket,
    PhysicalParams,
    omega_p,
    omega_prime,
    recoil_shift,
)
from .su2 import (
    AxisAngle,
    RVector,
    exp_axis_angle,
    generator_rvector,
    rvector_with_kinetic,
    rvector_without_kinetic,
)
from .quadrature import (
    MomentumGrid,
    build_measurement_grid,
    gaussian_expectation,
    gaussian_expectation_hermite,
)
from .metrics import (
    FidelityResult,
    QfiResult,
    fidelity,
    qfi_with_kinetic,
    qfi_without_kinetic,
)
from .cfi import (
    BranchDensity,
    branch_density_with_kinetic,
    cfi_cm,
    cfi_mm,
    cfi_pdm_with_kinetic,
    cfi_pdm_without_kinetic,
    pa_with_kinetic,
    pa_without_kinetic,
)
from .oracle import (
    PropagationResult,
    cfi_fd,
    draw_parameters,
    evolve_closed,
    evolve_numeric,
    fidelity_numeric,
    qfi_fd,
)

__version__ = "0.1.0"

__all__ = [
    "AxisAngle",
    "BranchDensity",
    "DegenerateFrequency",
    "FidelityResult",
    "GaussianPacket",
    "HBAR_CODATA",
    "IndeterminateAtBoundary",
    "MomentumGrid",
    "NonConvergence",
    "NumericsError",
    "PhysicalParams",
    "PropagationResult",
    "QfiResult",
    "RVector",
    "StepTooCoarse",
    "branch_density_with_kinetic",
    "build_measurement_grid",
    "cfi_cm",
    "cfi_fd",
    "cfi_mm",
    "cfi_pdm_with_kinetic",
    "cfi_pdm_without_kinetic",
    "draw_parameters",
    "evolve_closed",
    "evolve_numeric",
    "exp_axis_angle",
    "fidelity",
    "fidelity_numeric",
    "gaussian_expectation",
    "gaussian_expectation_hermite",
    "generator_rvector",
    "omega_p",
    "omega_prime",
    "pa_with_kinetic",
    "pa_without_kinetic",
    "qfi_fd",
    "qfi_with_kinetic",
    "qfi_without_kinetic",
    "recoil_shift",
    "rvector_with_kinetic",
    "rvector_without_kinetic",
    "__version__",
]
