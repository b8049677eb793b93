"""Spectral characterisation of conducting permeable objects.

The package assembles frequency-dependent magnetic polarizability tensors
from eigenmode data, represents them as pole-residue expansions, predicts
transient responses to step/impulse excitation, and verifies every identity
against two oracles: the analytic solution for a conducting permeable sphere
and a finite-dimensional symmetric surrogate problem.
"""

from .errors import (
    DomainError,
    InvalidInputError,
    InvalidRotationError,
    MptError,
    NoDominantModeError,
    NoFitError,
    NumericRangeError,
    PoleProximityError,
    PoleSpacingError,
    SchemaError,
    SingularityError,
)
from .fitting import FitResult, SweepData, fit_dominant, fit_report
from .poleresidue import (
    PoleResidueExpansion,
    evaluate,
    from_model,
    residue_at_pole,
    select_truncation,
)
from .spectral import (
    MU0,
    FrequencyGrid,
    Mode,
    SpectralModel,
    assemble,
    assemble_dlog,
    beta,
    beta_dlog,
    commutator_Z,
    dominant_mode,
    limit_tensors,
    mode_tensor,
    modes_from_eigenvalues,
    rotate_model,
)
from .sphere import SphereSpec, mpt_sphere, sphere_poles, sphere_spectral_model
from .surrogate import (
    SurrogateProblem,
    VerificationReport,
    direct_theta1,
    eigen_model,
    energy_tensors_direct,
    generate,
    verify_identities,
)
from .tensors import (
    ComplexSymTensor3,
    OffdiagBoundReport,
    Rotation3,
    SymTensor3,
    dipole_green_hessian,
    eigen_sym3,
    offdiag_bound_report,
    perturbed_field,
    rotate_tensor,
)
from .transient import (
    TransientKernel,
    Waveform,
    convolve_excitation,
    impulse_kernel,
    step_kernel,
    transient_field,
)

__version__ = "0.1.0"

__all__ = [
    "MU0",
    "ComplexSymTensor3",
    "DomainError",
    "FitResult",
    "FrequencyGrid",
    "InvalidInputError",
    "InvalidRotationError",
    "Mode",
    "MptError",
    "NoDominantModeError",
    "NoFitError",
    "NumericRangeError",
    "OffdiagBoundReport",
    "PoleProximityError",
    "PoleResidueExpansion",
    "PoleSpacingError",
    "Rotation3",
    "SchemaError",
    "SingularityError",
    "SpectralModel",
    "SphereSpec",
    "SurrogateProblem",
    "SweepData",
    "SymTensor3",
    "TransientKernel",
    "VerificationReport",
    "Waveform",
    "assemble",
    "assemble_dlog",
    "beta",
    "beta_dlog",
    "commutator_Z",
    "convolve_excitation",
    "dipole_green_hessian",
    "direct_theta1",
    "dominant_mode",
    "eigen_model",
    "eigen_sym3",
    "energy_tensors_direct",
    "evaluate",
    "fit_dominant",
    "fit_report",
    "from_model",
    "generate",
    "impulse_kernel",
    "limit_tensors",
    "mode_tensor",
    "modes_from_eigenvalues",
    "mpt_sphere",
    "offdiag_bound_report",
    "perturbed_field",
    "residue_at_pole",
    "rotate_model",
    "rotate_tensor",
    "select_truncation",
    "sphere_poles",
    "sphere_spectral_model",
    "step_kernel",
    "transient_field",
    "verify_identities",
]
