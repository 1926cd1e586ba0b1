"""
sphsep: multiscale separation of vector fields on the sphere into
internal-source, external-source and toroidal parts with regularized,
locally supported space-domain kernels.
"""

from .errors import (
    DomainError,
    InputFormatError,
    PreconditionError,
    SingularityError,
    SphSepError,
    UnderResolutionError,
)
from .kernels import RegularizationConfig, ScaleKernels, WaveletKernels
from .multiscale import SeparationResult, helmholtz_scalars, separate
from .quadrature import EquiangularGrid, GridField, build_grid, convolve_tensor, integrate
from .synthetic import SyntheticSpec, make_field, spectral_oracle

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InputFormatError",
    "PreconditionError",
    "SingularityError",
    "SphSepError",
    "UnderResolutionError",
    "RegularizationConfig",
    "ScaleKernels",
    "WaveletKernels",
    "SeparationResult",
    "helmholtz_scalars",
    "separate",
    "EquiangularGrid",
    "GridField",
    "build_grid",
    "convolve_tensor",
    "integrate",
    "SyntheticSpec",
    "make_field",
    "spectral_oracle",
]
