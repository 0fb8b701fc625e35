"""wpkit: exact Weil-Petersson volumes, hyperbolic pants census, multicurve
bounds, inclusion-exclusion ledgers and trace-method test functions."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    NumericalError,
    ResourceCapError,
    VerificationError,
    WpkitError,
)
from .volumes import Signature, VolumeCache, VolumePolynomial, compute_volume

__all__ = [
    "DomainError",
    "NumericalError",
    "ResourceCapError",
    "Signature",
    "VerificationError",
    "VolumeCache",
    "VolumePolynomial",
    "WpkitError",
    "compute_volume",
    "__version__",
]
