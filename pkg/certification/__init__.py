"""Parent-Hamiltonian certification of Dicke states from three-basis shot data."""

from certification.errors import CertificationError, InputError, SchemaError, SpectralVerificationError

__all__ = ["CertificationError", "InputError", "SchemaError", "SpectralVerificationError"]
