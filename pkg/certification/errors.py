"""
Certification Errors

Exception hierarchy shared by the numerical core, the job system and the CLI.
The CLI maps these onto its exit codes (2 = input/schema, 3 = spectral).
"""

from dataclasses import dataclass
from typing import List, Optional


class CertificationError(Exception):
    """Base class for all errors raised by the certification toolkit."""


class InputError(CertificationError, ValueError):
    """Invalid arguments or violated preconditions."""


@dataclass(frozen=True)
class SchemaIssue:
    """One problem found while validating an external file."""

    location: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.location}: {self.message}"


class SchemaError(InputError):
    """
    A record or Hamiltonian file does not match its schema.

    Carries every issue found so a single run reports all malformed rows.
    """

    def __init__(self, source: str, issues: List[SchemaIssue]):
        self.source = source
        self.issues = list(issues)
        details = "; ".join(str(issue) for issue in self.issues)
        super().__init__(f"{source}: {details}")


class SpectralVerificationError(CertificationError, AssertionError):
    """The dense spectral certificate of a parent Hamiltonian failed."""
