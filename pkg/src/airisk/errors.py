"""Shared exception types and the Finding record used across the package.

Exceptions are reserved for contract violations (bad arguments, malformed
documents). Data-quality problems discovered while validating scenarios or
portfolios are reported as lists of :class:`Finding` instead, so callers can
surface every problem at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class AiriskError(Exception):
    """Base class for all package errors."""


class SchemaError(AiriskError):
    """A document is malformed: not parseable, or violates its JSON schema."""


class ValidationError(AiriskError):
    """Semantic invariants are violated. Carries the full list of findings."""

    def __init__(self, findings: list["Finding"]):
        self.findings = list(findings)
        lines = "; ".join(f.message for f in self.findings)
        super().__init__(f"{len(self.findings)} validation finding(s): {lines}")


class UnknownId(AiriskError, LookupError):
    """An id does not resolve in the registry or store."""


class DegenerateInterval(AiriskError):
    """Calibration interval bounds are equal or reversed."""


class NonPositiveBound(AiriskError):
    """Calibration interval bound is zero or negative."""


class InvalidConfidence(AiriskError):
    """A confidence level lies outside the open interval (0, 1)."""


class ModelParameterError(AiriskError):
    """A frequency or severity model has out-of-bounds parameters."""


class InvalidTrialCount(AiriskError):
    """Trial count must be a positive integer."""


class TrialCountMismatch(AiriskError):
    """Trial sets being aggregated have differing trial counts."""


class EmptyPortfolio(TrialCountMismatch):
    """Nothing to aggregate."""


class InapplicableControl(AiriskError):
    """A control's applicable_domains does not cover the scenario's domain."""


class ValidationFailed(AiriskError):
    """A workflow was started on a portfolio with error-level findings."""

    def __init__(self, findings: list["Finding"]):
        self.findings = list(findings)
        super().__init__(
            f"portfolio failed validation with {len(self.findings)} finding(s)"
        )


class UnsupportedFormat(AiriskError):
    """Requested render format is not one of the supported formats."""


@dataclass(frozen=True)
class Finding:
    """One validation problem. severity is "error" or "warning"."""

    code: str
    message: str
    severity: str = "error"
    field: str = field(default="")

    def is_error(self) -> bool:
        return self.severity == "error"


def errors_only(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.is_error()]
