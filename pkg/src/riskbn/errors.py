"""Exception taxonomy shared by every module.

Each error carries a stable machine-readable ``code`` plus an optional
``locus`` (node name, line number, tick index, ...) so the CLI and HTTP
service can emit structured ``{code, message, locus}`` payloads.
"""

from __future__ import annotations


class RiskbnError(Exception):
    code = "Error"

    def __init__(self, message: str, locus: str | None = None):
        super().__init__(message)
        self.message = message
        self.locus = locus

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "locus": self.locus}


class CycleDetected(RiskbnError):
    code = "CycleDetected"


class OverlappingSets(RiskbnError):
    code = "OverlappingSets"


class CardinalityMismatch(RiskbnError):
    code = "CardinalityMismatch"


class VariableNotInScope(RiskbnError):
    code = "VariableNotInScope"


class StateOutOfRange(RiskbnError):
    code = "StateOutOfRange"


class ZeroMass(RiskbnError):
    """Total mass vanished: the supplied evidence is impossible under the model."""

    code = "ZeroMass"


class ConflictingEvidence(RiskbnError):
    code = "ConflictingEvidence"


class StateSpaceTooLarge(RiskbnError):
    code = "StateSpaceTooLarge"


class ParseError(RiskbnError):
    code = "ParseError"


class ValidationFailed(RiskbnError):
    code = "ValidationFailed"

    def __init__(self, message: str, violations=None, locus=None):
        super().__init__(message, locus)
        self.violations = list(violations or [])

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["violations"] = [v.to_dict() if hasattr(v, "to_dict") else v for v in self.violations]
        return d


class EmptyDataset(RiskbnError):
    code = "EmptyDataset"


class InsufficientData(RiskbnError):
    code = "InsufficientData"


class NotFound(RiskbnError):
    code = "NotFound"
