"""Exception taxonomy.

Every error carries a stable string ``code`` that the command-line front end
serializes verbatim, so the codes are part of the public contract.
"""

from __future__ import annotations


class SurveyPSError(Exception):
    """Base class for all package errors."""

    code = "E_INTERNAL"

    def __init__(self, message: str, *, module: str | None = None, arm: str | None = None):
        super().__init__(message)
        self.module = module
        self.arm = arm

    def tagged(self, *, module: str | None = None, arm: str | None = None) -> "SurveyPSError":
        """Attach provenance without losing an already-set tag."""
        if self.module is None and module is not None:
            self.module = module
        if self.arm is None and arm is not None:
            self.arm = arm
        return self

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        if self.module is not None:
            out["module"] = self.module
        if self.arm is not None:
            out["arm"] = self.arm
        return out


class ParseError(SurveyPSError):
    code = "E_PARSE"


class ConfigError(SurveyPSError):
    code = "E_CONFIG"


class NonConvergence(SurveyPSError):
    code = "E_NONCONVERGENCE"


class Separation(SurveyPSError):
    code = "E_SEPARATION"


class DegenerateDesign(SurveyPSError):
    code = "E_DEGENERATE_DESIGN"


class MissingSampleLevelFit(SurveyPSError):
    code = "E_MISSING_FIT"


class EmptyArmWeight(SurveyPSError):
    code = "E_EMPTY_ARM"


class SingularA(SurveyPSError):
    code = "E_SINGULAR_A"


class ZeroVariance(SurveyPSError):
    code = "E_ZERO_VARIANCE"


class InfeasibleAllocation(SurveyPSError):
    code = "E_INFEASIBLE_ALLOCATION"


class DimensionMismatch(SurveyPSError):
    code = "E_DIMENSION"
