"""Exception types.  Every error carries a short machine-readable ``code``."""

from __future__ import annotations


class DefectLabError(Exception):
    code = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_json(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return str(v)


def _make(name: str, code: str) -> type:
    return type(name, (DefectLabError,), {"code": code})


SpecMismatch = _make("SpecMismatch", "spec-mismatch")
InvalidGroup = _make("InvalidGroup", "invalid-group")
NoNontrivialPseudonorm = _make("NoNontrivialPseudonorm", "no-nontrivial-pseudonorm")
NonComposable = _make("NonComposable", "non-composable")
NonzeroComposition = _make("NonzeroComposition", "nonzero-composition")
EndpointMismatch = _make("EndpointMismatch", "endpoint-mismatch")
InvalidTrail = _make("InvalidTrail", "invalid-trail")
UnsupportedDimension = _make("UnsupportedDimension", "unsupported-dimension")
NoEnclosingRing = _make("NoEnclosingRing", "no-enclosing-ring")
WindowTooSmall = _make("WindowTooSmall", "window-too-small")
RadiusTooSmall = _make("RadiusTooSmall", "radius-too-small")
TrailExitsWindow = _make("TrailExitsWindow", "trail-exits-window")
OutOfWindow = _make("OutOfWindow", "out-of-window")
BudgetExceeded = _make("BudgetExceeded", "budget-exceeded")
ValueEscapesSubgroup = _make("ValueEscapesSubgroup", "value-escapes-subgroup")
DegreeUnsupported = _make("DegreeUnsupported", "degree-unsupported")
AmbiguousPath = _make("AmbiguousPath", "ambiguous-path")
NoBoundary = _make("NoBoundary", "no-boundary")
WindowExhausted = _make("WindowExhausted", "window-exhausted")
DefectNotEnclosable = _make("DefectNotEnclosable", "defect-not-enclosable")
DisconnectedColourGraph = _make("DisconnectedColourGraph", "disconnected-colour-graph")
NotInvariant = _make("NotInvariant", "not-invariant")
SchemaError = _make("SchemaError", "schema-error")
