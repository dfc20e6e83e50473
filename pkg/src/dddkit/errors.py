"""Exception types shared across the toolchain."""

from __future__ import annotations


class DddError(Exception):
    """Base class for toolchain failures."""


class UsageError(DddError):
    """An operation was invoked on input that violates its precondition."""


class TargetNotFound(DddError):
    def __init__(self, op, detail: str = ""):
        super().__init__(f"target not found for {op.kind} {op.target!r}" + (f": {detail}" if detail else ""))
        self.op = op


class DuplicateTarget(DddError):
    def __init__(self, op, detail: str = ""):
        super().__init__(f"duplicate target for {op.kind} {op.target!r}" + (f": {detail}" if detail else ""))
        self.op = op


class ResultNotWellFormed(DddError):
    def __init__(self, wf_errors):
        super().__init__("delta result is not well-formed: " + "; ".join(e.message for e in wf_errors))
        self.wf_errors = wf_errors


class NotInvertible(DddError):
    pass


class StaleDiagnostic(DddError):
    pass


class UnknownRepair(DddError):
    pass


class StaleWorkspace(DddError):
    pass


class MalformedRegion(DddError):
    def __init__(self, path: str, line: int, detail: str = ""):
        super().__init__(f"malformed user-code region in {path}:{line}" + (f" ({detail})" if detail else ""))
        self.path = path
        self.line = line


class GenerationRefused(DddError):
    def __init__(self, diagnostics):
        ids = ", ".join(f"{d.rule_id}:{d.subject}" for d in diagnostics)
        super().__init__(f"model has error diagnostics, refusing to generate: {ids}")
        self.diagnostics = diagnostics
