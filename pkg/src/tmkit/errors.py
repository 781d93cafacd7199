"""Exception hierarchy and diagnostics shared by every tmkit module."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def format(self, source_name: str = "", color: bool = False) -> str:
        where = source_name
        if self.line is not None:
            where = f"{where}:{self.line}:{self.col}" if where else f"{self.line}:{self.col}"
        sev = self.severity.value
        if color:
            sev = ("\x1b[31m" if self.is_error else "\x1b[33m") + sev + "\x1b[0m"
        prefix = f"{where}: " if where else ""
        return f"{prefix}{sev}[{self.code}]: {self.message}"


def error(code: str, message: str, line: Optional[int] = None, col: Optional[int] = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, line, col)


def warning(code: str, message: str, line: Optional[int] = None, col: Optional[int] = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, line, col)


@dataclass
class Diagnostics:
    """Ordered collection of diagnostics; empty means clean."""

    items: list[Diagnostic] = field(default_factory=list)

    def add(self, diag: Diagnostic) -> None:
        self.items.append(diag)

    def extend(self, diags: Iterable[Diagnostic]) -> None:
        self.items.extend(diags)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.items if d.is_error]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.items if not d.is_error]

    @property
    def has_errors(self) -> bool:
        return any(d.is_error for d in self.items)

    def codes(self) -> list[str]:
        return [d.code for d in self.items]

    def __iter__(self) -> Iterator[Diagnostic]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)


class TMError(Exception):
    """Base class for all tmkit errors."""

    code = "E_TM"


class DiagnosticError(TMError):
    """Raised when an operation fails with one or more located diagnostics."""

    def __init__(self, diagnostics: Diagnostics | Iterable[Diagnostic]):
        if not isinstance(diagnostics, Diagnostics):
            diagnostics = Diagnostics(list(diagnostics))
        self.diagnostics = diagnostics
        first = diagnostics.errors[0] if diagnostics.errors else None
        super().__init__(first.format() if first else "failed")


class ParseError(DiagnosticError):
    code = "E_SYNTAX"


class CompileError(DiagnosticError):
    code = "E_COMPILE"


class BpmnError(DiagnosticError):
    code = "E_BPMN"


class XmlError(BpmnError):
    code = "E_XML"


class DanglingRef(BpmnError):
    code = "E_DANGLING_REF"


class UnsupportedConstruct(BpmnError):
    code = "E_UNSUPPORTED"


# core-model construction errors


class ModelError(TMError):
    code = "E_MODEL"


class UnknownParent(ModelError):
    code = "E_UNKNOWN_PARENT"


class DuplicateSiblingName(ModelError):
    code = "E_DUPLICATE"


class UnknownThimac(ModelError):
    code = "E_UNKNOWN_THIMAC"


class DirectionOnNonTransfer(ModelError):
    code = "E_DIRECTION"


class DuplicateLabel(ModelError):
    code = "E_DUPLICATE_LABEL"


class UnknownStage(ModelError):
    code = "E_UNKNOWN_STAGE"


class GuardOnFlow(ModelError):
    code = "E_GUARD_ON_FLOW"


class InvalidJoin(ModelError):
    code = "E_JOIN"


class EmptyRegion(ModelError):
    code = "E_REGION_EMPTY"


class ForeignStage(ModelError):
    code = "E_FOREIGN_STAGE"


class UnknownLabel(ModelError):
    code = "E_UNKNOWN_REF"


class InvalidName(ModelError):
    code = "E_NAME"


# dynamics


class UnknownEvent(TMError):
    code = "E_UNKNOWN_EVENT"


class IntraInstanceCycle(TMError):
    code = "E_CHRON_CYCLE"


# simulator


class ScenarioError(TMError):
    code = "E_SCENARIO"


class UnresolvedGuard(ScenarioError):
    code = "E_GUARD_UNRESOLVED"

    def __init__(self, guards: Iterable[str], instance: Optional[int] = None):
        self.guards = sorted(guards)
        self.instance = instance
        where = f" for instance {instance}" if instance is not None else ""
        super().__init__(f"unresolved guard(s){where}: {', '.join(self.guards)}")


class TickBudgetExceeded(TMError):
    code = "E_TICK_BUDGET"
