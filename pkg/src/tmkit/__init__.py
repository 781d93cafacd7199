"""Executable thinging-machine models: parse, validate, compile, simulate, render."""

from .decls import ChoiceDecl, ChronEdge, ChronJoin, DynamicDecls, EventDecl, JoinInput, NegativeDecl
from .dsl import SourceFile, format_model, parse, parse_text, print_model
from .dynamics import DynamicModel, compile_dynamic
from .errors import Diagnostic, Diagnostics, TMError
from .model import ActionKind, ArcKind, StaticModel, ThingClassification, TransferDirection, new_model
from .validator import check_adjacency, validate

__version__ = "0.1.0"

__all__ = [
    "ActionKind",
    "ArcKind",
    "ChoiceDecl",
    "ChronEdge",
    "ChronJoin",
    "Diagnostic",
    "Diagnostics",
    "DynamicDecls",
    "DynamicModel",
    "EventDecl",
    "JoinInput",
    "NegativeDecl",
    "SourceFile",
    "StaticModel",
    "TMError",
    "ThingClassification",
    "TransferDirection",
    "check_adjacency",
    "compile_dynamic",
    "format_model",
    "new_model",
    "parse",
    "parse_text",
    "print_model",
    "validate",
]
