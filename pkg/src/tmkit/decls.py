"""Dynamic declarations: events, negative events, guard choices, chronology."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass
class EventDecl:
    name: str
    description: str
    region: tuple[str, ...]
    duration: int = 1
    extended: bool = False
    measure: Optional[str] = None
    entity: bool = False
    instant: bool = False
    line: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.entity:
            self.extended = True  # entities persist for the whole run


@dataclass
class NegativeDecl:
    name: str
    paired: str
    line: Optional[int] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ChoiceDecl:
    """Mutually exclusive guards: exactly one option holds per instance."""

    name: str
    options: tuple[str, ...]


@dataclass(frozen=True)
class ChronEdge:
    src: str
    dst: str
    guard: Optional[str] = None


@dataclass(frozen=True)
class JoinInput:
    name: str
    guard: Optional[str] = None  # input only required when the guard holds


@dataclass(frozen=True)
class ChronJoin:
    inputs: tuple[JoinInput, ...]
    output: str
    guard: Optional[str] = None  # the join fires only when this guard holds


ChronItem = Union[ChronEdge, ChronJoin]


@dataclass
class DynamicDecls:
    events: list[EventDecl] = field(default_factory=list)
    negatives: list[NegativeDecl] = field(default_factory=list)
    choices: list[ChoiceDecl] = field(default_factory=list)
    chronology: list[ChronItem] = field(default_factory=list)

    def event(self, name: str) -> Optional[EventDecl]:
        return next((e for e in self.events if e.name == name), None)

    @property
    def edges(self) -> list[ChronEdge]:
        return [c for c in self.chronology if isinstance(c, ChronEdge)]

    @property
    def joins(self) -> list[ChronJoin]:
        return [c for c in self.chronology if isinstance(c, ChronJoin)]

    def is_empty(self) -> bool:
        return not (self.events or self.negatives or self.choices or self.chronology)
