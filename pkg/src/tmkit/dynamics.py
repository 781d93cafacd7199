"""Compile dynamic declarations against a static model.

Each declared event is bound to a concrete :class:`~tmkit.model.Region`;
negative events share the very same region object as the event they pair
with, and the chronology becomes a guarded precedence graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .decls import ChoiceDecl, ChronEdge, ChronItem, ChronJoin, DynamicDecls, EventDecl
from .errors import CompileError, EmptyRegion, IntraInstanceCycle, ModelError, UnknownEvent, error
from .model import Region, StaticModel
from .validator import validate


class EventKind(str, Enum):
    ENTITY_LIKE = "entity"
    PROCESS_LIKE = "process"


@dataclass(frozen=True)
class Event:
    name: str
    description: str
    region: Region
    duration: int = 1
    extended: bool = False
    measure: Optional[str] = None
    kind: EventKind = EventKind.PROCESS_LIKE
    instant: bool = False


@dataclass(frozen=True)
class NegativeEvent:
    name: str
    paired: str
    region: Region


def natural_key(name: str) -> tuple:
    """Sort key ordering ``E2`` before ``E10``."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


@dataclass
class ChronologyGraph:
    nodes: tuple[str, ...] = ()
    negatives: tuple[str, ...] = ()
    edges: tuple[ChronEdge, ...] = ()
    joins: tuple[ChronJoin, ...] = ()

    def guards(self) -> set[str]:
        found = {e.guard for e in self.edges if e.guard is not None}
        found.update(i.guard for j in self.joins for i in j.inputs if i.guard is not None)
        found.update(j.guard for j in self.joins if j.guard is not None)
        return found

    def out_edges(self, name: str) -> list[ChronEdge]:
        return [e for e in self.edges if e.src == name]

    def roots(self) -> list[str]:
        """Events with no incoming edge and not fed by a join: they start each instance."""
        targets = {e.dst for e in self.edges} | {j.output for j in self.joins}
        return [n for n in self.nodes if n not in targets]

    def unguarded_successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes + self.negatives}
        for e in self.edges:
            if e.guard is None:
                succ[e.src].append(e.dst)
        for j in self.joins:
            for i in j.inputs:
                if i.guard is None and j.guard is None:
                    succ[i.name].append(j.output)
        return succ

    def is_dag_without_guards(self) -> bool:
        return find_cycle(self.unguarded_successors()) is None


def find_cycle(succ: dict[str, list[str]]) -> Optional[list[str]]:
    """First cycle found by depth-first search, closed on its start node."""
    white, grey, black = 0, 1, 2
    color = {n: white for n in succ}
    for start in sorted(succ, key=natural_key):
        if color[start] != white:
            continue
        stack = [(start, iter(succ[start]))]
        path = [start]
        color[start] = grey
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                color[node] = black
            elif color[nxt] == grey:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == white:
                color[nxt] = grey
                path.append(nxt)
                stack.append((nxt, iter(succ[nxt])))
    return None


@dataclass
class DynamicModel:
    static: StaticModel
    events: dict[str, Event] = field(default_factory=dict)
    negatives: dict[str, NegativeEvent] = field(default_factory=dict)
    chronology: ChronologyGraph = field(default_factory=ChronologyGraph)
    choices: tuple[ChoiceDecl, ...] = ()

    def region_of(self, name: str) -> Region:
        if name in self.events:
            return self.events[name].region
        return self.negatives[name].region


def extract_region(model: StaticModel, decl: EventDecl) -> Region:
    stages = [model.resolve_ref(ref) for ref in decl.region]
    if not stages:
        raise EmptyRegion(f"event {decl.name} has an empty region")
    return model.induced_subdiagram(stages)


def build_chronology(dynamic: DynamicModel, chron_decls: Iterable[ChronItem]) -> ChronologyGraph:
    events = dynamic.events
    negatives = dynamic.negatives
    edges, joins = [], []
    for item in chron_decls:
        if isinstance(item, ChronEdge):
            if item.src not in events:
                raise UnknownEvent(f"chronology edge from undeclared event {item.src!r}")
            if item.dst not in events and item.dst not in negatives:
                raise UnknownEvent(f"chronology edge to undeclared event {item.dst!r}")
            edges.append(item)
        else:
            for name in [i.name for i in item.inputs] + [item.output]:
                if name not in events:
                    raise UnknownEvent(f"chronology join references undeclared event {name!r}")
            joins.append(item)
    graph = ChronologyGraph(tuple(events), tuple(negatives), tuple(edges), tuple(joins))
    cycle = find_cycle(graph.unguarded_successors())
    if cycle is not None:
        raise IntraInstanceCycle(f"unguarded chronology cycle: {' -> '.join(cycle)}")
    return graph


def compile_dynamic(model: StaticModel, decls: DynamicDecls) -> DynamicModel:
    """Bind events to regions, alias negatives to their pairs, build the chronology."""
    diags = validate(model, decls)
    if diags.has_errors:
        raise CompileError(diags)
    dynamic = DynamicModel(model, choices=tuple(decls.choices))
    for decl in decls.events:
        try:
            region = extract_region(model, decl)
        except ModelError as exc:  # pragma: no cover - validate() already caught these
            raise CompileError([_diag(exc)]) from None
        dynamic.events[decl.name] = Event(
            decl.name,
            decl.description,
            region,
            decl.duration,
            decl.extended,
            decl.measure,
            EventKind.ENTITY_LIKE if decl.entity else EventKind.PROCESS_LIKE,
            decl.instant,
        )
    for neg in decls.negatives:
        paired = dynamic.events[neg.paired]
        dynamic.negatives[neg.name] = NegativeEvent(neg.name, neg.paired, paired.region)
    try:
        dynamic.chronology = build_chronology(dynamic, decls.chronology)
    except (UnknownEvent, IntraInstanceCycle) as exc:
        raise CompileError([_diag(exc)]) from None
    return dynamic


def _diag(exc: Exception):
    return error(getattr(exc, "code", "E_COMPILE"), str(exc))


__all__ = [
    "ChronologyGraph",
    "DynamicModel",
    "Event",
    "EventKind",
    "NegativeEvent",
    "build_chronology",
    "compile_dynamic",
    "extract_region",
    "find_cycle",
    "natural_key",
]
