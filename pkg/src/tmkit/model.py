"""In-memory graph of a static thinging-machine model.

A :class:`StaticModel` holds thimacs (thing/machines), their action stages,
flow and trigger arcs between stages, join bars and memory stores. Every
object gets an integer id from a single per-model counter, so ids are totally
ordered by creation and never reused.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import (
    DirectionOnNonTransfer,
    DuplicateLabel,
    DuplicateSiblingName,
    EmptyRegion,
    ForeignStage,
    GuardOnFlow,
    InvalidJoin,
    InvalidName,
    UnknownLabel,
    UnknownParent,
    UnknownStage,
    UnknownThimac,
)

ThimacId = int
StageId = int
ArcId = int
JoinId = int


class ActionKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"


class TransferDirection(str, Enum):
    IN = "in"
    OUT = "out"
    BOTH = "both"


class ThingClassification(str, Enum):
    EXISTING = "existing"
    SUBSISTING = "subsisting"
    APPEARING = "appearing"


class ArcKind(str, Enum):
    FLOW = "flow"
    TRIGGER = "trigger"


NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
LABEL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.]*$")
_PATH_RE = re.compile(r"^(?P<thimacs>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)\.(?P<kind>[a-z]+)(?:\[(?P<index>\d+)\])?$")
RESERVED_NAMES = frozenset(k.value for k in ActionKind)

_model_uids = itertools.count(1)


@dataclass
class Thimac:
    id: ThimacId
    name: str
    parent: Optional[ThimacId] = None
    classification: ThingClassification = ThingClassification.SUBSISTING
    stages: list[StageId] = field(default_factory=list)
    children: list[ThimacId] = field(default_factory=list)
    is_memory: bool = False
    host: Optional[StageId] = None  # memory thimacs only


@dataclass
class Stage:
    id: StageId
    owner: ThimacId
    kind: ActionKind
    direction: Optional[TransferDirection] = None
    label: Optional[str] = None

    def describe(self) -> str:
        text = self.kind.value
        if self.direction is not None:
            text += f" {self.direction.value}"
        return text


@dataclass
class Arc:
    id: ArcId
    kind: ArcKind
    src: StageId
    dst: StageId
    guard: Optional[str] = None


@dataclass
class JoinBar:
    id: JoinId
    inputs: tuple[ArcId, ...]
    output: StageId


@dataclass(frozen=True)
class Region:
    """Induced subdiagram of a model: a stage set plus every arc inside it."""

    model_uid: int
    nodes: frozenset[StageId]
    arcs: frozenset[ArcId]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(eq=False)
class StaticModel:
    thimacs: dict[ThimacId, Thimac] = field(default_factory=dict)
    stages: dict[StageId, Stage] = field(default_factory=dict)
    arcs: dict[ArcId, Arc] = field(default_factory=dict)
    joins: dict[JoinId, JoinBar] = field(default_factory=dict)
    roots: list[ThimacId] = field(default_factory=list)
    next_id: int = 0
    uid: int = field(default_factory=lambda: next(_model_uids))
    _labels: dict[str, StageId] = field(default_factory=dict, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticModel):
            return NotImplemented
        return (
            self.thimacs == other.thimacs
            and self.stages == other.stages
            and self.arcs == other.arcs
            and self.joins == other.joins
            and self.roots == other.roots
        )

    __hash__ = None  # type: ignore[assignment]

    def _fresh(self) -> int:
        value = self.next_id
        self.next_id += 1
        return value

    # construction

    def add_thimac(
        self,
        parent: Optional[ThimacId],
        name: str,
        classification: ThingClassification = ThingClassification.SUBSISTING,
    ) -> ThimacId:
        return self._add_thimac(parent, name, classification, is_memory=False)

    def _add_thimac(self, parent, name, classification, is_memory, host=None) -> ThimacId:
        if not isinstance(name, str) or not NAME_RE.match(name) or name in RESERVED_NAMES:
            raise InvalidName(f"invalid thimac name {name!r}")
        if parent is not None and parent not in self.thimacs:
            raise UnknownParent(f"unknown parent thimac {parent}")
        siblings = self.thimacs[parent].children if parent is not None else self.roots
        if any(self.thimacs[s].name == name for s in siblings):
            raise DuplicateSiblingName(f"duplicate sibling name {name!r}")
        tid = self._fresh()
        self.thimacs[tid] = Thimac(
            tid, name, parent, ThingClassification(classification), is_memory=is_memory, host=host
        )
        siblings.append(tid)
        return tid

    def add_stage(
        self,
        thimac: ThimacId,
        kind: ActionKind,
        direction: Optional[TransferDirection] = None,
        label: Optional[str] = None,
    ) -> StageId:
        if thimac not in self.thimacs:
            raise UnknownThimac(f"unknown thimac {thimac}")
        kind = ActionKind(kind)
        if direction is not None and kind is not ActionKind.TRANSFER:
            raise DirectionOnNonTransfer(f"{kind.value} stage cannot carry a direction")
        if kind is ActionKind.TRANSFER:
            direction = TransferDirection(direction) if direction is not None else TransferDirection.BOTH
        if label is not None:
            if not LABEL_RE.match(label):
                raise InvalidName(f"invalid stage label {label!r}")
            if label in self._labels:
                raise DuplicateLabel(f"label {label!r} already used")
        sid = self._fresh()
        self.stages[sid] = Stage(sid, thimac, kind, direction, label)
        self.thimacs[thimac].stages.append(sid)
        if label is not None:
            self._labels[label] = sid
        return sid

    def _add_arc(self, kind: ArcKind, src: StageId, dst: StageId, guard: Optional[str]) -> ArcId:
        for end in (src, dst):
            if end not in self.stages:
                raise UnknownStage(f"unknown stage {end}")
        aid = self._fresh()
        self.arcs[aid] = Arc(aid, kind, src, dst, guard)
        return aid

    def add_flow(self, src: StageId, dst: StageId, guard: Optional[str] = None) -> ArcId:
        if guard is not None:
            raise GuardOnFlow("guards are only allowed on trigger arcs")
        return self._add_arc(ArcKind.FLOW, src, dst, None)

    def add_trigger(self, src: StageId, dst: StageId, guard: Optional[str] = None) -> ArcId:
        return self._add_arc(ArcKind.TRIGGER, src, dst, guard)

    def add_join(self, inputs: Iterable[ArcId], output: StageId) -> JoinId:
        """Add a conjunctive join bar over trigger arcs that all end at ``output``.

        Arity is left to the validator so that malformed models can be built
        and diagnosed.
        """
        inputs = tuple(inputs)
        if output not in self.stages:
            raise UnknownStage(f"unknown stage {output}")
        for aid in inputs:
            arc = self.arcs.get(aid)
            if arc is None:
                raise InvalidJoin(f"unknown arc {aid}")
            if arc.kind is not ArcKind.TRIGGER or arc.dst != output:
                raise InvalidJoin(f"join input {aid} must be a trigger into stage {output}")
            if self.join_of(aid) is not None:
                raise InvalidJoin(f"arc {aid} already feeds a join")
        jid = self._fresh()
        self.joins[jid] = JoinBar(jid, inputs, output)
        return jid

    def attach_memory(self, stage: StageId, name: str) -> ThimacId:
        """Create a memory thimac hosted by ``stage``; it becomes a child of the stage's owner."""
        if stage not in self.stages:
            raise UnknownStage(f"unknown stage {stage}")
        owner = self.stages[stage].owner
        return self._add_thimac(owner, name, ThingClassification.SUBSISTING, is_memory=True, host=stage)

    # queries

    def stage_by_label(self, label: str) -> Optional[StageId]:
        return self._labels.get(label)

    def labels(self) -> dict[str, StageId]:
        return dict(self._labels)

    def join_of(self, arc: ArcId) -> Optional[JoinId]:
        for join in self.joins.values():
            if arc in join.inputs:
                return join.id
        return None

    def memories_of(self, stage: StageId) -> list[ThimacId]:
        return [t.id for t in self.thimacs.values() if t.is_memory and t.host == stage]

    def ancestors(self, thimac: ThimacId) -> Iterator[ThimacId]:
        seen = set()
        current = self.thimacs[thimac].parent
        while current is not None and current not in seen:
            seen.add(current)
            yield current
            current = self.thimacs[current].parent

    def root_of(self, thimac: ThimacId) -> ThimacId:
        last = thimac
        for last in self.ancestors(thimac):
            pass
        return last

    def thimac_path(self, thimac: ThimacId) -> str:
        names = [self.thimacs[thimac].name]
        names.extend(self.thimacs[a].name for a in self.ancestors(thimac))
        return ".".join(reversed(names))

    def find_thimac(self, path: str) -> Optional[ThimacId]:
        siblings = self.roots
        found = None
        for part in path.split("."):
            found = next((t for t in siblings if self.thimacs[t].name == part), None)
            if found is None:
                return None
            siblings = self.thimacs[found].children
        return found

    def stage_ref(self, stage: StageId) -> str:
        """Canonical textual reference: the label if any, else ``Path.kind[i]``."""
        st = self.stages[stage]
        if st.label is not None:
            return st.label
        return self.stage_path(stage)

    def stage_path(self, stage: StageId) -> str:
        st = self.stages[stage]
        same_kind = [s for s in self.thimacs[st.owner].stages if self.stages[s].kind is st.kind]
        ref = f"{self.thimac_path(st.owner)}.{st.kind.value}"
        if len(same_kind) > 1:
            ref += f"[{same_kind.index(stage)}]"
        return ref

    def resolve_ref(self, ref: str) -> StageId:
        """Resolve ``@label``, a bare label, or a ``Thimac.Path.kind[i]`` path."""
        if ref.startswith("@"):
            sid = self._labels.get(ref[1:])
            if sid is None:
                raise UnknownLabel(f"unknown label {ref[1:]!r}")
            return sid
        sid = self._labels.get(ref)
        if sid is not None:
            return sid
        m = _PATH_RE.match(ref)
        if m is None or m.group("kind") not in RESERVED_NAMES:
            raise UnknownLabel(f"unknown stage reference {ref!r}")
        owner = self.find_thimac(m.group("thimacs"))
        if owner is None:
            raise UnknownLabel(f"unknown thimac in reference {ref!r}")
        kind = ActionKind(m.group("kind"))
        candidates = [s for s in self.thimacs[owner].stages if self.stages[s].kind is kind]
        index = m.group("index")
        if index is None:
            if len(candidates) != 1:
                what = "no" if not candidates else "ambiguous"
                raise UnknownLabel(f"{what} {kind.value} stage for reference {ref!r}")
            return candidates[0]
        i = int(index)
        if i >= len(candidates):
            raise UnknownLabel(f"stage index out of range in {ref!r}")
        return candidates[i]

    def stages_of_kind(self, *kinds: ActionKind) -> list[StageId]:
        return [s.id for s in self.stages.values() if s.kind in kinds]

    def walk(self) -> Iterator[ThimacId]:
        """Thimac ids in depth-first declaration order."""
        stack = list(reversed(self.roots))
        while stack:
            tid = stack.pop()
            yield tid
            stack.extend(reversed(self.thimacs[tid].children))

    def induced_subdiagram(self, nodes: Iterable[StageId]) -> Region:
        nodes = frozenset(nodes)
        if not nodes:
            raise EmptyRegion("a region needs at least one stage")
        foreign = sorted(n for n in nodes if n not in self.stages)
        if foreign:
            raise ForeignStage(f"stages not in model: {foreign}")
        arcs = frozenset(a.id for a in self.arcs.values() if a.src in nodes and a.dst in nodes)
        return Region(self.uid, nodes, arcs)


def new_model() -> StaticModel:
    return StaticModel()


def add_thimac(model: StaticModel, parent: Optional[ThimacId], name: str,
               classification: ThingClassification = ThingClassification.SUBSISTING) -> ThimacId:
    return model.add_thimac(parent, name, classification)


def add_stage(model: StaticModel, thimac: ThimacId, kind: ActionKind,
              direction: Optional[TransferDirection] = None, label: Optional[str] = None) -> StageId:
    return model.add_stage(thimac, kind, direction, label)


def add_flow(model: StaticModel, src: StageId, dst: StageId, guard: Optional[str] = None) -> ArcId:
    return model.add_flow(src, dst, guard)


def add_trigger(model: StaticModel, src: StageId, dst: StageId, guard: Optional[str] = None) -> ArcId:
    return model.add_trigger(src, dst, guard)


def attach_memory(model: StaticModel, stage: StageId, name: str) -> ThimacId:
    return model.attach_memory(stage, name)


def induced_subdiagram(model: StaticModel, nodes: Iterable[StageId]) -> Region:
    return model.induced_subdiagram(nodes)
