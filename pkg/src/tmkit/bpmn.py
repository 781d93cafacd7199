"""Import a BPMN 2.0 XML subset as a thinging-machine model.

Supported: collaborations (participants and message flows), processes with
lanes, plain and typed tasks, send/receive tasks, sub-processes, start, end
and intermediate events (plain or message), exclusive and parallel
gateways, and sequence flows. Diagram interchange sections are skipped.

Mapping summary:

* participant / lane / sub-process -> (nested) thimac
* task -> process stage; an incoming message adds transfer in -> receive in
  front of it, an outgoing one adds release -> transfer out behind it
* sendTask and message throw event -> the same pattern: a message thimac
  with create -> release -> transfer out
* receiveTask and message catch/start event -> a message thimac with
  transfer in -> receive
* gateway -> process stage; a diverging exclusive gateway guards its
  outgoing triggers, a converging parallel gateway gets a join bar
* plain start event -> create stage; plain end and intermediate events only
  pass control along
* sequence flow -> trigger; message flow -> one cross-thimac flow from a
  transfer out stage to a transfer in stage

Every mapped node also yields an event (``E1``, ``E2``, ... in document
order) whose region is its stages, so the result compiles and simulates.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional, Union

from .decls import ChoiceDecl, ChronEdge, ChronJoin, DynamicDecls, EventDecl, JoinInput
from .dynamics import ChronologyGraph, find_cycle
from .errors import DanglingRef, Diagnostics, UnsupportedConstruct, XmlError, error, warning
from .model import ActionKind, ArcKind, StaticModel, TransferDirection

MODEL_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

PLAIN_TASKS = frozenset({"task", "userTask", "serviceTask", "manualTask", "scriptTask", "businessRuleTask", "callActivity"})
TASKS = PLAIN_TASKS | {"sendTask", "receiveTask"}
THROW_EVENTS = frozenset({"endEvent", "intermediateThrowEvent"})
CATCH_EVENTS = frozenset({"startEvent", "intermediateCatchEvent"})
EVENTS = THROW_EVENTS | CATCH_EVENTS
GATEWAYS = frozenset({"exclusiveGateway", "parallelGateway"})
SUPPORTED = TASKS | EVENTS | GATEWAYS | {"subProcess"}

# process content that carries no control flow
_PASSIVE = frozenset({
    "documentation", "extensionElements", "textAnnotation", "association", "dataObject",
    "dataObjectReference", "dataStoreReference", "ioSpecification", "property", "group",
    "dataInputAssociation", "dataOutputAssociation", "category",
})
# definitions-level content that needs no mapping
_METADATA = frozenset({
    "documentation", "extensionElements", "itemDefinition", "signal", "error", "escalation",
    "dataStore", "interface", "resource", "import", "extension", "category", "endPoint",
})


@dataclass
class BpmnNode:
    id: str
    type: str
    name: str = ""
    process: str = ""
    parent: str = ""  # enclosing process or sub-process id
    event_definition: Optional[str] = None  # "message", "timer", ...
    message_ref: Optional[str] = None
    supported: bool = True


@dataclass
class Participant:
    id: str
    name: str = ""
    process_ref: Optional[str] = None


@dataclass
class Lane:
    id: str
    name: str
    process: str
    parent: Optional[str] = None
    nodes: list[str] = field(default_factory=list)


@dataclass
class SequenceFlow:
    id: str
    source: str
    target: str
    name: str = ""
    condition: str = ""


@dataclass
class MessageFlow:
    id: str
    source: str
    target: str
    name: str = ""
    message_ref: Optional[str] = None


@dataclass
class BpmnGraph:
    processes: dict[str, str] = field(default_factory=dict)  # id -> name
    participants: list[Participant] = field(default_factory=list)
    lanes: list[Lane] = field(default_factory=list)
    nodes: dict[str, BpmnNode] = field(default_factory=dict)
    sequence_flows: list[SequenceFlow] = field(default_factory=list)
    message_flows: list[MessageFlow] = field(default_factory=list)
    messages: dict[str, str] = field(default_factory=dict)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def participant(self, pid: str) -> Optional[Participant]:
        return next((p for p in self.participants if p.id == pid), None)

    def is_black_box(self, participant: Participant) -> bool:
        ref = participant.process_ref
        return ref is None or not any(n.process == ref for n in self.nodes.values())

    def lane_names(self) -> list[str]:
        return [lane.name for lane in self.lanes]


def _local(el: ET.Element) -> Optional[str]:
    tag = el.tag
    if not isinstance(tag, str):
        return None  # comments and processing instructions
    if tag.startswith("{"):
        ns, _, local = tag[1:].partition("}")
        return local if ns == MODEL_NS else None
    return tag


class _Reader:
    def __init__(self) -> None:
        self.graph = BpmnGraph()
        self.dups = Diagnostics()

    def warn(self, message: str) -> None:
        self.graph.diagnostics.add(warning("W_UNSUPPORTED", message))

    def read(self, root: ET.Element) -> BpmnGraph:
        if _local(root) != "definitions":
            raise XmlError([error("E_XML", "root element is not a BPMN 2.0 <definitions>")])
        for child in root:
            tag = _local(child)
            if tag is None or tag in _METADATA:
                continue
            if tag == "collaboration":
                self.collaboration(child)
            elif tag == "process":
                pid = child.get("id", "")
                self.graph.processes[pid] = child.get("name", "")
                self.container(child, pid, pid)
            elif tag == "message":
                self.graph.messages[child.get("id", "")] = child.get("name", "")
            else:
                self.warn(f"<{tag}> is not supported and was skipped")
        return self.graph

    def collaboration(self, el: ET.Element) -> None:
        for child in el:
            tag = _local(child)
            if tag == "participant":
                self.graph.participants.append(Participant(child.get("id", ""), child.get("name", ""), child.get("processRef")))
            elif tag == "messageFlow":
                self.graph.message_flows.append(MessageFlow(
                    child.get("id", ""), child.get("sourceRef", ""), child.get("targetRef", ""),
                    child.get("name", ""), child.get("messageRef"),
                ))
            elif tag is not None and tag not in _PASSIVE:
                self.warn(f"<{tag}> in a collaboration is not supported and was skipped")

    def lanes(self, el: ET.Element, process: str, parent: Optional[str]) -> None:
        for lane_el in el:
            if _local(lane_el) != "lane":
                continue
            lane = Lane(lane_el.get("id", ""), lane_el.get("name", ""), process, parent)
            self.graph.lanes.append(lane)
            for sub in lane_el:
                tag = _local(sub)
                if tag == "flowNodeRef":
                    lane.nodes.append((sub.text or "").strip())
                elif tag == "childLaneSet":
                    self.lanes(sub, process, lane.id)

    def container(self, el: ET.Element, process: str, parent: str) -> None:
        for child in el:
            tag = _local(child)
            if tag is None or tag in _PASSIVE:
                continue
            if tag == "laneSet":
                if parent == process:
                    self.lanes(child, process, None)
                else:
                    self.warn("lanes inside a sub-process are not supported and were skipped")
            elif tag == "sequenceFlow":
                cond = next((c for c in child if _local(c) == "conditionExpression"), None)
                self.graph.sequence_flows.append(SequenceFlow(
                    child.get("id", ""), child.get("sourceRef", ""), child.get("targetRef", ""),
                    child.get("name", ""), (cond.text or "").strip() if cond is not None else "",
                ))
            else:
                self.node(child, tag, process, parent)

    def node(self, el: ET.Element, tag: str, process: str, parent: str) -> None:
        nid = el.get("id", "")
        node = BpmnNode(nid, tag, el.get("name", ""), process, parent, supported=tag in SUPPORTED)
        if nid in self.graph.nodes:
            self.dups.add(error("E_DUPLICATE_ID", f"duplicate element id {nid!r}"))
        self.graph.nodes[nid] = node
        if not node.supported:
            self.warn(f"<{tag} id={nid!r}> is not supported; control passes through it")
            return
        if tag in ("sendTask", "receiveTask"):
            node.message_ref = el.get("messageRef")
        for sub in el:
            sub_tag = _local(sub)
            if sub_tag and sub_tag.endswith("EventDefinition"):
                node.event_definition = sub_tag[: -len("EventDefinition")]
                if node.event_definition == "message":
                    node.message_ref = sub.get("messageRef")
                else:
                    self.warn(f"{node.event_definition} event {nid!r} is mapped as a plain event")
        if tag == "subProcess":
            if el.get("triggeredByEvent") == "true":
                raise UnsupportedConstruct([error("E_UNSUPPORTED", f"event sub-process {nid!r} has no sound mapping")])
            self.container(el, process, nid)


def parse_bpmn(xml: Union[bytes, str]) -> BpmnGraph:
    """Read BPMN 2.0 XML into a :class:`BpmnGraph`.

    Unsupported content becomes ``W_UNSUPPORTED`` warnings in
    ``graph.diagnostics``. Malformed XML raises :class:`XmlError`; references
    to missing elements raise :class:`DanglingRef`.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise XmlError([error("E_XML", f"malformed XML: {exc}")]) from None
    reader = _Reader()
    graph = reader.read(root)
    diags = reader.dups
    nodes = graph.nodes
    pids = {p.id for p in graph.participants}
    for flow in graph.sequence_flows:
        for end in (flow.source, flow.target):
            if end not in nodes:
                diags.add(error("E_DANGLING_REF", f"sequence flow {flow.id!r} refers to missing node {end!r}"))
    for flow in graph.message_flows:
        for end in (flow.source, flow.target):
            if end not in nodes and end not in pids:
                diags.add(error("E_DANGLING_REF", f"message flow {flow.id!r} refers to missing element {end!r}"))
    for lane in graph.lanes:
        for ref in lane.nodes:
            if ref not in nodes:
                diags.add(error("E_DANGLING_REF", f"lane {lane.id!r} refers to missing node {ref!r}"))
    for part in graph.participants:
        if part.process_ref is not None and part.process_ref not in graph.processes:
            diags.add(error("E_DANGLING_REF", f"participant {part.id!r} refers to missing process {part.process_ref!r}"))
    if diags.has_errors:
        raise DanglingRef(diags)
    return graph


def _ident(text: str, fallback: str) -> str:
    words = re.findall(r"[A-Za-z0-9]+", text or "")
    name = "".join(w[0].upper() + w[1:] for w in words)
    if not name:
        name = re.sub(r"[^A-Za-z0-9_]", "_", fallback or "X")
        name = name[0].upper() + name[1:]
    if not (name[0].isalpha() or name[0] == "_"):
        name = "N" + name
    return name


class _Mapper:
    def __init__(self, graph: BpmnGraph):
        self.g = graph
        self.m = StaticModel()
        self.pool: dict[str, int] = {}  # participant id -> thimac
        self.process_thimac: dict[str, int] = {}
        self.lane_thimac: dict[str, int] = {}
        self.sub_thimac: dict[str, int] = {}
        self.node_lane: dict[str, str] = {}
        self.entry: dict[str, int] = {}  # mapped node -> stage that sequence flows enter and leave
        self.stages: dict[str, list[int]] = {}
        self.out_stage: dict[str, int] = {}
        self.in_stage: dict[str, int] = {}
        self.mf_in: dict[str, list[MessageFlow]] = {}
        self.mf_out: dict[str, list[MessageFlow]] = {}
        self.incoming: dict[str, list[SequenceFlow]] = {}
        self.outgoing: dict[str, list[SequenceFlow]] = {}
        self.guard: dict[str, str] = {}
        self.choices: list[ChoiceDecl] = []
        self.links: list[tuple[str, str, Optional[str], bool]] = []  # (src, dst, guard, via message)
        self.trigger_keys: dict[tuple, int] = {}

    # naming

    def child(self, parent: Optional[int], base: str) -> int:
        siblings = self.m.thimacs[parent].children if parent is not None else self.m.roots
        taken = {self.m.thimacs[s].name for s in siblings}
        name, n = base, 2
        while name in taken:
            name, n = f"{base}_{n}", n + 1
        return self.m.add_thimac(parent, name)

    def message_name(self, node: Optional[BpmnNode], flows: list[MessageFlow]) -> str:
        refs = ([node.message_ref] if node is not None else []) + [f.message_ref for f in flows]
        for ref in refs:
            if ref and self.g.messages.get(ref):
                return _ident(self.g.messages[ref], ref)
        for flow in flows:
            if flow.name:
                return _ident(flow.name, flow.id)
        if node is not None:
            return _ident(node.name, node.id) + "Message"
        return _ident("", flows[0].id if flows else "Message")

    # structure

    def pools(self) -> None:
        g = self.g
        for part in g.participants:
            name = part.name or (g.processes.get(part.process_ref or "", "") if part.process_ref else "")
            tid = self.child(None, _ident(name, part.process_ref or part.id))
            self.pool[part.id] = tid
            if part.process_ref and part.process_ref not in self.process_thimac:
                self.process_thimac[part.process_ref] = tid
        for pid, name in g.processes.items():
            if pid not in self.process_thimac:
                self.process_thimac[pid] = self.child(None, _ident(name, pid))
        for lane in g.lanes:
            parent = self.lane_thimac[lane.parent] if lane.parent else self.process_thimac[lane.process]
            self.lane_thimac[lane.id] = self.child(parent, _ident(lane.name, lane.id))
            for ref in lane.nodes:
                self.node_lane[ref] = lane.id

    def container(self, node: BpmnNode) -> int:
        if node.parent in self.sub_thimac:
            return self.sub_thimac[node.parent]
        if node.id in self.node_lane:
            return self.lane_thimac[self.node_lane[node.id]]
        return self.process_thimac[node.process]

    def role(self, node: BpmnNode) -> Optional[str]:
        if not node.supported or node.type == "subProcess":
            return None
        if node.type in GATEWAYS:
            return "gateway"
        if node.type == "sendTask":
            return "send"
        if node.type == "receiveTask":
            return "receive"
        if node.type in PLAIN_TASKS:
            return "task"
        if node.event_definition == "message":
            return "send" if node.type in THROW_EVENTS else "receive"
        if self.mf_in.get(node.id):
            return "receive"
        if self.mf_out.get(node.id):
            return "send"
        return "start" if node.type == "startEvent" else None

    def flow(self, src: int, dst: int) -> None:
        self.m.add_flow(src, dst)

    def stage(self, thimac: int, kind: ActionKind, direction=None) -> int:
        return self.m.add_stage(thimac, kind, direction)

    def inbound(self, thimac: int) -> tuple[int, int]:
        accept = self.stage(thimac, ActionKind.TRANSFER, TransferDirection.IN)
        receive = self.stage(thimac, ActionKind.RECEIVE)
        self.flow(accept, receive)
        return accept, receive

    def outbound(self, thimac: int, after: int) -> tuple[int, int]:
        release = self.stage(thimac, ActionKind.RELEASE)
        send = self.stage(thimac, ActionKind.TRANSFER, TransferDirection.OUT)
        self.flow(after, release)
        self.flow(release, send)
        return release, send

    def nodes(self) -> None:
        for node in self.g.nodes.values():
            if node.type == "subProcess" and node.supported:
                self.sub_thimac[node.id] = self.child(self.container(node), _ident(node.name, node.id))
                continue
            role = self.role(node)
            if role is None:
                continue
            home = self.container(node)
            ins, outs = self.mf_in.get(node.id, []), self.mf_out.get(node.id, [])
            made: list[int] = []
            if role == "send":
                msg = self.child(home, self.message_name(node, outs or ins))
                create = self.stage(msg, ActionKind.CREATE)
                made.append(create)
                release, send = self.outbound(msg, create)
                made += [release, send]
                if ins:
                    accept, receive = self.inbound(msg)
                    self.flow(receive, release)
                    made += [accept, receive]
                    self.in_stage[node.id] = accept
                self.out_stage[node.id] = send
                main = create
            elif role == "receive":
                msg = self.child(home, self.message_name(node, ins or outs))
                accept, receive = self.inbound(msg)
                made += [accept, receive]
                self.in_stage[node.id] = accept
                if outs:
                    release, send = self.outbound(msg, receive)
                    made += [release, send]
                    self.out_stage[node.id] = send
                main = receive
            else:
                kind = ActionKind.CREATE if role == "start" else ActionKind.PROCESS
                if ins and role != "gateway":
                    accept, receive = self.inbound(home)
                    made += [accept, receive]
                    self.in_stage[node.id] = accept
                main = self.stage(home, kind)
                made.append(main)
                if ins and role != "gateway":
                    self.flow(receive, main)
                if outs and role != "gateway":
                    release, send = self.outbound(home, main)
                    made += [release, send]
                    self.out_stage[node.id] = send
            self.entry[node.id] = main
            self.stages[node.id] = made

    def boundary(self, ref: str, flow: MessageFlow, outgoing: bool) -> int:
        """Boundary stages for a message flow end that is not a mapped node."""
        if ref in self.pool:
            owner = self.pool[ref]
        elif ref in self.sub_thimac:
            owner = self.sub_thimac[ref]
        else:
            node = self.g.nodes[ref]
            owner = self.container(node)
            self.g.diagnostics.add(warning("W_UNSUPPORTED", f"message flow {flow.id!r} attaches to {node.type} {ref!r}; boundary stages added"))
        msg = self.child(owner, self.message_name(None, [flow]))
        if outgoing:
            create = self.stage(msg, ActionKind.CREATE)
            return self.outbound(msg, create)[1]
        return self.inbound(msg)[0]

    def pool_of(self, ref: str) -> Optional[str]:
        if ref in self.pool:
            return ref
        process = self.g.nodes[ref].process
        return next((p.id for p in self.g.participants if p.process_ref == process), process)

    def message_flows(self) -> None:
        for flow in self.g.message_flows:
            if self.pool_of(flow.source) == self.pool_of(flow.target):
                raise UnsupportedConstruct([error("E_UNSUPPORTED", f"message flow {flow.id!r} stays inside one pool")])
        for flow in self.g.message_flows:
            src = self.out_stage.get(flow.source) if flow.source in self.entry else None
            dst = self.in_stage.get(flow.target) if flow.target in self.entry else None
            if src is None:
                src = self.boundary(flow.source, flow, outgoing=True)
            if dst is None:
                dst = self.boundary(flow.target, flow, outgoing=False)
            self.flow(src, dst)
            if flow.source in self.entry and flow.target in self.entry:
                self.links.append((flow.source, flow.target, None, True))

    def guards(self) -> None:
        used: set[str] = set()
        for node in self.g.nodes.values():
            outs = self.outgoing.get(node.id, [])
            if node.type != "exclusiveGateway" or len(outs) < 2:
                continue
            gw = _ident(node.name, node.id)
            options = []
            for flow in outs:
                base = flow.name.strip() or flow.condition or flow.id
                name, n = base, 2
                if name in used:
                    name = f"{gw}.{base}"
                while name in used:
                    name, n = f"{gw}.{base}.{n}", n + 1
                used.add(name)
                self.guard[flow.id] = name
                options.append(name)
            self.choices.append(ChoiceDecl(gw, tuple(options)))
        taken = set(used)
        fixed = []
        for choice in self.choices:
            name, n = choice.name, 2
            while name in taken:
                name, n = f"{choice.name}_{n}", n + 1
            taken.add(name)
            fixed.append(ChoiceDecl(name, choice.options))
        self.choices = fixed

    def exits(self, nid: str, visiting: frozenset = frozenset()) -> list[tuple[str, Optional[str]]]:
        """Mapped nodes whose completion reaches ``nid``'s outgoing flows, with branch guards."""
        if nid in self.entry:
            return [(nid, None)]
        if nid in visiting:
            return []
        visiting = visiting | {nid}
        node = self.g.nodes[nid]
        found: list[tuple[str, Optional[str]]] = []
        if node.type == "subProcess" and node.supported:
            inner = [m for m in self.g.nodes.values() if m.parent == nid and not self.outgoing.get(m.id)]
            for m in inner:
                found += self.exits(m.id, visiting)
        else:
            for flow in self.incoming.get(nid, []):
                found += [(src, g or self.guard.get(flow.id)) for src, g in self.exits(flow.source, visiting)]
        return list(dict.fromkeys(found))

    def entries(self, nid: str, visiting: frozenset = frozenset()) -> list[str]:
        if nid in self.entry:
            return [nid]
        if nid in visiting:
            return []
        visiting = visiting | {nid}
        node = self.g.nodes[nid]
        found: list[str] = []
        if node.type == "subProcess" and node.supported:
            inner = [m for m in self.g.nodes.values() if m.parent == nid]
            starts = [m for m in inner if m.type == "startEvent"] or [m for m in inner if not self.incoming.get(m.id)]
            for m in starts:
                found += self.entries(m.id, visiting)
        else:
            for flow in self.outgoing.get(nid, []):
                found += self.entries(flow.target, visiting)
        return list(dict.fromkeys(found))

    def sequence_flows(self) -> None:
        for flow in self.g.sequence_flows:
            target = self.g.nodes[flow.target]
            if flow.target not in self.entry and not (target.type == "subProcess" and target.supported):
                continue
            sources = [(s, g or self.guard.get(flow.id)) for s, g in self.exits(flow.source)]
            for src, guard in sources:
                for dst in self.entries(flow.target):
                    key = (src, dst, guard)
                    if key in self.trigger_keys:
                        continue
                    self.trigger_keys[key] = self.m.add_trigger(self.entry[src], self.entry[dst], guard)
                    self.links.append((src, dst, guard, False))

    def joins(self) -> None:
        for nid, stage in self.entry.items():
            if self.g.nodes[nid].type != "parallelGateway":
                continue
            inputs = [aid for key, aid in self.trigger_keys.items() if key[1] == nid]
            if len(inputs) >= 2:
                self.m.add_join(inputs, stage)

    def decls(self) -> DynamicDecls:
        names = {nid: f"E{i}" for i, nid in enumerate(self.entry, start=1)}
        events = [
            EventDecl(
                names[nid],
                self.g.nodes[nid].name or nid,
                tuple(self.m.stage_ref(s) for s in self.stages[nid]),
                instant=self.g.nodes[nid].type in EVENTS,
            )
            for nid in self.entry
        ]
        preds: dict[str, list[tuple[str, Optional[str], bool]]] = {}
        for src, dst, guard, via_message in self.links:
            item = (src, guard, via_message)
            if item not in preds.setdefault(dst, []):
                preds[dst].append(item)
        chronology: list = []
        for nid in self.entry:
            incoming = preds.get(nid, [])
            seq = [p for p in incoming if not p[2]]
            msgs = [p for p in incoming if p[2]]
            node = self.g.nodes[nid]
            conjunctive = (node.type == "parallelGateway" and len(seq) >= 2) or (
                self.role(node) == "receive" and msgs and len(seq) == 1
            )
            if conjunctive:
                group = seq + msgs if self.role(node) == "receive" else seq
                inputs = tuple(dict.fromkeys(JoinInput(names[s]) for s, _, _ in group))
                # a guarded branch into a join disables the join when its guard fails
                branch = list(dict.fromkeys(g for _, g, _ in group if g is not None))
                if len(branch) > 1:
                    self.g.diagnostics.add(warning(
                        "W_UNSUPPORTED", f"join into {nid!r} depends on several branch guards; only {branch[0]!r} is kept",
                    ))
                chronology.append(ChronJoin(inputs, names[nid], branch[0] if branch else None))
                rest = [p for p in incoming if p not in group]
            else:
                rest = incoming
            for src, guard, _ in rest:
                chronology.append(ChronEdge(names[src], names[nid], guard))
        return DynamicDecls(events, [], list(self.choices), chronology)

    def run(self) -> tuple[StaticModel, DynamicDecls]:
        for flow in self.g.message_flows:
            self.mf_out.setdefault(flow.source, []).append(flow)
            self.mf_in.setdefault(flow.target, []).append(flow)
        for flow in self.g.sequence_flows:
            self.outgoing.setdefault(flow.source, []).append(flow)
            self.incoming.setdefault(flow.target, []).append(flow)
        self.pools()
        self.nodes()
        self.message_flows()
        self.guards()
        self.sequence_flows()
        self.joins()
        decls = self.decls()
        self.check_acyclic(decls)
        return self.m, decls

    def check_acyclic(self, decls: DynamicDecls) -> None:
        """Reject diagrams whose unguarded precedences loop (mutual message waits, bare loops)."""
        edges = [c for c in decls.chronology if isinstance(c, ChronEdge)]
        joins = [c for c in decls.chronology if isinstance(c, ChronJoin)]
        graph = ChronologyGraph(tuple(e.name for e in decls.events), (), tuple(edges), tuple(joins))
        cycle = find_cycle(graph.unguarded_successors())
        if cycle is not None:
            described = " -> ".join(next(e.description for e in decls.events if e.name == n) for n in cycle)
            raise UnsupportedConstruct([error("E_UNSUPPORTED", f"flows form an unguarded cycle: {described}")])


def map_bpmn(graph: BpmnGraph) -> tuple[StaticModel, DynamicDecls]:
    """Map a parsed graph to a static model and simulable declarations."""
    return _Mapper(graph).run()


def import_bpmn(xml: Union[bytes, str]) -> tuple[StaticModel, DynamicDecls, Diagnostics]:
    graph = parse_bpmn(xml)
    model, decls = map_bpmn(graph)
    return model, decls, graph.diagnostics


def cross_transfer_arcs(model: StaticModel) -> list[int]:
    """Flow arcs from a transfer-out stage to a transfer-in stage of another thimac."""
    found = []
    for aid in sorted(model.arcs):
        arc = model.arcs[aid]
        src, dst = model.stages[arc.src], model.stages[arc.dst]
        if (
            arc.kind is ArcKind.FLOW
            and src.kind is ActionKind.TRANSFER and src.direction in (TransferDirection.OUT, TransferDirection.BOTH)
            and dst.kind is ActionKind.TRANSFER and dst.direction in (TransferDirection.IN, TransferDirection.BOTH)
            and src.owner != dst.owner
        ):
            found.append(aid)
    return found
