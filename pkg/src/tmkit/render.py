"""DOT output for models and chronologies, plus the transfer-free simplified view.

``simplify`` drops every release, transfer and receive stage and replaces
each path through them with one direct arc between the surviving create and
process stages. ``desugar`` turns such a model back into one that satisfies
the flow adjacency rules by re-expanding cross-thimac flows into full
release/transfer/receive chains.
"""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Union

from .dynamics import ChronologyGraph, DynamicModel, natural_key
from .model import ActionKind, Arc, ArcKind, StaticModel, TransferDirection
from .validator import check_adjacency

CARRIERS = frozenset({ActionKind.RELEASE, ActionKind.TRANSFER, ActionKind.RECEIVE})
VIEWS = ("static", "dynamic", "chronology")


@dataclass(eq=False)
class SimplifiedModel(StaticModel):
    """A static model without release/transfer/receive stages.

    Its flows may ignore the adjacency rules; ``contracted`` lists the arcs
    that stand for a removed path.
    """

    contracted: frozenset = field(default_factory=frozenset)


def _clone(model: StaticModel, cls: type) -> StaticModel:
    out = cls()
    out.thimacs = copy.deepcopy(model.thimacs)
    out.stages = copy.deepcopy(model.stages)
    out.arcs = copy.deepcopy(model.arcs)
    out.joins = copy.deepcopy(model.joins)
    out.roots = list(model.roots)
    out.next_id = model.next_id
    out._labels = dict(model._labels)
    return out


def simplify(model: StaticModel) -> SimplifiedModel:
    removed = {sid for sid, s in model.stages.items() if s.kind in CARRIERS}
    out = _clone(model, SimplifiedModel)
    if not removed:
        return out

    outgoing: dict[int, list[Arc]] = defaultdict(list)
    for arc in model.arcs.values():
        outgoing[arc.src].append(arc)

    kept: dict[tuple, int] = {}
    direct: list[int] = []
    paths: dict[tuple, set[int]] = defaultdict(set)  # edge key -> last arcs of its paths
    for aid in sorted(model.arcs):
        arc = model.arcs[aid]
        if arc.src in removed:
            continue
        if arc.dst not in removed:
            kept.setdefault((arc.src, arc.dst, arc.kind, arc.guard), aid)
            direct.append(aid)
            continue
        start = (arc.dst, arc.kind is ArcKind.FLOW, (arc.guard,) if arc.guard else ())
        seen = {start}
        stack = [start]
        while stack:
            node, all_flow, guards = stack.pop()
            for nxt in outgoing[node]:
                flow = all_flow and nxt.kind is ArcKind.FLOW
                g = guards + ((nxt.guard,) if nxt.guard and nxt.guard not in guards else ())
                if nxt.dst in removed:
                    state = (nxt.dst, flow, g)
                    if state not in seen:
                        seen.add(state)
                        stack.append(state)
                    continue
                kind = ArcKind.FLOW if flow else ArcKind.TRIGGER
                paths[(arc.src, nxt.dst, kind, " and ".join(g) or None)].add(nxt.id)

    out.arcs = {aid: out.arcs[aid] for aid in direct}
    for sid in removed:
        stage = out.stages.pop(sid)
        out.thimacs[stage.owner].stages.remove(sid)
        if stage.label is not None:
            del out._labels[stage.label]

    replacement: dict[int, list[int]] = defaultdict(list)
    contracted = []
    for key in sorted(paths, key=lambda k: (k[0], k[1], k[2].value, k[3] or "")):
        aid = kept.get(key)
        if aid is None:
            src, dst, kind, guard = key
            aid = out._add_arc(kind, src, dst, guard)
            contracted.append(aid)
        for last in sorted(paths[key]):
            replacement[last].append(aid)

    joins = out.joins
    out.joins = {}
    for jid in sorted(joins):
        join = joins[jid]
        if join.output in removed:
            continue
        inputs: list[int] = []
        for aid in join.inputs:
            for new in ([aid] if aid in out.arcs else replacement.get(aid, [])):
                arc = out.arcs[new]
                if new not in inputs and arc.kind is ArcKind.TRIGGER and arc.dst == join.output and out.join_of(new) is None:
                    inputs.append(new)
        if len(inputs) >= 2:
            join.inputs = tuple(inputs)
            out.joins[jid] = join

    for th in out.thimacs.values():
        if th.is_memory and th.host in removed:
            host_owner = model.stages[th.host].owner
            candidates = [s for s in out.thimacs[host_owner].stages if out.stages[s].kind in (ActionKind.CREATE, ActionKind.PROCESS)]
            if candidates:
                th.host = candidates[0]
            else:
                th.is_memory, th.host = False, None
    out.contracted = frozenset(contracted)
    return out


def desugar(simplified: StaticModel) -> StaticModel:
    """Rewrite flows that break the adjacency rules into legal structure.

    A cross-thimac flow into a process stage becomes release -> transfer out
    -> transfer in -> receive -> target. Any other illegal flow becomes a
    trigger, which keeps the reachability relation intact.
    """
    out = _clone(simplified, StaticModel)
    for aid in sorted(simplified.arcs):
        arc = out.arcs[aid]
        if arc.kind is not ArcKind.FLOW or check_adjacency(out, arc.src, arc.dst):
            continue
        src, dst = out.stages[arc.src], out.stages[arc.dst]
        chainable = (
            src.owner != dst.owner
            and src.kind in (ActionKind.CREATE, ActionKind.PROCESS)
            and dst.kind is ActionKind.PROCESS
        )
        if not chainable:
            arc.kind = ArcKind.TRIGGER
            continue
        del out.arcs[aid]
        release = out.add_stage(src.owner, ActionKind.RELEASE)
        send = out.add_stage(src.owner, ActionKind.TRANSFER, TransferDirection.OUT)
        accept = out.add_stage(dst.owner, ActionKind.TRANSFER, TransferDirection.IN)
        receive = out.add_stage(dst.owner, ActionKind.RECEIVE)
        for a, b in ((src.id, release), (release, send), (send, accept), (accept, receive), (receive, dst.id)):
            out.add_flow(a, b)
    return out


# DOT output


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _attrs(**kw) -> str:
    return "[" + ", ".join(f"{k}={_q(str(v))}" for k, v in kw.items()) + "]"


def _stage_label(model: StaticModel, sid: int) -> str:
    stage = model.stages[sid]
    return stage.label if stage.label is not None else stage.describe()


def _stage_node(model: StaticModel, sid: int, name: str) -> str:
    stage = model.stages[sid]
    shape = "cylinder" if model.thimacs[stage.owner].is_memory else "circle"
    return f"{name} {_attrs(label=_stage_label(model, sid), tooltip=stage.describe(), shape=shape)};"


def _arc_line(arc: Arc, src: str, dst: str, **extra) -> str:
    kw = {"style": "solid" if arc.kind is ArcKind.FLOW else "dashed"}
    if arc.guard is not None:
        kw["label"] = arc.guard
    kw.update(extra)
    return f"{src} -> {dst} {_attrs(**kw)};"


def _static_lines(model: StaticModel) -> list[str]:
    lines: list[str] = []

    def cluster(tid: int, depth: int) -> None:
        th = model.thimacs[tid]
        pad = "  " * depth
        lines.append(f"{pad}subgraph cluster_t{tid} {{")
        lines.append(f"{pad}  label={_q(th.name)};")
        if th.is_memory:
            lines.append(f'{pad}  style="rounded";')
        for sid in th.stages:
            lines.append(f"{pad}  " + _stage_node(model, sid, f"s{sid}"))
        for child in th.children:
            cluster(child, depth + 1)
        lines.append(f"{pad}}}")

    for root in model.roots:
        cluster(root, 1)
    joined = {aid: jid for jid, j in model.joins.items() for aid in j.inputs}
    for jid in sorted(model.joins):
        lines.append(f"  j{jid} {_attrs(label='', shape='box', style='filled', height='0.05', width='0.8')};")
    for aid in sorted(model.arcs):
        arc = model.arcs[aid]
        if aid in joined:
            lines.append("  " + _arc_line(arc, f"s{arc.src}", f"j{joined[aid]}", arrowhead="none"))
        else:
            lines.append("  " + _arc_line(arc, f"s{arc.src}", f"s{arc.dst}"))
    for jid in sorted(model.joins):
        lines.append(f"  j{jid} -> s{model.joins[jid].output} {_attrs(style='dashed')};")
    return lines


def _dynamic_lines(dyn: DynamicModel) -> list[str]:
    model = dyn.static
    lines: list[str] = []
    anchors: dict[str, str] = {}
    named = [(n, dyn.events[n].region, False) for n in sorted(dyn.events, key=natural_key)]
    named += [(n, dyn.negatives[n].region, True) for n in sorted(dyn.negatives, key=natural_key)]
    for index, (name, region, negative) in enumerate(named):
        prefix = f"e{index}_"
        lines.append(f"  subgraph cluster_e{index} {{")
        lines.append(f"    label={_q(name)};")
        lines.append('    style="dashed";' if negative else '    style="filled,rounded";')
        for sid in sorted(region.nodes):
            lines.append("    " + _stage_node(model, sid, f"{prefix}s{sid}"))
        for aid in sorted(region.arcs):
            arc = model.arcs[aid]
            lines.append("    " + _arc_line(arc, f"{prefix}s{arc.src}", f"{prefix}s{arc.dst}"))
        lines.append("  }")
        anchors[name] = (f"{prefix}s{min(region.nodes)}", f"cluster_e{index}")
    chron = dyn.chronology
    for edge in chron.edges:
        (src, sc), (dst, dc) = anchors[edge.src], anchors[edge.dst]
        kw = {"ltail": sc, "lhead": dc, "style": "bold"}
        if edge.guard:
            kw["label"] = edge.guard
        lines.append(f"  {src} -> {dst} {_attrs(**kw)};")
    for join in chron.joins:
        dst, dc = anchors[join.output]
        for inp in join.inputs:
            src, sc = anchors[inp.name]
            kw = {"ltail": sc, "lhead": dc, "style": "bold"}
            guard = " and ".join(g for g in (inp.guard, join.guard) if g)
            if guard:
                kw["label"] = guard
            lines.append(f"  {src} -> {dst} {_attrs(**kw)};")
    return lines


def _chronology_lines(chron: ChronologyGraph, dyn: Optional[DynamicModel] = None) -> list[str]:
    lines = []
    for name in sorted(chron.nodes, key=natural_key):
        label = name
        if dyn is not None and dyn.events[name].description:
            label += "\n" + dyn.events[name].description
        lines.append(f"  {_q(name)} {_attrs(label=label, shape='box', style='filled')};")
    for name in sorted(chron.negatives, key=natural_key):
        lines.append(f"  {_q(name)} {_attrs(label=name, shape='octagon', style='dashed')};")
    for index, join in enumerate(chron.joins):
        lines.append(f"  cj{index} {_attrs(label='', shape='box', style='filled', height='0.05', width='0.8')};")
    for edge in chron.edges:
        kw = {"style": "dashed" if edge.dst in chron.negatives else "solid"}
        if edge.guard:
            kw["label"] = edge.guard
        lines.append(f"  {_q(edge.src)} -> {_q(edge.dst)} {_attrs(**kw)};")
    for index, join in enumerate(chron.joins):
        for inp in join.inputs:
            kw = {"arrowhead": "none"}
            if inp.guard:
                kw["label"] = inp.guard
            lines.append(f"  {_q(inp.name)} -> cj{index} {_attrs(**kw)};")
        tail = f" {_attrs(label=join.guard)}" if join.guard else ""
        lines.append(f"  cj{index} -> {_q(join.output)}{tail};")
    return lines


def to_dot(target: Union[StaticModel, DynamicModel, ChronologyGraph], view: Optional[str] = None) -> str:
    """Render ``target`` as DOT text; equal inputs give byte-identical output."""
    if view is None:
        view = "chronology" if isinstance(target, ChronologyGraph) else "static"
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}; expected one of {', '.join(VIEWS)}")
    if isinstance(target, ChronologyGraph):
        if view != "chronology":
            raise ValueError("a chronology graph only has the chronology view")
        lines = _chronology_lines(target)
    elif isinstance(target, DynamicModel):
        if view == "static":
            lines = _static_lines(target.static)
        elif view == "dynamic":
            lines = _dynamic_lines(target)
        else:
            lines = _chronology_lines(target.chronology, target)
    else:
        if view != "static":
            raise ValueError(f"the {view} view needs a compiled dynamic model")
        lines = _static_lines(target)
    if not lines:
        return "digraph tm {\n}\n"
    header = ["  compound=true;", "  rankdir=LR;", '  node [fontsize="10"];']
    return "digraph tm {\n" + "\n".join(header + lines) + "\n}\n"
