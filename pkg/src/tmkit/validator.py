"""Static well-formedness checks for models and their dynamic declarations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .decls import ChronEdge, DynamicDecls
from .errors import Diagnostics, ModelError, error, warning
from .model import ActionKind, ArcKind, Stage, StaticModel, ThingClassification, TransferDirection

A = ActionKind
IN, OUT = TransferDirection.IN, TransferDirection.OUT


@dataclass(frozen=True)
class AdjacencyRule:
    src: tuple[ActionKind, Optional[TransferDirection]]
    dst: tuple[ActionKind, Optional[TransferDirection]]
    scope: str  # "same" or "cross"


ADJACENCY_RULES: tuple[AdjacencyRule, ...] = (
    AdjacencyRule((A.TRANSFER, IN), (A.RECEIVE, None), "same"),
    AdjacencyRule((A.RECEIVE, None), (A.PROCESS, None), "same"),
    AdjacencyRule((A.RECEIVE, None), (A.RELEASE, None), "same"),
    AdjacencyRule((A.CREATE, None), (A.PROCESS, None), "same"),
    AdjacencyRule((A.CREATE, None), (A.RELEASE, None), "same"),
    AdjacencyRule((A.PROCESS, None), (A.RELEASE, None), "same"),
    AdjacencyRule((A.PROCESS, None), (A.CREATE, None), "same"),
    AdjacencyRule((A.RELEASE, None), (A.TRANSFER, OUT), "same"),
    AdjacencyRule((A.TRANSFER, OUT), (A.TRANSFER, IN), "cross"),
)


def _plays(stage: Stage, kind: ActionKind, direction: Optional[TransferDirection]) -> bool:
    if stage.kind is not kind:
        return False
    if direction is None:
        return True
    return stage.direction in (direction, TransferDirection.BOTH)


def _memory_pair(model: StaticModel, src: Stage, dst: Stage) -> bool:
    dst_owner = model.thimacs[dst.owner]
    if dst_owner.is_memory and dst_owner.host is not None:
        host_thimac = model.stages[dst_owner.host].owner
        if src.owner == host_thimac and (_plays(dst, A.RECEIVE, None) or _plays(dst, A.TRANSFER, IN)):
            return True
    src_owner = model.thimacs[src.owner]
    if src_owner.is_memory and src_owner.host is not None:
        host_thimac = model.stages[src_owner.host].owner
        if dst.owner == host_thimac and (_plays(src, A.RELEASE, None) or _plays(src, A.TRANSFER, OUT)):
            return True
    return False


def check_adjacency(model: StaticModel, src: Union[Stage, int], dst: Union[Stage, int]) -> bool:
    """True iff a flow arc from ``src`` to ``dst`` is allowed by the rule table."""
    if not isinstance(src, Stage):
        src = model.stages[src]
    if not isinstance(dst, Stage):
        dst = model.stages[dst]
    if _memory_pair(model, src, dst):
        return True
    scope = "same" if src.owner == dst.owner else "cross"
    return any(
        rule.scope == scope and _plays(src, *rule.src) and _plays(dst, *rule.dst) for rule in ADJACENCY_RULES
    )


def _check_structure(model: StaticModel, diags: Diagnostics) -> bool:
    ok = True
    for th in model.thimacs.values():
        if th.parent is not None and th.parent not in model.thimacs:
            diags.add(error("E_DANGLING", f"thimac {th.name!r} has unknown parent {th.parent}"))
            ok = False
        for sid in th.stages:
            if sid not in model.stages:
                diags.add(error("E_DANGLING", f"thimac {th.name!r} lists unknown stage {sid}"))
                ok = False
    for st in model.stages.values():
        if st.owner not in model.thimacs:
            diags.add(error("E_DANGLING", f"stage {st.id} has unknown owner {st.owner}"))
            ok = False
    for arc in model.arcs.values():
        if arc.src not in model.stages or arc.dst not in model.stages:
            diags.add(error("E_DANGLING", f"arc {arc.id} has an unresolved endpoint"))
            ok = False
    for join in model.joins.values():
        if join.output not in model.stages or any(a not in model.arcs for a in join.inputs):
            diags.add(error("E_DANGLING", f"join {join.id} has an unresolved reference"))
            ok = False
    if not ok:
        return False
    # forest: every parent chain must terminate
    for tid in model.thimacs:
        seen = {tid}
        cur = model.thimacs[tid].parent
        while cur is not None:
            if cur in seen:
                diags.add(error("E_FOREST", f"thimac {model.thimacs[tid].name!r} sits on a parent cycle"))
                return False
            seen.add(cur)
            cur = model.thimacs[cur].parent
    return True


def _stage_name(model: StaticModel, sid: int) -> str:
    return model.stage_ref(sid)


def _connected(model: StaticModel, nodes: frozenset, arcs: frozenset) -> bool:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for aid in arcs:
        arc = model.arcs[aid]
        parent[find(arc.src)] = find(arc.dst)
    return len({find(n) for n in nodes}) <= 1


def validate(model: StaticModel, decls: Optional[DynamicDecls] = None) -> Diagnostics:
    """Return every well-formedness violation as a coded diagnostic."""
    diags = Diagnostics()
    if not _check_structure(model, diags):
        return diags

    for arc in model.arcs.values():
        if arc.kind is ArcKind.FLOW:
            if arc.guard is not None:
                diags.add(error("E_GUARD_ON_FLOW", f"flow arc {arc.id} carries a guard"))
            if not check_adjacency(model, arc.src, arc.dst):
                src, dst = model.stages[arc.src], model.stages[arc.dst]
                diags.add(error(
                    "E_ADJ",
                    f"illegal flow {_stage_name(model, arc.src)} ({src.describe()}) -> "
                    f"{_stage_name(model, arc.dst)} ({dst.describe()})",
                ))

    for join in model.joins.values():
        if len(join.inputs) < 2:
            diags.add(error("E_JOIN_ARITY", f"join into {_stage_name(model, join.output)} has {len(join.inputs)} input(s); needs at least 2"))
        for aid in join.inputs:
            arc = model.arcs[aid]
            if arc.kind is not ArcKind.TRIGGER or arc.dst != join.output:
                diags.add(error("E_JOIN_INPUT", f"join input arc {aid} must be a trigger into the join output"))

    for th in model.thimacs.values():
        if th.is_memory and (th.host is None or th.host not in model.stages):
            diags.add(error("E_MEMORY_HOST", f"memory {th.name!r} is not attached to a stage"))

    if decls is not None:
        _validate_decls(model, decls, diags)
    return diags


def _appearing(model: StaticModel, tid: int) -> bool:
    if model.thimacs[tid].classification is ThingClassification.APPEARING:
        return True
    return any(model.thimacs[a].classification is ThingClassification.APPEARING for a in model.ancestors(tid))


def _suggest_chronology(model: StaticModel, decls: DynamicDecls, diags: Diagnostics) -> None:
    """Hint at chronology edges implied by triggers between event regions; never applied."""
    members: dict[int, list[str]] = {}
    for ev in decls.events:
        for ref in ev.region:
            try:
                members.setdefault(model.resolve_ref(ref), []).append(ev.name)
            except ModelError:
                continue
    pairs: list[tuple[str, str]] = []
    for arc in model.arcs.values():
        if arc.kind is not ArcKind.TRIGGER:
            continue
        for a in members.get(arc.src, ()):
            for b in members.get(arc.dst, ()):
                if a != b and (a, b) not in pairs:
                    pairs.append((a, b))
    if pairs:
        hint = "; ".join(f"chron {a} -> {b}" for a, b in pairs)
        diags.add(warning("W_CHRON_SUGGEST", f"no chronology declared; triggers suggest: {hint}"))


def _validate_decls(model: StaticModel, decls: DynamicDecls, diags: Diagnostics) -> None:
    names: set[str] = set()
    for ev in decls.events:
        if ev.name in names:
            diags.add(error("E_DUPLICATE", f"duplicate event name {ev.name!r}", ev.line, 1 if ev.line else None))
        names.add(ev.name)
        if ev.duration < 1:
            diags.add(error("E_DURATION", f"event {ev.name} has duration {ev.duration}; must be >= 1", ev.line, 1 if ev.line else None))
        stages = set()
        for ref in ev.region:
            try:
                stages.add(model.resolve_ref(ref))
            except ModelError as exc:
                diags.add(error("E_UNKNOWN_REF", f"event {ev.name}: {exc}", ev.line, 1 if ev.line else None))
        if not ev.region:
            diags.add(error("E_REGION_EMPTY", f"event {ev.name} has an empty region", ev.line, 1 if ev.line else None))
            continue
        if not stages:
            continue
        for sid in sorted(stages):
            if _appearing(model, model.stages[sid].owner):
                diags.add(error(
                    "E_APPEARING_IN_REGION",
                    f"event {ev.name}: stage {_stage_name(model, sid)} belongs to appearing thimac "
                    f"{model.thimac_path(model.stages[sid].owner)!r}",
                    ev.line, 1 if ev.line else None,
                ))
        region = model.induced_subdiagram(stages)
        if not _connected(model, region.nodes, region.arcs):
            diags.add(warning("W_REGION_DISCONNECTED", f"event {ev.name} region is not connected", ev.line, 1 if ev.line else None))

    if len(decls.events) > 1 and not decls.chronology:
        _suggest_chronology(model, decls, diags)

    events = {e.name for e in decls.events}
    negatives = set()
    for neg in decls.negatives:
        if neg.name in names:
            diags.add(error("E_DUPLICATE", f"duplicate event name {neg.name!r}", neg.line, 1 if neg.line else None))
        names.add(neg.name)
        negatives.add(neg.name)
        if neg.paired not in events:
            diags.add(error("E_NEG_UNPAIRED", f"negative {neg.name} pairs with unknown event {neg.paired!r}", neg.line, 1 if neg.line else None))

    options: dict[str, str] = {}
    for choice in decls.choices:
        if len(choice.options) < 2:
            diags.add(error("E_CHOICE", f"choice {choice.name} needs at least two options"))
        for opt in choice.options:
            if opt in options:
                diags.add(error("E_CHOICE", f"guard {opt!r} appears in choices {options[opt]} and {choice.name}"))
            options[opt] = choice.name

    for item in decls.chronology:
        if isinstance(item, ChronEdge):
            if item.src in negatives:
                diags.add(error("E_NEG_SOURCE", f"negative event {item.src} cannot precede another event"))
            elif item.src not in events:
                diags.add(error("E_UNKNOWN_REF", f"chronology edge from unknown event {item.src!r}"))
            if item.dst not in events and item.dst not in negatives:
                diags.add(error("E_UNKNOWN_REF", f"chronology edge to unknown event {item.dst!r}"))
        else:
            for inp in item.inputs:
                if inp.name not in events:
                    diags.add(error("E_UNKNOWN_REF", f"chronology join input {inp.name!r} is not an event"))
            if item.output not in events:
                diags.add(error("E_UNKNOWN_REF", f"chronology join output {item.output!r} is not an event"))
