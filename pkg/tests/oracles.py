"""Independent reference implementations used to check the engine and transforms.

Everything here is deliberately naive (fixed points, brute-force
enumeration, dense matrices) and shares no code with the package beyond
its data classes.
"""

from __future__ import annotations

import re
from collections import defaultdict

from tmkit.model import ActionKind, ArcKind, TransferDirection


def fired_events(chron, guards):
    """Events that occur in one instance, by fixed point over the chronology.

    Returns ``(positives, negatives)`` as sets of names. A root fires; an
    event fires when an enabled edge arrives from a fired event or when a
    join's required inputs have all fired.
    """
    fired = set(chron.roots())
    negs = set()
    changed = True
    while changed:
        changed = False
        for e in chron.edges:
            if e.src in fired and (e.guard is None or guards[e.guard]):
                target = negs if e.dst in chron.negatives else fired
                if e.dst not in target:
                    target.add(e.dst)
                    changed = True
        for j in chron.joins:
            if j.guard is not None and not guards[j.guard]:
                continue
            required = [i.name for i in j.inputs if i.guard is None or guards[i.guard]]
            if required and all(r in fired for r in required) and j.output not in fired:
                fired.add(j.output)
                changed = True
    return fired, negs


def precedence(chron, guards, present):
    """Enabled ordering constraints among the events in ``present``."""
    pairs = set()
    for e in chron.edges:
        if (e.guard is None or guards[e.guard]) and e.src in present and e.dst in present:
            pairs.add((e.src, e.dst))
    for j in chron.joins:
        if j.guard is not None and not guards[j.guard]:
            continue
        for i in j.inputs:
            if (i.guard is None or guards[i.guard]) and i.name in present and j.output in present:
                pairs.add((i.name, j.output))
    return pairs


def linearizations(nodes, pairs):
    """Every total order of ``nodes`` consistent with ``pairs`` (brute force)."""
    preds = defaultdict(set)
    for a, b in pairs:
        preds[b].add(a)
    nodes = sorted(nodes)
    out = []

    def extend(prefix, remaining):
        if not remaining:
            out.append(tuple(prefix))
            return
        for n in sorted(remaining):
            if preds[n] <= set(prefix):
                prefix.append(n)
                extend(prefix, remaining - {n})
                prefix.pop()

    extend([], frozenset(nodes))
    return out


def exclusivity_violations(trace):
    """Ticks where an (instance, region) is both actualized and negatively marked.

    A negative occurrence at tick ``t`` potentializes its region in that
    instance from ``t`` on, so any positive occurrence of the same region
    still active at or after ``t`` is a violation. Overlapping positive
    occurrences of one region are violations too.
    """
    bad = []
    by_key = defaultdict(list)
    for occ in trace:
        by_key[(occ.instance, occ.region)].append(occ)
    for (inst, _), occs in by_key.items():
        negatives = [o.start for o in occs if o.negative]
        positives = [o for o in occs if not o.negative]
        if negatives:
            first = min(negatives)
            for o in positives:
                if o.end > first:
                    bad.append((inst, o.name, o.start, o.end, first))
        positives.sort(key=lambda o: o.start)
        for a, b in zip(positives, positives[1:]):
            if b.start < a.end:
                bad.append((inst, a.name, b.name, a.end, b.start))
    return bad


def reachability(model):
    """Boolean transitive closure over all arcs, restricted to create/process stages.

    Returned as ``(stage ids, matrix)`` with rows and columns in id order.
    """
    ids = sorted(model.stages)
    index = {s: i for i, s in enumerate(ids)}
    n = len(ids)
    reach = [[False] * n for _ in range(n)]
    for arc in model.arcs.values():
        reach[index[arc.src]][index[arc.dst]] = True
    for k in range(n):
        row_k = reach[k]
        for i in range(n):
            if reach[i][k]:
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    keep = [s for s in ids if model.stages[s].kind in (ActionKind.CREATE, ActionKind.PROCESS)]
    return keep, [[reach[index[a]][index[b]] for b in keep] for a in keep]


def normalize_participant(name):
    key = re.sub(r"[^a-z0-9]", "", name.lower())
    return key[:-1] if key.endswith("s") else key


def cross_root_chains(model):
    """Transfer-out -> transfer-in flows whose ends sit under different root thimacs."""
    def root(tid):
        while model.thimacs[tid].parent is not None:
            tid = model.thimacs[tid].parent
        return tid

    count = 0
    for arc in model.arcs.values():
        src, dst = model.stages[arc.src], model.stages[arc.dst]
        if (
            arc.kind is ArcKind.FLOW
            and src.kind is ActionKind.TRANSFER and src.direction is not TransferDirection.IN
            and dst.kind is ActionKind.TRANSFER and dst.direction is not TransferDirection.OUT
            and root(src.owner) != root(dst.owner)
        ):
            count += 1
    return count


def as_digraph(model):
    """networkx view of a static model for isomorphism checks.

    Nodes are thimacs and stages; containment, arcs and joins are edges.
    Ids never enter attributes, so isomorphic models compare equal.
    """
    import networkx as nx

    g = nx.DiGraph()
    for tid, th in model.thimacs.items():
        g.add_node(("t", tid), what="thimac", name=th.name, memory=th.is_memory, cls=th.classification.value)
        if th.parent is not None:
            g.add_edge(("t", th.parent), ("t", tid), what="contains")
        if th.host is not None:
            g.add_edge(("s", th.host), ("t", tid), what="hosts")
    for sid, st in model.stages.items():
        g.add_node(("s", sid), what="stage", kind=st.kind.value,
                   direction=st.direction.value if st.direction else None, label=st.label)
        g.add_edge(("t", st.owner), ("s", sid), what="contains")
    for aid, arc in model.arcs.items():
        g.add_node(("a", aid), what="arc", kind=arc.kind.value, guard=arc.guard)
        g.add_edge(("s", arc.src), ("a", aid), what="from")
        g.add_edge(("a", aid), ("s", arc.dst), what="to")
    for jid, join in model.joins.items():
        g.add_node(("j", jid), what="join")
        for aid in join.inputs:
            g.add_edge(("a", aid), ("j", jid), what="input")
    return g


def isomorphic(m1, m2):
    import networkx as nx
    from networkx.algorithms.isomorphism import DiGraphMatcher

    g1, g2 = as_digraph(m1), as_digraph(m2)
    if g1.number_of_nodes() != g2.number_of_nodes() or g1.number_of_edges() != g2.number_of_edges():
        return False
    if nx.weisfeiler_lehman_graph_hash(g1, node_attr=None) != nx.weisfeiler_lehman_graph_hash(g2, node_attr=None):
        return False
    return DiGraphMatcher(g1, g2, node_match=lambda a, b: a == b, edge_match=lambda a, b: a == b).is_isomorphic()
