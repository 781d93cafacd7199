import pytest

from tmkit import compile_dynamic, fixtures, parse
from tmkit.decls import ChronEdge, ChronJoin, JoinInput
from tmkit.dynamics import ChronologyGraph, EventKind, natural_key
from tmkit.errors import CompileError

BASE = """\
thimac A {
  create @a;
  process @b;
  release @c;
}
flow @a -> @b;
flow @b -> @c;
event E1 "one" region { a }
event E2 "two" region { a b }
event E3 "three" region { c }
"""


def _compile(extra: str):
    return compile_dynamic(*parse(BASE + extra))


def test_negative_shares_the_region_object_of_its_pair():
    dyn = compile_dynamic(*fixtures.load("watch"))
    assert dyn.negatives["R5"].region is dyn.events["E5"].region
    assert dyn.region_of("R5") is dyn.region_of("E5")


def test_regions_are_induced_subdiagrams():
    dyn = _compile("")
    model = dyn.static
    region = dyn.events["E2"].region
    assert region.nodes == {model.resolve_ref("a"), model.resolve_ref("b")}
    assert len(region.arcs) == 1
    assert dyn.events["E1"].region.arcs == frozenset()


def test_event_attributes_are_carried_over():
    dyn = compile_dynamic(*fixtures.load("watch"))
    assert dyn.events["E1"].kind is EventKind.ENTITY_LIKE
    assert dyn.events["E1"].extended
    assert dyn.events["E3"].kind is EventKind.PROCESS_LIKE
    assert dyn.events["E3"].duration == 1


@pytest.mark.parametrize("chron,code", [
    ("chron E1 -> E2;\nchron E2 -> E1;", "E_CHRON_CYCLE"),
    ("chron E1 -> E1;", "E_CHRON_CYCLE"),
    ("chron join (E1, E2) -> E3;\nchron E3 -> E1;", "E_CHRON_CYCLE"),
    ("chron E1 -> E9;", "E_UNKNOWN_REF"),
])
def test_compile_rejects(chron, code):
    with pytest.raises(CompileError) as info:
        _compile(chron)
    assert code in [d.code for d in info.value.diagnostics]


@pytest.mark.parametrize("chron", [
    'chron E1 -> E2;\nchron E2 -> E1 when "again";',
    'chron join (E1, E2) -> E3 when "g";\nchron E3 -> E1;',
    'chron E1 -> E2;\nchron E2 -> E3;\nchron E1 -> E3;',
])
def test_guarded_cycles_and_dags_compile(chron):
    assert _compile(chron).chronology.is_dag_without_guards()


def test_roots_and_guards():
    dyn = _compile('chron E1 -> E2 when "x";\nchron join (E1, E2 when "y") -> E3 when "z";')
    chron = dyn.chronology
    assert chron.roots() == ["E1"]
    assert chron.guards() == {"x", "y", "z"}


def test_unguarded_successors_skip_guarded_joins():
    graph = ChronologyGraph(
        ("A", "B", "C"), (),
        (ChronEdge("A", "B"), ChronEdge("B", "C", "g")),
        (ChronJoin((JoinInput("A"), JoinInput("B")), "C"), ChronJoin((JoinInput("A"), JoinInput("B")), "A", "h")),
    )
    assert graph.unguarded_successors() == {"A": ["B", "C"], "B": ["C"], "C": []}


def test_carsale_chronology_shape():
    dyn = compile_dynamic(*fixtures.load("carsale"))
    chron = dyn.chronology
    assert len(dyn.events) == 17
    assert chron.roots() == ["E1"]
    assert [j.output for j in chron.joins] == ["E16"]
    assert {c.name for c in dyn.choices} == {"availability", "finance"}


@pytest.mark.parametrize("names,expected", [
    (["E10", "E2", "E1"], ["E1", "E2", "E10"]),
    (["R16", "E16", "E2"], ["E2", "E16", "R16"]),
    (["a10b2", "a10b10", "a9"], ["a9", "a10b2", "a10b10"]),
])
def test_natural_key(names, expected):
    assert sorted(names, key=natural_key) == expected
