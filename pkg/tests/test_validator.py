import itertools

import pytest

from tmkit import fixtures, parse, validate
from tmkit.decls import ChronEdge, DynamicDecls, EventDecl, NegativeDecl, ChoiceDecl
from tmkit.model import ActionKind, TransferDirection, new_model
from tmkit.validator import ADJACENCY_RULES, check_adjacency

A = ActionKind
IN, OUT, BOTH = TransferDirection.IN, TransferDirection.OUT, TransferDirection.BOTH

# (src kind, src dir, dst kind, dst dir, same thimac) -> allowed, written out longhand
ALLOWED = {
    (A.TRANSFER, IN, A.RECEIVE, None, True),
    (A.RECEIVE, None, A.PROCESS, None, True),
    (A.RECEIVE, None, A.RELEASE, None, True),
    (A.CREATE, None, A.PROCESS, None, True),
    (A.CREATE, None, A.RELEASE, None, True),
    (A.PROCESS, None, A.RELEASE, None, True),
    (A.PROCESS, None, A.CREATE, None, True),
    (A.RELEASE, None, A.TRANSFER, OUT, True),
    (A.TRANSFER, OUT, A.TRANSFER, IN, False),
}

SHAPES = [(A.CREATE, None), (A.PROCESS, None), (A.RELEASE, None), (A.RECEIVE, None),
          (A.TRANSFER, IN), (A.TRANSFER, OUT)]


def _expected(src, sdir, dst, ddir, same):
    return (src, sdir, dst, ddir, same) in ALLOWED


@pytest.mark.parametrize("src,dst,same", [
    (s, d, same) for s, d in itertools.product(SHAPES, SHAPES) for same in (True, False)
])
def test_adjacency_table_is_exhaustive(src, dst, same):
    m = new_model()
    a = m.add_thimac(None, "A")
    b = a if same else m.add_thimac(None, "B")
    s = m.add_stage(a, src[0], src[1])
    d = m.add_stage(b, dst[0], dst[1])
    assert check_adjacency(m, s, d) == _expected(src[0], src[1], dst[0], dst[1], same)


def test_rule_table_has_nine_rows():
    assert len(ADJACENCY_RULES) == len(ALLOWED)


@pytest.mark.parametrize("src_dir,dst_dir,ok", [(BOTH, IN, True), (OUT, BOTH, True), (IN, BOTH, False)])
def test_bidirectional_transfer_plays_either_role(src_dir, dst_dir, ok):
    m = new_model()
    s = m.add_stage(m.add_thimac(None, "A"), A.TRANSFER, src_dir)
    d = m.add_stage(m.add_thimac(None, "B"), A.TRANSFER, dst_dir)
    assert check_adjacency(m, s, d) == ok


def test_memory_pairs_are_legal_between_host_and_memory():
    m = new_model()
    a = m.add_thimac(None, "A")
    p = m.add_stage(a, A.PROCESS)
    mem = m.attach_memory(p, "Store")
    recv = m.add_stage(mem, A.RECEIVE)
    rel = m.add_stage(mem, A.RELEASE)
    assert check_adjacency(m, p, recv)
    assert check_adjacency(m, rel, p)
    assert not check_adjacency(m, recv, p)


def test_triggers_are_unrestricted():
    m = new_model()
    a = m.add_thimac(None, "A")
    b = m.add_thimac(None, "B")
    m.add_trigger(m.add_stage(a, A.RECEIVE), m.add_stage(b, A.CREATE), guard="x")
    assert validate(m).errors == []


def _codes(diags):
    return sorted(d.code for d in diags)


def test_illegal_flow_is_reported():
    m = new_model()
    a = m.add_thimac(None, "A")
    m.add_flow(m.add_stage(a, A.PROCESS), m.add_stage(a, A.RECEIVE))
    assert _codes(validate(m)) == ["E_ADJ"]


def test_join_with_one_input_is_reported():
    m = new_model()
    a = m.add_thimac(None, "A")
    p, q = m.add_stage(a, A.PROCESS), m.add_stage(a, A.PROCESS)
    m.add_join([m.add_trigger(p, q)], q)
    assert _codes(validate(m)) == ["E_JOIN_ARITY"]


def test_dangling_structure_is_reported():
    m = new_model()
    a = m.add_thimac(None, "A")
    m.add_stage(a, A.CREATE)
    m.thimacs[a].parent = 42
    assert _codes(validate(m)) == ["E_DANGLING"]


def test_parent_cycle_is_reported():
    m = new_model()
    a = m.add_thimac(None, "A")
    b = m.add_thimac(a, "B")
    m.thimacs[a].parent = b
    assert _codes(validate(m)) == ["E_FOREST"]


def _decl_model():
    m = new_model()
    a = m.add_thimac(None, "A")
    ghost = m.add_thimac(a, "Ghost", "appearing")
    c = m.add_stage(a, A.CREATE, label="c")
    p = m.add_stage(a, A.PROCESS, label="p")
    m.add_stage(ghost, A.PROCESS, label="g")
    m.add_stage(a, A.RELEASE, label="far")
    m.add_flow(c, p)
    return m


@pytest.mark.parametrize("decls,codes", [
    (DynamicDecls(events=[EventDecl("E1", "x", ("c", "p"))]), []),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c",), duration=0)]), ["E_DURATION"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("nope",))]), ["E_UNKNOWN_REF"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ())]), ["E_REGION_EMPTY"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("g",))]), ["E_APPEARING_IN_REGION"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c", "far"))]), ["W_REGION_DISCONNECTED"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c",)), EventDecl("E1", "y", ("p",))]), ["E_DUPLICATE"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c",))], negatives=[NegativeDecl("R2", "E2")]), ["E_NEG_UNPAIRED"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c",))], negatives=[NegativeDecl("R1", "E1")],
                  chronology=[ChronEdge("R1", "E1")]), ["E_NEG_SOURCE"]),
    (DynamicDecls(events=[EventDecl("E1", "x", ("c",))], chronology=[ChronEdge("E1", "E9")]), ["E_UNKNOWN_REF"]),
    (DynamicDecls(choices=[ChoiceDecl("c", ("only",))]), ["E_CHOICE"]),
    (DynamicDecls(choices=[ChoiceDecl("c", ("a", "b")), ChoiceDecl("d", ("b", "e"))]), ["E_CHOICE"]),
])
def test_declaration_diagnostics(decls, codes):
    assert _codes(validate(_decl_model(), decls)) == codes


def test_appearing_is_inherited_from_ancestors():
    m = new_model()
    ghost = m.add_thimac(None, "Ghost", "appearing")
    inner = m.add_thimac(ghost, "Inner")
    m.add_stage(inner, A.CREATE, label="x")
    diags = validate(m, DynamicDecls(events=[EventDecl("E1", "x", ("x",))]))
    assert _codes(diags) == ["E_APPEARING_IN_REGION"]


@pytest.mark.parametrize("name", ["carsale", "watch", "walking", "hammer"])
def test_fixtures_validate(name):
    assert validate(*fixtures.load(name)).errors == []


def test_region_problems_carry_source_lines():
    m, decls = parse('thimac A { create @a; release @b; }\n\nevent E1 "x" region { a b }\n')
    diags = validate(m, decls)
    assert [(d.code, d.line) for d in diags] == [("W_REGION_DISCONNECTED", 3)]


def test_missing_chronology_gets_a_suggestion():
    model, decls = parse("""\
thimac A { process @a; process @b; }
trigger @a -> @b;
event E1 "a" region { a }
event E2 "b" region { b }
""")
    (diag,) = validate(model, decls)
    assert diag.code == "W_CHRON_SUGGEST" and not diag.is_error
    assert "chron E1 -> E2" in diag.message
    decls.chronology.append(ChronEdge("E1", "E2"))
    assert len(validate(model, decls)) == 0
