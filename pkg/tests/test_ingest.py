"""Instance ingestion: native format, XCSP subset, lowering, printing."""

import itertools
from pathlib import Path

import pytest

BENCH = Path(__file__).resolve().parent.parent / "benchmarks"

from hvecsp import (
    BasicConstraint,
    Extension,
    Nary,
    check_network,
    enumerate_solutions,
    eval_constraint,
    solve,
)
from hvecsp.ingest import (
    LoweringStats,
    ParseError,
    detect_format,
    emit_native,
    load_text,
    lower_to_network,
    parse_native,
    parse_xcsp,
)
from hvecsp.pipeline import GenConfig, IllFormedNetworkError, random_network

from tests.nets import SIX_SOLUTION, six_var_example

SIX_NATIVE = """\
# the canonical six-variable instance
var x1 0 1
var x2 0 1
var x3 0 1
var x4 0 1
var x5 0 1
var x6 0 1
con c1 int eq(add(add(X0,X1),X2),1) x1 x2 x6
con c2 int eq(add(sub(add(X0,X1),X2),X3),1) x1 x2 x3 x4
con c3 int ge(sub(add(X0,X1),X2),1) x4 x5 x6
con c4 int eq(sub(add(X0,X1),X2),0) x2 x5 x6
con c5 int ge(X0,X1) x1 x6
"""


def test_parse_native_matches_hand_built_fixture():
    net, reg = parse_native(SIX_NATIVE)
    fixture, fixture_reg = six_var_example()
    assert net.variables == fixture.variables
    assert net.domains == fixture.domains
    assert net.constraints == fixture.constraints
    # and the parsed semantics solve to the same unique solution
    assert solve(net, reg) == SIX_SOLUTION


def test_parse_native_empty_file():
    net, reg = parse_native("")
    assert net.variables == ()
    assert net.constraints == ()


def test_parse_native_range_domains_and_tables():
    text = """\
var a 0..3
var b 1 3..4
table t 2 0 1;1 3;2 4
con c0 ext t a b
"""
    net, reg = parse_native(text)
    assert net.domains["a"] == (0, 1, 2, 3)
    assert net.domains["b"] == (1, 3, 4)
    (c,) = net.constraints
    assert isinstance(c, BasicConstraint)  # arity 2 lowers to a basic constraint
    assert eval_constraint(c, reg, {"a": 1, "b": 3})
    assert not eval_constraint(c, reg, {"a": 1, "b": 4})


def test_parse_native_three_wide_table():
    text = """\
var a 0 1
var b 0 1
var c 0 1
table t 3 0 1 0
con c0 ext t a b c
"""
    net, reg = parse_native(text)
    (c,) = net.constraints
    assert isinstance(c, Nary)
    assert reg.op("c0", 3) == Extension(((0, 1, 0),))


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("var a 0\nvar a 1\n", "duplicate variable"),
        ("con c0 int eq(X0,X1) a b\n", "not declared"),
        ("var a 0\nvar b 0\ntable t 2 0\n", "expected 2"),
        ("var a 0\nvar b 0\ncon c0 ext missing a b\n", "unknown table"),
        ("var a 0\nvar b 0\ncon c0 int frob(X0,X1) a b\n", "unknown operator"),
        ("shrug\n", "unknown declaration"),
        ("var a 0..x\n", "bad range"),
        ("var a 5..1\n", "empty range"),
    ],
)
def test_parse_native_diagnostics(text, fragment):
    with pytest.raises(ParseError) as exc:
        parse_native(text)
    assert fragment in str(exc.value)
    assert "line" in str(exc.value)


def test_native_roundtrip_from_hand_written_text():
    text = """\
var a 0..2
var b 1 4
var c 0 1
table t 3 0 1 0;2 4 1
con c0 ext t a b c
con c1 int ge(add(X0,X1),1) a b
"""
    net, reg = parse_native(text)
    printed = emit_native(net, reg)
    net2, reg2 = parse_native(printed)
    assert net2.variables == net.variables
    assert net2.domains == net.domains
    assert net2.constraints == net.constraints
    assert emit_native(net2, reg2) == printed
    assert enumerate_solutions(net, reg) == enumerate_solutions(net2, reg2)


def test_parse_xcsp_rejects_weighted_instances():
    text = MINIMAL_XCSP.replace(
        '<presentation name="tiny" format="XCSP 2.1"/>',
        '<presentation name="tiny" format="XCSP 2.1" type="WCSP"/>',
    )
    with pytest.raises(ParseError) as exc:
        parse_xcsp(text)
    assert "unsupported feature" in str(exc.value)


def test_native_roundtrip_on_generated_networks():
    for seed in range(80):
        net, reg = random_network(GenConfig(seed=seed))
        text = emit_native(net, reg)
        net2, reg2 = parse_native(text)
        assert net2.variables == net.variables
        assert net2.domains == net.domains
        assert net2.constraints == net.constraints
        assert emit_native(net2, reg2) == text
        # reparsed semantics agree: same solution sets
        if net.variables:
            assert enumerate_solutions(net, reg) == enumerate_solutions(net2, reg2)


MINIMAL_XCSP = """\
<instance>
  <presentation name="tiny" format="XCSP 2.1"/>
  <domains nbDomains="1">
    <domain name="D" nbValues="2">0 1</domain>
  </domains>
  <variables nbVariables="3">
    <variable name="a" domain="D"/>
    <variable name="b" domain="D"/>
    <variable name="c" domain="D"/>
  </variables>
  <relations nbRelations="1">
    <relation name="r" arity="3" nbTuples="1" semantics="supports">0 1 0</relation>
  </relations>
  <constraints nbConstraints="1">
    <constraint name="c0" arity="3" scope="a b c" reference="r"/>
  </constraints>
</instance>
"""


def test_parse_xcsp_minimal_supports_relation():
    inst = parse_xcsp(MINIMAL_XCSP)
    assert list(inst.variables) == ["a", "b", "c"]
    assert inst.relations["r"].rows == ((0, 1, 0),)
    net, reg = lower_to_network(inst)
    (c,) = net.constraints
    assert isinstance(c, Nary)
    assert check_network(net, reg).ok
    sols = enumerate_solutions(net, reg)
    assert sols == [{"a": 0, "b": 1, "c": 0}]
    assert solve(net, reg) == {"a": 0, "b": 1, "c": 0}


def test_parse_xcsp_predicate_binding_and_constants():
    text = """\
<instance>
  <domains><domain name="D">0 1 2</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
    <variable name="z" domain="D"/>
  </variables>
  <predicates>
    <predicate name="plus">
      <parameters>int A int B int C</parameters>
      <expression><functional>eq(add(A,B),C)</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="3" scope="x y z" reference="plus">
      <parameters>x y z</parameters>
    </constraint>
  </constraints>
</instance>
"""
    net, reg = lower_to_network(parse_xcsp(text))
    c = net.constraints[0]
    for x, y, z in itertools.product((0, 1, 2), repeat=3):
        assert eval_constraint(c, reg, {"x": x, "y": y, "z": z}) == (x + y == z)


def test_parse_xcsp_predicate_reordered_params():
    # effective parameters permute the scope: constraint says z = x + y
    # with formals bound as (z, x, y)
    text = """\
<instance>
  <domains><domain name="D">0 1 2 3 4</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
    <variable name="z" domain="D"/>
  </variables>
  <predicates>
    <predicate name="issum">
      <parameters>int S int A int B</parameters>
      <expression><functional>eq(S,add(A,B))</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="3" scope="x y z" reference="issum">
      <parameters>z x y</parameters>
    </constraint>
  </constraints>
</instance>
"""
    net, reg = lower_to_network(parse_xcsp(text))
    c = net.constraints[0]
    assert eval_constraint(c, reg, {"x": 1, "y": 2, "z": 3})
    assert not eval_constraint(c, reg, {"x": 3, "y": 2, "z": 1})


def test_parse_xcsp_arity_two_predicate_lowers_to_basic():
    text = """\
<instance>
  <domains><domain name="D">0 1</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
  </variables>
  <predicates>
    <predicate name="pne">
      <parameters>int A int B</parameters>
      <expression><functional>ne(A,B)</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="2" scope="x y" reference="pne"/>
  </constraints>
</instance>
"""
    net, reg = lower_to_network(parse_xcsp(text))
    (c,) = net.constraints
    assert isinstance(c, BasicConstraint)
    assert reg.basic("c0")(0, 1)
    assert not reg.basic("c0")(1, 1)


def test_supports_conflicts_duality():
    template = """\
<instance>
  <domains><domain name="D">0 1</domain></domains>
  <variables>
    <variable name="a" domain="D"/>
    <variable name="b" domain="D"/>
    <variable name="c" domain="D"/>
  </variables>
  <relations>
    <relation name="r" arity="3" semantics="{sem}">0 1 0|1 1 1</relation>
  </relations>
  <constraints>
    <constraint name="c0" arity="3" scope="a b c" reference="r"/>
  </constraints>
</instance>
"""
    net_s, reg_s = lower_to_network(parse_xcsp(template.format(sem="supports")))
    net_c, reg_c = lower_to_network(parse_xcsp(template.format(sem="conflicts")))
    for combo in itertools.product((0, 1), repeat=3):
        a = dict(zip(("a", "b", "c"), combo))
        accepted = eval_constraint(net_s.constraints[0], reg_s, a)
        rejected = eval_constraint(net_c.constraints[0], reg_c, a)
        assert accepted == (not rejected)


@pytest.mark.parametrize(
    "mutation, fragment",
    [
        ("<relation name=\"r\" arity=\"3\" nbTuples=\"1\" semantics=\"supports\">0 1</relation>",
         "expected 3"),
        ("<relation name=\"r\" arity=\"3\" nbTuples=\"9\" semantics=\"supports\">0 1 0</relation>",
         "nbTuples"),
        ("<relation name=\"r\" arity=\"3\" nbTuples=\"1\" semantics=\"costs\">0 1 0</relation>",
         "unsupported semantics"),
    ],
)
def test_parse_xcsp_relation_diagnostics(mutation, fragment):
    text = MINIMAL_XCSP.replace(
        '<relation name="r" arity="3" nbTuples="1" semantics="supports">0 1 0</relation>',
        mutation,
    )
    with pytest.raises(ParseError) as exc:
        parse_xcsp(text)
    assert fragment in str(exc.value)


def test_parse_xcsp_effective_param_constants():
    # integer literals may stand in for formal parameters
    text = """\
<instance>
  <domains><domain name="D">0 1 2 3</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
    <variable name="z" domain="D"/>
  </variables>
  <predicates>
    <predicate name="sumk">
      <parameters>int A int B int C int K</parameters>
      <expression><functional>eq(add(add(A,B),C),K)</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="3" scope="x y z" reference="sumk">
      <parameters>x y z 4</parameters>
    </constraint>
  </constraints>
</instance>
"""
    net, reg = lower_to_network(parse_xcsp(text))
    sols = enumerate_solutions(net, reg)
    assert sols and all(a["x"] + a["y"] + a["z"] == 4 for a in sols)


def test_parse_xcsp_effective_param_outside_scope():
    text = """\
<instance>
  <domains><domain name="D">0 1</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
    <variable name="z" domain="D"/>
  </variables>
  <predicates>
    <predicate name="pne">
      <parameters>int A int B</parameters>
      <expression><functional>ne(A,B)</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="2" scope="x y" reference="pne">
      <parameters>x z</parameters>
    </constraint>
  </constraints>
</instance>
"""
    with pytest.raises(ParseError) as exc:
        parse_xcsp(text)
    assert "not in the scope" in str(exc.value)


def test_parse_xcsp_unresolved_and_malformed():
    with pytest.raises(ParseError) as exc:
        parse_xcsp(MINIMAL_XCSP.replace('reference="r"', 'reference="ghost"'))
    assert "unresolved reference" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_xcsp("<instance><unclosed>")
    assert "malformed XML" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_xcsp(MINIMAL_XCSP.replace('scope="a b c"', 'scope="a b ghost"'))
    assert "not declared" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_xcsp(MINIMAL_XCSP.replace('arity="3" scope="a b c"',
                                        'arity="2" scope="a b c"'))
    assert "scope length" in str(exc.value)


def test_lowering_rejects_non_normalized_instances():
    text = """\
var a 0 1
var b 0 1
con c0 int ne(X0,X1) a b
con c1 int eq(X0,X1) b a
"""
    net, reg = parse_native(text)
    report = check_network(net, reg)
    assert not report.ok
    with pytest.raises(IllFormedNetworkError) as exc:
        load_text(text, "native", check=True)
    assert any(v.kind == "normalization" for v in exc.value.report.violations)


def test_lowering_stats_div_zero_counted():
    text = """\
var a 0 1
var b 0 1
var c 0 1
con c0 int eq(div(X0,X1),X2) a b c
"""
    stats = LoweringStats()
    net, reg = load_text(text, "native", stats=stats)
    # native predicates do not report div-by-zero through lowering stats;
    # they are still total and false on the offending tuples
    c = net.constraints[0]
    assert not eval_constraint(c, reg, {"a": 1, "b": 0, "c": 1})
    assert eval_constraint(c, reg, {"a": 1, "b": 1, "c": 1})


def test_xcsp_div_zero_counted_in_stats():
    text = """\
<instance>
  <domains><domain name="D">0 1</domain></domains>
  <variables>
    <variable name="x" domain="D"/>
    <variable name="y" domain="D"/>
    <variable name="z" domain="D"/>
  </variables>
  <predicates>
    <predicate name="p">
      <parameters>int A int B int C</parameters>
      <expression><functional>eq(div(A,B),C)</functional></expression>
    </predicate>
  </predicates>
  <constraints>
    <constraint name="c0" arity="3" scope="x y z" reference="p"/>
  </constraints>
</instance>
"""
    stats = LoweringStats()
    net, reg = load_text(text, "xcsp", stats=stats)
    sols = enumerate_solutions(net, reg)
    assert stats.div_zero_events > 0
    for a in sols:
        assert a["y"] != 0


def test_benchmark_files_parse_with_expected_stats():
    stats = LoweringStats()
    net, reg = load_text((BENCH / "prism_graceful.xml").read_text(), "xcsp",
                         stats=stats)
    assert stats.variables == 15
    assert stats.constraints == 60
    ternary = [c for c in net.constraints if isinstance(c, Nary)]
    assert len(ternary) == 9
    assert all(c.arity == 3 for c in ternary)
    assert sum(isinstance(c, BasicConstraint) for c in net.constraints) == 51
    assert {len(net.domains[v]) for v in net.variables} == {9, 10}
    assert check_network(net, reg).ok

    net, reg = load_text((BENCH / "grid16.xml").read_text(), "xcsp")
    assert len(net.variables) == 16
    assert len(net.constraints) == 15
    assert {c.arity for c in net.constraints} == {3, 4, 5}
    assert check_network(net, reg).ok


def test_detect_format():
    assert detect_format("foo.xml") == "xcsp"
    assert detect_format("FOO.XML") == "xcsp"
    assert detect_format("foo.csp") == "native"
    assert detect_format("-") == "native"
