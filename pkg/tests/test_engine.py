import random

import pytest

from regraft.engine import (AmalgamationUnit, ConditionalUnit, CountedUnit,
                            ExecConfig, IndependentUnit, Interpreter,
                            MultiSpec, ParamMapping, PriorityUnit, Registry,
                            SequentialUnit, apply_rule)
from regraft.errors import ExprEvalError, StepLimitExceeded
from regraft.expr import parse_expr
from regraft.formats.model_format import serialize_model
from regraft.graph import InstanceGraph, NodeRef
from regraft.rules import (Assignment, AttrConstant, AttrParam, Parameter,
                           PatternEdge, PatternGraph, PatternNode, Rule)

from toy import toy_metamodel


def _rule_make_box(name="make_box"):
    return Rule(name, rhs=PatternGraph((PatternNode("b", "Box", "made"),)),
                params=(Parameter("made", "out"),))


def _rule_del_item():
    return Rule("del_item", lhs=PatternGraph((PatternNode("i", "Item"),)))


def _rule_fail():
    lhs = PatternGraph((PatternNode("i", "Item",
                                    attr_patterns=(("name", AttrConstant("~never~")),)),))
    return Rule("always_fail", lhs=lhs,
                rhs=PatternGraph((PatternNode("i", "Item"),)),
                mapping=(("i", "i"),))


def _rule_advance():
    # consumes the edge it walks, so each hop happens exactly once
    lhs = PatternGraph(
        (PatternNode("c", "Item", "cur"), PatternNode("n", "Item", "nxt")),
        (PatternEdge("c", "next", "n"),))
    rhs = PatternGraph((PatternNode("c", "Item"), PatternNode("n", "Item")))
    return Rule("advance", params=(Parameter("cur", "in"), Parameter("nxt", "out")),
                lhs=lhs, rhs=rhs, mapping=(("c", "c"), ("n", "n")))


@pytest.fixture
def mm():
    return toy_metamodel()


def test_apply_rule_creates_and_binds_out_param(mm):
    g = InstanceGraph(mm)
    out = apply_rule(g, _rule_make_box())
    assert out.success
    assert out.bindings["made"] == NodeRef(1)
    assert g.nodes[1].type == "Box"


def test_apply_rule_no_match_leaves_graph_untouched(mm):
    g = InstanceGraph(mm)
    g.create_node("Box")
    before = serialize_model(g)
    out = apply_rule(g, _rule_del_item())
    assert not out.success
    assert serialize_model(g) == before


def test_apply_rule_takes_first_match_in_order(mm):
    g = InstanceGraph(mm)
    i1 = g.create_node("Item")
    g.create_node("Item")
    out = apply_rule(g, _rule_del_item())
    assert out.success
    assert i1 not in g


def test_apply_rule_expression_error_rolls_back(mm):
    g = InstanceGraph(mm)
    rule = Rule("boom",
                params=(Parameter("ghost", "in"),),
                rhs=PatternGraph((PatternNode("b", "Box"),)),
                assignments=(Assignment("b", "size", parse_expr("ghost + 1")),))
    before = serialize_model(g)
    with pytest.raises(ExprEvalError):
        apply_rule(g, rule)
    assert serialize_model(g) == before


def test_apply_rule_attribute_overwrite_on_preserved(mm):
    g = InstanceGraph(mm)
    b = g.create_node("Box")
    g.set_attribute(b, "size", 3)
    lhs = PatternGraph((PatternNode("b", "Box"),))
    rule = Rule("resize", lhs=lhs, rhs=lhs, mapping=(("b", "b"),),
                assignments=(Assignment("b", "size", parse_expr("7")),))
    assert apply_rule(g, rule).success
    assert g.get_attribute(b, "size") == 7


def _interp(g, units=None, rules=None, **cfg):
    registry = Registry(rules={r.name: r for r in (rules or [])},
                        units={u.name: u for u in (units or [])})
    return Interpreter(registry, g, ExecConfig(**cfg) if cfg else None)


def test_sequential_rolls_back_all_on_failure(mm):
    g = InstanceGraph(mm)
    g.create_node("Item")
    before = serialize_model(g)
    unit = SequentialUnit(steps=("make_box", "always_fail"), name="S")
    it = _interp(g, units=[unit], rules=[_rule_make_box(), _rule_fail()])
    out = it.execute("S")
    assert not out.success
    assert serialize_model(g) == before


def test_counted_unbounded_drains_and_succeeds(mm):
    g = InstanceGraph(mm)
    for _ in range(3):
        g.create_node("Item")
    unit = CountedUnit(body="del_item", count=-1, name="L")
    it = _interp(g, units=[unit], rules=[_rule_del_item()])
    out = it.execute("L")
    assert out.success
    assert it.rule_counts["del_item"] == 3
    assert g.nodes_of_type("Item") == []
    # running again still succeeds with zero applications
    assert it.execute("L").success


def test_counted_exact_rolls_back_partial_progress(mm):
    g = InstanceGraph(mm)
    g.create_node("Item")
    before = serialize_model(g)
    unit = CountedUnit(body="del_item", count=2, name="L2")
    it = _interp(g, units=[unit], rules=[_rule_del_item()])
    assert not it.execute("L2").success
    assert serialize_model(g) == before


def test_counted_zero_is_noop_success(mm):
    g = InstanceGraph(mm)
    unit = CountedUnit(body="del_item", count=0, name="L0")
    it = _interp(g, units=[unit], rules=[_rule_del_item()])
    assert it.execute("L0").success


def test_conditional_keeps_if_effects_and_runs_then(mm):
    g = InstanceGraph(mm)
    g.create_node("Item")
    unit = ConditionalUnit(if_step="del_item", then_step="make_box", name="C")
    it = _interp(g, units=[unit], rules=[_rule_del_item(), _rule_make_box()])
    assert it.execute("C").success
    assert g.nodes_of_type("Item") == []
    assert len(g.nodes_of_type("Box")) == 1


def test_conditional_failing_if_without_else_fails(mm):
    g = InstanceGraph(mm)
    before = serialize_model(g)
    unit = ConditionalUnit(if_step="del_item", then_step="make_box", name="C")
    it = _interp(g, units=[unit], rules=[_rule_del_item(), _rule_make_box()])
    assert not it.execute("C").success
    assert serialize_model(g) == before


def test_conditional_else_branch(mm):
    g = InstanceGraph(mm)
    unit = ConditionalUnit(if_step="del_item", then_step="always_fail",
                           else_step="make_box", name="C")
    it = _interp(g, units=[unit],
                 rules=[_rule_del_item(), _rule_fail(), _rule_make_box()])
    assert it.execute("C").success
    assert len(g.nodes_of_type("Box")) == 1


def test_conditional_then_failure_rolls_back_if_effects(mm):
    g = InstanceGraph(mm)
    g.create_node("Item")
    before = serialize_model(g)
    unit = ConditionalUnit(if_step="del_item", then_step="always_fail", name="C")
    it = _interp(g, units=[unit], rules=[_rule_del_item(), _rule_fail()])
    assert not it.execute("C").success
    assert serialize_model(g) == before


def test_priority_first_success_wins(mm):
    g = InstanceGraph(mm)
    unit = PriorityUnit(steps=("always_fail", "make_box", "del_item"), name="P")
    it = _interp(g, units=[unit],
                 rules=[_rule_fail(), _rule_make_box(), _rule_del_item()])
    assert it.execute("P").success
    assert it.rule_counts == {"make_box": 1}


def test_independent_deterministic_per_seed(mm):
    results = []
    for _ in range(2):
        g = InstanceGraph(mm)
        unit = IndependentUnit(steps=("make_box", "make_two"), name="I")
        two = Rule("make_two", rhs=PatternGraph((PatternNode("a", "Item"),
                                                 PatternNode("b", "Item"))))
        it = _interp(g, units=[unit], rules=[_rule_make_box(), two], seed=42)
        assert it.execute("I").success
        results.append(serialize_model(g))
    assert results[0] == results[1]


def test_recursion_with_fresh_frames_and_shadowed_params(mm):
    g = InstanceGraph(mm)
    items = [g.create_node("Item") for _ in range(5)]
    for a, b in zip(items, items[1:]):
        g.add_edge(a, "next", b)
    # same shape as a recursive descent loop: counted(-1) around a
    # conditional whose then-branch re-enters the loop unit
    walk = CountedUnit(
        name="Walk", count=-1, body="Hop",
        params=(Parameter("cur", "inout"), Parameter("tmp", "out")),
        mappings=(
            ParamMapping((None, "cur"), ("Hop", "cur")),
            ParamMapping(("Hop", "tmp"), (None, "tmp")),
        ))
    hop = ConditionalUnit(
        name="Hop", if_step="advance", then_step="Walk",
        params=(Parameter("cur", "in"), Parameter("tmp", "out")),
        mappings=(
            ParamMapping((None, "cur"), ("advance", "cur")),
            ParamMapping(("advance", "nxt"), (None, "tmp")),
            ParamMapping((None, "tmp"), ("Walk", "cur")),
        ))
    trace: list[str] = []
    registry = Registry(rules={"advance": _rule_advance()},
                        units={"Walk": walk, "Hop": hop})
    it = Interpreter(registry, g, ExecConfig(trace=trace))
    out = it.execute("Walk", {"cur": NodeRef(items[0])})
    assert out.success
    # four hops happened, each in its own frame
    assert [l for l in trace if l.startswith("apply advance")] == [
        f"apply advance {{cur=#{a}, nxt=#{b}}}"
        for a, b in zip(items, items[1:])
    ]
    # the caller's own binding was never clobbered by the recursive calls
    assert out.bindings["cur"] == NodeRef(items[0])
    assert out.bindings["tmp"] == NodeRef(items[1])


def test_trace_and_counts_agree(mm):
    g = InstanceGraph(mm)
    for _ in range(4):
        g.create_node("Item")
    trace: list[str] = []
    unit = CountedUnit(body="del_item", count=-1, name="L")
    registry = Registry(rules={"del_item": _rule_del_item()}, units={"L": unit})
    it = Interpreter(registry, g, ExecConfig(trace=trace))
    it.execute("L")
    assert it.rule_counts["del_item"] == 4
    assert len([l for l in trace if l.startswith("apply del_item")]) == 4


def test_step_limit_aborts_with_rollback(mm):
    g = InstanceGraph(mm)
    before = serialize_model(g)
    unit = CountedUnit(body="make_box", count=-1, name="Forever")
    it = _interp(g, units=[unit], rules=[_rule_make_box()], step_limit=50)
    with pytest.raises(StepLimitExceeded):
        it.execute("Forever")
    # the engine unwinds without keeping partial work
    assert serialize_model(g) == before


def test_determinism_same_seed_same_everything(mm):
    outs = []
    for _ in range(2):
        g = InstanceGraph(mm)
        for _ in range(3):
            g.create_node("Item")
        trace: list[str] = []
        indep = IndependentUnit(steps=("del_item", "make_box"), name="I")
        loop = CountedUnit(body="I", count=-1, name="L")
        registry = Registry(rules={"del_item": _rule_del_item(),
                                   "make_box": _rule_make_box()},
                            units={"I": indep, "L": loop})
        it = Interpreter(registry, g, ExecConfig(seed=9, step_limit=100))
        try:
            it.execute("L")
        except StepLimitExceeded:
            pass
        outs.append((serialize_model(g), tuple(trace)))
    assert outs[0] == outs[1]


def _rename_machine_fixture(n_states):
    from regraft.metamodel import AttrDef, Metamodel, NodeTypeDef, RefDef
    mm = Metamodel("sm", [
        NodeTypeDef("StateMachine",
                    references=(RefDef("states", "State", containment=True,
                                       many=True),)),
        NodeTypeDef("State", attributes=(AttrDef("name", "string"),)),
    ])
    g = InstanceGraph(mm)
    m = g.create_node("StateMachine")
    for i in range(n_states):
        s = g.create_node("State")
        g.set_attribute(s, "name", f"s{i}")
        g.add_edge(m, "states", s)
    kernel = Rule("grab_machine", params=(Parameter("m", "out"),),
                  lhs=PatternGraph((PatternNode("m", "StateMachine", "m"),)),
                  rhs=PatternGraph((PatternNode("m", "StateMachine"),)),
                  mapping=(("m", "m"),))
    rename_lhs = PatternGraph(
        (PatternNode("m", "StateMachine"),
         PatternNode("s", "State", attr_patterns=(("name", AttrParam("old")),))),
        (PatternEdge("m", "states", "s"),))
    rename = Rule("rename_state", params=(Parameter("old", "out"),),
                  lhs=rename_lhs, rhs=rename_lhs,
                  mapping=(("m", "m"), ("s", "s")),
                  assignments=(Assignment("s", "name",
                                          parse_expr('"r_" + old')),))
    unit = AmalgamationUnit(kernel="grab_machine",
                            multis=(MultiSpec("rename_state",
                                              embedding=(("m", "m"),)),),
                            name="RenameAll")
    return g, unit, kernel, rename


@pytest.mark.parametrize("n_states", [0, 1, 7, 10])
def test_amalgamation_renames_all_states_atomically(n_states):
    g, unit, kernel, rename = _rename_machine_fixture(n_states)
    # brute-force oracle: rename every state directly
    want = {nid: "r_" + g.get_attribute(nid, "name")
            for nid in g.nodes_of_type("State")}
    it = _interp(g, units=[unit], rules=[kernel, rename])
    assert it.execute("RenameAll").success
    got = {nid: g.get_attribute(nid, "name") for nid in g.nodes_of_type("State")}
    assert got == want
    assert it.rule_counts["rename_state"] == n_states


def test_amalgamation_fails_without_kernel_match(mm):
    g, unit, kernel, rename = _rename_machine_fixture(2)
    g2 = InstanceGraph(g.metamodel)  # empty graph: no machine
    it = _interp(g2, units=[unit], rules=[kernel, rename])
    assert not it.execute("RenameAll").success
