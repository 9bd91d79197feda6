import pytest

from regraft.formats.model_format import parse_model
from regraft.graph import InstanceGraph
from regraft.reeng.diffsm import diff_statemachines
from regraft.reeng.runner import load_assets


@pytest.fixture(scope="module")
def sm_mm():
    return load_assets().statemachine_metamodel


def _machine(sm_mm, states, transitions):
    g = InstanceGraph(sm_mm)
    m = g.create_node("StateMachine")
    ids = {}
    for name in states:
        s = g.create_node("State")
        g.set_attribute(s, "name", name)
        g.add_edge(m, "states", s)
        ids.setdefault(name, s)
    for src, trg, trigger, action in transitions:
        t = g.create_node("Transition")
        g.add_edge(m, "transitions", t)
        g.add_edge(t, "source", ids[src])
        g.add_edge(t, "target", ids[trg])
        g.set_attribute(t, "trigger", trigger)
        g.set_attribute(t, "action", action)
    return g


def test_identical_machines_empty_report(sm_mm):
    a = _machine(sm_mm, ["A", "B"], [("A", "B", "go", "x")])
    b = _machine(sm_mm, ["B", "A"], [("A", "B", "go", "x")])
    report = diff_statemachines(a, b)
    assert report.empty()
    assert "match" in report.render()


def test_single_trigger_difference(sm_mm):
    a = _machine(sm_mm, ["A", "B"], [("A", "B", "go", "")])
    b = _machine(sm_mm, ["A", "B"], [("A", "B", "stop", "")])
    report = diff_statemachines(a, b)
    assert not report.empty()
    assert report.unmatched_transitions_left == [("A", "B", "go", "")]
    assert report.unmatched_transitions_right == [("A", "B", "stop", "")]
    assert report.unmatched_states_left == []


def test_missing_state(sm_mm):
    a = _machine(sm_mm, ["A", "B", "C"], [])
    b = _machine(sm_mm, ["A", "B"], [])
    report = diff_statemachines(a, b)
    assert report.unmatched_states_left == ["C"]
    assert report.unmatched_states_right == []


def test_duplicate_names_reported_not_fatal(sm_mm):
    a = _machine(sm_mm, ["A", "A"], [])
    b = _machine(sm_mm, ["A", "A"], [])
    report = diff_statemachines(a, b)
    assert report.empty()
    assert report.duplicate_names_left == ["A"]
    assert report.duplicate_names_right == ["A"]
    assert "duplicate" in report.render()


def test_transition_multiset_semantics(sm_mm):
    a = _machine(sm_mm, ["A"], [("A", "A", "t", ""), ("A", "A", "t", "")])
    b = _machine(sm_mm, ["A"], [("A", "A", "t", "")])
    report = diff_statemachines(a, b)
    assert report.unmatched_transitions_left == [("A", "A", "t", "")]
    assert report.unmatched_transitions_right == []


def test_diff_parsed_golden_against_itself(sm_mm):
    from pathlib import Path
    golden = (Path(__file__).resolve().parents[1] /
              "src/regraft/reeng/assets/corpora/small/golden.gm").read_text()
    a = parse_model(golden, sm_mm)
    b = parse_model(golden, sm_mm)
    assert diff_statemachines(a, b).empty()
