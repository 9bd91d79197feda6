"""Reference extractor: computes the state machine by direct traversal.

This is the independent second route used to check the rewriting pipeline:
no pattern matching, no rules, just a recursive walk over the containment
tree carrying the current base class and trigger, in the same deterministic
order the rule-based pipeline commits to (children in node-id order, which
is textual order for parsed sources).
"""

from __future__ import annotations

from ..errors import RegraftError
from ..graph import InstanceGraph
from ..metamodel import Metamodel


def _sm_metamodel() -> Metamodel:
    from .runner import load_assets
    return load_assets().statemachine_metamodel


class _Extraction:
    def __init__(self, host: InstanceGraph):
        self.host = host
        self.out = InstanceGraph(_sm_metamodel())
        self.machine = self.out.create_node("StateMachine")
        self.state_ids: dict[str, int] = {}

    # -- states --------------------------------------------------------------

    def add_states(self, root: int) -> list[tuple[int, str]]:
        """Preorder over the subclass tree; one state per concrete class
        not shadowed by an earlier equally-named one.  Returns the visit
        order of translated (class, name) pairs."""
        g = self.host
        children: dict[int, list[int]] = {}
        for cid in g.nodes_of_type("Class"):
            for parent in g.ref_targets(cid, "extends"):
                children.setdefault(parent, []).append(cid)
        translated: list[tuple[int, str]] = []

        def visit(cid: int) -> None:
            name = g.get_attribute(cid, "name")
            if not g.get_attribute(cid, "abstract") and name not in self.state_ids:
                sid = self.out.create_node("State")
                self.out.set_attribute(sid, "name", name)
                self.out.add_edge(self.machine, "states", sid)
                self.state_ids[name] = sid
                translated.append((cid, name))
            for child in sorted(children.get(cid, ())):
                visit(child)

        visit(root)
        return translated

    # -- transitions -----------------------------------------------------------

    def add_transitions(self, translated: list[tuple[int, str]]) -> None:
        g = self.host
        classes_by_name: dict[str, list[int]] = {}
        for cid in g.nodes_of_type("Class"):
            classes_by_name.setdefault(g.get_attribute(cid, "name"), []).append(cid)
        # iteration order mirrors the rule pipeline: states in creation order,
        # then every equally-named class in id order
        for _cid, name in translated:
            for cls in sorted(classes_by_name.get(name, ())):
                for method in g.ref_targets(cls, "methods"):
                    m_name = g.get_attribute(method, "name")
                    self._walk(method, name, m_name, "")

    def _walk(self, node: int, base_name: str, m_name: str, trigger: str) -> None:
        g = self.host
        t = g.nodes[node].type
        if t == "ExpressionStatement":
            self._maybe_transition(node, base_name, m_name, trigger)
            return
        if t == "Switch":
            for case in g.ref_targets(node, "cases"):
                self._walk(case, base_name, m_name,
                           g.get_attribute(case, "label"))
            return
        if t == "TryBlock":
            for stmt in g.ref_targets(node, "statements"):
                self._walk(stmt, base_name, m_name, trigger)
            for catch in g.ref_targets(node, "catches"):
                self._walk(catch, base_name, m_name,
                           g.get_attribute(catch, "exceptionType"))
            for fin in g.ref_targets(node, "finallyBlock"):
                self._walk(fin, base_name, m_name, trigger)
            return
        if g.metamodel.conforms(t, "StatementListContainer"):
            # ClassMethod, Block, SwitchCase, CatchBlock, Condition
            for stmt in g.ref_targets(node, "statements"):
                self._walk(stmt, base_name, m_name, trigger)
            return
        # other statement kinds carry no transitions and have no children

    def _maybe_transition(self, stmt: int, base_name: str, m_name: str,
                          trigger: str) -> None:
        g = self.host
        exprs = g.ref_targets(stmt, "expression")
        if not exprs or g.nodes[exprs[0]].type != "NewConstructorCall":
            return
        targets = g.ref_targets(exprs[0], "instantiates")
        if not targets:
            return
        target_name = g.get_attribute(targets[0], "name")
        if target_name not in self.state_ids or base_name not in self.state_ids:
            return  # only translated classes take part
        tid = self.out.create_node("Transition")
        self.out.add_edge(self.machine, "transitions", tid)
        self.out.add_edge(tid, "source", self.state_ids[base_name])
        self.out.add_edge(tid, "target", self.state_ids[target_name])
        self.out.set_attribute(tid, "trigger", m_name if trigger == "" else trigger)
        self.out.set_attribute(tid, "action", self._action_for(stmt))

    def _action_for(self, stmt: int) -> str:
        """First sibling send("...") call in the same container."""
        g = self.host
        container = g.containment_parent(stmt)
        if container is None:
            return ""
        for sibling in g.ref_targets(container, "statements"):
            if sibling == stmt or g.nodes[sibling].type != "ExpressionStatement":
                continue
            exprs = g.ref_targets(sibling, "expression")
            if not exprs or g.nodes[exprs[0]].type != "MethodCall":
                continue
            if g.get_attribute(exprs[0], "methodName") != "send":
                continue
            args = g.ref_targets(exprs[0], "argument")
            if not args or g.nodes[args[0]].type != "StringLiteral":
                continue
            return g.get_attribute(args[0], "value")
        return ""


def oracle_extract(java_model: InstanceGraph) -> InstanceGraph:
    """Extract the state machine without graph rewriting.

    Raises if no class named "State" exists (the pipeline's entry rule could
    never match such a model either).
    """
    g = java_model
    roots = [cid for cid in g.nodes_of_type("Class")
             if g.get_attribute(cid, "name") == "State"]
    if not roots:
        raise RegraftError('model has no class named "State"')
    extraction = _Extraction(g)
    translated = extraction.add_states(roots[0])
    extraction.add_transitions(translated)
    return extraction.out
