"""Backtracking injective pattern matching over typed instance graphs.

Pattern nodes are processed in declaration order; candidate sets are narrowed
through edges to already-bound neighbours (and, for nodes whose neighbours
come later, through an incoming-reference index), falling back to the type
index.  Candidates are tried in ascending node-id order, so the sequence of
matches is deterministic and lexicographic with respect to the pattern's
declaration order.  Application-condition formulas are evaluated once a full
binding exists, by running the same search on each condition's extension
pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import ExprEvalError, MatchError
from .expr import evaluate, params_of
from .graph import InstanceGraph, NodeRef
from .metamodel import Metamodel, Value, default_value
from .rules import (And, AttrCheck, AttrConstant, AttrParam, Formula, GraphCond,
                    Not, Or, PatternGraph, Rule, TruePred)

ParamValue = object  # Value | NodeRef


@dataclass
class Match:
    node_binding: dict[str, int]
    param_binding: dict[str, ParamValue] = field(default_factory=dict)


def _veq(a: object, b: object) -> bool:
    """Value equality that keeps booleans and integers apart."""
    return a == b and isinstance(a, bool) == isinstance(b, bool)


class _NodePlan:
    __slots__ = ("pid", "type", "closure", "binding", "check_edges",
                 "narrow_in", "consts", "params", "checks", "defaults",
                 "narrow_attr")

    def __init__(self, pid: str):
        self.pid = pid
        self.type = ""
        self.closure: frozenset[str] = frozenset()
        self.binding: str | None = None
        # edges to already-bound nodes: (ref, other pid, outgoing?)
        self.check_edges: list[tuple[str, str, bool]] = []
        # incoming-edge refs from still-unbound neighbours, for narrowing
        self.narrow_in: list[str] = []
        self.consts: list[tuple[str, Value]] = []
        self.params: list[tuple[str, str]] = []  # (attr name, param name)
        self.checks: list[tuple[str, AttrCheck, frozenset[str]]] = []
        self.defaults: dict[str, Value] = {}
        # (attr, const value or None, param name or None) usable for
        # attribute-index narrowing when the value is known and non-default
        self.narrow_attr: tuple[str, Value | None, str | None] | None = None


class _Plan:
    __slots__ = ("pattern", "nodes")

    def __init__(self, pattern: PatternGraph, mm: Metamodel):
        self.pattern = pattern
        self.nodes: list[_NodePlan] = []
        position = {pn.id: i for i, pn in enumerate(pattern.pnodes)}
        for i, pn in enumerate(pattern.pnodes):
            np = _NodePlan(pn.id)
            np.type = pn.type
            np.closure = mm.concrete_subtypes(pn.type)
            np.binding = pn.binding
            for pe in pattern.pedges:
                if pe.src == pn.id and position[pe.trg] <= i:
                    np.check_edges.append((pe.ref, pe.trg, True))
                elif pe.trg == pn.id and position[pe.src] < i:
                    np.check_edges.append((pe.ref, pe.src, False))
                elif pe.trg == pn.id and position[pe.src] > i:
                    np.narrow_in.append(pe.ref)
            for attr_name, ap in pn.attr_patterns:
                ad = mm.attr(pn.type, attr_name)
                if ad is not None:
                    np.defaults[attr_name] = default_value(ad.kind)
                if isinstance(ap, AttrConstant):
                    np.consts.append((attr_name, ap.value))
                    if np.narrow_attr is None and ad is not None and \
                            ap.value != default_value(ad.kind):
                        np.narrow_attr = (attr_name, ap.value, None)
                elif isinstance(ap, AttrParam):
                    np.params.append((attr_name, ap.name))
                    if np.narrow_attr is None and ad is not None:
                        np.narrow_attr = (attr_name, None, ap.name)
                else:
                    np.checks.append((attr_name, ap, params_of(ap.expr)))
            self.nodes.append(np)


_plan_cache: dict[tuple[int, int], _Plan] = {}


def _plan_for(pattern: PatternGraph, mm: Metamodel) -> _Plan:
    key = (id(pattern), id(mm))
    plan = _plan_cache.get(key)
    if plan is not None and plan.pattern is pattern:
        return plan
    if len(_plan_cache) > 1024:
        _plan_cache.clear()
    plan = _Plan(pattern, mm)
    _plan_cache[key] = plan
    return plan


class _CondInfo:
    __slots__ = ("cond", "anchored", "free", "fast")

    def __init__(self, cond: GraphCond, mm: Metamodel):
        self.cond = cond
        plan = _Plan(cond.extension, mm)
        anchored_ids = {c for _h, c in cond.anchor}
        self.anchored = [np for np in plan.nodes if np.pid in anchored_ids]
        free_nodes = [np for np in plan.nodes if np.pid not in anchored_ids]
        self.free = free_nodes[0] if len(free_nodes) == 1 else None
        param_names = [pname for np in plan.nodes for _a, pname in np.params]
        self.fast = (
            isinstance(cond.nested, TruePred)
            and len(free_nodes) <= 1
            and len(param_names) == len(set(param_names))
            and all(np.binding is None for np in plan.nodes)
        )


_cond_cache: dict[tuple[int, int], _CondInfo] = {}


def _cond_info(cond: GraphCond, mm: Metamodel) -> _CondInfo:
    key = (id(cond), id(mm))
    info = _cond_cache.get(key)
    if info is not None and info.cond is cond:
        return info
    if len(_cond_cache) > 1024:
        _cond_cache.clear()
    info = _CondInfo(cond, mm)
    _cond_cache[key] = info
    return info


class _Searcher:
    def __init__(self, graph: InstanceGraph, injective: bool):
        self.g = graph
        self.mm = graph.metamodel
        self.injective = injective

    # -- pattern search ----------------------------------------------------

    def search(self, pattern: PatternGraph, pinned: Mapping[str, int],
               params: dict[str, ParamValue], formula: Formula,
               used: set[int] | None = None,
               ) -> Iterator[tuple[dict[str, int], dict[str, ParamValue]]]:
        plan = _plan_for(pattern, self.mm)
        bindings: dict[str, int] = {}
        used = set() if used is None else used
        deferred: list[tuple[str, str, AttrCheck]] = []
        yield from self._extend(plan, 0, pinned, bindings, params, used,
                                deferred, formula)

    def _extend(self, plan: _Plan, pos: int, pinned: Mapping[str, int],
                bindings: dict[str, int], params: dict[str, ParamValue],
                used: set[int],
                deferred: list[tuple[str, str, AttrCheck]], formula: Formula,
                ) -> Iterator[tuple[dict[str, int], dict[str, ParamValue]]]:
        if pos == len(plan.nodes):
            if self._deferred_ok(deferred, bindings, params) and \
                    self.eval_formula(formula, bindings, params, used):
                yield dict(bindings), dict(params)
            return
        np = plan.nodes[pos]
        nodes = self.g.nodes
        injective = self.injective
        pin = pinned.get(np.pid)
        for nid in self._candidates(np, pin, bindings, params):
            node = nodes.get(nid)
            if node is None or node.type not in np.closure:
                continue
            if injective and nid in used and nid != pin:
                continue
            ok = True
            for ref, other_pid, outgoing in np.check_edges:
                other = nid if other_pid == np.pid else bindings[other_pid]
                if outgoing:
                    if other not in node.refs.get(ref, ()):
                        ok = False
                        break
                elif nid not in nodes[other].refs.get(ref, ()):
                    ok = False
                    break
            if not ok:
                continue
            attrs = node.attrs
            for attr_name, want in np.consts:
                have = attrs.get(attr_name, np.defaults.get(attr_name))
                if not (have == want
                        and isinstance(have, bool) == isinstance(want, bool)):
                    ok = False
                    break
            if not ok:
                continue
            new_params: list[str] = []
            n_deferred = len(deferred)
            for attr_name, pname in np.params:
                value = attrs.get(attr_name, np.defaults.get(attr_name))
                if pname in params:
                    if not _veq(params[pname], value):
                        ok = False
                        break
                else:
                    params[pname] = value
                    new_params.append(pname)
            if ok and np.binding is not None and np.binding not in params:
                params[np.binding] = NodeRef(nid)
                new_params.append(np.binding)
            if ok:
                for attr_name, ap, needed in np.checks:
                    if needed <= params.keys():
                        value = attrs.get(attr_name, np.defaults.get(attr_name))
                        if not self._check_true(ap, attr_name, value, params):
                            ok = False
                            break
                    else:
                        deferred.append((np.pid, attr_name, ap))
            if ok:
                bindings[np.pid] = nid
                added_used = injective and nid not in used
                if added_used:
                    used.add(nid)
                yield from self._extend(plan, pos + 1, pinned, bindings, params,
                                        used, deferred, formula)
                if added_used:
                    used.discard(nid)
                del bindings[np.pid]
            del deferred[n_deferred:]
            for name in new_params:
                del params[name]

    def first(self, pattern: PatternGraph, pinned: Mapping[str, int],
              params: dict[str, ParamValue], formula: Formula,
              ) -> tuple[dict[str, int], dict[str, ParamValue]] | None:
        """First match in the same order ``search`` enumerates, without
        generator overhead; used on the rule-application hot path."""
        plan = _plan_for(pattern, self.mm)
        return self._first(plan, 0, pinned, {}, params, set(), [], formula)

    def _first(self, plan: _Plan, pos: int, pinned: Mapping[str, int],
               bindings: dict[str, int], params: dict[str, ParamValue],
               used: set[int], deferred: list[tuple[str, str, AttrCheck]],
               formula: Formula,
               ) -> tuple[dict[str, int], dict[str, ParamValue]] | None:
        if pos == len(plan.nodes):
            if self._deferred_ok(deferred, bindings, params) and \
                    self.eval_formula(formula, bindings, params, used):
                return dict(bindings), dict(params)
            return None
        np = plan.nodes[pos]
        nodes = self.g.nodes
        injective = self.injective
        pin = pinned.get(np.pid)
        for nid in self._candidates(np, pin, bindings, params):
            node = nodes.get(nid)
            if node is None or node.type not in np.closure:
                continue
            if injective and nid in used and nid != pin:
                continue
            ok = True
            for ref, other_pid, outgoing in np.check_edges:
                other = nid if other_pid == np.pid else bindings[other_pid]
                if outgoing:
                    if other not in node.refs.get(ref, ()):
                        ok = False
                        break
                elif nid not in nodes[other].refs.get(ref, ()):
                    ok = False
                    break
            if not ok:
                continue
            attrs = node.attrs
            for attr_name, want in np.consts:
                have = attrs.get(attr_name, np.defaults.get(attr_name))
                if not (have == want
                        and isinstance(have, bool) == isinstance(want, bool)):
                    ok = False
                    break
            if not ok:
                continue
            new_params: list[str] = []
            n_deferred = len(deferred)
            for attr_name, pname in np.params:
                value = attrs.get(attr_name, np.defaults.get(attr_name))
                if pname in params:
                    have = params[pname]
                    if not (have == value
                            and isinstance(have, bool) == isinstance(value, bool)):
                        ok = False
                        break
                else:
                    params[pname] = value
                    new_params.append(pname)
            if ok and np.binding is not None and np.binding not in params:
                params[np.binding] = NodeRef(nid)
                new_params.append(np.binding)
            if ok:
                for attr_name, ap, needed in np.checks:
                    if needed <= params.keys():
                        value = attrs.get(attr_name, np.defaults.get(attr_name))
                        if not self._check_true(ap, attr_name, value, params):
                            ok = False
                            break
                    else:
                        deferred.append((np.pid, attr_name, ap))
            if ok:
                bindings[np.pid] = nid
                if injective and nid not in used:
                    used.add(nid)
                    result = self._first(plan, pos + 1, pinned, bindings,
                                         params, used, deferred, formula)
                    used.discard(nid)
                else:
                    result = self._first(plan, pos + 1, pinned, bindings,
                                         params, used, deferred, formula)
                if result is not None:
                    return result
                del bindings[np.pid]
            del deferred[n_deferred:]
            for name in new_params:
                del params[name]
        return None

    def _candidates(self, np: _NodePlan, pin: int | None,
                    bindings: dict[str, int],
                    params: dict[str, ParamValue]) -> list[int]:
        if np.binding is not None and np.binding in params:
            # parameter bound up front or by an earlier pattern node
            v = params[np.binding]
            if not isinstance(v, NodeRef):
                return []
            if pin is not None and pin != v.id:
                return []
            pin = v.id
        if pin is not None:
            return [pin]
        # one narrowing source is enough: everything it admits is still put
        # through the full edge/attribute checks.  Pick the cheapest by a
        # size estimate.
        g = self.g
        best_edge: tuple[int, str, int, bool] | None = None
        for ref, other_pid, outgoing in np.check_edges:
            if other_pid == np.pid:
                continue
            other = bindings[other_pid]
            if outgoing:
                size = len(g._incoming.get(other, ()))
            else:
                size = len(g.nodes[other].refs.get(ref, ()))
            if best_edge is None or size < best_edge[0]:
                best_edge = (size, ref, other, outgoing)
        attr_set: set[int] | None = None
        if np.narrow_attr is not None:
            attr_name, const, pname = np.narrow_attr
            value = const if pname is None else params.get(pname)
            if value is not None and value != np.defaults.get(attr_name):
                attr_set = set()
                for t in np.closure:
                    attr_set |= g.nodes_with_attr(t, attr_name, value)
        if attr_set is not None and \
                (best_edge is None or len(attr_set) <= best_edge[0]):
            return sorted(attr_set)
        if best_edge is not None:
            _size, ref, other, outgoing = best_edge
            if outgoing:
                return sorted(src for (src, r) in g.incoming(other) if r == ref)
            return sorted(set(g.nodes[other].refs.get(ref, ())))
        for ref in np.narrow_in:
            cand: set[int] = set()
            for t in np.closure:
                cand |= g.targets_with_incoming(ref, t)
            return sorted(cand)
        return g.nodes_of_type(np.type)

    def _check_true(self, ap: AttrCheck, attr_name: str, value: Value,
                    params: Mapping[str, ParamValue]) -> bool:
        env = dict(params)
        env[attr_name] = value  # the checked attribute shadows any parameter
        result = evaluate(ap.expr, env)
        if not isinstance(result, bool):
            raise ExprEvalError(
                f"attribute check on {attr_name!r} evaluated to a non-boolean")
        return result

    def _deferred_ok(self, deferred: list[tuple[str, str, AttrCheck]],
                     bindings: dict[str, int],
                     params: dict[str, ParamValue]) -> bool:
        for pid, attr_name, ap in deferred:
            value = self.g.get_attribute(bindings[pid], attr_name)
            if not self._check_true(ap, attr_name, value, params):
                return False
        return True

    # -- condition formulas ------------------------------------------------

    def eval_formula(self, f: Formula, bindings: dict[str, int],
                     params: dict[str, ParamValue], used: set[int]) -> bool:
        if isinstance(f, TruePred):
            return True
        if isinstance(f, Not):
            return not self.eval_formula(f.operand, bindings, params, used)
        if isinstance(f, And):
            return self.eval_formula(f.left, bindings, params, used) and \
                self.eval_formula(f.right, bindings, params, used)
        if isinstance(f, Or):
            return self.eval_formula(f.left, bindings, params, used) or \
                self.eval_formula(f.right, bindings, params, used)
        assert isinstance(f, GraphCond)
        info = _cond_info(f, self.mm)
        if info.fast:
            return self._exists_one_free(f, info, bindings, params, used)
        pinned = {cond: bindings[host] for host, cond in f.anchor}
        inner = self.search(f.extension, pinned, dict(params), f.nested,
                            used=set(used))
        return next(inner, None) is not None

    def _exists_one_free(self, f: GraphCond, info: "_CondInfo",
                         bindings: dict[str, int],
                         params: dict[str, ParamValue],
                         used: set[int]) -> bool:
        """Existence check for extensions with at most one unanchored node
        and no nested formula, without spinning up a full search."""
        g = self.g
        nodes = g.nodes
        pin: dict[str, int] = {}
        for host, cond in f.anchor:
            pin[cond] = bindings[host]
        for np in info.anchored:
            nid = pin[np.pid]
            node = nodes.get(nid)
            if node is None or node.type not in np.closure:
                return False
            if not self._node_constraints_ok(np, node, params):
                return False
        free = info.free
        ext = f.extension
        # edges among anchored nodes
        for pe in ext.pedges:
            if free is not None and (pe.src == free.pid or pe.trg == free.pid):
                continue
            if pin[pe.trg] not in nodes[pin[pe.src]].refs.get(pe.ref, ()):
                return False
        if free is None:
            return True
        candidates: list[int] | set[int] | frozenset[int] | None = None
        for pe in ext.pedges:
            if pe.src == free.pid and pe.trg != free.pid:
                cand = {src for (src, r) in g.incoming(pin[pe.trg])
                        if r == pe.ref}
            elif pe.trg == free.pid and pe.src != free.pid:
                cand = set(nodes[pin[pe.src]].refs.get(pe.ref, ()))
            else:
                continue
            candidates = cand if candidates is None else candidates & cand
            if not candidates:
                return False
        if candidates is None:
            candidates = g.nodes_of_type(free.type)
        injective = self.injective
        for nid in candidates:
            node = nodes.get(nid)
            if node is None or node.type not in free.closure:
                continue
            if injective and nid in used:
                continue
            ok = True
            for pe in ext.pedges:
                if pe.src == free.pid:
                    other = nid if pe.trg == free.pid else pin[pe.trg]
                    if other not in node.refs.get(pe.ref, ()):
                        ok = False
                        break
                elif pe.trg == free.pid:
                    if nid not in nodes[pin[pe.src]].refs.get(pe.ref, ()):
                        ok = False
                        break
            if ok and self._node_constraints_ok(free, node, params):
                return True
        return False

    def _node_constraints_ok(self, np: "_NodePlan", node, params) -> bool:
        """Attribute constraints for condition nodes; unbound parameters
        match anything (their binding would stay condition-local)."""
        attrs = node.attrs
        for attr_name, want in np.consts:
            have = attrs.get(attr_name, np.defaults.get(attr_name))
            if not (have == want
                    and isinstance(have, bool) == isinstance(want, bool)):
                return False
        for attr_name, pname in np.params:
            if pname in params:
                value = attrs.get(attr_name, np.defaults.get(attr_name))
                if not _veq(params[pname], value):
                    return False
        for attr_name, ap, _needed in np.checks:
            value = attrs.get(attr_name, np.defaults.get(attr_name))
            if not self._check_true(ap, attr_name, value, params):
                return False
        return True


def first_match(graph: InstanceGraph, rule: Rule,
                pre: Mapping[str, ParamValue] | None = None) -> Match | None:
    """First match in ``find_matches`` order, on a non-generator fast path."""
    params: dict[str, ParamValue] = {}
    if pre:
        for name, v in pre.items():
            if rule.param(name) is None:
                raise MatchError(f"rule {rule.name!r} declares no parameter "
                                 f"{name!r}")
            if isinstance(v, NodeRef) and v.id not in graph:
                raise MatchError(
                    f"parameter {name!r} is pre-bound to missing node {v.id}")
            params[name] = v
    searcher = _Searcher(graph, rule.injective)
    found = searcher.first(rule.lhs, _EMPTY_PINS, params, rule.condition)
    if found is None:
        return None
    return Match(found[0], found[1])


_EMPTY_PINS: dict[str, int] = {}


def find_matches(graph: InstanceGraph, rule: Rule,
                 pre: Mapping[str, ParamValue] | None = None, *,
                 pinned: Mapping[str, int] | None = None) -> Iterator[Match]:
    """Enumerate all matches lazily, in deterministic order.

    ``pre`` binds declared parameters ahead of the search (node-valued ones
    pin their pattern node, value-valued ones constrain attribute patterns);
    ``pinned`` forces individual pattern nodes onto given graph nodes.
    """
    params: dict[str, ParamValue] = {}
    if pre:
        for name, v in pre.items():
            if rule.param(name) is None:
                raise MatchError(f"rule {rule.name!r} declares no parameter "
                                 f"{name!r}")
            if isinstance(v, NodeRef) and v.id not in graph:
                raise MatchError(
                    f"parameter {name!r} is pre-bound to missing node {v.id}")
            params[name] = v
    pins: dict[str, int] = {}
    if pinned:
        for pid, nid in pinned.items():
            if nid not in graph:
                raise MatchError(
                    f"pattern node {pid!r} pinned to missing node {nid}")
            pins[pid] = nid
    searcher = _Searcher(graph, rule.injective)
    for bindings, out_params in searcher.search(rule.lhs, pins, params,
                                                rule.condition):
        yield Match(bindings, out_params)


def check_condition(graph: InstanceGraph, formula: Formula, match: Match, *,
                    injective: bool = True) -> bool:
    """Evaluate a condition formula against an existing match."""
    searcher = _Searcher(graph, injective)
    return searcher.eval_formula(formula, dict(match.node_binding),
                                 dict(match.param_binding),
                                 set(match.node_binding.values())
                                 if injective else set())
