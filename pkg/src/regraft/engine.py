"""Interpreter for transformation units.

Units compose rules and other units with transactional semantics: every unit
checkpoints the graph on entry and rolls back completely when it fails.
Each invocation of a named unit gets a fresh parameter frame, which is what
makes recursive control flow possible.  Parameter mappings move values from
the owning unit's frame into a child before the child runs, and back out of
the child after it succeeds.
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import EngineError, StepLimitExceeded
from .expr import evaluate
from .graph import InstanceGraph, NodeRef
from .matcher import Match, find_matches, first_match
from .rules import Parameter, Rule, classify


@dataclass(frozen=True)
class SequentialUnit:
    steps: tuple["Step", ...]
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


@dataclass(frozen=True)
class PriorityUnit:
    steps: tuple["Step", ...]
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


@dataclass(frozen=True)
class IndependentUnit:
    steps: tuple["Step", ...]
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


@dataclass(frozen=True)
class CountedUnit:
    body: "Step"
    count: int  # -1 means "as often as possible"
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


@dataclass(frozen=True)
class ConditionalUnit:
    if_step: "Step"
    then_step: "Step"
    else_step: "Step | None" = None
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


@dataclass(frozen=True)
class MultiSpec:
    rule: str
    embedding: tuple[tuple[str, str], ...] = ()  # kernel pnode -> multi pnode


@dataclass(frozen=True)
class AmalgamationUnit:
    kernel: str
    multis: tuple[MultiSpec, ...]
    name: str | None = None
    params: tuple[Parameter, ...] = ()
    mappings: tuple["ParamMapping", ...] = ()


Unit = Union[SequentialUnit, PriorityUnit, IndependentUnit, CountedUnit,
             ConditionalUnit, AmalgamationUnit]

# a step is either the name of a registered rule/unit or an inline anonymous
# unit executing against its owner's frame
Step = Union[str, Unit]


@dataclass(frozen=True)
class ParamMapping:
    """``src``/``dst`` are (child name | None, parameter name); None means the
    owning unit's own frame."""

    src: tuple[str | None, str]
    dst: tuple[str | None, str]


@dataclass(frozen=True)
class ExecConfig:
    seed: int = 0
    step_limit: int = 10_000_000
    trace: list[str] | None = None


@dataclass
class Outcome:
    success: bool
    bindings: dict[str, object] = field(default_factory=dict)


@dataclass
class Registry:
    rules: dict[str, Rule] = field(default_factory=dict)
    units: dict[str, Unit] = field(default_factory=dict)
    main: str | None = None

    def resolve(self, name: str) -> Rule | Unit:
        if name in self.rules:
            return self.rules[name]
        if name in self.units:
            return self.units[name]
        raise EngineError(f"no rule or unit named {name!r}")


def _value_repr(v: object) -> str:
    if isinstance(v, NodeRef):
        return f"#{v.id}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    from .expr import escape_string
    return escape_string(str(v))


def _trace_line(rule: Rule, values: Mapping[str, object]) -> str:
    parts = [f"{p.name}={_value_repr(values[p.name])}"
             for p in rule.params if p.name in values]
    return f"apply {rule.name} {{{', '.join(parts)}}}"


def _rewrite(graph: InstanceGraph, rule: Rule, match: Match) -> dict[str, object]:
    """Apply a matched rule: deletions, creations, then attribute updates."""
    cls = classify(rule)
    nb = match.node_binding
    params = dict(match.param_binding)
    deleted = set(cls.deleted_nodes)
    for pe in cls.deleted_edges:
        if pe.src in deleted or pe.trg in deleted:
            continue  # vanishes with its endpoint
        graph.remove_edge(nb[pe.src], pe.ref, nb[pe.trg])
    for pid in cls.deleted_nodes:
        graph.delete_node(nb[pid])
    rhs_nodes: dict[str, int] = {r: nb[l] for l, r in cls.preserved_nodes}
    created = set(cls.created_nodes)
    for pn in rule.rhs.pnodes:
        if pn.id in created:
            nid = graph.create_node(pn.type)
            rhs_nodes[pn.id] = nid
            if pn.binding is not None:
                params[pn.binding] = NodeRef(nid)
    pending = list(cls.created_edges)
    for pe in rule.rhs.pedges:
        if pe in pending:
            pending.remove(pe)
            graph.add_edge(rhs_nodes[pe.src], pe.ref, rhs_nodes[pe.trg])
    env = {k: v for k, v in params.items() if isinstance(v, (str, int, bool))}
    for a in rule.assignments:
        graph.set_attribute(rhs_nodes[a.pnode], a.attr, evaluate(a.expr, env))
    return params


def apply_rule(graph: InstanceGraph, rule: Rule,
               bindings: Mapping[str, object] | None = None, *,
               trace: list[str] | None = None) -> Outcome:
    """Apply a rule once, taking the first match in deterministic order.

    On success the graph holds the rewritten state and the outcome carries
    the rule's out/inout parameter values; with no match the graph is left
    untouched.  Expression evaluation errors roll the application back and
    propagate.
    """
    match = first_match(graph, rule, bindings)
    if match is None:
        return Outcome(False)
    token = graph.checkpoint()
    try:
        params = _rewrite(graph, rule, match)
    except Exception:
        graph.rollback_to(token)
        raise
    graph.commit(token)
    if trace is not None:
        trace.append(_trace_line(rule, params))
    outs = {p.name: params[p.name] for p in rule.params
            if p.mode in ("out", "inout") and p.name in params}
    return Outcome(True, outs)


class Interpreter:
    """Executes units from a registry against one graph, single-threaded."""

    def __init__(self, registry: Registry, graph: InstanceGraph,
                 config: ExecConfig | None = None):
        self.registry = registry
        self.graph = graph
        self.config = config or ExecConfig()
        self.rng = random.Random(self.config.seed)
        self.steps_used = 0
        self.rule_counts: Counter[str] = Counter()
        self.phase_seconds: dict[str, float] = {}
        self._timed_unit: Unit | None = None
        # per owning unit: child name -> [(own param, child param)] and back
        self._ins_tables: dict[int, dict[str, list[tuple[str, str]]]] = {}
        self._posts_tables: dict[int, dict[str, list[tuple[str, str]]]] = {}

    # -- public entry --------------------------------------------------------

    def execute(self, target: str | Unit | Rule,
                bindings: Mapping[str, object] | None = None,
                *, time_top_level: bool = False) -> Outcome:
        """Run a rule or unit transactionally and return its outcome."""
        if isinstance(target, str):
            target = self.registry.resolve(target)
        token = self.graph.checkpoint()
        try:
            if isinstance(target, Rule):
                self._tick()
                outcome = self._apply(target, dict(bindings or {}))
            else:
                if time_top_level and isinstance(target, SequentialUnit):
                    self._timed_unit = target
                try:
                    outcome = self._run_named(target, dict(bindings or {}))
                finally:
                    self._timed_unit = None
        except BaseException:
            # errors abort the whole execution back to its entry state
            self.graph.rollback_to(token)
            raise
        self.graph.commit(token)
        return outcome

    # -- plumbing --------------------------------------------------------------

    def _tick(self) -> None:
        self.steps_used += 1
        if self.steps_used > self.config.step_limit:
            raise StepLimitExceeded(
                f"step limit of {self.config.step_limit} exceeded")

    def _apply(self, rule: Rule, ins: dict[str, object]) -> Outcome:
        out = apply_rule(self.graph, rule, ins, trace=self.config.trace)
        if out.success:
            self.rule_counts[rule.name] += 1
        return out

    def _run_named(self, unit: Unit, ins: dict[str, object]) -> Outcome:
        self._tick()
        frame: dict[str, object] = {}
        for p in unit.params:
            if p.name in ins:
                frame[p.name] = ins[p.name]
            elif p.has_default:
                frame[p.name] = p.default
        ok = self._run_control(unit, frame, unit)
        if not ok:
            return Outcome(False)
        outs = {p.name: frame[p.name] for p in unit.params
                if p.mode in ("out", "inout") and p.name in frame}
        return Outcome(True, outs)

    def _run_control(self, unit: Unit, frame: dict[str, object],
                     owner: Unit) -> bool:
        g = self.graph
        if isinstance(unit, SequentialUnit):
            token = g.checkpoint()
            timing = unit is self._timed_unit
            for step in unit.steps:
                start = time.perf_counter() if timing else 0.0
                ok = self._step(step, frame, owner)
                if timing:
                    label = step if isinstance(step, str) else _anon_label(step)
                    self.phase_seconds[label] = self.phase_seconds.get(label, 0.0) \
                        + time.perf_counter() - start
                if not ok:
                    g.rollback_to(token)
                    return False
            g.commit(token)
            return True
        if isinstance(unit, PriorityUnit):
            for step in unit.steps:
                if self._step(step, frame, owner):
                    return True
            return False
        if isinstance(unit, IndependentUnit):
            order = list(unit.steps)
            self.rng.shuffle(order)
            for step in order:
                if self._step(step, frame, owner):
                    return True
            return False
        if isinstance(unit, CountedUnit):
            if unit.count >= 0:
                token = g.checkpoint()
                for _ in range(unit.count):
                    if not self._step(unit.body, frame, owner):
                        g.rollback_to(token)
                        return False
                g.commit(token)
                return True
            if isinstance(unit.body, str):
                rule = self.registry.rules.get(unit.body)
                if rule is not None and _self_disabling(rule):
                    self._drain(rule, frame, owner, unit.body)
                    return True
            while self._step(unit.body, frame, owner):
                pass
            return True
        if isinstance(unit, ConditionalUnit):
            token = g.checkpoint()
            if self._step(unit.if_step, frame, owner):
                ok = self._step(unit.then_step, frame, owner)
            elif unit.else_step is not None:
                ok = self._step(unit.else_step, frame, owner)
            else:
                ok = False
            if ok:
                g.commit(token)
            else:
                g.rollback_to(token)
            return ok
        assert isinstance(unit, AmalgamationUnit)
        return self._run_amalgamation(unit, frame, owner)

    def _step(self, step: Step, frame: dict[str, object], owner: Unit) -> bool:
        if not isinstance(step, str):
            self._tick()
            return self._run_control(step, frame, owner)
        target = self.registry.resolve(step)
        ins = self._gather_ins(owner, frame, step)
        if isinstance(target, Rule):
            self._tick()
            out = self._apply(target, ins)
        else:
            out = self._run_named(target, ins)
        if out.success:
            self._apply_posts(owner, frame, step, out.bindings)
        return out.success

    def _tables(self, owner: Unit) -> tuple[dict, dict]:
        key = id(owner)
        ins = self._ins_tables.get(key)
        if ins is None:
            ins = {}
            posts = {}
            for m in owner.mappings:
                if m.dst[0] is not None and m.src[0] is None:
                    ins.setdefault(m.dst[0], []).append((m.src[1], m.dst[1]))
                elif m.src[0] is not None and m.dst[0] is None:
                    posts.setdefault(m.src[0], []).append((m.src[1], m.dst[1]))
            self._ins_tables[key] = ins
            self._posts_tables[key] = posts
        return ins, self._posts_tables[key]

    def _gather_ins(self, owner: Unit, frame: dict[str, object],
                    child: str) -> dict[str, object]:
        table = self._tables(owner)[0].get(child)
        if not table:
            return {}
        return {dst: frame[src] for src, dst in table if src in frame}

    def _apply_posts(self, owner: Unit, frame: dict[str, object], child: str,
                     outs: Mapping[str, object]) -> None:
        table = self._tables(owner)[1].get(child)
        if table:
            for src, dst in table:
                if src in outs:
                    frame[dst] = outs[src]

    def _drain(self, rule: Rule, frame: dict[str, object], owner: Unit,
               child: str) -> None:
        """Apply a self-disabling rule as often as possible by walking the
        match set once and revalidating each entry before applying it."""
        g = self.graph
        ins = self._gather_ins(owner, frame, child)
        while True:
            self._tick()
            matches = list(find_matches(g, rule, pre=ins))
            applied = 0
            for m in matches:
                self._tick()
                if not _still_valid(g, rule, m):
                    continue
                token = g.checkpoint()
                try:
                    params = _rewrite(g, rule, m)
                except Exception:
                    g.rollback_to(token)
                    raise
                g.commit(token)
                if self.config.trace is not None:
                    self.config.trace.append(_trace_line(rule, params))
                self.rule_counts[rule.name] += 1
                applied += 1
                outs = {p.name: params[p.name] for p in rule.params
                        if p.mode in ("out", "inout") and p.name in params}
                self._apply_posts(owner, frame, child, outs)
            if not matches or not applied:
                return

    def _run_amalgamation(self, unit: AmalgamationUnit,
                          frame: dict[str, object], owner: Unit) -> bool:
        g = self.graph
        kernel = self.registry.rules.get(unit.kernel)
        if kernel is None:
            raise EngineError(f"amalgamation kernel {unit.kernel!r} is not a rule")
        self._tick()
        kmatch = next(find_matches(g, kernel,
                                   pre=self._gather_ins(owner, frame, unit.kernel)),
                      None)
        if kmatch is None:
            return False
        comatches: list[tuple[Rule, Match]] = []
        for spec in unit.multis:
            multi = self.registry.rules.get(spec.rule)
            if multi is None:
                raise EngineError(f"amalgamation multi {spec.rule!r} is not a rule")
            pins = {mp: kmatch.node_binding[kp] for kp, mp in spec.embedding}
            pre = self._gather_ins(owner, frame, spec.rule)
            for m in find_matches(g, multi, pre=pre, pinned=pins):
                comatches.append((multi, m))
        token = g.checkpoint()
        try:
            params = _rewrite(g, kernel, kmatch)
            if self.config.trace is not None:
                self.config.trace.append(_trace_line(kernel, params))
            self.rule_counts[kernel.name] += 1
            for multi, m in comatches:
                mparams = _rewrite(g, multi, m)
                if self.config.trace is not None:
                    self.config.trace.append(_trace_line(multi, mparams))
                self.rule_counts[multi.name] += 1
        except Exception as exc:
            g.rollback_to(token)
            if isinstance(exc, (EngineError, StepLimitExceeded)):
                raise
            raise EngineError(
                f"conflicting applications in amalgamation {unit.name!r}: {exc}"
            ) from exc
        g.commit(token)
        outs = {p.name: params[p.name] for p in kernel.params
                if p.mode in ("out", "inout") and p.name in params}
        self._apply_posts(owner, frame, unit.kernel, outs)
        return True


def _anon_label(unit: Unit) -> str:
    kind = type(unit).__name__.removesuffix("Unit").lower()
    return f"<{kind}>"


def _still_valid(graph: InstanceGraph, rule: Rule, match: Match) -> bool:
    """Cheap revalidation of a previously-found match: all bound nodes are
    alive, all pattern edges still present, all attribute patterns still
    hold.  Used by the drain path, where no new matches can appear."""
    from .rules import AttrCheck, AttrConstant, AttrParam
    nodes = graph.nodes
    nb = match.node_binding
    for nid in nb.values():
        if nid not in nodes:
            return False
    for pe in rule.lhs.pedges:
        if nb[pe.trg] not in nodes[nb[pe.src]].refs.get(pe.ref, ()):
            return False
    params = match.param_binding
    for pn in rule.lhs.pnodes:
        for attr_name, ap in pn.attr_patterns:
            value = graph.get_attribute(nb[pn.id], attr_name)
            if isinstance(ap, AttrConstant):
                want = ap.value
            elif isinstance(ap, AttrParam):
                want = params.get(ap.name)
            else:
                env = dict(params)
                env[attr_name] = value
                if evaluate(ap.expr, env) is not True:
                    return False
                continue
            if not (value == want
                    and isinstance(value, bool) == isinstance(want, bool)):
                return False
    return True


_self_disabling_cache: dict[int, tuple[Rule, bool]] = {}


def _self_disabling(rule: Rule) -> bool:
    """True if every application of the rule invalidates its own match and
    can never enable a new one: it deletes part of what it matched, creates
    nothing, has no condition formula, and assigns only attributes its own
    pattern never reads.  For such rules "apply as often as possible" can
    enumerate the match set once and drain it, which avoids restarting the
    search after every application; the applications and their order are
    exactly those of the restarting semantics."""
    cached = _self_disabling_cache.get(id(rule))
    if cached is not None and cached[0] is rule:
        return cached[1]
    from .rules import TruePred
    cls = classify(rule)
    read_attrs = {name for pn in rule.lhs.pnodes for name, _ in pn.attr_patterns}
    result = (
        isinstance(rule.condition, TruePred)
        and not cls.created_nodes and not cls.created_edges
        and bool(cls.deleted_nodes or cls.deleted_edges)
        and all(a.attr not in read_attrs for a in rule.assignments)
    )
    _self_disabling_cache[id(rule)] = (rule, bool(result))
    return bool(result)
