"""Parser for transformation files (the ``.tfm`` format).

A transformation file imports metamodels, defines rules in integrated
notation (create/delete/forbid/require stereotypes on nodes and edges),
defines control units, and designates one main unit::

    transformation reeng
    import java, statemachine, trace
    main Start

    rule init(out sm, out class) {
      node machine : StateMachine <<create>> bind sm
      node cls : Class bind class {
        attr name = "State"
      }
    }

    unit counted StatesLoop(in sm, in class) {
      count -1
      body CreateStateAndChildren
      map sm -> CreateStateAndChildren.sm
      map class -> CreateStateAndChildren.class
    }

Forbid/require elements sharing a group tag form one application condition;
an untagged forbidden edge joins the group of the forbidden node it touches,
and untagged forbidden nodes each open their own condition.  Steps inside a
unit may be names of other rules/units or inline anonymous units written as
``<kind> { ... }``; anonymous units run against their owner's frame and may
not declare parameters or mappings of their own.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from ..engine import (AmalgamationUnit, ConditionalUnit, CountedUnit,
                      IndependentUnit, MultiSpec, ParamMapping, PriorityUnit,
                      Registry, SequentialUnit, Step, Unit)
from ..errors import FormatError
from ..expr import parse_expr
from ..metamodel import Metamodel, merge_metamodels, trace_metamodel
from ..rules import (And, Assignment, AttrCheck, AttrConstant, AttrParam,
                     AttrPattern, GraphCond, Not, Parameter, PatternEdge,
                     PatternGraph, PatternNode, Rule, TruePred, validate_rule)
from ._lines import LineReader
from .model_format import parse_literal

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_STEREO = rf"<<\s*(create|delete|forbid|require)(?:\s+({_IDENT}))?\s*>>"

_HEADER_RE = re.compile(rf"^transformation\s+({_IDENT})$")
_IMPORT_RE = re.compile(r"^import\s+(.+)$")
_MAIN_RE = re.compile(rf"^main\s+({_IDENT})$")
_RULE_RE = re.compile(rf"^rule\s+({_IDENT})\s*\((.*)\)\s*\{{$")
_UNIT_RE = re.compile(
    rf"^unit\s+(sequential|priority|counted|conditional|independent|amalgamation)"
    rf"\s+({_IDENT})\s*\((.*)\)\s*\{{$")
_NODE_RE = re.compile(
    rf"^node\s+({_IDENT})\s*:\s*({_IDENT})"
    rf"(?:\s+{_STEREO})?(?:\s+bind\s+({_IDENT}))?(\s*\{{)?$")
_EDGE_RE = re.compile(
    rf"^edge\s+({_IDENT})\s+-({_IDENT})->\s+({_IDENT})(?:\s+{_STEREO})?$")
_ATTR_RE = re.compile(rf"^attr\s+({_IDENT})\s*=\s*(.+)$")
_ASSIGN_RE = re.compile(rf"^assign\s+({_IDENT})\.({_IDENT})\s*=\s*(.+)$")
_INJECTIVE_RE = re.compile(r"^injective\s+(true|false)$")
_MAP_RE = re.compile(rf"^map\s+({_IDENT}(?:\.{_IDENT})?)\s*->\s*"
                     rf"({_IDENT}(?:\.{_IDENT})?)$")
_EMBED_RE = re.compile(rf"^({_IDENT})\s*->\s*({_IDENT})$")

_UNIT_KINDS = ("sequential", "priority", "counted", "conditional",
               "independent", "amalgamation")


@dataclass
class TransformationFile:
    name: str
    imports: tuple[str, ...]
    metamodel: Metamodel
    rules: dict[str, Rule]
    units: dict[str, Unit]
    main: str
    warnings: list[str] = field(default_factory=list)

    def registry(self) -> Registry:
        return Registry(rules=dict(self.rules), units=dict(self.units),
                        main=self.main)


@dataclass
class _NodeDecl:
    lineno: int
    id: str
    type: str
    stereo: str | None
    group: str | None
    binding: str | None
    attr_patterns: list[tuple[str, AttrPattern]]


@dataclass
class _EdgeDecl:
    lineno: int
    src: str
    ref: str
    trg: str
    stereo: str | None
    group: str | None


def _parse_params(text: str, lineno: int, *, allow_defaults: bool,
                  reader: LineReader) -> tuple[Parameter, ...]:
    text = text.strip()
    if not text:
        return ()
    params: list[Parameter] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        default = None
        has_default = False
        if "=" in chunk:
            if not allow_defaults:
                raise reader.error(f"parameter default not allowed here: {chunk!r}",
                                   lineno)
            chunk, default_text = chunk.split("=", 1)
            chunk = chunk.strip()
            try:
                default = parse_literal(default_text.strip())
            except ValueError as exc:
                raise reader.error(str(exc), lineno) from None
            has_default = True
        words = chunk.split()
        if len(words) == 1:
            mode, name = "inout", words[0]
        elif len(words) == 2 and words[0] in ("in", "out", "inout"):
            mode, name = words
        else:
            raise reader.error(f"bad parameter declaration {chunk!r}", lineno)
        if not re.fullmatch(_IDENT, name):
            raise reader.error(f"bad parameter name {name!r}", lineno)
        params.append(Parameter(name, mode, default, has_default))
    return tuple(params)


def _parse_attr_pattern(text: str, lineno: int,
                        reader: LineReader) -> AttrPattern:
    text = text.strip()
    check = re.fullmatch(r"check\((.*)\)", text)
    if check:
        return AttrCheck(parse_expr(check.group(1)))
    if re.fullmatch(_IDENT, text) and text not in ("true", "false"):
        return AttrParam(text)
    try:
        return AttrConstant(parse_literal(text))
    except ValueError:
        raise reader.error(f"expected literal, parameter or check(...), "
                           f"got {text!r}", lineno) from None


def _parse_rule(reader: LineReader, header: re.Match, lineno: int) -> Rule:
    name = header.group(1)
    params = _parse_params(header.group(2), lineno, allow_defaults=False,
                           reader=reader)
    nodes: list[_NodeDecl] = []
    edges: list[_EdgeDecl] = []
    assignments: list[Assignment] = []
    injective = True
    while True:
        if reader.eof():
            raise reader.error(f"unterminated rule {name!r}", lineno)
        ln, line = reader.next()
        if line == "}":
            break
        m = _INJECTIVE_RE.match(line)
        if m:
            injective = m.group(1) == "true"
            continue
        m = _NODE_RE.match(line)
        if m:
            decl = _NodeDecl(ln, m.group(1), m.group(2), m.group(3), m.group(4),
                             m.group(5), [])
            if any(n.id == decl.id for n in nodes):
                raise reader.error(f"duplicate node id {decl.id!r}", ln)
            if m.group(6):  # attribute block follows
                while True:
                    if reader.eof():
                        raise reader.error(f"unterminated node {decl.id!r}", ln)
                    aln, aline = reader.next()
                    if aline == "}":
                        break
                    am = _ATTR_RE.match(aline)
                    if am is None:
                        raise reader.error(
                            f"expected attr line or '}}', got {aline!r}", aln)
                    decl.attr_patterns.append(
                        (am.group(1),
                         _parse_attr_pattern(am.group(2), aln, reader)))
            nodes.append(decl)
            continue
        m = _EDGE_RE.match(line)
        if m:
            edges.append(_EdgeDecl(ln, m.group(1), m.group(2), m.group(3),
                                   m.group(4), m.group(5)))
            continue
        m = _ASSIGN_RE.match(line)
        if m:
            assignments.append(Assignment(m.group(1), m.group(2),
                                          parse_expr(m.group(3))))
            continue
        raise reader.error(f"unexpected line in rule {name!r}: {line!r}", ln)
    return _build_rule(name, params, nodes, edges, assignments, injective,
                       reader, lineno)


def _build_rule(name: str, params: tuple[Parameter, ...],
                nodes: list[_NodeDecl], edges: list[_EdgeDecl],
                assignments: list[Assignment], injective: bool,
                reader: LineReader, rule_line: int) -> Rule:
    by_id = {n.id: n for n in nodes}
    for e in edges:
        for end in (e.src, e.trg):
            if end not in by_id:
                raise reader.error(
                    f"edge references unknown node {end!r}", e.lineno)
    lhs_kinds = (None, "delete")
    rhs_kinds = (None, "create")
    cond_kinds = ("forbid", "require")

    # pattern-node groups for application conditions
    group_of: dict[str, str] = {}
    group_kind: dict[str, str] = {}
    group_order: list[str] = []

    def register(group: str, kind: str, lineno: int) -> str:
        if group in group_kind and group_kind[group] != kind:
            raise reader.error(
                f"group {group!r} mixes forbid and require elements", lineno)
        if group not in group_kind:
            group_kind[group] = kind
            group_order.append(group)
        return group

    for n in nodes:
        if n.stereo in cond_kinds:
            if n.binding is not None:
                raise reader.error(
                    f"condition node {n.id!r} cannot bind a parameter", n.lineno)
            group_of[n.id] = register(n.group or f"~node:{n.id}", n.stereo,
                                      n.lineno)
        elif n.group is not None:
            raise reader.error(
                f"node {n.id!r}: group tag only applies to forbid/require",
                n.lineno)

    cond_edges: dict[str, list[_EdgeDecl]] = {}
    for i, e in enumerate(edges):
        if e.stereo not in cond_kinds:
            if e.group is not None:
                raise reader.error(
                    f"edge group tag only applies to forbid/require", e.lineno)
            for end in (e.src, e.trg):
                if by_id[end].stereo in cond_kinds:
                    raise reader.error(
                        f"edge touching condition node {end!r} must be tagged "
                        "forbid/require", e.lineno)
            continue
        group = e.group
        if group is None:
            endpoint_groups = {group_of[end] for end in (e.src, e.trg)
                               if end in group_of}
            if len(endpoint_groups) > 1:
                raise reader.error(
                    "edge joins condition nodes from different groups; "
                    "tag it explicitly", e.lineno)
            group = next(iter(endpoint_groups), f"~edge:{i}")
        register(group, e.stereo, e.lineno)
        for end in (e.src, e.trg):
            if end in group_of and group_of[end] != group:
                raise reader.error(
                    f"edge group {group!r} conflicts with node group "
                    f"{group_of[end]!r}", e.lineno)
            if by_id[end].stereo == "create":
                raise reader.error(
                    f"condition edge cannot touch created node {end!r}", e.lineno)
        cond_edges.setdefault(group, []).append(e)

    lhs_nodes = [PatternNode(n.id, n.type, n.binding, tuple(n.attr_patterns))
                 for n in nodes if n.stereo in lhs_kinds]
    rhs_nodes = [PatternNode(n.id, n.type,
                             n.binding if n.stereo == "create" else None)
                 for n in nodes if n.stereo in rhs_kinds]
    preserved = {n.id for n in nodes if n.stereo is None}

    lhs_edges: list[PatternEdge] = []
    rhs_edges: list[PatternEdge] = []
    for e in edges:
        if e.stereo in cond_kinds:
            continue
        pe = PatternEdge(e.src, e.ref, e.trg)
        if e.stereo == "delete":
            for end in (e.src, e.trg):
                if by_id[end].stereo == "create":
                    raise reader.error(
                        f"deleted edge cannot touch created node {end!r}", e.lineno)
            lhs_edges.append(pe)
        elif e.stereo == "create":
            for end in (e.src, e.trg):
                if by_id[end].stereo == "delete":
                    raise reader.error(
                        f"created edge cannot touch deleted node {end!r}", e.lineno)
            rhs_edges.append(pe)
        else:
            for end in (e.src, e.trg):
                if end not in preserved:
                    raise reader.error(
                        f"untagged edge endpoint {end!r} must be preserved; "
                        "tag the edge create/delete", e.lineno)
            lhs_edges.append(pe)
            rhs_edges.append(pe)

    condition = TruePred()
    for group in group_order:
        g_edges = cond_edges.get(group, [])
        g_nodes = [n for n in nodes if group_of.get(n.id) == group]
        anchors: list[str] = []
        for e in g_edges:
            for end in (e.src, e.trg):
                if by_id[end].stereo in lhs_kinds and end not in anchors:
                    anchors.append(end)
        ext_nodes = [PatternNode(a, by_id[a].type) for a in anchors]
        ext_nodes += [PatternNode(n.id, n.type, None, tuple(n.attr_patterns))
                      for n in g_nodes]
        ext_edges = [PatternEdge(e.src, e.ref, e.trg) for e in g_edges]
        cond = GraphCond(PatternGraph(tuple(ext_nodes), tuple(ext_edges)),
                         anchor=tuple((a, a) for a in anchors))
        leaf = cond if group_kind[group] == "require" else Not(cond)
        condition = leaf if isinstance(condition, TruePred) \
            else And(condition, leaf)

    return Rule(name=name, params=params,
                lhs=PatternGraph(tuple(lhs_nodes), tuple(lhs_edges)),
                rhs=PatternGraph(tuple(rhs_nodes), tuple(rhs_edges)),
                mapping=tuple((pid, pid) for pid in
                              (n.id for n in nodes if n.stereo is None)),
                condition=condition,
                assignments=tuple(assignments),
                injective=injective)


def _parse_step(value: str, reader: LineReader, lineno: int) -> Step:
    value = value.strip()
    if re.fullmatch(_IDENT, value) and value not in _UNIT_KINDS:
        return value
    m = re.fullmatch(rf"({'|'.join(_UNIT_KINDS)})\s*\{{", value)
    if m is None:
        raise reader.error(f"expected a step name or '<kind> {{', got {value!r}",
                           lineno)
    return _parse_unit_body(reader, m.group(1), None, (), lineno)


def _parse_steps_list(text: str, reader: LineReader, lineno: int) -> list[Step]:
    steps: list[Step] = []
    parts = [p.strip() for p in text.split(",")]
    for i, part in enumerate(parts):
        if re.fullmatch(_IDENT, part) and part not in _UNIT_KINDS:
            steps.append(part)
            continue
        if i != len(parts) - 1:
            raise reader.error(
                "an inline anonymous unit must be the last step on its line",
                lineno)
        steps.append(_parse_step(part, reader, lineno))
    return steps


def _parse_unit_body(reader: LineReader, kind: str, name: str | None,
                     params: tuple[Parameter, ...], lineno: int) -> Unit:
    steps: list[Step] = []
    mappings: list[ParamMapping] = []
    body: Step | None = None
    count: int | None = None
    if_step: Step | None = None
    then_step: Step | None = None
    else_step: Step | None = None
    kernel: str | None = None
    multis: list[MultiSpec] = []
    anonymous = name is None
    label = name or f"anonymous {kind} unit"
    while True:
        if reader.eof():
            raise reader.error(f"unterminated unit {label}", lineno)
        ln, line = reader.next()
        if line == "}":
            break
        if line.startswith("steps"):
            if kind not in ("sequential", "priority", "independent"):
                raise reader.error(f"'steps' not allowed in {kind} unit", ln)
            steps.extend(_parse_steps_list(line[5:], reader, ln))
            continue
        if line.startswith("body"):
            if kind != "counted":
                raise reader.error(f"'body' only allowed in counted units", ln)
            if body is not None:
                raise reader.error("duplicate 'body'", ln)
            body = _parse_step(line[4:], reader, ln)
            continue
        m = re.fullmatch(r"count\s+(-?\d+)", line)
        if m:
            if kind != "counted":
                raise reader.error("'count' only allowed in counted units", ln)
            count = int(m.group(1))
            if count < -1:
                raise reader.error(f"bad count {count}", ln)
            continue
        if line.startswith("if "):
            if kind != "conditional":
                raise reader.error("'if' only allowed in conditional units", ln)
            if_step = _parse_step(line[3:], reader, ln)
            continue
        if line.startswith("then "):
            if kind != "conditional":
                raise reader.error("'then' only allowed in conditional units", ln)
            then_step = _parse_step(line[5:], reader, ln)
            continue
        if line.startswith("else "):
            if kind != "conditional":
                raise reader.error("'else' only allowed in conditional units", ln)
            else_step = _parse_step(line[5:], reader, ln)
            continue
        m = re.fullmatch(rf"kernel\s+({_IDENT})", line)
        if m:
            if kind != "amalgamation":
                raise reader.error("'kernel' only allowed in amalgamation units", ln)
            kernel = m.group(1)
            continue
        m = re.fullmatch(rf"multi\s+({_IDENT})(?:\s+embed\s+(.+))?", line)
        if m:
            if kind != "amalgamation":
                raise reader.error("'multi' only allowed in amalgamation units", ln)
            embedding: list[tuple[str, str]] = []
            if m.group(2):
                for pair in m.group(2).split(","):
                    em = _EMBED_RE.match(pair.strip())
                    if em is None:
                        raise reader.error(f"bad embedding pair {pair!r}", ln)
                    embedding.append((em.group(1), em.group(2)))
            multis.append(MultiSpec(m.group(1), tuple(embedding)))
            continue
        m = _MAP_RE.match(line)
        if m:
            if anonymous:
                raise reader.error(
                    "anonymous units cannot declare parameter mappings", ln)
            mappings.append(ParamMapping(_endpoint(m.group(1)),
                                         _endpoint(m.group(2))))
            continue
        raise reader.error(f"unexpected line in unit {label}: {line!r}", ln)

    common = dict(name=name, params=params, mappings=tuple(mappings))
    if kind in ("sequential", "priority", "independent"):
        if not steps:
            raise reader.error(f"{kind} unit {label} has no steps", lineno)
        cls = {"sequential": SequentialUnit, "priority": PriorityUnit,
               "independent": IndependentUnit}[kind]
        return cls(steps=tuple(steps), **common)
    if kind == "counted":
        if body is None or count is None:
            raise reader.error(f"counted unit {label} needs 'body' and 'count'",
                               lineno)
        return CountedUnit(body=body, count=count, **common)
    if kind == "conditional":
        if if_step is None or then_step is None:
            raise reader.error(f"conditional unit {label} needs 'if' and 'then'",
                               lineno)
        return ConditionalUnit(if_step=if_step, then_step=then_step,
                               else_step=else_step, **common)
    assert kind == "amalgamation"
    if kernel is None or not multis:
        raise reader.error(
            f"amalgamation unit {label} needs 'kernel' and at least one 'multi'",
            lineno)
    return AmalgamationUnit(kernel=kernel, multis=tuple(multis), **common)


def _endpoint(text: str) -> tuple[str | None, str]:
    if "." in text:
        child, param = text.split(".", 1)
        return (child, param)
    return (None, text)


def _named_children(unit: Unit) -> list[str]:
    """Names of rules/units referenced anywhere in a unit's body tree,
    looking through anonymous units but not into named children."""
    out: list[str] = []

    def walk(step: Step) -> None:
        if isinstance(step, str):
            if step not in out:
                out.append(step)
            return
        collect(step)

    def collect(u: Unit) -> None:
        if isinstance(u, (SequentialUnit, PriorityUnit, IndependentUnit)):
            for s in u.steps:
                walk(s)
        elif isinstance(u, CountedUnit):
            walk(u.body)
        elif isinstance(u, ConditionalUnit):
            walk(u.if_step)
            walk(u.then_step)
            if u.else_step is not None:
                walk(u.else_step)
        else:
            assert isinstance(u, AmalgamationUnit)
            walk(u.kernel)
            for spec in u.multis:
                walk(spec.rule)

    collect(unit)
    return out


def _guarded_children(unit: Unit) -> set[str]:
    """Named children referenced from a conditional or sequential construct."""
    out: set[str] = set()

    def walk(step: Step, guarded: bool) -> None:
        if isinstance(step, str):
            if guarded:
                out.add(step)
            return
        collect(step, guarded)

    def collect(u: Unit, guarded: bool) -> None:
        if isinstance(u, SequentialUnit):
            for s in u.steps:
                walk(s, True)
        elif isinstance(u, (PriorityUnit, IndependentUnit)):
            for s in u.steps:
                walk(s, guarded)
        elif isinstance(u, CountedUnit):
            walk(u.body, guarded)
        elif isinstance(u, ConditionalUnit):
            walk(u.if_step, True)
            walk(u.then_step, True)
            if u.else_step is not None:
                walk(u.else_step, True)
        else:
            assert isinstance(u, AmalgamationUnit)

    collect(unit, False)
    return out


def parse_transformation(text: str,
                         metamodels: Mapping[str, Metamodel]) -> TransformationFile:
    """Parse and fully resolve a transformation file.

    ``metamodels`` maps import names to parsed metamodels; the built-in
    ``trace`` metamodel is always available.
    """
    reader = LineReader(text)
    lineno, line = reader.next()
    m = _HEADER_RE.match(line)
    if m is None:
        raise reader.error("expected 'transformation <name>' header", lineno)
    tf_name = m.group(1)

    imports: list[str] = []
    main: str | None = None
    rules: dict[str, Rule] = {}
    units: dict[str, Unit] = {}
    order: list[tuple[str, int]] = []

    while not reader.eof():
        lineno, line = reader.next()
        m = _IMPORT_RE.match(line)
        if m:
            for part in m.group(1).split(","):
                part = part.strip()
                if not re.fullmatch(_IDENT, part):
                    raise reader.error(f"bad import name {part!r}", lineno)
                imports.append(part)
            continue
        m = _MAIN_RE.match(line)
        if m:
            if main is not None:
                raise reader.error("duplicate 'main' directive", lineno)
            main = m.group(1)
            continue
        m = _RULE_RE.match(line)
        if m:
            rule = _parse_rule(reader, m, lineno)
            if rule.name in rules or rule.name in units:
                raise reader.error(f"duplicate definition {rule.name!r}", lineno)
            rules[rule.name] = rule
            order.append((rule.name, lineno))
            continue
        m = _UNIT_RE.match(line)
        if m:
            kind, name = m.group(1), m.group(2)
            params = _parse_params(m.group(3), lineno, allow_defaults=True,
                                   reader=reader)
            unit = _parse_unit_body(reader, kind, name, params, lineno)
            if name in rules or name in units:
                raise reader.error(f"duplicate definition {name!r}", lineno)
            units[name] = unit
            order.append((name, lineno))
            continue
        raise reader.error(f"unexpected top-level line: {line!r}", lineno)

    available = dict(metamodels)
    available.setdefault("trace", trace_metamodel())
    missing = [i for i in imports if i not in available]
    if missing:
        raise FormatError(f"unknown metamodel import(s): {', '.join(missing)}")
    merged = merge_metamodels("+".join(imports) or tf_name,
                              [available[i] for i in imports])

    errors: list[str] = []
    warnings: list[str] = []
    for rule in rules.values():
        for diag in validate_rule(rule, merged):
            (warnings if diag.startswith("warning:") else errors).append(diag)

    for uname, unit in units.items():
        declared = {p.name for p in unit.params}
        children = _named_children(unit)
        for child in children:
            if child not in rules and child not in units:
                errors.append(f"unit {uname!r} references unknown "
                              f"rule/unit {child!r}")
        for mapping in unit.mappings:
            for end, which in ((mapping.src, "source"), (mapping.dst, "target")):
                child, param = end
                if child is None:
                    if param not in declared:
                        errors.append(f"unit {uname!r}: mapping {which} names "
                                      f"undeclared parameter {param!r}")
                    continue
                if child not in children:
                    errors.append(f"unit {uname!r}: mapping {which} names "
                                  f"{child!r}, which is not a child of it")
                    continue
                target = rules.get(child) or units.get(child)
                if target is not None and \
                        all(p.name != param for p in target.params):
                    errors.append(f"unit {uname!r}: mapping {which} names "
                                  f"undeclared parameter {child}.{param}")
            if mapping.src[0] is not None and mapping.dst[0] is not None:
                errors.append(f"unit {uname!r}: child-to-child mappings must "
                              "pass through an own parameter")

    if main is None:
        errors.append("transformation declares no main unit")
    elif main not in units and main not in rules:
        errors.append(f"main unit {main!r} is not defined")

    errors.extend(_cycle_errors(units))
    if errors:
        raise FormatError(
            f"transformation {tf_name!r} has {len(errors)} problem(s): {errors[0]}",
            errors=errors)
    return TransformationFile(name=tf_name, imports=tuple(imports),
                              metamodel=merged, rules=rules, units=units,
                              main=main or "", warnings=warnings)


def _cycle_errors(units: Mapping[str, Unit]) -> list[str]:
    """Recursive unit references must pass through a conditional or
    sequential construct somewhere in the cycle."""
    children = {name: [c for c in _named_children(u) if c in units]
                for name, u in units.items()}
    guarded = {name: _guarded_children(u) for name, u in units.items()}
    errors: list[str] = []
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(name: str) -> None:
        state[name] = 1
        stack.append(name)
        for child in children[name]:
            if state.get(child, 0) == 0:
                visit(child)
            elif state.get(child) == 1:
                cycle = stack[stack.index(child):] + [child]
                edges = list(zip(cycle, cycle[1:]))
                if not any(trg in guarded[src] for src, trg in edges):
                    errors.append(
                        "unguarded recursive unit cycle: " + " -> ".join(cycle))
        stack.pop()
        state[name] = 2

    for name in units:
        if state.get(name, 0) == 0:
            visit(name)
    return errors
