"""Data model for rewrite rules.

A rule pairs a left-hand pattern (what must be present) with a right-hand
pattern (what remains afterwards).  Pattern nodes shared through the mapping
are preserved; LHS-only elements are deleted and RHS-only elements created.
Application conditions are arbitrary NOT/AND/OR formulas over anchored
pattern extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import RuleError
from .expr import Expr, params_of
from .metamodel import ANY, Metamodel, Value, kind_of


@dataclass(frozen=True)
class AttrConstant:
    value: Value


@dataclass(frozen=True)
class AttrParam:
    name: str


@dataclass(frozen=True)
class AttrCheck:
    expr: Expr


AttrPattern = Union[AttrConstant, AttrParam, AttrCheck]


@dataclass(frozen=True)
class PatternNode:
    id: str
    type: str
    binding: str | None = None
    attr_patterns: tuple[tuple[str, AttrPattern], ...] = ()


@dataclass(frozen=True)
class PatternEdge:
    src: str
    ref: str
    trg: str


@dataclass(frozen=True)
class PatternGraph:
    pnodes: tuple[PatternNode, ...] = ()
    pedges: tuple[PatternEdge, ...] = ()

    def node(self, pid: str) -> PatternNode:
        for pn in self.pnodes:
            if pn.id == pid:
                return pn
        raise RuleError(f"pattern has no node {pid!r}")

    def ids(self) -> tuple[str, ...]:
        return tuple(pn.id for pn in self.pnodes)


@dataclass(frozen=True)
class TruePred:
    pass


@dataclass(frozen=True)
class GraphCond:
    """Exists an extension of the current match into ``extension`` satisfying
    ``nested``; ``anchor`` maps host pattern nodes to extension nodes."""

    extension: PatternGraph
    anchor: tuple[tuple[str, str], ...] = ()
    nested: "Formula" = field(default_factory=TruePred)


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


Formula = Union[TruePred, GraphCond, Not, And, Or]


@dataclass(frozen=True)
class Parameter:
    name: str
    mode: str = "inout"  # in | out | inout
    default: Value | None = None
    has_default: bool = False


@dataclass(frozen=True)
class Assignment:
    pnode: str
    attr: str
    expr: Expr


@dataclass(frozen=True)
class Rule:
    name: str
    params: tuple[Parameter, ...] = ()
    lhs: PatternGraph = field(default_factory=PatternGraph)
    rhs: PatternGraph = field(default_factory=PatternGraph)
    mapping: tuple[tuple[str, str], ...] = ()
    condition: Formula = field(default_factory=TruePred)
    assignments: tuple[Assignment, ...] = ()
    injective: bool = True

    def param(self, name: str) -> Parameter | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Classification:
    created_nodes: tuple[str, ...]
    deleted_nodes: tuple[str, ...]
    preserved_nodes: tuple[tuple[str, str], ...]
    created_edges: tuple[PatternEdge, ...]
    deleted_edges: tuple[PatternEdge, ...]
    preserved_edges: tuple[tuple[PatternEdge, PatternEdge], ...]


_classify_cache: dict[int, tuple[Rule, Classification]] = {}


def classify(rule: Rule) -> Classification:
    """Partition every pattern element into created / deleted / preserved."""
    cached = _classify_cache.get(id(rule))
    if cached is not None and cached[0] is rule:
        return cached[1]
    mapping = dict(rule.mapping)
    if len(set(mapping.values())) != len(mapping):
        raise RuleError(f"rule {rule.name!r}: mapping is not injective")
    lhs_ids = set(rule.lhs.ids())
    rhs_ids = set(rule.rhs.ids())
    for l, r in mapping.items():
        if l not in lhs_ids or r not in rhs_ids:
            raise RuleError(f"rule {rule.name!r}: mapping {l!r}->{r!r} names "
                            "unknown pattern nodes")
        if rule.lhs.node(l).type != rule.rhs.node(r).type:
            raise RuleError(
                f"rule {rule.name!r}: mapped nodes {l!r}->{r!r} differ in type")
    deleted_nodes = tuple(pid for pid in rule.lhs.ids() if pid not in mapping)
    created_nodes = tuple(pid for pid in rule.rhs.ids()
                          if pid not in set(mapping.values()))
    preserved_nodes = tuple(sorted(mapping.items()))
    unpaired_rhs = list(rule.rhs.pedges)
    deleted_edges: list[PatternEdge] = []
    preserved_edges: list[tuple[PatternEdge, PatternEdge]] = []
    for le in rule.lhs.pedges:
        image = None
        if le.src in mapping and le.trg in mapping:
            want = PatternEdge(mapping[le.src], le.ref, mapping[le.trg])
            if want in unpaired_rhs:
                unpaired_rhs.remove(want)
                image = want
        if image is None:
            deleted_edges.append(le)
        else:
            preserved_edges.append((le, image))
    result = Classification(
        created_nodes=created_nodes,
        deleted_nodes=deleted_nodes,
        preserved_nodes=preserved_nodes,
        created_edges=tuple(unpaired_rhs),
        deleted_edges=tuple(deleted_edges),
        preserved_edges=tuple(preserved_edges),
    )
    if len(_classify_cache) > 1024:
        _classify_cache.clear()
    _classify_cache[id(rule)] = (rule, result)
    return result


def _formula_graphs(f: Formula) -> list[GraphCond]:
    if isinstance(f, GraphCond):
        return [f] + _formula_graphs(f.nested)
    if isinstance(f, Not):
        return _formula_graphs(f.operand)
    if isinstance(f, (And, Or)):
        return _formula_graphs(f.left) + _formula_graphs(f.right)
    return []


def _pattern_diagnostics(pg: PatternGraph, mm: Metamodel, where: str,
                         params: set[str], used: set[str]) -> list[str]:
    out: list[str] = []
    seen_ids: set[str] = set()
    for pn in pg.pnodes:
        if pn.id in seen_ids:
            out.append(f"{where}: duplicate pattern node id {pn.id!r}")
        seen_ids.add(pn.id)
        if not mm.has_type(pn.type):
            out.append(f"{where}: node {pn.id!r} has unknown type {pn.type!r}")
            continue
        if pn.binding is not None:
            used.add(pn.binding)
            if pn.binding not in params:
                out.append(f"{where}: node {pn.id!r} binds undeclared "
                           f"parameter {pn.binding!r}")
        for attr_name, ap in pn.attr_patterns:
            ad = mm.attr(pn.type, attr_name)
            if ad is None:
                out.append(f"{where}: node {pn.id!r} constrains undeclared "
                           f"attribute {attr_name!r}")
                continue
            if isinstance(ap, AttrConstant) and kind_of(ap.value) != ad.kind:
                out.append(f"{where}: node {pn.id!r} attribute {attr_name!r} "
                           f"constant has kind {kind_of(ap.value)}, expected {ad.kind}")
            if isinstance(ap, AttrParam):
                used.add(ap.name)
                if ap.name not in params:
                    out.append(f"{where}: node {pn.id!r} attribute {attr_name!r} "
                               f"references undeclared parameter {ap.name!r}")
            if isinstance(ap, AttrCheck):
                for name in params_of(ap.expr):
                    used.add(name)
                    if name not in params:
                        out.append(f"{where}: check on {pn.id!r}.{attr_name} "
                                   f"references undeclared parameter {name!r}")
    for pe in pg.pedges:
        if pe.src not in seen_ids or pe.trg not in seen_ids:
            out.append(f"{where}: edge {pe.src!r}-{pe.ref}->{pe.trg!r} names an "
                       "unknown pattern node")
            continue
        src_type = pg.node(pe.src).type
        if not mm.has_type(src_type):
            continue
        rd = mm.ref(src_type, pe.ref)
        if rd is None:
            out.append(f"{where}: node {pe.src!r} ({src_type}) declares no "
                       f"reference {pe.ref!r}")
            continue
        trg_type = pg.node(pe.trg).type
        if mm.has_type(trg_type) and not mm.comparable(trg_type, rd.target):
            out.append(f"{where}: edge {pe.src!r}-{pe.ref}->{pe.trg!r} can never "
                       f"match ({trg_type} vs declared target {rd.target})")
    return out


def validate_rule(rule: Rule, mm: Metamodel) -> list[str]:
    """All type/feature/parameter diagnostics for a rule; [] means well-formed.

    Messages prefixed ``warning:`` do not make the rule unusable.
    """
    out: list[str] = []
    params = {p.name for p in rule.params}
    if len(params) != len(rule.params):
        out.append(f"rule {rule.name!r}: duplicate parameter names")
    used: set[str] = set()
    out.extend(_pattern_diagnostics(rule.lhs, mm, f"rule {rule.name!r} lhs",
                                    params, used))
    out.extend(_pattern_diagnostics(rule.rhs, mm, f"rule {rule.name!r} rhs",
                                    params, used))
    try:
        cls = classify(rule)
    except RuleError as exc:
        out.append(str(exc))
        return out
    rhs_ids = set(rule.rhs.ids())
    for a in rule.assignments:
        if a.pnode not in rhs_ids:
            out.append(f"rule {rule.name!r}: assignment targets unknown "
                       f"node {a.pnode!r}")
            continue
        t = rule.rhs.node(a.pnode).type
        if mm.has_type(t) and mm.attr(t, a.attr) is None:
            out.append(f"rule {rule.name!r}: assignment targets undeclared "
                       f"attribute {a.pnode!r}.{a.attr}")
        for name in params_of(a.expr):
            used.add(name)
            if name not in params:
                out.append(f"rule {rule.name!r}: assignment expression references "
                           f"undeclared parameter {name!r}")
    lhs_ids = set(rule.lhs.ids())
    for gc in _formula_graphs(rule.condition):
        for host, cond in gc.anchor:
            if host not in lhs_ids:
                out.append(f"rule {rule.name!r}: condition anchors unknown host "
                           f"node {host!r}")
            if cond not in set(gc.extension.ids()):
                out.append(f"rule {rule.name!r}: condition anchors unknown "
                           f"extension node {cond!r}")
        out.extend(_pattern_diagnostics(gc.extension, mm,
                                        f"rule {rule.name!r} condition",
                                        params, used))
    created = set(cls.created_nodes)
    for pn in rule.rhs.pnodes:
        if pn.id in created and pn.attr_patterns:
            out.append(f"warning: rule {rule.name!r}: created node {pn.id!r} "
                       "carries attribute patterns (use assignments)")
    for p in rule.params:
        if p.name not in used:
            out.append(f"warning: rule {rule.name!r}: parameter {p.name!r} is "
                       "declared but never used")
    return out
