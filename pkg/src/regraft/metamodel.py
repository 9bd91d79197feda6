"""Typed metamodels: named node types with inheritance, attributes and references.

A metamodel declares the vocabulary instance graphs must conform to.  The
built-in top type ``ANY`` is an implicit supertype of every declared type and
may be used as a reference target for generic helper structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .errors import MetamodelError

ANY = "ANY"

ATTR_KINDS = ("string", "integer", "boolean")

_DEFAULTS = {"string": "", "integer": 0, "boolean": False}

Value = Union[str, int, bool]


def default_value(kind: str) -> Value:
    return _DEFAULTS[kind]


def kind_of(value: Value) -> str:
    """Attribute kind name of a Python value (bool checked before int)."""
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, str):
        return "string"
    raise MetamodelError(f"unsupported attribute value {value!r}")


@dataclass(frozen=True)
class AttrDef:
    name: str
    kind: str


@dataclass(frozen=True)
class RefDef:
    name: str
    target: str
    containment: bool = False
    many: bool = False


@dataclass(frozen=True)
class NodeTypeDef:
    name: str
    abstract: bool = False
    supertypes: tuple[str, ...] = ()
    attributes: tuple[AttrDef, ...] = ()
    references: tuple[RefDef, ...] = ()


Feature = Union[AttrDef, RefDef]


class Metamodel:
    """Validated, indexed set of node type definitions."""

    def __init__(self, name: str, types: Iterable[NodeTypeDef]):
        self.name = name
        self.types: tuple[NodeTypeDef, ...] = tuple(types)
        self._by_name: dict[str, NodeTypeDef] = {}
        for td in self.types:
            if td.name == ANY:
                raise MetamodelError(f"type name {ANY!r} is reserved")
            if td.name in self._by_name:
                raise MetamodelError(f"duplicate type name {td.name!r}")
            self._by_name[td.name] = td
        self._check_supertypes()
        self._ancestors: dict[str, tuple[str, ...]] = {}
        for td in self.types:
            self._ancestors[td.name] = self._linearize(td.name)
        self._features: dict[str, tuple[Feature, ...]] = {}
        self._attr_defs: dict[str, dict[str, AttrDef]] = {}
        self._ref_defs: dict[str, dict[str, RefDef]] = {}
        for td in self.types:
            self._flatten(td.name)
        self._check_feature_targets()
        self._concrete: dict[str, frozenset[str]] = {}
        all_concrete = frozenset(td.name for td in self.types if not td.abstract)
        self._concrete[ANY] = all_concrete
        for td in self.types:
            self._concrete[td.name] = frozenset(
                c for c in all_concrete if td.name in self._ancestors[c] or c == td.name
            )

    def _check_supertypes(self) -> None:
        state: dict[str, int] = {}

        def visit(name: str, trail: list[str]) -> None:
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise MetamodelError("supertype cycle: " + " -> ".join(trail + [name]))
            state[name] = 1
            for sup in self._by_name[name].supertypes:
                if sup not in self._by_name:
                    raise MetamodelError(
                        f"type {name!r} names unknown supertype {sup!r}")
                visit(sup, trail + [name])
            state[name] = 2

        for td in self.types:
            visit(td.name, [])

    def _linearize(self, name: str) -> tuple[str, ...]:
        """Ordered strict ancestors: each supertype's ancestors, then itself."""
        out: list[str] = []
        for sup in self._by_name[name].supertypes:
            anc = self._ancestors.get(sup)
            if anc is None:
                anc = self._ancestors[sup] = self._linearize(sup)
            for a in anc:
                if a not in out:
                    out.append(a)
            if sup not in out:
                out.append(sup)
        return tuple(out)

    def _flatten(self, name: str) -> None:
        feats: list[Feature] = []
        seen: set[str] = set()
        for tname in self._ancestors[name] + (name,):
            td = self._by_name[tname]
            for f in tuple(td.attributes) + tuple(td.references):
                if f.name in seen:
                    raise MetamodelError(
                        f"type {name!r}: duplicate feature {f.name!r} in flattened set")
                seen.add(f.name)
                feats.append(f)
        for f in feats:
            if isinstance(f, AttrDef) and f.kind not in ATTR_KINDS:
                raise MetamodelError(
                    f"type {name!r}: attribute {f.name!r} has unknown kind {f.kind!r}")
        self._features[name] = tuple(feats)
        self._attr_defs[name] = {f.name: f for f in feats if isinstance(f, AttrDef)}
        self._ref_defs[name] = {f.name: f for f in feats if isinstance(f, RefDef)}

    def _check_feature_targets(self) -> None:
        for td in self.types:
            for rd in td.references:
                if rd.target != ANY and rd.target not in self._by_name:
                    raise MetamodelError(
                        f"type {td.name!r}: reference {rd.name!r} targets "
                        f"unknown type {rd.target!r}")

    # -- queries -----------------------------------------------------------

    def has_type(self, name: str) -> bool:
        return name == ANY or name in self._by_name

    def type(self, name: str) -> NodeTypeDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise MetamodelError(f"unknown type {name!r}") from None

    def conforms(self, subtype: str, supertype: str) -> bool:
        """True iff ``subtype`` reaches ``supertype`` through the reflexive-
        transitive supertype closure; every declared type conforms to ANY."""
        if supertype == ANY:
            if subtype != ANY and subtype not in self._by_name:
                raise MetamodelError(f"unknown type {subtype!r}")
            return True
        if subtype == ANY:
            raise MetamodelError(f"unknown type {ANY!r} as subtype")
        if subtype not in self._by_name:
            raise MetamodelError(f"unknown type {subtype!r}")
        if supertype not in self._by_name:
            raise MetamodelError(f"unknown type {supertype!r}")
        return subtype == supertype or supertype in self._ancestors[subtype]

    def features(self, name: str) -> tuple[Feature, ...]:
        if name == ANY:
            return ()
        self.type(name)
        return self._features[name]

    def attr(self, type_name: str, attr_name: str) -> AttrDef | None:
        if type_name == ANY:
            return None
        self.type(type_name)
        return self._attr_defs[type_name].get(attr_name)

    def ref(self, type_name: str, ref_name: str) -> RefDef | None:
        if type_name == ANY:
            return None
        self.type(type_name)
        return self._ref_defs[type_name].get(ref_name)

    def concrete_subtypes(self, name: str) -> frozenset[str]:
        """Concrete type names conforming to ``name`` (including itself)."""
        if name != ANY:
            self.type(name)
        return self._concrete[name]

    def comparable(self, a: str, b: str) -> bool:
        """True if one of the two types conforms to the other."""
        if a == ANY or b == ANY:
            return True
        return self.conforms(a, b) or self.conforms(b, a)


def merge_metamodels(name: str, metamodels: Iterable[Metamodel]) -> Metamodel:
    """Union of several metamodels; duplicate type names are rejected."""
    types: list[NodeTypeDef] = []
    seen: set[str] = set()
    for mm in metamodels:
        for td in mm.types:
            if td.name in seen:
                raise MetamodelError(
                    f"metamodel merge: type {td.name!r} declared more than once")
            seen.add(td.name)
            types.append(td)
    return Metamodel(name, types)


def trace_metamodel() -> Metamodel:
    """Built-in helper metamodel: a Trace node with generic source/target."""
    return Metamodel("trace", [
        NodeTypeDef("Trace", references=(
            RefDef("source", ANY, many=True),
            RefDef("target", ANY, many=True),
        )),
    ])
