"""Parser for metamodel declarations (the ``.mm`` format).

::

    metamodel statemachine

    type StateMachine {
      ref states -> State [containment, many]
    }
    abstract type NamedElement {
      attr name : string
    }
    type State : NamedElement { }
"""

from __future__ import annotations

import re

from ..errors import FormatError, MetamodelError
from ..metamodel import ANY, ATTR_KINDS, AttrDef, Metamodel, NodeTypeDef, RefDef
from ._lines import LineReader

_HEADER_RE = re.compile(r"^metamodel\s+([A-Za-z_][A-Za-z0-9_]*)$")
_TYPE_RE = re.compile(
    r"^(abstract\s+)?type\s+([A-Za-z_][A-Za-z0-9_]*)"
    r"(?:\s*:\s*([A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*))?"
    r"\s*\{\s*(\})?$"
)
_ATTR_RE = re.compile(
    r"^attr\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*([a-z]+)$")
_REF_RE = re.compile(
    r"^ref\s+([A-Za-z_][A-Za-z0-9_]*)\s*->\s*([A-Za-z_][A-Za-z0-9_]*)"
    r"(?:\s*\[([a-z,\s]+)\])?$")


def parse_metamodel(text: str) -> Metamodel:
    reader = LineReader(text)
    lineno, line = reader.next()
    m = _HEADER_RE.match(line)
    if m is None:
        raise reader.error("expected 'metamodel <name>' header", lineno)
    name = m.group(1)
    types: list[NodeTypeDef] = []
    while not reader.eof():
        lineno, line = reader.next()
        tm = _TYPE_RE.match(line)
        if tm is None:
            raise reader.error(f"expected a type declaration, got {line!r}", lineno)
        abstract = bool(tm.group(1))
        type_name = tm.group(2)
        supers = tuple(s.strip() for s in tm.group(3).split(",")) if tm.group(3) else ()
        attrs: list[AttrDef] = []
        refs: list[RefDef] = []
        if not tm.group(4):  # body not closed on the same line
            while True:
                if reader.eof():
                    raise reader.error(f"unterminated body of type {type_name!r}",
                                       lineno)
                flineno, fline = reader.next()
                if fline == "}":
                    break
                am = _ATTR_RE.match(fline)
                if am:
                    if am.group(2) not in ATTR_KINDS:
                        raise reader.error(
                            f"unknown attribute kind {am.group(2)!r}", flineno)
                    attrs.append(AttrDef(am.group(1), am.group(2)))
                    continue
                rm = _REF_RE.match(fline)
                if rm:
                    flags = {f.strip() for f in (rm.group(3) or "").split(",") if f.strip()}
                    unknown = flags - {"containment", "many"}
                    if unknown:
                        raise reader.error(
                            f"unknown reference flag(s) {sorted(unknown)}", flineno)
                    refs.append(RefDef(rm.group(1), rm.group(2),
                                       containment="containment" in flags,
                                       many="many" in flags))
                    continue
                raise reader.error(f"expected attr/ref/'}}', got {fline!r}", flineno)
        types.append(NodeTypeDef(type_name, abstract=abstract, supertypes=supers,
                                 attributes=tuple(attrs), references=tuple(refs)))
    try:
        return Metamodel(name, types)
    except MetamodelError as exc:
        raise FormatError(f"invalid metamodel {name!r}: {exc}") from exc
