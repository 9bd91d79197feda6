"""Canonical instance-graph serialization (the ``.gm`` format).

The format is line oriented and canonical: nodes in ascending id order,
features in flattened declaration order, attributes omitted at their default
value, references omitted when empty.  Serializing a parsed canonical file
reproduces it byte for byte, which is what the golden-file tests rely on.

::

    node 1 : StateMachine
      ref states -> 2, 3
    node 2 : State
      attr name = "Idle"
"""

from __future__ import annotations

import re

from ..errors import FormatError
from ..expr import escape_string, unescape_string
from ..graph import InstanceGraph
from ..metamodel import ANY, AttrDef, Metamodel, Value, default_value, kind_of
from ._lines import strip_comment

_NODE_RE = re.compile(r"^node\s+(\d+)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)$")
_ATTR_RE = re.compile(r"^attr\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$")
_REF_RE = re.compile(r"^ref\s+([A-Za-z_][A-Za-z0-9_]*)\s*->\s*(.+)$")


def format_literal(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return escape_string(value)


def parse_literal(text: str) -> Value:
    text = text.strip()
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"'):
        if not text.endswith('"') or len(text) < 2:
            raise ValueError(f"unterminated string literal {text!r}")
        return unescape_string(text)
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    raise ValueError(f"not a literal: {text!r}")


def serialize_model(graph: InstanceGraph) -> str:
    mm = graph.metamodel
    out: list[str] = []
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        out.append(f"node {nid} : {node.type}")
        for feat in mm.features(node.type):
            if isinstance(feat, AttrDef):
                value = node.attrs.get(feat.name, default_value(feat.kind))
                if value != default_value(feat.kind):
                    out.append(f"  attr {feat.name} = {format_literal(value)}")
            else:
                targets = node.refs.get(feat.name)
                if targets:
                    out.append(f"  ref {feat.name} -> "
                               + ", ".join(str(t) for t in targets))
    return "\n".join(out) + ("\n" if out else "")


def parse_model(text: str, metamodel: Metamodel) -> InstanceGraph:
    """Parse a ``.gm`` file; conformance violations are reported exhaustively."""
    graph = InstanceGraph(metamodel)
    errors: list[str] = []
    current = None  # Node being filled, or None
    pending_refs: list[tuple[int, str, str, list[int]]] = []
    first_error_line: int | None = None

    def report(lineno: int, message: str) -> None:
        nonlocal first_error_line
        errors.append(f"line {lineno}: {message}")
        if first_error_line is None:
            first_error_line = lineno

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        m = _NODE_RE.match(line)
        if m:
            nid = int(m.group(1))
            type_name = m.group(2)
            current = None
            if not metamodel.has_type(type_name) or type_name == ANY:
                report(lineno, f"unknown type {type_name!r}")
                continue
            if metamodel.type(type_name).abstract:
                report(lineno, f"abstract type {type_name!r} cannot be instantiated")
                continue
            if nid in graph.nodes:
                report(lineno, f"duplicate node id {nid}")
                continue
            if nid < 1:
                report(lineno, f"node id must be positive, got {nid}")
                continue
            current = graph.load_node(nid, type_name)
            continue
        m = _ATTR_RE.match(line)
        if m:
            if current is None:
                report(lineno, "attribute line outside a node")
                continue
            name, literal = m.group(1), m.group(2)
            ad = metamodel.attr(current.type, name)
            if ad is None:
                report(lineno, f"type {current.type!r} declares no attribute {name!r}")
                continue
            try:
                value = parse_literal(literal)
            except Exception as exc:
                report(lineno, str(exc))
                continue
            if kind_of(value) != ad.kind:
                report(lineno, f"attribute {name!r} expects {ad.kind}, "
                               f"got {kind_of(value)}")
                continue
            current.attrs[name] = value
            continue
        m = _REF_RE.match(line)
        if m:
            if current is None:
                report(lineno, "reference line outside a node")
                continue
            name, targets_text = m.group(1), m.group(2)
            targets: list[int] = []
            ok = True
            for part in targets_text.split(","):
                part = part.strip()
                if not part.isdigit():
                    report(lineno, f"bad node id {part!r} in reference {name!r}")
                    ok = False
                    break
                targets.append(int(part))
            if ok:
                pending_refs.append((lineno, current.id, name, targets))
            continue
        report(lineno, f"unrecognized line: {line!r}")

    for lineno, src, name, targets in pending_refs:
        node = graph.nodes[src]
        rd = metamodel.ref(node.type, name)
        if rd is None:
            report(lineno, f"type {node.type!r} declares no reference {name!r}")
            continue
        if not rd.many and len(targets) > 1:
            report(lineno, f"single-valued reference {name!r} holds "
                           f"{len(targets)} targets")
            continue
        resolved: list[int] = []
        for trg in targets:
            if trg not in graph.nodes:
                report(lineno, f"reference {name!r} targets unknown node {trg}")
                continue
            if not metamodel.conforms(graph.nodes[trg].type, rd.target):
                report(lineno, f"reference {name!r} target {trg} has "
                               f"non-conforming type {graph.nodes[trg].type!r}")
                continue
            resolved.append(trg)
        if len(resolved) == len(targets):
            node.refs[name] = resolved
    graph.rebuild_indexes()
    for message in graph._validate_containment():
        errors.append(message)
    if errors:
        raise FormatError(f"model has {len(errors)} problem(s): {errors[0]}",
                          line=first_error_line, errors=errors)
    return graph
