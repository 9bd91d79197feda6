"""Mutable typed instance graphs with a transactional change journal.

Every mutation goes through the graph API and is journaled, so any prefix of
work can be rolled back to a checkpoint.  Node ids are monotonically
increasing integers; rolling back also restores the id counter, so a replayed
sequence of operations produces identical ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import GraphError, StaleCheckpointError
from .metamodel import ANY, Metamodel, RefDef, Value, default_value, kind_of


@dataclass(frozen=True)
class NodeRef:
    """Opaque wrapper distinguishing node-valued parameters from integers."""

    id: int

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"#{self.id}"


@dataclass
class Node:
    __slots__ = ("id", "type", "attrs", "refs")
    id: int
    type: str
    attrs: dict[str, Value]
    refs: dict[str, list[int]]


@dataclass(frozen=True)
class Checkpoint:
    index: int
    next_id: int
    serial: int


_EMPTY_SET: frozenset = frozenset()


class InstanceGraph:
    """Typed graph conforming to a metamodel, with checkpoint/rollback."""

    def __init__(self, metamodel: Metamodel):
        self.metamodel = metamodel
        self.nodes: dict[int, Node] = {}
        self._next_id = 1
        self._entries: list[tuple] = []
        self._cpstack: list[Checkpoint] = []
        self._cpserial = 0
        self._type_index: dict[str, set[int]] = {}
        # trg id -> {(src id, ref name): occurrence count}
        self._incoming: dict[int, dict[tuple[int, str], int]] = {}
        # (ref name, trg type) -> targets with at least one such incoming edge;
        # lets the matcher narrow candidates before their neighbour is bound
        self._in_ref_index: dict[tuple[str, str], set[int]] = {}
        self._in_ref_count: dict[tuple[int, str], int] = {}
        # (type, attr, value) -> nodes whose attribute is explicitly set to
        # the value; lookups for default values must fall back to a scan
        self._attr_index: dict[tuple[str, str, Value], set[int]] = {}

    # -- basic access ------------------------------------------------------

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def get_attribute(self, node_id: int, name: str) -> Value:
        n = self.node(node_id)
        ad = self.metamodel.attr(n.type, name)
        if ad is None:
            raise GraphError(f"type {n.type!r} declares no attribute {name!r}")
        return n.attrs.get(name, default_value(ad.kind))

    def ref_targets(self, node_id: int, name: str) -> tuple[int, ...]:
        n = self.node(node_id)
        if self.metamodel.ref(n.type, name) is None:
            raise GraphError(f"type {n.type!r} declares no reference {name!r}")
        return tuple(n.refs.get(name, ()))

    def nodes_of_type(self, type_name: str) -> list[int]:
        """Sorted ids of nodes whose type conforms to ``type_name``."""
        out: list[int] = []
        for t in self.metamodel.concrete_subtypes(type_name):
            out.extend(self._type_index.get(t, ()))
        out.sort()
        return out

    def incoming(self, node_id: int) -> Iterator[tuple[int, str]]:
        """(source id, reference name) pairs of edges pointing at a node."""
        return iter(self._incoming.get(node_id, ()))

    def containment_parent(self, node_id: int) -> int | None:
        for (src, ref) in self._incoming.get(node_id, ()):
            rd = self.metamodel.ref(self.nodes[src].type, ref)
            if rd is not None and rd.containment:
                return src
        return None

    # -- mutation ----------------------------------------------------------

    def create_node(self, type_name: str) -> int:
        td = self.metamodel.type(type_name)
        if td.abstract:
            raise GraphError(f"cannot instantiate abstract type {type_name!r}")
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = Node(nid, type_name, {}, {})
        self._type_index.setdefault(type_name, set()).add(nid)
        self._entries.append(("create", nid))
        return nid

    def delete_node(self, node_id: int) -> None:
        n = self.node(node_id)
        incoming_spec: list[tuple[int, str, tuple[int, ...]]] = []
        for (src, ref) in sorted(self._incoming.get(node_id, ())):
            lst = self.nodes[src].refs[ref]
            positions = tuple(i for i, t in enumerate(lst) if t == node_id)
            incoming_spec.append((src, ref, positions))
        for (src, ref, _positions) in incoming_spec:
            srcnode = self.nodes[src]
            remaining = [t for t in srcnode.refs[ref] if t != node_id]
            if remaining:
                srcnode.refs[ref] = remaining
            else:
                del srcnode.refs[ref]
        for ref, lst in n.refs.items():
            for trg in lst:
                self._dec_incoming(trg, node_id, ref)
        self._incoming.pop(node_id, None)
        for (_src, ref, _positions) in incoming_spec:
            if self._in_ref_count.pop((node_id, ref), None) is not None:
                self._in_ref_index[(ref, n.type)].discard(node_id)
        self._drop_attr_entries(n)
        self._type_index[n.type].discard(node_id)
        del self.nodes[node_id]
        self._entries.append((
            "delete", node_id, n.type, dict(n.attrs),
            {r: list(l) for r, l in n.refs.items()}, incoming_spec,
        ))

    def set_attribute(self, node_id: int, name: str, value: Value) -> None:
        n = self.node(node_id)
        ad = self.metamodel.attr(n.type, name)
        if ad is None:
            raise GraphError(f"type {n.type!r} declares no attribute {name!r}")
        if kind_of(value) != ad.kind:
            raise GraphError(
                f"attribute {name!r} of {n.type!r} expects {ad.kind}, "
                f"got {kind_of(value)} ({value!r})")
        old = n.attrs.get(name, default_value(ad.kind))
        self._set_attr_raw(n, name, value)
        self._entries.append(("attr", node_id, name, old, value))

    def add_edge(self, src: int, ref: str, trg: int) -> None:
        srcnode = self.node(src)
        rd = self.metamodel.ref(srcnode.type, ref)
        if rd is None:
            raise GraphError(f"type {srcnode.type!r} declares no reference {ref!r}")
        trgnode = self.node(trg)
        if not self.metamodel.conforms(trgnode.type, rd.target):
            raise GraphError(
                f"reference {ref!r} targets {rd.target!r}; "
                f"node {trg} has type {trgnode.type!r}")
        lst = srcnode.refs.get(ref, [])
        if not rd.many and lst:
            raise GraphError(
                f"single-valued reference {ref!r} of node {src} already set")
        if rd.containment:
            if self.containment_parent(trg) is not None:
                raise GraphError(f"node {trg} already has a containment parent")
            anc: int | None = src
            while anc is not None:
                if anc == trg:
                    raise GraphError(
                        f"adding {src}-{ref}->{trg} would create a containment cycle")
                anc = self.containment_parent(anc)
        pos = len(lst)
        srcnode.refs.setdefault(ref, []).append(trg)
        self._inc_incoming(trg, src, ref)
        self._entries.append(("eadd", src, ref, trg, pos))

    def remove_edge(self, src: int, ref: str, trg: int) -> None:
        srcnode = self.node(src)
        if self.metamodel.ref(srcnode.type, ref) is None:
            raise GraphError(f"type {srcnode.type!r} declares no reference {ref!r}")
        lst = srcnode.refs.get(ref, [])
        try:
            pos = lst.index(trg)
        except ValueError:
            raise GraphError(f"no edge {src}-{ref}->{trg}") from None
        lst.pop(pos)
        if not lst:
            del srcnode.refs[ref]
        self._dec_incoming(trg, src, ref)
        self._entries.append(("edel", src, ref, trg, pos))

    def _set_attr_raw(self, n: Node, name: str, value: Value) -> None:
        if name in n.attrs:
            entry = self._attr_index.get((n.type, name, n.attrs[name]))
            if entry is not None:
                entry.discard(n.id)
        n.attrs[name] = value
        self._attr_index.setdefault((n.type, name, value), set()).add(n.id)

    def _drop_attr_entries(self, n: Node) -> None:
        for name, value in n.attrs.items():
            entry = self._attr_index.get((n.type, name, value))
            if entry is not None:
                entry.discard(n.id)

    def nodes_with_attr(self, type_name: str, attr: str, value: Value) -> set[int]:
        """Nodes of exactly ``type_name`` whose ``attr`` is explicitly set to
        ``value``; incomplete for default values (unset attributes are not
        indexed)."""
        return self._attr_index.get((type_name, attr, value), _EMPTY_SET)

    def _inc_incoming(self, trg: int, src: int, ref: str) -> None:
        d = self._incoming.setdefault(trg, {})
        d[(src, ref)] = d.get((src, ref), 0) + 1
        k = (trg, ref)
        n = self._in_ref_count.get(k, 0)
        self._in_ref_count[k] = n + 1
        if n == 0:
            self._in_ref_index.setdefault(
                (ref, self.nodes[trg].type), set()).add(trg)

    def _dec_incoming(self, trg: int, src: int, ref: str) -> None:
        d = self._incoming[trg]
        k = (src, ref)
        d[k] -= 1
        if not d[k]:
            del d[k]
        if not d:
            del self._incoming[trg]
        ck = (trg, ref)
        self._in_ref_count[ck] -= 1
        if not self._in_ref_count[ck]:
            del self._in_ref_count[ck]
            self._in_ref_index[(ref, self.nodes[trg].type)].discard(trg)

    _EMPTY: frozenset = frozenset()

    def targets_with_incoming(self, ref: str, type_name: str) -> frozenset | set[int]:
        """Nodes of exactly ``type_name`` having >=1 incoming ``ref`` edge."""
        return self._in_ref_index.get((ref, type_name), self._EMPTY)

    # -- transactions ------------------------------------------------------

    def checkpoint(self) -> Checkpoint:
        self._cpserial += 1
        cp = Checkpoint(len(self._entries), self._next_id, self._cpserial)
        self._cpstack.append(cp)
        return cp

    def rollback_to(self, token: Checkpoint) -> None:
        if token not in self._cpstack:
            raise StaleCheckpointError(f"checkpoint {token.serial} is not active")
        while self._cpstack:
            top = self._cpstack.pop()
            if top == token:
                break
        for entry in reversed(self._entries[token.index:]):
            self._undo(entry)
        del self._entries[token.index:]
        self._next_id = token.next_id
        if not self._cpstack:
            self._entries.clear()

    def commit(self, token: Checkpoint) -> None:
        """Release a checkpoint, keeping all changes made since it."""
        if not self._cpstack or self._cpstack[-1] != token:
            raise StaleCheckpointError(
                f"checkpoint {token.serial} is not the innermost active one")
        self._cpstack.pop()
        if not self._cpstack:
            self._entries.clear()

    def _undo(self, entry: tuple) -> None:
        tag = entry[0]
        if tag == "create":
            nid = entry[1]
            n = self.nodes.pop(nid)
            self._drop_attr_entries(n)
            self._type_index[n.type].discard(nid)
            self._incoming.pop(nid, None)
        elif tag == "delete":
            _, nid, type_name, attrs, refs, incoming_spec = entry
            node = Node(nid, type_name, {},
                        {r: list(l) for r, l in refs.items()})
            self.nodes[nid] = node
            for name, value in attrs.items():
                self._set_attr_raw(node, name, value)
            self._type_index.setdefault(type_name, set()).add(nid)
            for ref, lst in refs.items():
                for trg in lst:
                    self._inc_incoming(trg, nid, ref)
            for (src, ref, positions) in incoming_spec:
                lst = self.nodes[src].refs.setdefault(ref, [])
                for pos in positions:
                    lst.insert(pos, nid)
                    self._inc_incoming(nid, src, ref)
        elif tag == "attr":
            _, nid, name, old, _new = entry
            self._set_attr_raw(self.nodes[nid], name, old)
        elif tag == "eadd":
            _, src, ref, trg, pos = entry
            lst = self.nodes[src].refs[ref]
            assert lst[pos] == trg
            lst.pop(pos)
            if not lst:
                del self.nodes[src].refs[ref]
            self._dec_incoming(trg, src, ref)
        elif tag == "edel":
            _, src, ref, trg, pos = entry
            self.nodes[src].refs.setdefault(ref, []).insert(pos, trg)
            self._inc_incoming(trg, src, ref)
        else:  # pragma: no cover
            raise AssertionError(f"unknown journal entry {tag!r}")

    # -- validation and raw loading ----------------------------------------

    def validate(self) -> list[str]:
        """Exhaustive conformance check; returns one message per violation."""
        mm = self.metamodel
        errors: list[str] = []
        for nid in self.node_ids():
            n = self.nodes[nid]
            if not mm.has_type(n.type) or n.type == ANY:
                errors.append(f"node {nid}: unknown type {n.type!r}")
                continue
            if mm.type(n.type).abstract:
                errors.append(f"node {nid}: abstract type {n.type!r}")
                continue
            for name, value in n.attrs.items():
                ad = mm.attr(n.type, name)
                if ad is None:
                    errors.append(f"node {nid}: undeclared attribute {name!r}")
                elif kind_of(value) != ad.kind:
                    errors.append(
                        f"node {nid}: attribute {name!r} expects {ad.kind}, "
                        f"got {kind_of(value)}")
            for ref, lst in n.refs.items():
                rd = mm.ref(n.type, ref)
                if rd is None:
                    errors.append(f"node {nid}: undeclared reference {ref!r}")
                    continue
                if not rd.many and len(lst) > 1:
                    errors.append(
                        f"node {nid}: single-valued reference {ref!r} holds "
                        f"{len(lst)} targets")
                for trg in lst:
                    if trg not in self.nodes:
                        errors.append(f"node {nid}: reference {ref!r} targets "
                                      f"missing node {trg}")
                    elif not mm.conforms(self.nodes[trg].type, rd.target):
                        errors.append(
                            f"node {nid}: reference {ref!r} target {trg} has "
                            f"non-conforming type {self.nodes[trg].type!r}")
        errors.extend(self._validate_containment())
        return errors

    def _validate_containment(self) -> list[str]:
        mm = self.metamodel
        errors: list[str] = []
        parent: dict[int, int] = {}
        for nid in self.node_ids():
            n = self.nodes[nid]
            if not mm.has_type(n.type) or n.type == ANY or mm.type(n.type).abstract:
                continue
            for ref, lst in n.refs.items():
                rd = mm.ref(n.type, ref)
                if rd is None or not rd.containment:
                    continue
                for trg in lst:
                    if trg in parent:
                        errors.append(f"node {trg}: multiple containment parents")
                    else:
                        parent[trg] = nid
        for start in parent:
            seen = {start}
            cur = parent.get(start)
            while cur is not None:
                if cur in seen:
                    errors.append(f"containment cycle through node {cur}")
                    break
                seen.add(cur)
                cur = parent.get(cur)
        return errors

    def load_node(self, node_id: int, type_name: str) -> Node:
        """Insert a node with an explicit id; used by deserializers only."""
        if node_id in self.nodes:
            raise GraphError(f"duplicate node id {node_id}")
        if node_id < 1:
            raise GraphError(f"node id must be positive, got {node_id}")
        n = Node(node_id, type_name, {}, {})
        self.nodes[node_id] = n
        self._type_index.setdefault(type_name, set()).add(node_id)
        self._next_id = max(self._next_id, node_id + 1)
        return n

    def rebuild_indexes(self) -> None:
        """Recompute the derived indexes after raw loading."""
        self._incoming.clear()
        self._in_ref_index.clear()
        self._in_ref_count.clear()
        self._attr_index.clear()
        for nid, n in self.nodes.items():
            for ref, lst in n.refs.items():
                for trg in lst:
                    self._inc_incoming(trg, nid, ref)
            for name, value in n.attrs.items():
                self._attr_index.setdefault((n.type, name, value),
                                            set()).add(nid)
