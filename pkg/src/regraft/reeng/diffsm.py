"""Structural comparison of two state machines.

States are matched by name, transitions by their full
(source name, target name, trigger, action) tuple, both as multisets.
An empty report means the machines are isomorphic under that matching.
Duplicate state names are reported as warnings without failing the match.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..graph import InstanceGraph

Tuple4 = tuple[str, str, str, str]


@dataclass
class DiffReport:
    unmatched_states_left: list[str] = field(default_factory=list)
    unmatched_states_right: list[str] = field(default_factory=list)
    unmatched_transitions_left: list[Tuple4] = field(default_factory=list)
    unmatched_transitions_right: list[Tuple4] = field(default_factory=list)
    attribute_mismatches: list[str] = field(default_factory=list)
    duplicate_names_left: list[str] = field(default_factory=list)
    duplicate_names_right: list[str] = field(default_factory=list)

    def empty(self) -> bool:
        return not (self.unmatched_states_left or self.unmatched_states_right
                    or self.unmatched_transitions_left
                    or self.unmatched_transitions_right
                    or self.attribute_mismatches)

    def render(self) -> str:
        if self.empty() and not (self.duplicate_names_left
                                 or self.duplicate_names_right):
            return "machines match\n"
        lines: list[str] = []
        for label, items in (
            ("state only in left", self.unmatched_states_left),
            ("state only in right", self.unmatched_states_right),
        ):
            lines.extend(f"{label}: {name}" for name in items)
        for label, items in (
            ("transition only in left", self.unmatched_transitions_left),
            ("transition only in right", self.unmatched_transitions_right),
        ):
            lines.extend(
                f"{label}: {src} -> {trg} [trigger={trigger!r}, action={action!r}]"
                for src, trg, trigger, action in items)
        lines.extend(f"attribute mismatch: {m}" for m in self.attribute_mismatches)
        for side, dups in (("left", self.duplicate_names_left),
                           ("right", self.duplicate_names_right)):
            lines.extend(f"warning: duplicate state name in {side}: {d}"
                         for d in dups)
        if self.empty():
            lines.append("machines match")
        return "\n".join(lines) + "\n"


def _states(g: InstanceGraph) -> Counter:
    return Counter(g.get_attribute(s, "name") for s in g.nodes_of_type("State"))


def _transitions(g: InstanceGraph) -> Counter:
    names = {s: g.get_attribute(s, "name") for s in g.nodes_of_type("State")}
    out: Counter = Counter()
    for t in g.nodes_of_type("Transition"):
        src = g.ref_targets(t, "source")
        trg = g.ref_targets(t, "target")
        out[(names.get(src[0], "?") if src else "?",
             names.get(trg[0], "?") if trg else "?",
             g.get_attribute(t, "trigger"),
             g.get_attribute(t, "action"))] += 1
    return out


def _leftovers(a: Counter, b: Counter) -> list:
    out = []
    for key in sorted(a):
        out.extend([key] * max(0, a[key] - b.get(key, 0)))
    return out


def diff_statemachines(left: InstanceGraph, right: InstanceGraph) -> DiffReport:
    report = DiffReport()
    ls, rs = _states(left), _states(right)
    report.unmatched_states_left = _leftovers(ls, rs)
    report.unmatched_states_right = _leftovers(rs, ls)
    lt, rt = _transitions(left), _transitions(right)
    report.unmatched_transitions_left = _leftovers(lt, rt)
    report.unmatched_transitions_right = _leftovers(rt, lt)
    report.duplicate_names_left = sorted(n for n, c in ls.items() if c > 1)
    report.duplicate_names_right = sorted(n for n, c in rs.items() if c > 1)
    return report
