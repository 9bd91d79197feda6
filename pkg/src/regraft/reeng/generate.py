"""Deterministic corpus generator for the restricted Java subset.

Produces an abstract root class ``State``, optional abstract intermediate
classes, and the requested number of concrete state classes whose method
bodies nest if/switch/try constructs around constructor calls and
``send("...")`` actions.  The same seed always yields byte-identical sources.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

_STATE_WORDS = ["Idle", "Run", "Wait", "Stop", "Load", "Send", "Init", "Done",
                "Hot", "Cold"]
_VERBS = ["go", "run", "poll", "handle", "fire", "sync", "tick", "flush"]
_ACTION_WORDS = ["ack", "nack", "ping", "warmup", "retry", "halt", "beep"]


@dataclass(frozen=True)
class SourceFile:
    name: str
    text: str


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def line(self, text: str) -> None:
        self.lines.append("    " * self.depth + text)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class _Generator:
    def __init__(self, n_states: int, methods_per_state: int,
                 max_nesting: int, seed: int):
        if n_states < 1:
            raise ValueError("n_states must be >= 1")
        self.rng = random.Random(seed)
        self.n_states = n_states
        self.methods_per_state = methods_per_state
        self.max_nesting = max_nesting
        self.counter = 0
        self.concrete = [f"{_STATE_WORDS[i % len(_STATE_WORDS)]}{i}"
                         for i in range(n_states)]
        n_abstract = self.rng.randint(0, max(0, n_states // 4))
        self.abstract = [f"Base{j}" for j in range(n_abstract)]

    def _fresh(self) -> int:
        self.counter += 1
        return self.counter

    def _target(self) -> str:
        # mostly concrete states; occasionally an untranslated class, which
        # the extraction must skip
        if self.abstract and self.rng.random() < 0.08:
            return self.rng.choice(self.abstract)
        return self.rng.choice(self.concrete)

    def _statement(self, w: _Writer, depth: int) -> None:
        roll = self.rng.random()
        if depth < self.max_nesting and roll < 0.30:
            kind = self.rng.choice(["if", "switch", "try"])
            if kind == "if":
                w.line("if (ready) {")
                w.depth += 1
                self._statements(w, depth + 1)
                w.depth -= 1
                if self.rng.random() < 0.5:
                    w.line("} else {")
                    w.depth += 1
                    self._statements(w, depth + 1)
                    w.depth -= 1
                w.line("}")
            elif kind == "switch":
                w.line("switch (event) {")
                w.depth += 1
                for _ in range(self.rng.randint(1, 3)):
                    w.line(f"case EV{self._fresh()}:")
                    w.depth += 1
                    self._statements(w, depth + 1)
                    w.depth -= 1
                w.depth -= 1
                w.line("}")
            else:
                w.line("try {")
                w.depth += 1
                self._statements(w, depth + 1)
                w.depth -= 1
                for _ in range(self.rng.randint(1, 2)):
                    w.line(f"}} catch (Err{self._fresh()} e) {{")
                    w.depth += 1
                    self._statements(w, depth + 1)
                    w.depth -= 1
                if self.rng.random() < 0.4:
                    w.line("} finally {")
                    w.depth += 1
                    self._statements(w, depth + 1)
                    w.depth -= 1
                w.line("}")
        elif roll < 0.75:
            w.line(f"new {self._target()}();")
        elif roll < 0.92:
            word = self.rng.choice(_ACTION_WORDS)
            w.line(f'send("{word}{self._fresh()}");')
        else:
            w.line('log("dbg");')

    def _statements(self, w: _Writer, depth: int) -> None:
        low = 1 if depth == 0 else 0
        for _ in range(self.rng.randint(low, 3)):
            self._statement(w, depth)

    def _method(self, w: _Writer, index: int) -> None:
        name = f"{self.rng.choice(_VERBS)}{index}"
        w.line(f"void {name}() {{")
        w.depth += 1
        self._statements(w, 0)
        w.depth -= 1
        w.line("}")

    def generate(self) -> list[SourceFile]:
        files = [SourceFile("State.java", "abstract class State {\n}\n")]
        parents_pool = ["State"] + self.abstract
        for idx, name in enumerate(self.abstract):
            parent = self.rng.choice(["State", "State"] + self.abstract[:idx])
            w = _Writer()
            w.line(f"abstract class {name} extends {parent} {{")
            if self.rng.random() < 0.3:
                w.depth += 1
                self._method(w, 0)
                w.depth -= 1
            w.line("}")
            files.append(SourceFile(f"{name}.java", w.text()))
        for i, name in enumerate(self.concrete):
            parent = self.rng.choice(parents_pool + self.concrete[:i])
            w = _Writer()
            w.line(f"class {name} extends {parent} {{")
            w.depth += 1
            for j in range(self.methods_per_state):
                self._method(w, j)
            w.depth -= 1
            w.line("}")
            files.append(SourceFile(f"{name}.java", w.text()))
        return files


def generate_model(n_states: int, methods_per_state: int, max_nesting: int,
                   seed: int) -> list[SourceFile]:
    """Generate a parseable corpus; deterministic per seed."""
    return _Generator(n_states, methods_per_state, max_nesting, seed).generate()
