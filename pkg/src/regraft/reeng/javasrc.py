"""Frontend for the restricted Java subset.

Each source file holds one class declaration::

    [abstract] class Name [extends Name] {
        void method() {
            new Target();
            send("message");
            if (cond) { ... } else { ... }
            switch (expr) { case LABEL: ... }
            try { ... } catch (ErrType e) { ... } finally { ... }
        }
    }

Parsing builds an instance graph in source order (one node per construct,
statements in textual order) and resolves ``extends``/constructor targets by
name in a second linking pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from ..errors import JavaParseError
from ..expr import unescape_string
from ..graph import InstanceGraph
from ..metamodel import Metamodel

_TOKEN_RE = re.compile(
    r'(?:(?P<comment>//[^\n]*)'
    r'|(?P<str>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[{}();:,.=<>!&|+\-*/\[\]]))")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int


def _tokenize(text: str, filename: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    while pos < len(text):
        c = text[pos]
        if c.isspace():
            if c == "\n":
                line += 1
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise JavaParseError(f"unexpected character {c!r}",
                                 file=filename, line=line)
        if m.lastgroup != "comment":
            tokens.append(_Token(m.lastgroup, m.group(m.lastgroup), line))
        pos = m.end()
    tokens.append(_Token("eof", "", line))
    return tokens


class _Parser:
    """One class declaration per file; emits graph nodes as it goes."""

    def __init__(self, graph: InstanceGraph, tokens: list[_Token],
                 filename: str):
        self.g = graph
        self.tokens = tokens
        self.i = 0
        self.filename = filename
        # (node id, target class name, lineno) fixed up in the link pass
        self.new_links: list[tuple[int, str, int]] = []

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, message: str, line: int | None = None) -> JavaParseError:
        return JavaParseError(message, file=self.filename,
                              line=line if line is not None else self.peek().line)

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise self.fail(f"expected {text!r}, got {t.text or 'end of file'!r}",
                            t.line)
        return t

    def expect_ident(self, what: str) -> _Token:
        t = self.next()
        if t.kind != "ident":
            raise self.fail(f"expected {what}, got {t.text!r}", t.line)
        return t

    def parse_class(self) -> tuple[int, str, str | None]:
        abstract = False
        if self.peek().text == "abstract":
            self.next()
            abstract = True
        self.expect("class")
        name = self.expect_ident("class name").text
        extends = None
        if self.peek().text == "extends":
            self.next()
            extends = self.expect_ident("superclass name").text
        cls = self.g.create_node("Class")
        self.g.set_attribute(cls, "name", name)
        if abstract:
            self.g.set_attribute(cls, "abstract", True)
        self.expect("{")
        while self.peek().text != "}":
            self.parse_method(cls)
        self.expect("}")
        t = self.next()
        if t.kind != "eof":
            raise self.fail(f"unexpected {t.text!r} after class body", t.line)
        return cls, name, extends

    def parse_method(self, cls: int) -> None:
        self.expect("void")
        name = self.expect_ident("method name").text
        self.expect("(")
        self.expect(")")
        method = self.g.create_node("ClassMethod")
        self.g.set_attribute(method, "name", name)
        self.g.add_edge(cls, "methods", method)
        self.expect("{")
        self.parse_statements(method)
        self.expect("}")

    def parse_statements(self, container: int) -> None:
        """Statements up to the closing brace of ``container``."""
        while self.peek().text not in ("}", "case") and self.peek().kind != "eof":
            self.parse_statement(container)

    def parse_statement(self, container: int) -> None:
        t = self.peek()
        if t.text == "new":
            self.next()
            target = self.expect_ident("class name").text
            self.expect("(")
            self.expect(")")
            self.expect(";")
            stmt = self.g.create_node("ExpressionStatement")
            self.g.add_edge(container, "statements", stmt)
            call = self.g.create_node("NewConstructorCall")
            self.g.add_edge(stmt, "expression", call)
            self.new_links.append((call, target, t.line))
            return
        if t.text == "if":
            self.next()
            self._skip_parens()
            cond = self.g.create_node("Condition")
            self.g.add_edge(container, "statements", cond)
            then_block = self._parse_block()
            self.g.add_edge(cond, "statements", then_block)
            self.g.add_edge(cond, "then", then_block)
            if self.peek().text == "else":
                self.next()
                else_block = self._parse_block()
                self.g.add_edge(cond, "statements", else_block)
                self.g.add_edge(cond, "else", else_block)
            return
        if t.text == "switch":
            self.next()
            self._skip_parens()
            switch = self.g.create_node("Switch")
            self.g.add_edge(container, "statements", switch)
            self.expect("{")
            while self.peek().text == "case":
                self.next()
                label = self._parse_label()
                self.expect(":")
                case = self.g.create_node("SwitchCase")
                self.g.set_attribute(case, "label", label)
                self.g.add_edge(switch, "cases", case)
                self.parse_statements(case)
            self.expect("}")
            return
        if t.text == "try":
            self.next()
            tb = self.g.create_node("TryBlock")
            self.g.add_edge(container, "statements", tb)
            self.expect("{")
            self.parse_statements(tb)
            self.expect("}")
            seen_handler = False
            while self.peek().text == "catch":
                seen_handler = True
                self.next()
                self.expect("(")
                exc_type = self.expect_ident("exception type").text
                self.expect_ident("exception variable")
                self.expect(")")
                catch = self.g.create_node("CatchBlock")
                self.g.set_attribute(catch, "exceptionType", exc_type)
                self.g.add_edge(tb, "catches", catch)
                self.expect("{")
                self.parse_statements(catch)
                self.expect("}")
            if self.peek().text == "finally":
                seen_handler = True
                self.next()
                fin = self._parse_block()
                self.g.add_edge(tb, "finallyBlock", fin)
            if not seen_handler:
                raise self.fail("try needs at least one catch or a finally",
                                t.line)
            return
        if t.kind == "ident":
            self.next()
            self.expect("(")
            stmt = self.g.create_node("ExpressionStatement")
            self.g.add_edge(container, "statements", stmt)
            call = self.g.create_node("MethodCall")
            self.g.set_attribute(call, "methodName", t.text)
            self.g.add_edge(stmt, "expression", call)
            if self.peek().kind == "str":
                lit = self.g.create_node("StringLiteral")
                self.g.set_attribute(lit, "value",
                                     unescape_string(self.next().text))
                self.g.add_edge(call, "argument", lit)
            self.expect(")")
            self.expect(";")
            return
        raise self.fail(f"unexpected token {t.text or 'end of file'!r}", t.line)

    def _parse_block(self) -> int:
        block = self.g.create_node("Block")
        self.expect("{")
        self.parse_statements(block)
        self.expect("}")
        return block

    def _parse_label(self) -> str:
        t = self.next()
        if t.kind == "ident" or t.kind == "int":
            return t.text
        if t.kind == "str":
            return unescape_string(t.text)
        raise self.fail(f"expected a case label, got {t.text!r}", t.line)

    def _skip_parens(self) -> None:
        """Skip a balanced parenthesized condition; its content is not
        represented in the model."""
        self.expect("(")
        depth = 1
        while depth:
            t = self.next()
            if t.kind == "eof":
                raise self.fail("unterminated parenthesis", t.line)
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1


Source = Union[str, tuple[str, str]]  # also anything with .name/.text


def _normalize(sources: Iterable[Source]) -> list[tuple[str, str]]:
    out = []
    for i, s in enumerate(sources):
        if isinstance(s, str):
            out.append((f"<source {i}>", s))
        elif isinstance(s, tuple):
            out.append(s)
        else:
            out.append((s.name, s.text))
    return out


def parse_java(sources: Sequence[Source], metamodel: Metamodel) -> InstanceGraph:
    """Parse class sources into one instance graph.

    ``metamodel`` must declare the restricted-Java types (the bundled merged
    case metamodel does).  Class references are linked by name after all
    files have been read; unresolved names are reported per use site.
    """
    graph = InstanceGraph(metamodel)
    classes: dict[str, int] = {}
    all_links: list[tuple[str, int, str, int]] = []
    extends: list[tuple[str, int, str, int]] = []
    for name, text in _normalize(sources):
        parser = _Parser(graph, _tokenize(text, name), name)
        cls, cls_name, extends_name = parser.parse_class()
        if cls_name in classes:
            raise JavaParseError(f"duplicate class {cls_name!r}", file=name)
        classes[cls_name] = cls
        if extends_name is not None:
            extends.append((name, cls, extends_name, 1))
        all_links.extend((name, nid, target, line)
                         for nid, target, line in parser.new_links)
    errors = []
    for filename, cls, target, line in extends:
        if target not in classes:
            errors.append(f"{filename}: unresolved superclass {target!r}")
        else:
            graph.add_edge(cls, "extends", classes[target])
    for filename, call, target, line in all_links:
        if target not in classes:
            errors.append(f"{filename}: line {line}: unresolved constructor "
                          f"target {target!r}")
        else:
            graph.add_edge(call, "instantiates", classes[target])
    if errors:
        raise JavaParseError(f"{len(errors)} unresolved reference(s): "
                             f"{errors[0]}", errors=errors)
    return graph
