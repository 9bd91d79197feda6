"""Line-oriented reader shared by the text format parsers.

All three formats are line based: ``#`` starts a comment, blank lines are
ignored, and nesting is expressed with ``{`` at the end of a line and ``}``
on a line of its own.
"""

from __future__ import annotations

from ..errors import FormatError


def strip_comment(raw: str) -> str:
    """Remove a trailing ``#`` comment, respecting string literals."""
    if "#" not in raw:
        return raw.strip()
    out: list[str] = []
    in_str = False
    escaped = False
    for c in raw:
        if in_str:
            out.append(c)
            if escaped:
                escaped = False
            elif c == "\\":
                escaped = True
            elif c == '"':
                in_str = False
        elif c == '"':
            in_str = True
            out.append(c)
        elif c == "#":
            break
        else:
            out.append(c)
    return "".join(out).strip()


class LineReader:
    def __init__(self, text: str):
        self.lines: list[tuple[int, str]] = []
        for i, raw in enumerate(text.splitlines(), start=1):
            stripped = strip_comment(raw)
            if stripped:
                self.lines.append((i, stripped))
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.lines)

    def peek(self) -> tuple[int, str]:
        if self.eof():
            return (self.lines[-1][0] + 1 if self.lines else 1, "")
        return self.lines[self.pos]

    def next(self) -> tuple[int, str]:
        line = self.peek()
        self.pos += 1
        return line

    def error(self, message: str, lineno: int | None = None) -> FormatError:
        if lineno is None:
            lineno = self.peek()[0]
        return FormatError(message, line=lineno)
