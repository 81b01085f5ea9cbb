"""Parser and renderer for the step-plan language.

A plan is a sequence of lines of the form::

    Step 1:obj1 = filter_object("table",all_obj)
    Step 2:obj2 = filter_part(["six","red","drawer"],obj1)

Arguments are double-quoted strings, variable names, or flat list literals whose
elements are strings, integers, or variable names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import ParseError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_STEP_START = re.compile(r"step\s*\d+\s*:", re.IGNORECASE)


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class ListLit:
    items: tuple[Union[StringLit, IntLit, VarRef], ...]


Arg = Union[StringLit, VarRef, ListLit]


@dataclass(frozen=True)
class Call:
    function: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class PlanStep:
    index: int
    target: str
    call: Call

    def render(self) -> str:
        args = ",".join(_render_arg(a) for a in self.call.args)
        return f"Step {self.index}:{self.target} = {self.call.function}({args})"


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Plan(self.steps[item])
        return self.steps[item]

    def __add__(self, other: Plan) -> Plan:
        return Plan(self.steps + other.steps)

    def render(self) -> str:
        return render_plan(self)


def _render_arg(arg: Union[Arg, IntLit]) -> str:
    if isinstance(arg, StringLit):
        return f'"{arg.value}"'
    if isinstance(arg, IntLit):
        return str(arg.value)
    if isinstance(arg, VarRef):
        return arg.name
    return "[" + ",".join(_render_arg(item) for item in arg.items) + "]"


def render_plan(plan: Plan) -> str:
    return "\n".join(step.render() for step in plan.steps)


class _Cursor:
    """Character scanner over a single step line."""

    def __init__(self, text: str, line: int) -> None:
        self.text = text
        self.pos = 0
        self.line = line

    def error(self, expected: str) -> ParseError:
        return ParseError(self.line, expected, self.text)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str) -> None:
        self.skip_ws()
        if self.peek() != char:
            raise self.error(repr(char))
        self.pos += 1

    def word(self, pattern: re.Pattern[str], expected: str) -> str:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(expected)
        self.pos = m.end()
        return m.group(0)

    def string(self) -> StringLit:
        # opening quote already peeked
        end = self.text.find('"', self.pos + 1)
        if end < 0:
            raise self.error("closing '\"'")
        value = self.text[self.pos + 1 : end]
        self.pos = end + 1
        return StringLit(value)


_INT_RE = re.compile(r"-?\d+")
_KEYWORD_RE = re.compile(r"step", re.IGNORECASE)


def _parse_list(cur: _Cursor) -> ListLit:
    cur.expect("[")
    items: list[Union[StringLit, IntLit, VarRef]] = []
    cur.skip_ws()
    if cur.peek() == "]":
        cur.pos += 1
        return ListLit(())
    while True:
        cur.skip_ws()
        c = cur.peek()
        if c == '"':
            items.append(cur.string())
        elif c.isdigit() or c == "-":
            items.append(IntLit(int(cur.word(_INT_RE, "integer"))))
        elif c and (c.isalpha() or c == "_") and c.isascii():
            items.append(VarRef(cur.word(IDENT_RE, "variable name")))
        else:
            raise cur.error("string, integer or variable in list")
        cur.skip_ws()
        if cur.peek() == ",":
            cur.pos += 1
            continue
        cur.expect("]")
        return ListLit(tuple(items))


def _parse_arg(cur: _Cursor) -> Arg:
    cur.skip_ws()
    c = cur.peek()
    if c == '"':
        return cur.string()
    if c == "[":
        return _parse_list(cur)
    if c and (c.isalpha() or c == "_") and c.isascii():
        return VarRef(cur.word(IDENT_RE, "variable name"))
    raise cur.error("string literal, list literal or variable")


def parse_step_line(text: str, line: int = 1) -> PlanStep:
    cur = _Cursor(text, line)
    cur.word(_KEYWORD_RE, "'Step'")
    index = int(cur.word(re.compile(r"\d+"), "step number"))
    cur.expect(":")
    target = cur.word(IDENT_RE, "target variable")
    cur.expect("=")
    function = cur.word(IDENT_RE, "function name")
    cur.expect("(")
    args: list[Arg] = []
    cur.skip_ws()
    if cur.peek() == ")":
        cur.pos += 1
    else:
        while True:
            args.append(_parse_arg(cur))
            cur.skip_ws()
            if cur.peek() == ",":
                cur.pos += 1
                continue
            cur.expect(")")
            break
    cur.skip_ws()
    if cur.pos != len(cur.text):
        raise cur.error("end of line")
    return PlanStep(index, target, Call(function, tuple(args)))


def _strip_answer_header(line: str) -> str:
    if line.lower().startswith("answer:"):
        return line[len("answer:"):].strip()
    return line


def parse_plan(text: str) -> Plan:
    """Parse plan text strictly; the first malformed line raises :class:`ParseError`."""
    steps: list[PlanStep] = []
    seen_content = False
    for lineno, raw in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_content:
            line = _strip_answer_header(line)
            seen_content = True
            if not line:
                continue
        steps.append(parse_step_line(line, lineno))
    return Plan(tuple(steps))


def extract_steps_from_response(text: str) -> Plan:
    """Keep every line of free-form model output that is a well-formed step."""
    steps: list[PlanStep] = []
    for lineno, raw in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        m = _STEP_START.search(raw)
        if not m:
            continue
        try:
            steps.append(parse_step_line(raw[m.start():].strip(), lineno))
        except ParseError:
            continue
    return Plan(tuple(steps))


def plan_from_lines(lines: Iterable[str]) -> Plan:
    return parse_plan("\n".join(lines))
