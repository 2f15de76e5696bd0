"""
A small closed DSL for grid transformations.

Grammar (EBNF)::

    program   = step { ";" step } ;
    step      = call ;
    call      = NAME "(" [ kwarg { "," kwarg } ] ")" ;
    kwarg     = NAME "=" value ;
    value     = INT | NAME | call ;
    NAME      = letter { letter | digit | "_" } ;
    INT       = [ "-" ] digit { digit } ;

Transforms (the only valid ``call`` names at step level)::

    translate(dx=INT, dy=INT)
    duplicate_offset(dx=INT, dy=INT)
    replicate_vertical(direction=up|down|both, until=edge|blocked)
    move_to_center()
    rotate(quarter_turns=INT)
    reflect(axis=h|v)
    recolor(from=COLOR, to=COLOR)
    per_column(parity=even|odd, inner=TRANSFORM)
    per_object(inner=TRANSFORM [, color=COLOR|any] [, min_size=INT] [, max_size=INT])
    fill_column()

Coordinates: ``dx`` moves right, ``dy`` moves down. Offsets lie in [-30, 30].
Columns are 0-indexed, so ``parity=even`` selects columns 0, 2, 4, ...
``reflect(axis=h)`` mirrors across the horizontal axis (rows reversed) and
``axis=v`` across the vertical axis. ``rotate`` turns counter-clockwise; on a
non-square grid an odd number of turns rotates the content and re-centres it
in the original frame. Cells pushed off the grid are dropped, and when two
cells land on the same position the one written later wins.
``until=blocked`` stops a replication just before a nonzero cell of a
different colour in the step's input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np

from .grid import BACKGROUND, NUM_COLORS, Connectivity, Grid, extract_objects

MAX_OFFSET = 30
MAX_NESTING = 2


class ProgramError(ValueError):
    """Base class for DSL parse and validation failures."""


class ProgramSyntaxError(ProgramError):
    def __init__(self, position: int, expected: str, text: str = ""):
        self.position = position
        self.expected = expected
        got = repr(text[position:position + 10]) if position < len(text) else "end of input"
        super().__init__(f"at position {position}: expected {expected}, got {got}")


class UnknownTransform(ProgramError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown transform {name!r}")


class ParamOutOfRange(ProgramError):
    pass


class BadParameter(ProgramError):
    """Missing, unexpected, or wrongly typed parameter."""


class NestingTooDeep(ProgramError):
    pass


# ---------------------------------------------------------------------------
# lexer and generic call parser

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),=;]))")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ProgramSyntaxError(start, "a name, integer, or one of ( ) , = ;", text)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


@dataclass(frozen=True)
class _Call:
    name: str
    kwargs: tuple[tuple[str, object], ...]
    pos: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise ProgramSyntaxError(tok.pos, what or repr(text) if text else what or kind, self.text)
        self.i += 1
        return tok

    def program(self) -> list[_Call]:
        calls = [self.call()]
        while self.peek().kind == "punct" and self.peek().text == ";":
            self.i += 1
            calls.append(self.call())
        if self.peek().kind != "eof":
            raise ProgramSyntaxError(self.peek().pos, "';' or end of program", self.text)
        return calls

    def call(self) -> _Call:
        name = self.expect("name", what="transform name")
        self.expect("punct", "(")
        kwargs = []
        if not (self.peek().kind == "punct" and self.peek().text == ")"):
            kwargs.append(self.kwarg())
            while self.peek().kind == "punct" and self.peek().text == ",":
                self.i += 1
                kwargs.append(self.kwarg())
        self.expect("punct", ")", what="',' or ')'")
        return _Call(name.text, tuple(kwargs), name.pos)

    def kwarg(self) -> tuple[str, object]:
        key = self.expect("name", what="parameter name")
        self.expect("punct", "=")
        tok = self.peek()
        if tok.kind == "int":
            self.i += 1
            return key.text, int(tok.text)
        if tok.kind == "name":
            nxt = self.toks[self.i + 1]
            if nxt.kind == "punct" and nxt.text == "(":
                return key.text, self.call()
            self.i += 1
            return key.text, tok.text
        raise ProgramSyntaxError(tok.pos, "integer, name, or transform", self.text)


# ---------------------------------------------------------------------------
# parameter kinds


@dataclass(frozen=True)
class _Param:
    name: str           # name in program text
    attr: str           # dataclass field
    kind: str           # "int", "color", "color_or_any", "choice", "transform"
    lo: int = 0
    hi: int = 0
    choices: tuple[str, ...] = ()
    required: bool = True
    default: object = None


def _offset(name: str) -> _Param:
    return _Param(name, name, "int", -MAX_OFFSET, MAX_OFFSET)


def _check_value(transform: str, p: _Param, value: object, depth: int) -> object:
    where = f"{transform}.{p.name}"
    if p.kind == "transform":
        if not isinstance(value, _Call):
            raise BadParameter(f"{where} must be a transform call")
        return _build(value, depth + 1)
    if p.kind == "choice":
        if not isinstance(value, str):
            raise BadParameter(f"{where} must be one of {'|'.join(p.choices)}")
        if value not in p.choices:
            raise ParamOutOfRange(f"{where}={value} not in {'|'.join(p.choices)}")
        return value
    if p.kind == "color_or_any" and value == "any":
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise BadParameter(f"{where} must be an integer")
    if p.kind in ("color", "color_or_any"):
        lo, hi = 0, NUM_COLORS - 1
    else:
        lo, hi = p.lo, p.hi
    if not lo <= value <= hi:
        raise ParamOutOfRange(f"{where}={value} outside [{lo}, {hi}]")
    return value


def _format_value(value: object) -> str:
    if isinstance(value, Transform):
        return value.unparse()
    if value is None:
        return "any"
    return str(value)


# ---------------------------------------------------------------------------
# AST


class Transform:
    """Base class for AST nodes. Subclasses are frozen dataclasses."""

    NAME: ClassVar[str]
    PARAMS: ClassVar[tuple[_Param, ...]] = ()

    def unparse(self) -> str:
        parts = []
        for p in self.PARAMS:
            v = getattr(self, p.attr)
            if not p.required and v == p.default:
                continue
            parts.append(f"{p.name}={_format_value(v)}")
        return f"{self.NAME}({', '.join(parts)})"

    def depth(self) -> int:
        return 0

    def apply(self, a: np.ndarray, connectivity: Connectivity) -> np.ndarray:
        raise NotImplementedError


def _shift(a: np.ndarray, dx: int, dy: int) -> np.ndarray:
    R, C = a.shape
    out = np.zeros_like(a)
    if abs(dy) >= R or abs(dx) >= C:
        return out
    src_r = slice(max(0, -dy), R - max(0, dy))
    dst_r = slice(max(0, dy), R - max(0, -dy))
    src_c = slice(max(0, -dx), C - max(0, dx))
    dst_c = slice(max(0, dx), C - max(0, -dx))
    out[dst_r, dst_c] = a[src_r, src_c]
    return out


def _overlay(base: np.ndarray, top: np.ndarray) -> np.ndarray:
    out = base.copy()
    mask = top != BACKGROUND
    out[mask] = top[mask]
    return out


def _embed_center(src: np.ndarray, R: int, C: int) -> np.ndarray:
    out = np.zeros((R, C), dtype=src.dtype)
    sr, sc = src.shape
    r_off = (R - sr) // 2
    c_off = (C - sc) // 2
    # intersect source rows/cols with the destination frame
    r0, r1 = max(0, -r_off), min(sr, R - r_off)
    c0, c1 = max(0, -c_off), min(sc, C - c_off)
    if r0 < r1 and c0 < c1:
        out[r0 + r_off:r1 + r_off, c0 + c_off:c1 + c_off] = src[r0:r1, c0:c1]
    return out


@dataclass(frozen=True)
class Translate(Transform):
    dx: int
    dy: int
    NAME: ClassVar[str] = "translate"
    PARAMS: ClassVar = (_offset("dx"), _offset("dy"))

    def apply(self, a, connectivity):
        return _shift(a, self.dx, self.dy)


@dataclass(frozen=True)
class DuplicateOffset(Transform):
    dx: int
    dy: int
    NAME: ClassVar[str] = "duplicate_offset"
    PARAMS: ClassVar = (_offset("dx"), _offset("dy"))

    def apply(self, a, connectivity):
        return _overlay(a, _shift(a, self.dx, self.dy))


@dataclass(frozen=True)
class ReplicateVertical(Transform):
    direction: str
    until: str
    NAME: ClassVar[str] = "replicate_vertical"
    PARAMS: ClassVar = (
        _Param("direction", "direction", "choice", choices=("up", "down", "both")),
        _Param("until", "until", "choice", choices=("edge", "blocked")),
    )

    def apply(self, a, connectivity):
        R, _ = a.shape
        out = a.copy()
        blocked = self.until == "blocked"
        steps = {"up": (-1,), "down": (1,), "both": (-1, 1)}[self.direction]
        for r, c in zip(*np.nonzero(a)):
            color = a[r, c]
            for step in steps:
                rr = r + step
                while 0 <= rr < R:
                    if blocked and a[rr, c] != BACKGROUND and a[rr, c] != color:
                        break
                    out[rr, c] = color
                    rr += step
        return out


@dataclass(frozen=True)
class MoveToCenter(Transform):
    NAME: ClassVar[str] = "move_to_center"

    def apply(self, a, connectivity):
        rows, cols = np.nonzero(a)
        if rows.size == 0:
            return a.copy()
        R, C = a.shape
        h = rows.max() - rows.min() + 1
        w = cols.max() - cols.min() + 1
        dy = (R - h) // 2 - rows.min()
        dx = (C - w) // 2 - cols.min()
        return _shift(a, int(dx), int(dy))


@dataclass(frozen=True)
class Rotate(Transform):
    quarter_turns: int
    NAME: ClassVar[str] = "rotate"
    PARAMS: ClassVar = (_Param("quarter_turns", "quarter_turns", "int", -MAX_OFFSET, MAX_OFFSET),)

    def apply(self, a, connectivity):
        k = self.quarter_turns % 4
        rotated = np.rot90(a, k)
        if rotated.shape == a.shape:
            return rotated.copy()
        return _embed_center(rotated, *a.shape)


@dataclass(frozen=True)
class Reflect(Transform):
    axis: str
    NAME: ClassVar[str] = "reflect"
    PARAMS: ClassVar = (_Param("axis", "axis", "choice", choices=("h", "v")),)

    def apply(self, a, connectivity):
        return (np.flipud(a) if self.axis == "h" else np.fliplr(a)).copy()


@dataclass(frozen=True)
class Recolor(Transform):
    src: int
    dst: int
    NAME: ClassVar[str] = "recolor"
    PARAMS: ClassVar = (_Param("from", "src", "color"), _Param("to", "dst", "color"))

    def apply(self, a, connectivity):
        out = a.copy()
        out[a == self.src] = self.dst
        return out


@dataclass(frozen=True)
class FillColumn(Transform):
    """Paint every occupied column with the colour of its topmost cell."""

    NAME: ClassVar[str] = "fill_column"

    def apply(self, a, connectivity):
        out = a.copy()
        for c in range(a.shape[1]):
            nz = np.flatnonzero(a[:, c])
            if nz.size:
                out[:, c] = a[nz[0], c]
        return out


@dataclass(frozen=True)
class PerColumn(Transform):
    parity: str
    inner: Transform
    NAME: ClassVar[str] = "per_column"
    PARAMS: ClassVar = (
        _Param("parity", "parity", "choice", choices=("even", "odd")),
        _Param("inner", "inner", "transform"),
    )

    def depth(self) -> int:
        return 1 + self.inner.depth()

    def apply(self, a, connectivity):
        cols = slice(0 if self.parity == "even" else 1, None, 2)
        sub = np.zeros_like(a)
        sub[:, cols] = a[:, cols]
        rest = a.copy()
        rest[:, cols] = BACKGROUND
        return _overlay(rest, self.inner.apply(sub, connectivity))


@dataclass(frozen=True)
class PerObject(Transform):
    """Apply ``inner`` to each matching object in isolation.

    Unmatched objects stay where they are; transformed objects are painted on
    top in object order.
    """

    inner: Transform
    color: int | None = None
    min_size: int = 1
    max_size: int = MAX_OFFSET * MAX_OFFSET
    NAME: ClassVar[str] = "per_object"
    PARAMS: ClassVar = (
        _Param("inner", "inner", "transform"),
        _Param("color", "color", "color_or_any", required=False, default=None),
        _Param("min_size", "min_size", "int", 1, MAX_OFFSET * MAX_OFFSET, required=False, default=1),
        _Param("max_size", "max_size", "int", 1, MAX_OFFSET * MAX_OFFSET, required=False,
               default=MAX_OFFSET * MAX_OFFSET),
    )

    def depth(self) -> int:
        return 1 + self.inner.depth()

    def matches(self, color: int, size: int) -> bool:
        if self.color is not None and color != self.color:
            return False
        return self.min_size <= size <= self.max_size

    def apply(self, a, connectivity):
        objs = [o for o in extract_objects(Grid(a), connectivity) if self.matches(o.color, o.size)]
        out = a.copy()
        for o in objs:
            for rc in o.cells:
                out[rc] = BACKGROUND
        for o in objs:
            sub = np.zeros_like(a)
            for rc in o.cells:
                sub[rc] = o.color
            out = _overlay(out, self.inner.apply(sub, connectivity))
        return out


TRANSFORMS: dict[str, type[Transform]] = {
    cls.NAME: cls
    for cls in (Translate, DuplicateOffset, ReplicateVertical, MoveToCenter, Rotate,
                Reflect, Recolor, PerColumn, PerObject, FillColumn)
}

Step = Union[Translate, DuplicateOffset, ReplicateVertical, MoveToCenter, Rotate,
             Reflect, Recolor, PerColumn, PerObject, FillColumn]


def _build(call: _Call, depth: int = 0) -> Transform:
    cls = TRANSFORMS.get(call.name)
    if cls is None:
        raise UnknownTransform(call.name)
    if depth > MAX_NESTING:
        raise NestingTooDeep(f"per_column/per_object nested deeper than {MAX_NESTING}")
    by_name = {p.name: p for p in cls.PARAMS}
    given: dict[str, object] = {}
    for key, value in call.kwargs:
        if key not in by_name:
            raise BadParameter(f"{call.name} has no parameter {key!r}")
        if key in given:
            raise BadParameter(f"{call.name}.{key} given twice")
        given[key] = value
    values = {}
    for p in cls.PARAMS:
        if p.name in given:
            values[p.attr] = _check_value(call.name, p, given[p.name], depth)
        elif p.required:
            raise BadParameter(f"{call.name} is missing parameter {p.name!r}")
    node = cls(**values)
    if isinstance(node, PerObject) and node.min_size > node.max_size:
        raise ParamOutOfRange("per_object.min_size exceeds max_size")
    return node


@dataclass(frozen=True)
class Program:
    steps: tuple[Transform, ...]

    def __post_init__(self):
        if not self.steps:
            raise ProgramError("a program needs at least one step")

    def unparse(self) -> str:
        return "; ".join(s.unparse() for s in self.steps)

    def __str__(self) -> str:
        return self.unparse()


def parse_program(text: str) -> Program:
    """Parse program text into a validated :class:`Program`."""
    if not isinstance(text, str):
        raise ProgramSyntaxError(0, "program text", "")
    calls = _Parser(text).program()
    return Program(tuple(_build(c) for c in calls))


def unparse_program(program: Program) -> str:
    return program.unparse()


def apply_program(program: Program, grid: Grid,
                  connectivity: Connectivity = Connectivity.FOUR) -> Grid:
    """Run each step in order on ``grid`` and return the result.

    Output always has the input's dimensions.
    """
    a = np.array(grid.array, dtype=np.int8)
    for step in program.steps:
        a = step.apply(a, connectivity)
    return Grid(a)


def program_length(program: Program) -> int:
    """Number of DSL tokens in the canonical program text."""
    return len(_lex(program.unparse())) - 1


# ---------------------------------------------------------------------------
# hypotheses

_WORD_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercased word and punctuation tokens."""
    return _WORD_RE.findall(text.lower())


class HypothesisSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Hypothesis:
    id: str
    description: str
    program: Program
    sub_hypotheses: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise HypothesisSchemaError("hypothesis id must be a nonempty string")
        if not isinstance(self.description, str) or not self.description.strip():
            raise HypothesisSchemaError(f"hypothesis {self.id!r} has an empty description")

    @property
    def text(self) -> str:
        return " ".join([self.description, *self.sub_hypotheses])

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "sub_hypotheses": list(self.sub_hypotheses),
            "program": self.program.unparse(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Hypothesis":
        """Build from ``{"id", "description", "sub_hypotheses", "program"}``.

        Raises HypothesisSchemaError for shape problems and ProgramError
        (with ``hypothesis_id`` set) when the program is invalid.
        """
        if not isinstance(record, dict):
            raise HypothesisSchemaError("hypothesis record must be a JSON object")
        for key in ("id", "description", "program"):
            if not isinstance(record.get(key), str):
                raise HypothesisSchemaError(f"hypothesis field {key!r} must be a string")
        subs = record.get("sub_hypotheses", [])
        if not isinstance(subs, list) or not all(isinstance(s, str) for s in subs):
            raise HypothesisSchemaError("sub_hypotheses must be a list of strings")
        try:
            program = parse_program(record["program"])
        except ProgramError as exc:
            exc.hypothesis_id = record["id"]
            raise
        return cls(record["id"], record["description"], program, tuple(subs))


def token_length(h: Hypothesis) -> int:
    """Token count of the description followed by each sub-hypothesis."""
    return len(tokenize(h.text))
