"""Instance files and the polynomial expression grammar.

An instance is a JSON document

    {
      "n": 2, "d": 6,
      "moments": [ ... C(n+d, d) reals, graded lex order ... ],
      "set": {
        "inequalities": ["625 - x1^2 - x2^2", ...],
        "radius": 25.0,                              # optional
        "interior_witness": {"center": [0, 0], "radius": 1.0}   # optional
      },
      "reference": {"kind": "ball", "center": [0, 0], "radius": 1.0},  # optional
      "description": "..."                            # optional, free text
    }

Inequality strings follow the grammar

    expr   := ('-')? term (('+' | '-') term)*
    term   := coef? factor ('*' factor)*
    factor := var ('^' int) | var | '(' expr ')' | number
    number := int | decimal | int '/' int            (rational literal)

with variables x1 .. xn.  Parsing is whitespace-insensitive and reports
line/column on errors; printing a parsed polynomial and reparsing it returns
the identical sparse coefficient map.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .moments import Polynomial, Tms
from .monomials import monomial_count
from .refmeasures import ReferenceSpec
from .semialg import SemialgebraicSet

#: exponents above this are rejected as typos rather than silently accepted
MAX_EXPONENT = 4096


class ParseError(ValueError):
    """Syntax or validation error, carrying the source position."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.col = col


# -- tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(r"""
      (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<var>x\d+)
    | (?P<op>[+\-*/^()])
    | (?P<ws>\s+)
    | (?P<bad>.)
""", re.VERBOSE)


def _tokenize(src: str):
    tokens = []
    line, col = 1, 1
    for m in _TOKEN.finditer(src):
        text = m.group(0)
        kind = m.lastgroup
        if kind == "bad":
            raise ParseError(f"unexpected character {text!r}", line, col)
        if kind != "ws":
            tokens.append((kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
    tokens.append(("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, src: str, n: int):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.n = n

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, text, line, col = self.peek()
        raise ParseError(message + (f" near {text!r}" if text else " at end of input"),
                         line, col)

    # number := int | decimal | int '/' int
    def number(self) -> float:
        kind, text, line, col = self.take()
        if kind != "num":
            raise ParseError("expected a number", line, col)
        if self.peek()[:2] == ("op", "/"):
            if not text.isdigit():
                self.error("rational literals need integer numerator and denominator")
            self.take()
            dkind, dtext, dline, dcol = self.take()
            if dkind != "num" or not dtext.isdigit():
                raise ParseError("expected an integer denominator", dline, dcol)
            den = int(dtext)
            if den == 0:
                raise ParseError("zero denominator", dline, dcol)
            return int(text) / den
        return float(text)

    def factor(self) -> Polynomial:
        kind, text, line, col = self.peek()
        if kind == "var":
            self.take()
            idx = int(text[1:])
            if not 1 <= idx <= self.n:
                raise ParseError(f"unknown variable {text} (instance has x1..x{self.n})",
                                 line, col)
            exp = 1
            if self.peek()[:2] == ("op", "^"):
                self.take()
                ekind, etext, eline, ecol = self.take()
                if ekind != "num" or not etext.isdigit():
                    raise ParseError("expected an integer exponent", eline, ecol)
                exp = int(etext)
                if exp > MAX_EXPONENT:
                    raise ParseError(f"exponent {exp} exceeds the cap {MAX_EXPONENT}",
                                     eline, ecol)
            mono = tuple(exp if i == idx - 1 else 0 for i in range(self.n))
            return Polynomial(self.n, {mono: 1.0})
        if kind == "op" and text == "(":
            self.take()
            inner = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.error("expected ')'")
            self.take()
            return inner
        if kind == "num":
            return Polynomial.constant(self.n, self.number())
        self.error("expected a variable, number, or '('")

    def term(self) -> Polynomial:
        # optional leading coefficient glued to the first factor: "2x1^2"
        if self.peek()[0] == "num":
            coef = self.number()
            nxt = self.peek()
            if nxt[0] == "var" or nxt[:2] == ("op", "("):
                out = Polynomial.constant(self.n, coef) * self.factor()
            elif nxt[:2] == ("op", "*"):
                out = Polynomial.constant(self.n, coef)
            else:
                return Polynomial.constant(self.n, coef)
        else:
            out = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            out = out * self.factor()
        return out

    def expr(self) -> Polynomial:
        sign = 1.0
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1.0
        elif self.peek()[:2] == ("op", "+"):
            self.take()
        out = sign * self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            nxt = self.term()
            out = out + nxt if op == "+" else out - nxt
        return out

    def parse(self) -> Polynomial:
        out = self.expr()
        if self.peek()[0] != "end":
            self.error("trailing input")
        return out


def parse_polynomial(src: str, n: int) -> Polynomial:
    """Parse an inequality string into a sparse polynomial in x1..xn."""
    if not isinstance(src, str) or not src.strip():
        raise ParseError("empty polynomial expression")
    return _Parser(src, n).parse()


def format_polynomial(p: Polynomial, var: str = "x") -> str:
    """Canonical text form; parse(format(p)) reproduces p's sparse map exactly.

    Terms are ordered by total degree then lexicographically descending, the
    same order the moment vectors use; coefficients print via repr so the
    float bits survive the round trip.
    """
    items = [(a, c) for a, c in p.terms.items() if c != 0.0]
    if not items:
        return "0"
    items.sort(key=lambda item: (sum(item[0]), tuple(-e for e in item[0])))
    parts = []
    for a, c in items:
        mono = "*".join(
            f"{var}{i + 1}^{e}" if e > 1 else f"{var}{i + 1}"
            for i, e in enumerate(a) if e > 0
        )
        mag = repr(abs(c))
        if not mono:
            body = mag
        elif abs(c) == 1.0:
            body = mono
        else:
            body = f"{mag}*{mono}"
        parts.append(("- " if c < 0 else "+ ") + body)
    head = parts[0][2:] if parts[0].startswith("+ ") else "-" + parts[0][2:]
    return " ".join([head] + parts[1:])


# -- instance documents -----------------------------------------------------------


@dataclass
class Instance:
    """A loaded instance: the data tms, the set, and an optional reference."""

    y: Tms
    K: SemialgebraicSet
    reference: ReferenceSpec | None = None
    description: str = ""

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def d(self) -> int:
        return self.y.d


def instance_from_json(obj: dict) -> Instance:
    """Validate and build an Instance from its JSON document."""
    try:
        n = int(obj["n"])
        d = int(obj["d"])
        moments = obj["moments"]
    except KeyError as exc:
        raise ParseError(f"instance is missing required field {exc.args[0]!r}") from None
    if n < 1 or d < 0:
        raise ParseError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    want = monomial_count(n, d)
    if len(moments) != want:
        raise ParseError(
            f"moments has {len(moments)} entries; degree {d} in {n} variables needs {want}")
    y = Tms(n, d, np.asarray(moments, dtype=float))

    set_obj = obj.get("set") or {}
    gens = [parse_polynomial(src, n) for src in set_obj.get("inequalities", [])]
    radius = set_obj.get("radius")
    witness = None
    if set_obj.get("interior_witness") is not None:
        wobj = set_obj["interior_witness"]
        witness = (np.asarray(wobj["center"], dtype=float), float(wobj["radius"]))
    K = SemialgebraicSet(n=n, generators=gens,
                         radius=None if radius is None else float(radius),
                         interior_witness=witness)

    reference = None
    if obj.get("reference") is not None:
        reference = ReferenceSpec.from_json(obj["reference"])
    return Instance(y=y, K=K, reference=reference,
                    description=str(obj.get("description", "")))


def instance_to_json(inst: Instance) -> dict:
    """Inverse of instance_from_json, producing the canonical document."""
    set_obj: dict = {"inequalities": [format_polynomial(g) for g in inst.K.generators]}
    if inst.K.radius is not None:
        set_obj["radius"] = float(inst.K.radius)
    if inst.K.interior_witness is not None:
        c, r = inst.K.interior_witness
        set_obj["interior_witness"] = {"center": [float(v) for v in c], "radius": float(r)}
    out = {
        "n": inst.n,
        "d": inst.d,
        "moments": [float(v) for v in inst.y.values],
        "set": set_obj,
    }
    if inst.reference is not None:
        out["reference"] = inst.reference.to_json()
    if inst.description:
        out["description"] = inst.description
    return out


def dumps_canonical(obj: dict) -> str:
    """The one serialization used for files: sorted keys, indent 2, newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_instance(path: str | Path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read instance file: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"instance file is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("instance file must hold a JSON object")
    return instance_from_json(obj)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(instance_to_json(inst)))
