"""Reactive-modules language: AST, lexer, parser, validator, evaluator, printer.

A model file looks like::

    lightning = x=5 & y=5;      // safety invariant: never reach such a state

    module A
        x: [0..5] init 0;
        [] x<5 -> x:=x+1;
        [reset] x=5 -> x:=0;
    endmodule

Commands with an empty action ``[]`` get a synthetic, unique action name
(``__m<i>_c<j>``) when the program is analysed; the AST itself keeps
``action=None`` so that printing and re-parsing is lossless.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Union

from .errors import (
    CrossModuleAssignment,
    DivisionByZero,
    DuplicateAssignment,
    DuplicateVariable,
    InitOutOfRange,
    ParseError,
    UndeclaredVariable,
)

Pos = tuple[int, int]


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "ArithExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / mod
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class Cmp:
    op: str  # one of = != < <= >= >
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class Logic:
    op: str  # one of and or iff
    left: "BoolExpr"
    right: "BoolExpr"


ArithExpr = Union[Num, Var, Neg, BinOp]
BoolExpr = Union[BoolConst, Not, Cmp, Logic]
Expr = Union[ArithExpr, BoolExpr]

ARITH_OPS = ("+", "-", "*", "/", "mod")
CMP_OPS = ("=", "!=", "<", "<=", ">=", ">")
LOGIC_OPS = ("and", "or", "iff")


@dataclass(frozen=True)
class Decl:
    name: str
    lower: int
    upper: int
    init: int
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Command:
    action: str | None
    guard: BoolExpr
    updates: tuple[tuple[str, ArithExpr], ...] = ()
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Module:
    name: str
    decls: tuple[Decl, ...] = ()
    commands: tuple[Command, ...] = ()


@dataclass(frozen=True)
class Program:
    safety_invariant: BoolExpr | None
    modules: tuple[Module, ...]

    @property
    def decls(self) -> list[Decl]:
        return [d for m in self.modules for d in m.decls]

    @property
    def variables(self) -> list[str]:
        return [d.name for d in self.decls]

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def action_of(self, mi: int, ci: int) -> str:
        """Effective action of command ``ci`` of module ``mi``."""
        act = self.modules[mi].commands[ci].action
        return act if act is not None else synthetic_action(mi, ci)

    def actions(self) -> list[str]:
        """All effective action names, in order of first appearance."""
        seen: dict[str, None] = {}
        for mi, m in enumerate(self.modules):
            for ci in range(len(m.commands)):
                seen.setdefault(self.action_of(mi, ci), None)
        return list(seen)

    def modules_with(self, action: str) -> list[int]:
        return [
            mi
            for mi, m in enumerate(self.modules)
            if any(self.action_of(mi, ci) == action for ci in range(len(m.commands)))
        ]

    def synchronising_actions(self) -> list[str]:
        """Named actions occurring in more than one module, first-appearance order."""
        return [a for a in self.actions() if len(self.modules_with(a)) > 1]

    def with_invariant(self, inv: BoolExpr) -> "Program":
        return Program(inv, self.modules)


def synthetic_action(mi: int, ci: int) -> str:
    return f"__m{mi}_c{ci}"


# --------------------------------------------------------------------------
# lexer

@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, SYM, EOF
    text: str
    line: int
    col: int


_SYMBOLS = {
    ":=": ":=", "'=": ":=", "->": "->", "..": "..",
    "<=>": "<=>", "⟺": "<=>", "⇔": "<=>",
    "<=": "<=", "≤": "<=", ">=": ">=", "≥": ">=",
    "!=": "!=", "≠": "!=", "<": "<", ">": ">", "=": "=",
    "&": "&", "∧": "&", "|": "|", "∨": "|", "!": "!", "¬": "!",
    "+": "+", "-": "-", "−": "-", "*": "*", "·": "*", "/": "/", "%": "mod",
    "(": "(", ")": ")", "[": "[", "]": "]", ":": ":", ";": ";",
    "∅": "∅", "⚡": "lightning",
}
_SYM_RE = "|".join(re.escape(s) for s in sorted(_SYMBOLS, key=len, reverse=True))
_TOKEN_RE = re.compile(
    rf"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)"
    rf"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>{_SYM_RE})"
)

KEYWORDS = frozenset({"module", "endmodule", "init", "true", "false", "mod"})


def tokenize(text: str) -> Iterator[Token]:
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int":
            yield Token("INT", m.group(), line, col)
        elif kind == "ident":
            word = m.group()
            yield Token("SYM" if word == "mod" else "IDENT", word, line, col)
        elif kind == "sym":
            yield Token("SYM", _SYMBOLS[m.group()], line, col)
        i = m.end()
    yield Token("EOF", "", line, i - line_start + 1)


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.toks = list(tokenize(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT") and t.text == text

    def fail(self, expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        return ParseError(f"expected {expected}, found {found}", t.line, t.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "IDENT" or t.text in KEYWORDS:
            raise self.fail("identifier")
        return self.advance()

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "INT":
            raise self.fail("integer")
        v = int(self.advance().text)
        return -v if neg else v

    # program structure

    def program(self, require_invariant: bool) -> Program:
        inv = None
        if (self.at("lightning")) and self.peek().text == "=":
            self.advance()
            self.advance()
            inv = self.bool_expr()
            self.expect(";")
        elif require_invariant:
            raise self.fail("'lightning = <bexp>;'")
        modules = []
        while self.at("module"):
            modules.append(self.module())
        if self.tok.kind != "EOF":
            raise self.fail("'module' or end of input")
        return Program(inv, tuple(modules))

    def module(self) -> Module:
        self.expect("module")
        name = self.ident().text
        decls, cmds = [], []
        while self.tok.kind == "IDENT" and self.tok.text not in KEYWORDS:
            decls.append(self.decl())
        while self.at("["):
            cmds.append(self.command())
        self.expect("endmodule")
        return Module(name, tuple(decls), tuple(cmds))

    def decl(self) -> Decl:
        t = self.ident()
        self.expect(":")
        self.expect("[")
        lo = self.integer()
        self.expect("..")
        hi = self.integer()
        self.expect("]")
        self.expect("init")
        init = self.integer()
        self.expect(";")
        return Decl(t.text, lo, hi, init, (t.line, t.col))

    def command(self) -> Command:
        start = self.expect("[")
        action = None
        if not self.at("]"):
            action = self.ident().text
        self.expect("]")
        guard = self.bool_expr()
        self.expect("->")
        updates = self.updates()
        self.expect(";")
        return Command(action, guard, updates, (start.line, start.col))

    def updates(self) -> tuple[tuple[str, ArithExpr], ...]:
        if self.at(";"):
            return ()
        if self.at("∅") or self.at("true"):
            self.advance()
            return ()
        if self.at("(") and (self.peek().text in ("∅", "true")) and self.peek(2).text == ")":
            self.advance(), self.advance(), self.advance()
            return ()
        ups = [self.assignment()]
        while self.at("&"):
            self.advance()
            ups.append(self.assignment())
        return tuple(ups)

    def assignment(self) -> tuple[str, ArithExpr]:
        if self.at("("):
            self.advance()
            a = self.assignment()
            self.expect(")")
            return a
        t = self.ident()
        if not (self.at(":=") or self.at("=")):
            raise self.fail("':=' or \"'=\"")
        self.advance()
        return t.text, self.arith_expr()

    # expressions: one grammar, then a kind check per operator

    def bool_expr(self) -> BoolExpr:
        t = self.tok
        e = self.iff()
        self._want(e, "bool", t)
        return e

    def arith_expr(self) -> ArithExpr:
        t = self.tok
        e = self.additive()
        self._want(e, "int", t)
        return e

    def _want(self, e: Expr, kind: str, t: Token) -> None:
        if kind_of(e) != kind:
            what = "Boolean" if kind == "bool" else "arithmetic"
            raise ParseError(f"expected {what} expression", t.line, t.col)

    def _binary(self, sub, ops: dict[str, str], kind: str, assoc: bool = True):
        t0 = self.tok
        left = sub()
        while self.tok.kind == "SYM" and self.tok.text in ops:
            t = self.advance()
            right = sub()
            self._want(left, kind, t0)
            self._want(right, kind, t)
            op = ops[t.text]
            if kind == "int":
                left = BinOp(op, left, right)
            else:
                left = Logic(op, left, right)
            if not assoc:
                break
        return left

    def iff(self):
        return self._binary(self.disj, {"<=>": "iff"}, "bool")

    def disj(self):
        return self._binary(self.conj, {"|": "or"}, "bool")

    def conj(self):
        return self._binary(self.negation, {"&": "and"}, "bool")

    def negation(self):
        if self.at("!"):
            t = self.advance()
            e = self.negation()
            self._want(e, "bool", t)
            return Not(e)
        return self.comparison()

    def comparison(self):
        t0 = self.tok
        left = self.additive()
        if self.tok.kind == "SYM" and self.tok.text in CMP_OPS:
            t = self.advance()
            right = self.additive()
            self._want(left, "int", t0)
            self._want(right, "int", t)
            return Cmp(t.text, left, right)
        return left

    def additive(self):
        return self._binary(self.multiplicative, {"+": "+", "-": "-"}, "int")

    def multiplicative(self):
        return self._binary(self.unary, {"*": "*", "/": "/", "mod": "mod"}, "int")

    def unary(self):
        if self.at("-"):
            t = self.advance()
            e = self.unary()
            self._want(e, "int", t)
            return Num(-e.value) if isinstance(e, Num) and e.value > 0 else Neg(e)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return Num(int(t.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolConst(t.text == "true")
        if t.kind == "IDENT" and t.text not in KEYWORDS:
            self.advance()
            return Var(t.text, (t.line, t.col))
        if self.at("("):
            self.advance()
            e = self.iff()
            self.expect(")")
            return e
        raise self.fail("expression")


def kind_of(e: Expr) -> str:
    return "int" if isinstance(e, (Num, Var, Neg, BinOp)) else "bool"


def parse_program(source: str, *, require_invariant: bool = False) -> Program:
    """Parse and validate a model. Raises a :class:`ParseError` subclass."""
    prog = _Parser(source).program(require_invariant)
    validate(prog)
    return prog


def parse_bool(source: str) -> BoolExpr:
    p = _Parser(source)
    e = p.bool_expr()
    if p.tok.kind != "EOF":
        raise p.fail("end of expression")
    return e


def parse_arith(source: str) -> ArithExpr:
    p = _Parser(source)
    e = p.arith_expr()
    if p.tok.kind != "EOF":
        raise p.fail("end of expression")
    return e


# --------------------------------------------------------------------------
# validation

def variables_of(e: Expr) -> Iterator[Var]:
    if isinstance(e, Var):
        yield e
    elif isinstance(e, (Neg, Not)):
        yield from variables_of(e.operand)
    elif isinstance(e, (BinOp, Cmp, Logic)):
        yield from variables_of(e.left)
        yield from variables_of(e.right)


def _check_declared(e: Expr, declared: Mapping[str, object]) -> None:
    for v in variables_of(e):
        if v.name not in declared:
            line, col = v.pos if v.pos else (None, None)
            raise UndeclaredVariable(f"undeclared variable {v.name!r}", line, col)


def validate(prog: Program) -> None:
    owner: dict[str, str] = {}
    names: set[str] = set()
    for m in prog.modules:
        if m.name in names:
            raise ParseError(f"duplicate module {m.name!r}")
        names.add(m.name)
        for d in m.decls:
            line, col = d.pos if d.pos else (None, None)
            if d.name in owner:
                raise DuplicateVariable(f"variable {d.name!r} declared twice", line, col)
            if not d.lower <= d.init <= d.upper:
                raise InitOutOfRange(
                    f"init {d.init} of {d.name!r} outside [{d.lower}..{d.upper}]", line, col
                )
            owner[d.name] = m.name
    if prog.safety_invariant is not None:
        _check_declared(prog.safety_invariant, owner)
    for m in prog.modules:
        for c in m.commands:
            line, col = c.pos if c.pos else (None, None)
            _check_declared(c.guard, owner)
            seen = set()
            for var, rhs in c.updates:
                if var not in owner:
                    raise UndeclaredVariable(f"undeclared variable {var!r}", line, col)
                if owner[var] != m.name:
                    raise CrossModuleAssignment(
                        f"module {m.name!r} assigns {var!r} owned by {owner[var]!r}", line, col
                    )
                if var in seen:
                    raise DuplicateAssignment(f"{var!r} assigned twice in one command", line, col)
                seen.add(var)
                _check_declared(rhs, owner)


# --------------------------------------------------------------------------
# evaluation

def int_div(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    if b == 0:
        raise DivisionByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def int_mod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend (C semantics)."""
    if b == 0:
        raise DivisionByZero("modulo by zero")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def eval_arith(e: ArithExpr, s: Mapping[str, int]) -> int:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return s[e.name]
    if isinstance(e, Neg):
        return -eval_arith(e.operand, s)
    a, b = eval_arith(e.left, s), eval_arith(e.right, s)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return int_div(a, b)
    return int_mod(a, b)


def eval_bool(e: BoolExpr, s: Mapping[str, int]) -> bool:
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, Not):
        return not eval_bool(e.operand, s)
    if isinstance(e, Cmp):
        a, b = eval_arith(e.left, s), eval_arith(e.right, s)
        return {
            "=": a == b, "!=": a != b, "<": a < b,
            "<=": a <= b, ">=": a >= b, ">": a > b,
        }[e.op]
    a = eval_bool(e.left, s)
    if e.op == "and":
        return a and eval_bool(e.right, s)
    if e.op == "or":
        return a or eval_bool(e.right, s)
    return a == eval_bool(e.right, s)


_PY_OPS = {"+": "+", "-": "-", "*": "*", "=": "==", "!=": "!=", "<": "<",
           "<=": "<=", ">=": ">=", ">": ">", "and": "and", "or": "or", "iff": "=="}


def _to_py(e: Expr, index: Mapping[str, int]) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, BoolConst):
        return repr(e.value)
    if isinstance(e, Var):
        return f"s[{index[e.name]}]"
    if isinstance(e, Neg):
        return f"(-{_to_py(e.operand, index)})"
    if isinstance(e, Not):
        return f"(not {_to_py(e.operand, index)})"
    left, right = _to_py(e.left, index), _to_py(e.right, index)
    if isinstance(e, BinOp) and e.op == "/":
        return f"_div({left}, {right})"
    if isinstance(e, BinOp) and e.op == "mod":
        return f"_mod({left}, {right})"
    if isinstance(e, Logic) and e.op == "iff":
        return f"(bool({left}) == bool({right}))"
    return f"({left} {_PY_OPS[e.op]} {right})"


def compile_expr(e: Expr, index: Mapping[str, int]) -> Callable[[tuple[int, ...]], int | bool]:
    """Compile ``e`` into a function of a value tuple laid out by ``index``."""
    src = f"lambda s: {_to_py(e, index)}"
    return eval(src, {"_div": int_div, "_mod": int_mod, "bool": bool})


# --------------------------------------------------------------------------
# printing

_PREC = {"iff": 1, "or": 2, "and": 3, "not": 4, "cmp": 5, "+": 6, "-": 6,
         "*": 7, "/": 7, "mod": 7, "neg": 8}
_SPELL = {"and": "&", "or": "|", "iff": "<=>"}


def _prec(e: Expr) -> int:
    if isinstance(e, (Logic, BinOp)):
        return _PREC[e.op]
    if isinstance(e, Cmp):
        return _PREC["cmp"]
    if isinstance(e, Not):
        return _PREC["not"]
    if isinstance(e, Neg) or (isinstance(e, Num) and e.value < 0):
        return _PREC["neg"]
    return 9


def format_expr(e: Expr) -> str:
    def wrap(sub: Expr, min_prec: int) -> str:
        text = format_expr(sub)
        return f"({text})" if _prec(sub) < min_prec else text

    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Neg):
        return f"-{wrap(e.operand, 9)}"
    if isinstance(e, Not):
        return f"!{wrap(e.operand, _PREC['not'])}"
    if isinstance(e, Cmp):
        p = _PREC["cmp"] + 1
        return f"{wrap(e.left, p)} {e.op} {wrap(e.right, p)}"
    p = _prec(e)
    # left-associative: the right operand needs strictly higher precedence
    op = _SPELL.get(e.op, e.op)
    return f"{wrap(e.left, p)} {op} {wrap(e.right, p + 1)}"


def format_program(prog: Program) -> str:
    out = []
    if prog.safety_invariant is not None:
        out.append(f"lightning = {format_expr(prog.safety_invariant)};")
        out.append("")
    for m in prog.modules:
        out.append(f"module {m.name}")
        for d in m.decls:
            out.append(f"    {d.name}: [{d.lower}..{d.upper}] init {d.init};")
        for c in m.commands:
            ups = " & ".join(f"{v}:={format_expr(r)}" for v, r in c.updates) or "true"
            out.append(f"    [{c.action or ''}] {format_expr(c.guard)} -> {ups};")
        out.append("endmodule")
        out.append("")
    return "\n".join(out)


def disjunction(exprs: list[BoolExpr]) -> BoolExpr:
    if not exprs:
        return BoolConst(False)
    out = exprs[0]
    for e in exprs[1:]:
        out = Logic("or", out, e)
    return out


def conjunction(exprs: list[BoolExpr]) -> BoolExpr:
    if not exprs:
        return BoolConst(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = Logic("and", out, e)
    return out
