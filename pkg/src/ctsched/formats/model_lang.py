"""Parser and serializer for the `.ctmdp` model language.

The language is a small PRISM-inspired subset:

    ctmdp
    const double r = 9;
    module name
      z : [0..3] init 0;
      [b] z=0 -> r : (z'=2) + 1 : (z'=1);
    endmodule
    label "p" = z=1;

One module, bounded integer variables, commands guarded by boolean
expressions, `#` comments.  The state space is the set of valuations
reachable from the initial one.  Two commands with the same action enabled in
the same state race: their rates add up.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..model import Ctmdp


@dataclass(frozen=True)
class ModelSource:
    text: str
    origin: str = "<inline>"


class ModelError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


class ModelSyntaxError(ModelError):
    pass


class ModelSemanticError(ModelError):
    pass


# ---------------------------------------------------------------------------
# Tokenizer

_SYMBOLS = ("..", "->", "<=", ">=", "!=", "=", "<", ">", "!", "&", "|",
            "(", ")", "[", "]", ":", ";", "+", "-", "*", "/", "'", ",")


@dataclass
class Token:
    kind: str  # 'name' | 'number' | 'string' | 'sym' | 'eof'
    value: str
    line: int
    col: int


def _tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#" or text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ModelSyntaxError("unterminated string", line, col)
            tokens.append(Token("string", text[i + 1:j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                if text.startswith("..", j):  # range operator, not a decimal
                    break
                j += 1
            if j < n and text[j] in "eE" and j + 1 < n and \
                    (text[j + 1].isdigit() or
                     (text[j + 1] in "+-" and j + 2 < n and text[j + 2].isdigit())):
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ModelSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Expression AST (evaluated against a variable valuation)


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class Arith(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class Cmp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # '&' or '|'
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


def _eval(e: Expr, env: Dict[str, float]):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ModelSemanticError(f"unknown identifier '{e.name}'",
                                     e.line, e.col) from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Arith):
        left, right = _eval(e.left, env), _eval(e.right, env)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        return left / right
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Cmp):
        left, right = _eval(e.left, env), _eval(e.right, env)
        return {"=": left == right, "!=": left != right, "<": left < right,
                "<=": left <= right, ">": left > right, ">=": left >= right}[e.op]
    if isinstance(e, Not):
        return not _eval(e.arg, env)
    if isinstance(e, BoolOp):
        if e.op == "&":
            return all(_eval(a, env) for a in e.args)
        return any(_eval(a, env) for a in e.args)
    raise AssertionError(e)


# ---------------------------------------------------------------------------
# Parser


@dataclass
class _VarDecl:
    name: str
    lo: int
    hi: int
    init: int


@dataclass
class _Update:
    assignments: List[Tuple[str, Expr]]


@dataclass
class _Command:
    action: str
    guard: Expr
    alts: List[Tuple[Expr, _Update]]  # (rate expression, update)
    line: int
    col: int


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ModelSyntaxError(f"expected '{want}', found '{tok.value or tok.kind}'",
                                   tok.line, tok.col)
        return self.next()

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == kind and (value is None or tok.value == value):
            return self.next()
        return None

    # expressions ----------------------------------------------------------

    def num_expr(self) -> Expr:
        e = self.num_term()
        while True:
            tok = self.accept("sym", "+") or self.accept("sym", "-")
            if not tok:
                return e
            e = Arith(tok.value, e, self.num_term())

    def num_term(self) -> Expr:
        e = self.num_factor()
        while True:
            tok = self.accept("sym", "*") or self.accept("sym", "/")
            if not tok:
                return e
            e = Arith(tok.value, e, self.num_factor())

    def num_factor(self) -> Expr:
        if self.accept("sym", "-"):
            return Neg(self.num_factor())
        if self.accept("sym", "("):
            e = self.num_expr()
            self.expect("sym", ")")
            return e
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return Num(float(tok.value))
        if tok.kind == "name":
            self.next()
            return Var(tok.value, tok.line, tok.col)
        raise ModelSyntaxError(f"expected expression, found '{tok.value or tok.kind}'",
                               tok.line, tok.col)

    def bool_expr(self) -> Expr:
        args = [self.bool_term()]
        while self.accept("sym", "|"):
            args.append(self.bool_term())
        return args[0] if len(args) == 1 else BoolOp("|", tuple(args))

    def bool_term(self) -> Expr:
        args = [self.bool_unary()]
        while self.accept("sym", "&"):
            args.append(self.bool_unary())
        return args[0] if len(args) == 1 else BoolOp("&", tuple(args))

    def bool_unary(self) -> Expr:
        if self.accept("sym", "!"):
            return Not(self.bool_unary())
        tok = self.peek()
        if tok.kind == "name" and tok.value in ("true", "false"):
            self.next()
            return BoolLit(tok.value == "true")
        if tok.kind == "sym" and tok.value == "(":
            # could be a parenthesized boolean or the left side of a comparison
            mark = self.pos
            self.next()
            try:
                e = self.bool_expr()
                if self.accept("sym", ")"):
                    if self.peek().value in ("=", "!=", "<", "<=", ">", ">="):
                        self.pos = mark
                    else:
                        return e
                else:
                    self.pos = mark
            except ModelError:
                self.pos = mark
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.num_expr()
        tok = self.peek()
        if tok.kind == "sym" and tok.value in ("=", "!=", "<", "<=", ">", ">="):
            self.next()
            return Cmp(tok.value, left, self.num_expr())
        raise ModelSyntaxError("expected comparison operator", tok.line, tok.col)

    # declarations ---------------------------------------------------------

    def parse(self) -> Tuple[List[_VarDecl], List[_Command],
                             List[Tuple[str, Expr]], Dict[str, float]]:
        self.expect("name", "ctmdp")
        consts: Dict[str, float] = {}
        variables: List[_VarDecl] = []
        commands: List[_Command] = []
        labels: List[Tuple[str, Expr]] = []
        saw_module = False
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "name" and tok.value == "const":
                self.next()
                if self.peek().value in ("int", "double"):
                    self.next()
                name = self.expect("name")
                self.expect("sym", "=")
                value = _eval(self.num_expr(), consts)
                self.expect("sym", ";")
                consts[name.value] = value
            elif tok.kind == "name" and tok.value == "module":
                if saw_module:
                    raise ModelSyntaxError("only one module is supported",
                                           tok.line, tok.col)
                saw_module = True
                self.next()
                self.expect("name")
                variables, commands = self.parse_module(consts)
            elif tok.kind == "name" and tok.value == "label":
                self.next()
                name = self.expect("string")
                self.expect("sym", "=")
                labels.append((name.value, self.bool_expr()))
                self.expect("sym", ";")
            else:
                raise ModelSyntaxError(f"unexpected token '{tok.value}'",
                                       tok.line, tok.col)
        if not saw_module:
            raise ModelSyntaxError("no module block", 1, 1)
        return variables, commands, labels, consts

    def parse_module(self, consts) -> Tuple[List[_VarDecl], List[_Command]]:
        variables: List[_VarDecl] = []
        commands: List[_Command] = []
        while not self.accept("name", "endmodule"):
            tok = self.peek()
            if tok.kind == "eof":
                raise ModelSyntaxError("unterminated module", tok.line, tok.col)
            if tok.kind == "name" and self.tokens[self.pos + 1].value == ":":
                variables.append(self.parse_vardecl(consts))
            elif tok.kind == "sym" and tok.value == "[":
                commands.append(self.parse_command())
            else:
                raise ModelSyntaxError(f"unexpected token '{tok.value}' in module",
                                       tok.line, tok.col)
        if not commands:
            raise ModelSemanticError("no commands in module", 1, 1)
        return variables, commands

    def parse_vardecl(self, consts) -> _VarDecl:
        name = self.expect("name")
        self.expect("sym", ":")
        self.expect("sym", "[")
        lo = _eval(self.num_expr(), consts)
        self.expect("sym", "..")
        hi = _eval(self.num_expr(), consts)
        self.expect("sym", "]")
        init = lo
        if self.accept("name", "init"):
            init = _eval(self.num_expr(), consts)
        self.expect("sym", ";")
        lo, hi, init = int(lo), int(hi), int(init)
        if lo > hi or not (lo <= init <= hi):
            raise ModelSemanticError(f"bad range for variable '{name.value}'",
                                     name.line, name.col)
        return _VarDecl(name.value, lo, hi, init)

    def parse_command(self) -> _Command:
        start = self.expect("sym", "[")
        action = self.expect("name").value
        self.expect("sym", "]")
        guard = self.bool_expr()
        self.expect("sym", "->")
        alts = [self.parse_alt()]
        while self.accept("sym", "+"):
            alts.append(self.parse_alt())
        self.expect("sym", ";")
        return _Command(action, guard, alts, start.line, start.col)

    def parse_alt(self) -> Tuple[Expr, _Update]:
        rate = self.num_expr()
        self.expect("sym", ":")
        if self.accept("name", "true"):
            return rate, _Update([])
        assignments = [self.parse_assignment()]
        while self.accept("sym", "&"):
            assignments.append(self.parse_assignment())
        return rate, _Update(assignments)

    def parse_assignment(self) -> Tuple[str, Expr]:
        self.expect("sym", "(")
        name = self.expect("name")
        self.expect("sym", "'")
        self.expect("sym", "=")
        value = self.num_expr()
        self.expect("sym", ")")
        return name.value, value


# ---------------------------------------------------------------------------
# State-space construction


def parse_model(src) -> Ctmdp:
    """Parse a `.ctmdp` document into a validated model."""
    text = src.text if isinstance(src, ModelSource) else src
    parser = _Parser(text)
    variables, commands, labels, consts = parser.parse()
    if not variables:
        raise ModelSemanticError("module declares no variables", 1, 1)
    seen = set(consts)
    for v in variables:
        if v.name in seen:
            raise ModelSemanticError(f"duplicate identifier '{v.name}'", 1, 1)
        seen.add(v.name)
    label_names = [name for name, _ in labels]
    if len(set(label_names)) != len(label_names):
        dup = next(n for n in label_names if label_names.count(n) > 1)
        raise ModelSemanticError(f"duplicate label \"{dup}\"", 1, 1)

    var_names = [v.name for v in variables]
    bounds = {v.name: (v.lo, v.hi) for v in variables}
    init_val = tuple(v.init for v in variables)

    def env_of(valuation):
        env = dict(consts)
        env.update(zip(var_names, valuation))
        return env

    def apply_update(valuation, update: _Update, cmd: _Command):
        env = env_of(valuation)
        new = dict(zip(var_names, valuation))
        for name, expr in update.assignments:
            if name not in bounds:
                raise ModelSemanticError(
                    f"assignment to unknown variable '{name}'", cmd.line, cmd.col)
            value = _eval(expr, env)
            ivalue = int(round(value))
            lo, hi = bounds[name]
            if abs(value - ivalue) > 1e-9 or not (lo <= ivalue <= hi):
                raise ModelSemanticError(
                    f"update drives '{name}' to {value}, outside [{lo}..{hi}]",
                    cmd.line, cmd.col)
            new[name] = ivalue
        return tuple(new[n] for n in var_names)

    # breadth-first exploration of reachable valuations
    state_ids: Dict[Tuple[int, ...], int] = {init_val: 0}
    order = [init_val]
    action_ids: Dict[str, int] = {}
    transitions: List[Tuple[int, int, int, float]] = []
    frontier = [init_val]
    while frontier:
        valuation = frontier.pop()
        s = state_ids[valuation]
        env = env_of(valuation)
        for cmd in commands:
            if not _eval(cmd.guard, env):
                continue
            a = action_ids.setdefault(cmd.action, len(action_ids))
            for rate_expr, update in cmd.alts:
                rate = _eval(rate_expr, env)
                if rate < 0:
                    raise ModelSemanticError(
                        f"negative rate in command [{cmd.action}]",
                        cmd.line, cmd.col)
                if rate == 0:
                    continue
                target = apply_update(valuation, update, cmd)
                if target not in state_ids:
                    state_ids[target] = len(order)
                    order.append(target)
                    frontier.append(target)
                transitions.append((s, a, state_ids[target], rate))

    state_names = tuple(",".join(f"{n}={v}" for n, v in zip(var_names, val))
                        for val in order)
    action_names = tuple(sorted(action_ids, key=action_ids.get))

    ap = tuple(name for name, _ in labels)
    state_labels = []
    for val in order:
        env = env_of(val)
        state_labels.append(frozenset(
            i for i, (_, expr) in enumerate(labels) if _eval(expr, env)))

    m = Ctmdp.from_transitions(state_names, action_names, 0, transitions,
                               ap=ap, labels=state_labels)
    from ..model import validate
    problems = validate(m)
    if problems:
        raise ModelSemanticError("; ".join(problems), 1, 1)
    return m


def _fmt_rate(x: float) -> str:
    return repr(x) if x != int(x) else str(int(x))


def serialize_model(m: Ctmdp, name: str = "model") -> str:
    """Emit a `.ctmdp` document; `parse_model` round-trips it."""
    lines = ["ctmdp", f"module {name}"]
    n = m.num_states
    lines.append(f"  s : [0..{n - 1}] init {m.initial};")
    for s in range(n):
        for a in m.enabled(s):
            succ, rates = m.successors(s, a)
            alts = " + ".join(f"{_fmt_rate(float(r))} : (s'={int(t)})"
                              for t, r in zip(succ, rates))
            lines.append(f"  [{m.action_names[a]}] s={s} -> {alts};")
    lines.append("endmodule")
    for i, ap in enumerate(m.ap):
        holds = [s for s in range(n) if i in m.labels[s]]
        pred = " | ".join(f"s={s}" for s in holds) if holds else "false"
        lines.append(f'label "{ap}" = {pred};')
    return "\n".join(lines) + "\n"
