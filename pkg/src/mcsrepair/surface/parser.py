"""Parser for the problem file format.

A file is a sequence of statements, each ended by ``.``; ``%`` starts a
comment running to the end of the line::

    context E ops add, del.
    context I.
    fact E: p(a), q(a).
    rule T: student(X) :- gradStudent(X).
    equal A: x = y.
    bridge (I: r(X)) <- (E: p(X)).
    aic r1: (I: r(a)) => (E: del(p(a))) | (E: del(q(a))).

Context options are ``ops`` (operations update actions may use), ``bridge``
(extra operations for bridge-rule heads, default ``add``) and ``domain``
(import domain). A bridge head written ``(C: atom)`` means ``(C: add(atom))``.
Query literals are ``[not] (C: atom)``, ``(C: s = t)`` or
``(C: (<= k role)(t))``; ``(C: p)(a)`` is accepted for ``(C: p(a))``.
A bare ``_`` is a fresh local variable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..aic import AIC, Problem, UpdateAction
from ..deductive import OPERATIONS, HornRule, canonical_op, deductive_context
from ..errors import MCSError
from ..kernel import MCS, BridgeRule
from ..logic import Atom, CountLit, Lit, Neg, eq_atom, is_local, is_var, unsafe_variables


class ParseError(MCSError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"line {line}, col {col}: {message}")


TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+) | (?P<comment>%[^\n]*)
  | (?P<op>:-|<-|=>|<=|[():,.|=])
  | (?P<num>\d+(?![A-Za-z_]))
  | (?P<name>[A-Za-z0-9_]+)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line, start = line + 1, pos + i + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


@dataclass
class _Ctx:
    name: str
    ops: frozenset = frozenset()
    bridge_ops: frozenset = frozenset({"add"})
    domain: Optional[frozenset] = None
    facts: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    equalities: list = field(default_factory=list)


class Parser:
    def __init__(self, text: str, contexts: Optional[list[_Ctx]] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.contexts: list[_Ctx] = list(contexts or [])
        self.bridges: list[BridgeRule] = []
        self.aics: list[AIC] = []
        self.arity: dict[tuple[int, str], int] = {}
        self.anon = 0

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "name") -> Token:
        if self.tok.kind not in ("name", "num"):
            self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def names(self) -> list[str]:
        out = [self.name().text]
        while self.at(","):
            self.advance()
            out.append(self.name().text)
        return out

    # -- statements

    def parse(self) -> None:
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "name":
                self.error(f"expected a statement, found {t.text!r}")
            handler = getattr(self, f"stmt_{t.text}", None)
            if handler is None:
                self.error(f"unknown statement {t.text!r}")
            self.advance()
            handler(t)
            self.expect(".")

    def stmt_context(self, start: Token) -> None:
        t = self.name("context name")
        if any(c.name == t.text for c in self.contexts):
            self.error(f"context {t.text} declared twice", t)
        ctx = _Ctx(t.text)
        while self.tok.kind == "name" and self.tok.text in ("ops", "bridge", "domain"):
            opt = self.advance().text
            if opt == "domain":
                ctx.domain = frozenset(self.names())
                continue
            here = self.tok
            ops = [canonical_op(o) for o in self.names()]
            unknown = [o for o in ops if o not in OPERATIONS]
            if unknown:
                self.error(f"unknown operation {unknown[0]}", here)
            if opt == "ops":
                ctx.ops = frozenset(ops)
            else:
                ctx.bridge_ops = frozenset(ops)
        self.contexts.append(ctx)

    def context_ref(self) -> int:
        t = self.name("context name")
        for i, c in enumerate(self.contexts, 1):
            if c.name == t.text:
                return i
        self.error(f"unknown context {t.text}", t)

    def stmt_fact(self, start: Token) -> None:
        i = self.context_ref()
        self.expect(":")
        while True:
            t = self.tok
            atom = self.atom(i)
            if not atom.ground or atom.is_equality:
                self.error(f"facts must be ground atoms: {atom}", t)
            self.contexts[i - 1].facts.append(atom)
            if not self.at(","):
                break
            self.advance()

    def stmt_equal(self, start: Token) -> None:
        i = self.context_ref()
        self.expect(":")
        while True:
            t = self.tok
            a = self.name("constant").text
            self.expect("=")
            b = self.name("constant").text
            if is_var(a) or is_var(b):
                self.error("equalities must be between constants", t)
            self.contexts[i - 1].equalities.append((a, b))
            if not self.at(","):
                break
            self.advance()

    def stmt_rule(self, start: Token) -> None:
        i = self.context_ref()
        self.expect(":")
        head = self.atom(i)
        body = []
        if self.at(":-"):
            self.advance()
            while True:
                positive = True
                if self.at("not"):
                    self.advance()
                    positive = False
                body.append(Lit(0, self.atom(i), positive))
                if not self.at(","):
                    break
                self.advance()
        if head.is_equality:
            self.error("a rule head cannot be an equality", start)
        self.check_safe(body, head.variables(), start)
        joined = {v for l in body if l.positive and not l.atom.is_equality
                  for v in l.variables()}
        loose = {v for l in body if l.atom.is_equality for v in l.variables()} - joined
        if loose:
            self.error(f"unsafe variable {sorted(loose)[0]}", start)
        self.contexts[i - 1].rules.append(HornRule(head, tuple(body)))

    def stmt_bridge(self, start: Token) -> None:
        self.expect("(")
        i = self.context_ref()
        self.expect(":")
        ctx = self.contexts[i - 1]
        op_tok = self.tok
        allowed = ctx.ops | ctx.bridge_ops
        if self.tok.kind == "name" and canonical_op(self.tok.text) in OPERATIONS \
                and self.peek().text == "(":
            op = canonical_op(self.advance().text)
            self.expect("(")
            arg_tok = self.tok
            arg = self.op_arg(i)
            self.expect(")")
            arg = self.sugar_args(arg, i, arg_tok)
        else:
            op = "add"
            arg = self.atom(i)
        self.expect(")")
        if op not in allowed:
            self.error(f"unknown operation {op} for context {ctx.name}", op_tok)
        body = []
        if self.at("<-"):
            self.advance()
            body = self.qlits()
        self.check_safe(body, arg.variables(), start)
        self.bridges.append(BridgeRule(i, op, arg, tuple(body)))

    def stmt_aic(self, start: Token) -> None:
        name = ""
        if self.tok.kind in ("name", "num") and self.peek().text == ":":
            name = self.advance().text
            self.advance()
        body = self.qlits() if not self.at("=>") else []
        self.expect("=>")
        head = [self.action()]
        while self.at("|"):
            self.advance()
            head.append(self.action())
        head_vars = set().union(*(a.variables() for a in head))
        local = sorted(v for v in head_vars if is_local(v))
        if local:
            self.error(f"local variable {local[0]} in AIC head", start)
        self.check_safe(body, head_vars, start)
        self.aics.append(AIC(tuple(body), tuple(head), name))

    # -- pieces

    def check_safe(self, body, extra, start: Token) -> None:
        unsafe = unsafe_variables(body, extra)
        if unsafe:
            self.error(f"unsafe variable {sorted(unsafe)[0]}", start)

    def term(self) -> str:
        t = self.name("term")
        if t.text == "_":
            self.anon += 1
            return f"_G{self.anon}"
        return t.text

    def note_arity(self, ctx: int, atom: Atom, tok: Token) -> None:
        if atom.is_equality:
            return
        key = (ctx, atom.pred)
        known = self.arity.setdefault(key, atom.arity)
        if known != atom.arity:
            self.error(f"arity clash for {atom.pred}: {known} and {atom.arity}", tok)

    def atom(self, ctx: int, note: bool = True) -> Atom:
        t = self.tok
        if self.peek().text == "=":
            return self.equality()
        pred = self.name("predicate").text
        if is_var(pred) and pred[0] == "_":
            self.error(f"bad predicate name {pred}", t)
        args = []
        if self.at("("):
            self.advance()
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
            self.expect(")")
        atom = Atom(pred, tuple(args))
        if note:
            self.note_arity(ctx, atom, t)
        return atom

    def equality(self) -> Atom:
        left = self.term()
        self.expect("=")
        return eq_atom(left, self.term())

    def sugar_args(self, formula, ctx: int, tok: Token):
        """Accept ``(C: p)(a, b)``: arguments after the closing parenthesis."""
        atom = formula.atom if isinstance(formula, Neg) else formula
        if self.at("(") and not atom.args and not atom.is_equality:
            self.advance()
            args = [self.term()]
            while self.at(","):
                self.advance()
                args.append(self.term())
            self.expect(")")
            atom = Atom(atom.pred, tuple(args))
            formula = Neg(atom) if isinstance(formula, Neg) else atom
        self.note_arity(ctx, atom, tok)
        return formula

    def op_arg(self, ctx: int):
        if self.at("not"):
            self.advance()
            return Neg(self.atom(ctx, note=False))
        return self.atom(ctx, note=False)

    def action(self) -> UpdateAction:
        self.expect("(")
        i = self.context_ref()
        self.expect(":")
        op_tok = self.name("operation")
        op = canonical_op(op_tok.text)
        ctx = self.contexts[i - 1]
        if op not in ctx.ops:
            self.error(f"unknown operation {op_tok.text} for context {ctx.name}", op_tok)
        self.expect("(")
        arg_tok = self.tok
        arg = self.op_arg(i)
        self.expect(")")
        arg = self.sugar_args(arg, i, arg_tok)
        self.expect(")")
        return UpdateAction(i, op, arg)

    def qlits(self) -> list:
        out = [self.qlit()]
        while self.at(","):
            self.advance()
            out.append(self.qlit())
        return out

    def qlit(self):
        positive = True
        if self.at("not"):
            self.advance()
            positive = False
        self.expect("(")
        i = self.context_ref()
        self.expect(":")
        if self.at("("):
            self.advance()
            self.expect("<=")
            t = self.tok
            if t.kind != "num":
                self.error("expected a number", t)
            self.advance()
            role = self.name("role").text
            self.expect(")")
            self.expect("(")
            subject = self.term()
            self.expect(")")
            self.expect(")")
            return CountLit(i, int(t.text), role, subject, positive)
        t = self.tok
        atom = self.atom(i, note=False)
        self.expect(")")
        atom = self.sugar_args(atom, i, t)
        return Lit(i, atom, positive)

    # -- result

    def problem(self) -> Problem:
        ctxs = []
        for c in self.contexts:
            try:
                ctxs.append(deductive_context(c.name, c.facts, c.rules, c.ops, c.bridge_ops,
                                              c.domain, c.equalities))
            except MCSError as e:
                raise ParseError(f"context {c.name}: {e}") from e
        return Problem(MCS(tuple(ctxs), tuple(self.bridges)), tuple(self.aics))


def parse_problem(text: str) -> Problem:
    """Parse a whole problem file; raises :class:`ParseError` with a position."""
    p = Parser(text)
    p.parse()
    return p.problem()


def parse_aics(text: str, mcs: MCS) -> tuple[AIC, ...]:
    """Parse ``aic`` statements against the contexts of an existing MCS."""
    ctxs = [_Ctx(c.name, c.op_names, c.bridge_ops, c.import_domain) for c in mcs.contexts]
    p = Parser(text, ctxs)
    p.parse()
    if p.bridges or any(c.facts or c.rules or c.equalities for c in p.contexts) \
            or len(p.contexts) != len(ctxs):
        raise ParseError("only aic statements are allowed here")
    return tuple(p.aics)


def parse_atoms(text: str, mcs: MCS) -> list:
    """Parse a comma-separated list of ground atoms, each optionally prefixed
    ``Ctx:``; prefixed items come back as ``(context index, atom)`` pairs."""
    ctxs = [_Ctx(c.name, c.op_names, c.bridge_ops, c.import_domain) for c in mcs.contexts]
    p = Parser(text, ctxs)
    out = []
    while p.tok.kind != "eof":
        ctx = None
        if p.peek().text == ":":
            ctx = p.context_ref()
            p.expect(":")
        t = p.tok
        atom = p.atom(0, note=False)
        if not atom.ground:
            p.error(f"atom {atom} is not ground", t)
        out.append(atom if ctx is None else (ctx, atom))
        if not p.at(","):
            break
        p.advance()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return out
