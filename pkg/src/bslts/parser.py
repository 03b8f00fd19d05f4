"""Lexer, recursive-descent parser and type checker for the component language.

The grammar is documented in docs/grammar.md.  Names are resolved while
parsing (constants, state variables, bound variables); types are checked in a
second pass once the variable domains have been read off the invariant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping

from .model import (DomainMismatch, Decomposition, LexicalError, Machine, ModelError, NonFiniteDomain,
                    ParallelClash, Refinement, Signature, SyntaxError_, UnknownIdentifier)
from .terms import (BOOL, BOOL_TYPE, INT_TYPE, And, Any, Arith, Assign, BoolOf, Choice, ChooseFrom, Cmp,
                    Const, Domain, Exists, Expr, FALSE, Forall, If, Iff, Implies, Lit, Member, Not, Or,
                    Parallel, Pred, SKIP, Select, Seq, Subst, TRUE, Var, conjuncts, disjuncts, rename_vars,
                    written_vars)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>/\*.*?\*/|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:'|\$1)?)
  | (?P<op><=>|=>|<=|>=|/=|/:|:=|::|\.\.|\|\||[&=:<>(){},;.!\#+\-])
""", re.S | re.X)

CLAUSES = {"SETS", "VARIABLES", "INVARIANT", "ASSERTIONS", "INITIALISATION", "EVENTS", "OPERATIONS",
           "VARIANT", "END"}
UNSUPPORTED = {"DEFINITIONS", "CONSTANTS", "PROPERTIES", "SEES", "INCLUDES", "IMPORTS", "EXTENDS", "USES",
               "PROMOTES", "CONCRETE_CONSTANTS", "ABSTRACT_CONSTANTS", "CONCRETE_VARIABLES",
               "LOCAL_OPERATIONS", "VALUES", "CONSTRAINTS"}
KEYWORDS = CLAUSES | UNSUPPORTED | {
    "MACHINE", "REFINEMENT", "REFINES", "BEGIN", "IF", "THEN", "ELSIF", "ELSE", "SELECT", "WHEN", "CHOICE",
    "OR", "ANY", "WHERE", "skip", "or", "not", "bool", "true", "false", "btrue", "bfalse"}
INFINITE_SETS = {"NAT", "NAT1", "NATURAL", "NATURAL1", "INT", "INTEGER", "INT1"}
REL_OPS = {"=", "/=", "<", "<=", ">", ">="}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            if text.startswith("/*", pos):
                raise LexicalError("unterminated comment", line, col)
            raise LexicalError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    """Recursive-descent parser over one token stream.

    ``constants`` maps element names to their type, ``sets`` set names to element
    tuples (None for deferred sets), ``names`` maps visible variable names to the
    term name they stand for (used to read abstract names through a renaming).
    """

    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.sets: dict = {}
        self.constants: dict = {"TRUE": BOOL_TYPE, "FALSE": BOOL_TYPE}
        self.names: dict = {}
        self.bound: list = []  # stack of (name, Domain | None)
        self.allow_primed = False
        self.positions: dict = {}
        self.aliases: dict = {}
        self.new_sets: list = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.advance()

    def fail(self, msg: str, tok: Token | None = None, cls=SyntaxError_):
        tok = tok or self.tok
        raise cls(msg, tok.line, tok.col)

    def mark(self, node, tok: Token):
        self.positions[id(node)] = (tok.line, tok.col)
        return node

    # -- domains
    def parse_domain(self) -> Domain:
        t = self.tok
        if self.at("{"):
            self.advance()
            vals, types = [], set()
            while True:
                e = self.parse_simple_expr()
                if not isinstance(e, Const):
                    self.fail("set extension elements must be constants", t)
                vals.append(e.value)
                types.add(e.type)
                if self.at(","):
                    self.advance()
                    continue
                break
            self.expect("}")
            if len(types) != 1:
                self.fail("set extension mixes element types", t, DomainMismatch)
            if len(set(vals)) != len(vals):
                self.fail("duplicate element in set extension", t)
            return self.mark(Domain(None, tuple(vals), types.pop()), t)
        if t.kind == "ident" and not self.peek().text == "..":
            name = t.text
            if name == "BOOL":
                self.advance()
                return BOOL
            if name in INFINITE_SETS:
                self.fail(f"non-finite domain {name}; use an interval a..b", t, NonFiniteDomain)
            if name in self.sets:
                self.advance()
                elems = self.sets[name]
                if elems is None:
                    self.fail(f"deferred set {name} has no finite enumeration", t, NonFiniteDomain)
                return Domain(name, tuple(elems), name)
            if t.text not in self.constants and not self._is_var(t.text):
                self.fail(f"unknown set {name}", t, UnknownIdentifier)
        lo = self._int_literal()
        self.expect("..")
        hi = self._int_literal()
        return Domain(None, tuple(range(lo, hi + 1)), INT_TYPE)

    def _int_literal(self) -> int:
        t = self.tok
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        t2 = self.tok
        if t2.kind != "int":
            self.fail("interval bounds must be integer literals", t, NonFiniteDomain)
        self.advance()
        return -int(t2.text) if neg else int(t2.text)

    # -- expressions
    def _is_var(self, name: str) -> bool:
        return any(b == name for b, _ in self.bound) or name in self.names

    def resolve(self, tok: Token) -> Expr:
        name = tok.text
        if name.endswith("'") or name.endswith("$1"):
            base = name[:-1] if name.endswith("'") else name[:-2]
            if not self.allow_primed:
                self.fail(f"primed variable {name} outside a before-after predicate", tok, UnknownIdentifier)
            if base not in self.names:
                self.fail(f"unknown identifier {base}", tok, UnknownIdentifier)
            return self.mark(Var(self.names[base] + "'"), tok)
        for b, _ in reversed(self.bound):
            if b == name:
                return self.mark(Var(name), tok)
        if name in self.names:
            return self.mark(Var(self.names[name]), tok)
        if name in self.constants:
            return self.mark(Const(name, self.constants[name]), tok)
        self.fail(f"unknown identifier {name}", tok, UnknownIdentifier)

    def parse_expr(self) -> Expr:
        left = self.parse_simple_expr()
        while self.at("+", "-"):
            op = self.advance()
            right = self.parse_simple_expr()
            left = self.mark(Arith(op.text, left, right), op)
        return left

    def parse_simple_expr(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return self.mark(Const(int(t.text), INT_TYPE), t)
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                n = self.advance()
                return self.mark(Const(-int(n.text), INT_TYPE), t)
            return self.mark(Arith("-", Const(0, INT_TYPE), self.parse_simple_expr()), t)
        if self.at("bool"):
            self.advance()
            self.expect("(")
            p = self.parse_pred()
            self.expect(")")
            return self.mark(BoolOf(p), t)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.advance()
            return self.resolve(t)
        self.fail(f"expected expression, found {t.text or 'end of input'!r}")

    # -- predicates
    def parse_pred(self) -> Pred:
        left = self.parse_implication()
        while self.at("<=>"):
            t = self.advance()
            left = self.mark(Iff(left, self.parse_implication()), t)
        return left

    def parse_implication(self) -> Pred:
        left = self.parse_disjunction()
        if self.at("=>"):
            t = self.advance()
            return self.mark(Implies(left, self.parse_implication()), t)
        return left

    def parse_disjunction(self) -> Pred:
        t = self.tok
        args = [self.parse_conjunction()]
        while self.at("or"):
            self.advance()
            args.append(self.parse_conjunction())
        return args[0] if len(args) == 1 else self.mark(Or(tuple(args)), t)

    def parse_conjunction(self) -> Pred:
        t = self.tok
        args = [self.parse_unary()]
        while self.at("&"):
            self.advance()
            args.append(self.parse_unary())
        return args[0] if len(args) == 1 else self.mark(And(tuple(args)), t)

    def parse_unary(self) -> Pred:
        t = self.tok
        if self.at("not"):
            self.advance()
            return self.mark(Not(self.parse_unary()), t)
        if self.at("true", "btrue"):
            self.advance()
            return TRUE
        if self.at("false", "bfalse"):
            self.advance()
            return FALSE
        if self.at("!", "#"):
            return self.parse_quantifier()
        if t.kind == "ident" and t.text in self.aliases:
            self.advance()
            return self.aliases[t.text]
        if self.at("("):
            save = self.i
            try:
                self.advance()
                p = self.parse_pred()
                self.expect(")")
            except SyntaxError_:
                self.i = save
                return self.parse_relation()
            nxt = self.tok
            if nxt.kind == "op" and (nxt.text in REL_OPS or nxt.text in ("+", "-", ":", "/:")):
                self.i = save
                return self.parse_relation()
            return p
        return self.parse_relation()

    def parse_relation(self) -> Pred:
        left = self.parse_expr()
        t = self.tok
        if self.at(":"):
            self.advance()
            return self.mark(Member(left, self.parse_domain()), t)
        if self.at("/:"):
            self.advance()
            return self.mark(Not(self.mark(Member(left, self.parse_domain()), t)), t)
        if t.kind == "op" and t.text in REL_OPS:
            self.advance()
            return self.mark(Cmp(t.text, left, self.parse_expr()), t)
        self.fail(f"expected a relational operator, found {t.text or 'end of input'!r}")

    def parse_quantifier(self) -> Pred:
        q = self.advance()
        if self.at("("):
            self.advance()
            names = [self.ident("bound variable").text]
            while self.at(","):
                self.advance()
                names.append(self.ident("bound variable").text)
            self.expect(")")
        else:
            names = [self.ident("bound variable").text]
        self.expect(".")
        self.expect("(")
        domains = []
        for k, name in enumerate(names):
            if k:
                self.expect("&")
            vt = self.ident("typing of the bound variable")
            if vt.text != name:
                self.fail(f"expected typing of {name}", vt)
            self.expect(":")
            domains.append(self.parse_domain())
        for name, dom in zip(names, domains):
            self.bound.append((name, dom))
        try:
            if q.text == "!":
                if self.at("&"):
                    self.advance()
                    hyp = self.parse_disjunction()
                    t = self.expect("=>")
                    body = self.mark(Implies(hyp, self.parse_implication()), t)
                else:
                    self.expect("=>")
                    body = self.parse_pred()
            else:
                if self.at("&"):
                    self.advance()
                    body = self.parse_pred()
                else:
                    body = TRUE
            self.expect(")")
        finally:
            del self.bound[len(self.bound) - len(names):]
        cls = Forall if q.text == "!" else Exists
        for name, dom in reversed(list(zip(names, domains))):
            body = self.mark(cls(name, dom, body), q)
        return body

    # -- substitutions
    def parse_subst(self, allow_seq: bool = True) -> Subst:
        t = self.tok
        steps = [self.parse_parallel()]
        while allow_seq and self.at(";"):
            self.advance()
            steps.append(self.parse_parallel())
        return steps[0] if len(steps) == 1 else self.mark(Seq(tuple(steps)), t)

    def parse_parallel(self) -> Subst:
        t = self.tok
        branches = [self.parse_basic()]
        while self.at("||"):
            self.advance()
            branches.append(self.parse_basic())
        return branches[0] if len(branches) == 1 else self.mark(Parallel(tuple(branches)), t)

    def parse_basic(self) -> Subst:
        t = self.tok
        if self.at("skip"):
            self.advance()
            return SKIP
        if self.at("BEGIN"):
            self.advance()
            s = self.parse_subst()
            self.expect("END")
            return s
        if self.at("IF"):
            return self.parse_if()
        if self.at("SELECT", "WHEN"):
            self.advance()
            branches = [(self.parse_pred(), self._then())]
            orelse = None
            while self.at("WHEN"):
                self.advance()
                branches.append((self.parse_pred(), self._then()))
            if self.at("ELSE"):
                self.advance()
                orelse = self.parse_subst()
            self.expect("END")
            return self.mark(Select(tuple(branches), orelse), t)
        if self.at("CHOICE"):
            self.advance()
            branches = [self.parse_subst()]
            while self.at("OR"):
                self.advance()
                branches.append(self.parse_subst())
            self.expect("END")
            return self.mark(Choice(tuple(branches)), t)
        if self.at("ANY"):
            return self.parse_any()
        if t.kind == "ident" and t.text not in KEYWORDS:
            targets = [self.advance()]
            while self.at(","):
                self.advance()
                targets.append(self.ident("assignment target"))
            names = [self._target(x) for x in targets]
            if self.at(":="):
                self.advance()
                exprs = [self.parse_expr()]
                while self.at(","):
                    self.advance()
                    exprs.append(self.parse_expr())
                if len(exprs) != len(names):
                    self.fail("assignment arity mismatch", t)
                assigns = [self.mark(Assign(n, e), x) for n, e, x in zip(names, exprs, targets)]
                return assigns[0] if len(assigns) == 1 else self.mark(Parallel(tuple(assigns)), t)
            if self.at("::") and len(names) == 1:
                self.advance()
                return self.mark(ChooseFrom(names[0], self.parse_domain()), t)
            self.fail(f"expected ':=' or '::', found {self.tok.text or 'end of input'!r}")
        self.fail(f"expected a substitution, found {t.text or 'end of input'!r}")

    def _target(self, tok: Token) -> str:
        name = tok.text
        if any(b == name for b, _ in self.bound):
            self.fail(f"cannot assign bound variable {name}", tok, UnknownIdentifier)
        if name not in self.names:
            self.fail(f"unknown variable {name}", tok, UnknownIdentifier)
        return self.names[name]

    def _then(self) -> Subst:
        self.expect("THEN")
        return self.parse_subst()

    def parse_if(self) -> Subst:
        t = self.advance()
        cond = self.parse_pred()
        then = self._then()
        if self.at("ELSIF"):
            # the remaining chain is an IF nested in the else branch, sharing our END
            self.toks[self.i] = Token("ident", "IF", self.tok.line, self.tok.col)
            orelse = self.parse_if()
            return self.mark(If(cond, then, orelse), t)
        orelse = SKIP
        if self.at("ELSE"):
            self.advance()
            orelse = self.parse_subst()
        self.expect("END")
        return self.mark(If(cond, then, orelse), t)

    def parse_any(self) -> Subst:
        t = self.advance()
        names = [self.ident("ANY variable")]
        while self.at(","):
            self.advance()
            names.append(self.ident("ANY variable"))
        for n in names:
            if n.text in self.names or n.text in self.constants:
                self.fail(f"ANY variable {n.text} is not fresh", n, ParallelClash)
        self.expect("WHERE")
        for n in names:
            self.bound.append((n.text, None))
        try:
            wt = self.tok
            where = self.parse_pred()
            typed: dict = {}
            rest = []
            for c in conjuncts(where):
                if (isinstance(c, Member) and isinstance(c.elem, Var) and c.elem.name in
                        {n.text for n in names} and c.elem.name not in typed):
                    typed[c.elem.name] = c.domain
                else:
                    rest.append(c)
            for n in names:
                if n.text not in typed:
                    self.fail(f"ANY variable {n.text} needs a typing conjunct 'x : S' in WHERE", wt,
                              NonFiniteDomain)
            self.expect("THEN")
            body = self.parse_subst()
            self.expect("END")
        finally:
            del self.bound[len(self.bound) - len(names):]
        where_rest = TRUE if not rest else rest[0] if len(rest) == 1 else And(tuple(rest))
        return self.mark(Any(tuple((n.text, typed[n.text]) for n in names), where_rest, body), t)

    # -- components
    def parse_sets(self):
        while True:
            nt = self.ident("set name")
            if nt.text in self.sets or nt.text == "BOOL":
                self.fail(f"set {nt.text} declared twice", nt)
            if self.at("="):
                self.advance()
                self.expect("{")
                elems = [self.ident("set element")]
                while self.at(","):
                    self.advance()
                    elems.append(self.ident("set element"))
                self.expect("}")
                for e in elems:
                    if e.text in self.constants or e.text in self.sets:
                        self.fail(f"element {e.text} declared twice", e)
                    self.constants[e.text] = nt.text
                self.sets[nt.text] = tuple(e.text for e in elems)
                self.new_sets.append(nt.text)
            else:
                self.sets[nt.text] = None
                self.new_sets.append(nt.text)
            if self.at(";"):
                self.advance()
                continue
            break

    def parse_variable_list(self) -> list:
        out = [self.ident("variable name")]
        while self.at(","):
            self.advance()
            out.append(self.ident("variable name"))
        seen = set()
        for v in out:
            if v.text in seen:
                self.fail(f"variable {v.text} declared twice", v)
            if v.text in self.constants or v.text in self.sets:
                self.fail(f"variable {v.text} clashes with a set or constant", v)
            seen.add(v.text)
        return out

    def parse_events(self) -> dict:
        events = {}
        while self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
            nt = self.advance()
            if nt.text in events:
                self.fail(f"event {nt.text} declared twice", nt)
            self.expect("=")
            events[nt.text] = (self.parse_subst(allow_seq=False), nt)
            if self.at(";"):
                self.advance()
            else:
                break
        return events


# ------------------------------------------------------------------ typing

class _Typer:
    def __init__(self, parser: Parser, env: Mapping[str, Domain]):
        self.p = parser
        self.env = dict(env)

    def err(self, node, msg, cls=DomainMismatch):
        line, col = self.p.positions.get(id(node), (None, None))
        raise cls(msg, line, col)

    def expr(self, e: Expr, env) -> str:
        if isinstance(e, Const):
            return e.type
        if isinstance(e, Var):
            name = e.name[:-1] if e.name.endswith("'") else e.name
            if name not in env:
                self.err(e, f"unknown identifier {name}", UnknownIdentifier)
            return env[name].type
        if isinstance(e, BoolOf):
            self.pred(e.pred, env)
            return BOOL_TYPE
        if isinstance(e, Arith):
            for side in (e.left, e.right):
                if self.expr(side, env) != INT_TYPE:
                    self.err(e, f"arithmetic on non-integer operand {side}")
            return INT_TYPE
        raise TypeError(e)

    def pred(self, p: Pred, env) -> None:
        if isinstance(p, Lit):
            return
        if isinstance(p, Not):
            self.pred(p.arg, env)
        elif isinstance(p, (And, Or)):
            for a in p.args:
                self.pred(a, env)
        elif isinstance(p, (Implies, Iff)):
            self.pred(p.left, env)
            self.pred(p.right, env)
        elif isinstance(p, Cmp):
            lt, rt = self.expr(p.left, env), self.expr(p.right, env)
            if p.op in ("=", "/="):
                if lt != rt:
                    self.err(p, f"comparing {lt} with {rt} in {p}")
            elif lt != INT_TYPE or rt != INT_TYPE:
                self.err(p, f"ordering needs integers in {p}")
        elif isinstance(p, Member):
            et = self.expr(p.elem, env)
            if et != p.domain.type:
                self.err(p, f"{p.elem} of type {et} cannot belong to {p.domain}")
        elif isinstance(p, (Forall, Exists)):
            inner = dict(env)
            inner[p.var] = p.domain
            self.pred(p.body, inner)
        else:
            raise TypeError(p)

    def subst(self, s: Subst, env) -> None:
        if isinstance(s, Skip_):
            return
        if isinstance(s, Assign):
            if s.var not in env:
                self.err(s, f"unknown variable {s.var}", UnknownIdentifier)
            t = self.expr(s.expr, env)
            if t != env[s.var].type:
                self.err(s, f"assigning {t} to {s.var} of type {env[s.var].type}")
        elif isinstance(s, ChooseFrom):
            if s.domain.type != env[s.var].type:
                self.err(s, f"choosing {s.var} from {s.domain} of another type")
        elif isinstance(s, Parallel):
            seen: set = set()
            for b in s.branches:
                self.subst(b, env)
                w = written_vars(b)
                if seen & w:
                    self.err(s, f"parallel branches both assign {', '.join(sorted(seen & w))}", ParallelClash)
                seen |= w
        elif isinstance(s, Choice):
            for b in s.branches:
                self.subst(b, env)
        elif isinstance(s, Seq):
            for b in s.steps:
                self.subst(b, env)
        elif isinstance(s, If):
            self.pred(s.cond, env)
            self.subst(s.then, env)
            self.subst(s.orelse, env)
        elif isinstance(s, Select):
            for g, b in s.branches:
                self.pred(g, env)
                self.subst(b, env)
            if s.orelse is not None:
                self.subst(s.orelse, env)
        elif isinstance(s, Any):
            inner = dict(env)
            for n, d in s.bound:
                inner[n] = d
            self.pred(s.where, inner)
            self.subst(s.body, inner)
        else:
            raise TypeError(s)


from .terms import Skip as Skip_  # noqa: E402


def _typing_domains(inv: Pred, names: list) -> dict:
    out = {}
    for c in conjuncts(inv):
        if isinstance(c, Member) and isinstance(c.elem, Var) and c.elem.name in names and c.elem.name not in out:
            out[c.elem.name] = c.domain
    return out


AbstractionSource = Callable[[str], Machine] | Mapping[str, Machine] | None


def parse_component(source: str, abstractions: AbstractionSource = None):
    """Parse a MACHINE or REFINEMENT.

    A refinement needs its abstraction: pass a mapping from machine name to
    parsed Machine, or a callable doing the lookup.
    """
    p = Parser(source)
    if p.at("MACHINE"):
        p.advance()
        name = p.ident("machine name").text
        return _parse_machine_body(p, name)
    if p.at("REFINEMENT"):
        p.advance()
        name = p.ident("refinement name").text
        p.expect("REFINES")
        at = p.ident("abstraction name")
        abstraction = _lookup(abstractions, at.text)
        if abstraction is None:
            p.fail(f"abstraction {at.text} is not available", at, UnknownIdentifier)
        return _parse_refinement_body(p, name, abstraction)
    p.fail("expected MACHINE or REFINEMENT")


def _lookup(src, name):
    if src is None:
        return None
    if callable(src) and not isinstance(src, Mapping):
        return src(name)
    return src.get(name)


def _clauses(p: Parser, handlers: dict, order_hint: str) -> None:
    seen = set()
    while not p.at("END"):
        t = p.tok
        if t.kind == "ident" and t.text in UNSUPPORTED:
            p.fail(f"clause {t.text} is not supported")
        key = "EVENTS" if t.text == "OPERATIONS" else t.text
        if key not in handlers:
            p.fail(f"expected a clause keyword or END, found {t.text or 'end of input'!r}")
        if key in seen:
            p.fail(f"clause {key} appears twice")
        seen.add(key)
        p.advance()
        handlers[key](t)
    p.expect("END")
    if p.tok.kind != "eof":
        p.fail("text after END")


def _parse_machine_body(p: Parser, name: str) -> Machine:
    st: dict = {"vars": [], "inv": None, "assert": None, "init": None, "events": {}}

    def on_sets(_):
        p.parse_sets()

    def on_vars(_):
        st["vars"] = p.parse_variable_list()
        for v in st["vars"]:
            p.names[v.text] = v.text

    def on_inv(t):
        st["inv"] = p.parse_pred()

    def on_assert(t):
        st["assert"] = _assertion_list(p)

    def on_init(t):
        st["init"] = p.parse_subst()

    def on_events(t):
        st["events"] = p.parse_events()

    _clauses(p, {"SETS": on_sets, "VARIABLES": on_vars, "INVARIANT": on_inv, "ASSERTIONS": on_assert,
                 "INITIALISATION": on_init, "EVENTS": on_events}, "machine")
    names = [v.text for v in st["vars"]]
    inv = st["inv"] if st["inv"] is not None else TRUE
    doms = _typing_domains(inv, names)
    for v in st["vars"]:
        if v.text not in doms:
            raise NonFiniteDomain(f"variable {v.text} has no finite typing conjunct in the invariant",
                                  v.line, v.col)
    variables = {n: doms[n] for n in names}
    typer = _Typer(p, variables)
    typer.pred(inv, variables)
    if st["assert"] is not None:
        typer.pred(st["assert"], variables)
    init = st["init"] if st["init"] is not None else SKIP
    typer.subst(init, variables)
    for ev, (body, _) in st["events"].items():
        typer.subst(body, variables)
    sets = {k: v for k, v in p.sets.items()}
    for k, v in sets.items():
        if v is None:
            raise NonFiniteDomain(f"deferred set {k} is not supported")
    return Machine(name, sets, variables, inv, st["assert"], init,
                   {k: b for k, (b, _) in st["events"].items()})


def _assertion_list(p: Parser) -> Pred:
    first = p.parse_pred()
    parts = [first]
    while p.at(";"):
        p.advance()
        parts.append(p.parse_pred())
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_refinement_body(p: Parser, name: str, abstraction: Machine) -> Refinement:
    for s, elems in abstraction.sets.items():
        p.sets[s] = tuple(elems)
        for e in elems:
            p.constants[e] = s
    abs_vars = list(abstraction.variables)
    st: dict = {"vars": [], "inv": None, "variant": None, "decs": None, "init": None, "events": {},
                "renaming": {}}

    def on_sets(_):
        p.parse_sets()

    def on_vars(_):
        st["vars"] = p.parse_variable_list()
        conc = [v.text for v in st["vars"]]
        taken = set(conc) | set(abs_vars) | set(p.constants) | set(p.sets)
        renaming = {}
        for a in abs_vars:
            if a in conc:
                new = "abs_" + a
                while new in taken:
                    new = "abs_" + new
                taken.add(new)
                renaming[a] = new
        st["renaming"] = renaming
        p.names = {c: c for c in conc}

    def abstract_scope() -> dict:
        return {a: st["renaming"].get(a, a) for a in abs_vars}

    def on_inv(t):
        saved = dict(p.names)
        names = {a: st["renaming"].get(a, a) for a in abs_vars if a not in st["renaming"]}
        names.update({r: r for r in st["renaming"].values()})
        names.update(saved)
        p.names = names
        try:
            st["inv"] = p.parse_pred()
        finally:
            p.names = saved

    def on_variant(t):
        st["variant"] = (p.parse_expr(), t)

    def on_assert(t):
        st["decs"] = _decompositions(p, abstract_scope)

    def on_init(t):
        st["init"] = p.parse_subst()

    def on_events(t):
        st["events"] = p.parse_events()

    _clauses(p, {"SETS": on_sets, "VARIABLES": on_vars, "INVARIANT": on_inv, "VARIANT": on_variant,
                 "ASSERTIONS": on_assert, "INITIALISATION": on_init, "EVENTS": on_events}, "refinement")
    for k, v in p.sets.items():
        if v is None:
            raise NonFiniteDomain(f"deferred set {k} is not supported")
    renaming = st["renaming"]
    abstraction_r = rename_machine(abstraction, renaming)
    conc = [v.text for v in st["vars"]]
    gluing = st["inv"] if st["inv"] is not None else TRUE
    doms = _typing_domains(gluing, conc)
    for v in st["vars"]:
        if v.text not in doms:
            if v.text in renaming:
                doms[v.text] = abstraction.variables[v.text]
            else:
                raise NonFiniteDomain(f"variable {v.text} has no finite typing conjunct in the invariant",
                                      v.line, v.col)
    variables = {n: doms[n] for n in conc}
    joint = dict(abstraction_r.variables)
    joint.update(variables)
    typer = _Typer(p, joint)
    typer.pred(gluing, joint)
    variant = None
    if st["variant"] is not None:
        variant, vt = st["variant"]
        if typer.expr(variant, variables) != INT_TYPE:
            raise DomainMismatch("variant must be an integer expression", vt.line, vt.col)
    decs = st["decs"] or ()
    for d in decs:
        typer.pred(d.abstract, dict(abstraction_r.variables))
        for sp in d.substates:
            typer.pred(sp, variables)
    init = st["init"] if st["init"] is not None else SKIP
    typer.subst(init, variables)
    events = {k: b for k, (b, _) in st["events"].items()}
    for ev, (body, _) in st["events"].items():
        typer.subst(body, variables)
    missing = [e for e in abstraction.events if e not in events]
    if missing:
        raise ModelError(f"refinement {name} drops abstract events: {', '.join(missing)}")
    links = tuple(Cmp("=", Var(c), Var(a)) for c, a in renaming.items())
    subs = [sp for d in decs for sp in d.substates]
    assertion = None if not decs else subs[0] if len(subs) == 1 else Or(tuple(subs))
    concrete = Machine(name, dict(p.sets), variables, gluing, assertion, init, events)
    return Refinement(name, abstraction.name, abstraction_r, concrete, tuple(p.new_sets), links, variant,
                      tuple(decs), renaming)


def _decompositions(p: Parser, abstract_scope) -> tuple:
    decs = [_one_decomposition(p, abstract_scope)]
    while p.at("&", ";"):
        p.advance()
        decs.append(_one_decomposition(p, abstract_scope))
    return tuple(decs)


def _one_decomposition(p: Parser, abstract_scope) -> Decomposition:
    start = p.i
    if p.at("("):
        # either a parenthesised equivalence or a parenthesised left-hand side
        p.advance()
        try:
            d = _equivalence(p, abstract_scope)
            p.expect(")")
            return d
        except SyntaxError_:
            p.i = start
    return _equivalence(p, abstract_scope)


def _equivalence(p: Parser, abstract_scope) -> Decomposition:
    t = p.tok
    saved = p.names
    p.names = abstract_scope()
    try:
        lhs = p.parse_implication()
    finally:
        p.names = saved
    if not p.at("<=>"):
        p.fail("refinement ASSERTIONS must be a conjunction of equivalences 'abstract <=> sub or ...'")
    p.advance()
    rhs = p.parse_implication()
    return Decomposition(lhs, tuple(disjuncts(rhs)))


def rename_machine(m: Machine, renaming: Mapping[str, str]) -> Machine:
    if not renaming:
        return m
    variables = {renaming.get(k, k): d for k, d in m.variables.items()}
    return Machine(m.name, m.sets, variables, rename_vars(m.invariant, renaming),
                   None if m.assertion is None else rename_vars(m.assertion, renaming),
                   rename_vars(m.initialisation, renaming),
                   {k: rename_vars(b, renaming) for k, b in m.events.items()})


def parse_predicate(text: str, signature: Signature, allow_primed: bool = False,
                    aliases: Mapping[str, Pred] | None = None) -> Pred:
    """Read a stand-alone predicate over a signature's variables.

    ``aliases`` maps reserved words (e.g. INVARIANT) to predicates they stand for.
    """
    p = Parser(text)
    _load_signature(p, signature)
    p.allow_primed = allow_primed
    p.aliases = dict(aliases or {})
    pred = p.parse_pred()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after predicate")
    env = dict(signature.variables)
    _Typer(p, env).pred(pred, env)
    return pred


def parse_expression(text: str, signature: Signature) -> Expr:
    p = Parser(text)
    _load_signature(p, signature)
    e = p.parse_expr()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after expression")
    _Typer(p, dict(signature.variables)).expr(e, dict(signature.variables))
    return e


def parse_substitution(text: str, signature: Signature) -> Subst:
    p = Parser(text)
    _load_signature(p, signature)
    s = p.parse_subst()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after substitution")
    _Typer(p, dict(signature.variables)).subst(s, dict(signature.variables))
    return s


def _load_signature(p: Parser, sig: Signature) -> None:
    for s, elems in sig.sets.items():
        p.sets[s] = tuple(elems)
        for e in elems:
            p.constants[e] = s
    p.names = {v: v for v in sig.variables}
