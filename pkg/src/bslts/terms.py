"""Terms of the modelling language: expressions, predicates and substitutions.

All terms are immutable dataclasses and compare structurally.  The helpers
here cover free variables, capture-avoiding substitution, a light
simplifier and the canonical pretty-printer used for state names, DOT
labels and the structured dump.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

Value = Union[str, int]

BOOL_TYPE = "BOOL"
INT_TYPE = "INT"


@dataclass(frozen=True)
class Domain:
    """A finite carrier: BOOL, an enumerated set, a subset of one, or an interval."""

    name: str | None
    values: tuple
    type: str

    def __str__(self) -> str:
        if self.name:
            return self.name
        vals = self.values
        if self.type == INT_TYPE:
            if not vals:
                return "1..0"
            if len(vals) > 1 and list(vals) == list(range(vals[0], vals[-1] + 1)):
                return f"{vals[0]}..{vals[-1]}"
        return "{" + ", ".join(str(v) for v in vals) + "}"

    def __len__(self) -> int:
        return len(self.values)


BOOL = Domain("BOOL", ("FALSE", "TRUE"), BOOL_TYPE)


def interval(lo: int, hi: int) -> Domain:
    return Domain(None, tuple(range(lo, hi + 1)), INT_TYPE)


# ---------------------------------------------------------------- expressions

class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: Value
    type: str


@dataclass(frozen=True)
class BoolOf(Expr):
    pred: "Pred"


@dataclass(frozen=True)
class Arith(Expr):
    op: str  # '+' or '-'
    left: Expr
    right: Expr


TRUE_C = Const("TRUE", BOOL_TYPE)
FALSE_C = Const("FALSE", BOOL_TYPE)


def const(value: Value, type_: str | None = None) -> Const:
    if type_ is None:
        type_ = INT_TYPE if isinstance(value, int) else BOOL_TYPE
    return Const(value, type_)


# ----------------------------------------------------------------- predicates

class Pred:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Lit(Pred):
    value: bool


@dataclass(frozen=True)
class Not(Pred):
    arg: Pred


@dataclass(frozen=True)
class And(Pred):
    args: tuple


@dataclass(frozen=True)
class Or(Pred):
    args: tuple


@dataclass(frozen=True)
class Implies(Pred):
    left: Pred
    right: Pred


@dataclass(frozen=True)
class Iff(Pred):
    left: Pred
    right: Pred


@dataclass(frozen=True)
class Cmp(Pred):
    """Relational atom; op is one of = /= < <= > >=."""

    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Member(Pred):
    elem: Expr
    domain: Domain


@dataclass(frozen=True)
class Forall(Pred):
    var: str
    domain: Domain
    body: Pred


@dataclass(frozen=True)
class Exists(Pred):
    var: str
    domain: Domain
    body: Pred


TRUE = Lit(True)
FALSE = Lit(False)

CMP_OPS = ("=", "/=", "<", "<=", ">", ">=")
NEGATED_CMP = {"=": "/=", "/=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def conj(*preds: Pred) -> Pred:
    """Conjunction that flattens nested conjunctions and drops `true`."""
    out: list[Pred] = []
    for p in preds:
        if isinstance(p, And):
            out.extend(p.args)
        elif p != TRUE:
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*preds: Pred) -> Pred:
    out: list[Pred] = []
    for p in preds:
        if isinstance(p, Or):
            out.extend(p.args)
        elif p != FALSE:
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def eq(name: str, value: Value, type_: str | None = None) -> Cmp:
    return Cmp("=", Var(name), const(value, type_))


def conjuncts(p: Pred) -> tuple:
    return p.args if isinstance(p, And) else (p,)


def disjuncts(p: Pred) -> tuple:
    return p.args if isinstance(p, Or) else (p,)


# -------------------------------------------------------------- substitutions

class Subst:
    __slots__ = ()

    def __str__(self) -> str:
        return show_subst(self)


@dataclass(frozen=True)
class Skip(Subst):
    pass


@dataclass(frozen=True)
class Assign(Subst):
    var: str
    expr: Expr


@dataclass(frozen=True)
class ChooseFrom(Subst):
    """x :: S"""

    var: str
    domain: Domain


@dataclass(frozen=True)
class Parallel(Subst):
    branches: tuple


@dataclass(frozen=True)
class If(Subst):
    cond: Pred
    then: Subst
    orelse: Subst


@dataclass(frozen=True)
class Select(Subst):
    branches: tuple  # of (Pred, Subst)
    orelse: Subst | None = None


@dataclass(frozen=True)
class Choice(Subst):
    branches: tuple


@dataclass(frozen=True)
class Any(Subst):
    bound: tuple  # of (name, Domain)
    where: Pred
    body: Subst


@dataclass(frozen=True)
class Seq(Subst):
    steps: tuple


SKIP = Skip()

Term = Union[Expr, Pred, Subst]


# ------------------------------------------------------------- free variables

def free_vars(t) -> frozenset:
    """Free variable names of an expression, predicate or substitution (reads and writes)."""
    acc: set = set()
    _fv(t, frozenset(), acc)
    return frozenset(acc)


def _fv(t, bound: frozenset, acc: set) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            acc.add(t.name)
    elif isinstance(t, (Const, Lit, Skip)):
        pass
    elif isinstance(t, BoolOf):
        _fv(t.pred, bound, acc)
    elif isinstance(t, (Arith, Cmp, Implies, Iff)):
        _fv(t.left, bound, acc)
        _fv(t.right, bound, acc)
    elif isinstance(t, Not):
        _fv(t.arg, bound, acc)
    elif isinstance(t, (And, Or)):
        for a in t.args:
            _fv(a, bound, acc)
    elif isinstance(t, Member):
        _fv(t.elem, bound, acc)
    elif isinstance(t, (Forall, Exists)):
        _fv(t.body, bound | {t.var}, acc)
    elif isinstance(t, Assign):
        if t.var not in bound:
            acc.add(t.var)
        _fv(t.expr, bound, acc)
    elif isinstance(t, ChooseFrom):
        if t.var not in bound:
            acc.add(t.var)
    elif isinstance(t, (Parallel, Choice)):
        for b in t.branches:
            _fv(b, bound, acc)
    elif isinstance(t, Seq):
        for b in t.steps:
            _fv(b, bound, acc)
    elif isinstance(t, If):
        _fv(t.cond, bound, acc)
        _fv(t.then, bound, acc)
        _fv(t.orelse, bound, acc)
    elif isinstance(t, Select):
        for g, b in t.branches:
            _fv(g, bound, acc)
            _fv(b, bound, acc)
        if t.orelse is not None:
            _fv(t.orelse, bound, acc)
    elif isinstance(t, Any):
        inner = bound | {n for n, _ in t.bound}
        _fv(t.where, inner, acc)
        _fv(t.body, inner, acc)
    else:
        raise TypeError(f"not a term: {t!r}")


def all_names(t) -> frozenset:
    """Every identifier used in a term, free or bound."""
    acc: set = set()

    def walk(x):
        if isinstance(x, Var):
            acc.add(x.name)
        elif isinstance(x, (Forall, Exists)):
            acc.add(x.var)
            walk(x.body)
        elif isinstance(x, Any):
            acc.update(n for n, _ in x.bound)
            walk(x.where)
            walk(x.body)
        elif isinstance(x, (Assign, ChooseFrom)):
            acc.add(x.var)
            if isinstance(x, Assign):
                walk(x.expr)
        else:
            for child in _children(x):
                walk(child)

    walk(t)
    return frozenset(acc)


def _children(t) -> Iterable:
    if isinstance(t, BoolOf):
        return (t.pred,)
    if isinstance(t, (Arith, Cmp, Implies, Iff)):
        return (t.left, t.right)
    if isinstance(t, Not):
        return (t.arg,)
    if isinstance(t, (And, Or)):
        return t.args
    if isinstance(t, Member):
        return (t.elem,)
    if isinstance(t, (Parallel, Choice)):
        return t.branches
    if isinstance(t, Seq):
        return t.steps
    if isinstance(t, If):
        return (t.cond, t.then, t.orelse)
    if isinstance(t, Select):
        out = [x for br in t.branches for x in br]
        if t.orelse is not None:
            out.append(t.orelse)
        return out
    return ()


def written_vars(s: Subst) -> frozenset:
    """Variables a substitution may assign."""
    if isinstance(s, (Assign, ChooseFrom)):
        return frozenset((s.var,))
    if isinstance(s, Skip):
        return frozenset()
    if isinstance(s, (Parallel, Choice)):
        return frozenset().union(*(written_vars(b) for b in s.branches))
    if isinstance(s, Seq):
        return frozenset().union(*(written_vars(b) for b in s.steps))
    if isinstance(s, If):
        return written_vars(s.then) | written_vars(s.orelse)
    if isinstance(s, Select):
        w = frozenset().union(*(written_vars(b) for _, b in s.branches))
        if s.orelse is not None:
            w |= written_vars(s.orelse)
        return w
    if isinstance(s, Any):
        return written_vars(s.body) - {n for n, _ in s.bound}
    raise TypeError(f"not a substitution: {s!r}")


def fresh_name(base: str, avoid) -> str:
    k = 1
    while f"{base}_{k}" in avoid:
        k += 1
    return f"{base}_{k}"


# ------------------------------------------------------------- substitution

def substitute(t, mapping: Mapping[str, Expr]):
    """Capture-avoiding replacement of free variables in an expression or predicate."""
    mapping = {k: v for k, v in mapping.items() if not (isinstance(v, Var) and v.name == k)}
    if not mapping:
        return t
    return _sub(t, mapping)


def _sub(t, m: Mapping[str, Expr]):
    if isinstance(t, Var):
        return m.get(t.name, t)
    if isinstance(t, (Const, Lit)):
        return t
    if isinstance(t, BoolOf):
        return BoolOf(_sub(t.pred, m))
    if isinstance(t, Arith):
        return Arith(t.op, _sub(t.left, m), _sub(t.right, m))
    if isinstance(t, Cmp):
        return Cmp(t.op, _sub(t.left, m), _sub(t.right, m))
    if isinstance(t, Member):
        return Member(_sub(t.elem, m), t.domain)
    if isinstance(t, Not):
        return Not(_sub(t.arg, m))
    if isinstance(t, And):
        return And(tuple(_sub(a, m) for a in t.args))
    if isinstance(t, Or):
        return Or(tuple(_sub(a, m) for a in t.args))
    if isinstance(t, Implies):
        return Implies(_sub(t.left, m), _sub(t.right, m))
    if isinstance(t, Iff):
        return Iff(_sub(t.left, m), _sub(t.right, m))
    if isinstance(t, (Forall, Exists)):
        inner = {k: v for k, v in m.items() if k != t.var}
        body_fv = free_vars(t.body)
        inner = {k: v for k, v in inner.items() if k in body_fv}
        if not inner:
            return t
        incoming = frozenset().union(*(free_vars(v) for v in inner.values()))
        var, body = t.var, t.body
        if var in incoming:
            new = fresh_name(var, incoming | all_names(body) | set(inner))
            body = _sub(body, {var: Var(new)})
            var = new
        return type(t)(var, t.domain, _sub(body, inner))
    raise TypeError(f"cannot substitute into {t!r}")


def substitute_reads(s: Subst, mapping: Mapping[str, Expr]) -> Subst:
    """Replace variable *reads* inside a substitution; assignment targets are untouched."""
    if isinstance(s, Skip) or isinstance(s, ChooseFrom):
        return s
    if isinstance(s, Assign):
        return Assign(s.var, substitute(s.expr, mapping))
    if isinstance(s, Parallel):
        return Parallel(tuple(substitute_reads(b, mapping) for b in s.branches))
    if isinstance(s, Choice):
        return Choice(tuple(substitute_reads(b, mapping) for b in s.branches))
    if isinstance(s, Seq):
        return Seq(tuple(substitute_reads(b, mapping) for b in s.steps))
    if isinstance(s, If):
        return If(substitute(s.cond, mapping), substitute_reads(s.then, mapping),
                  substitute_reads(s.orelse, mapping))
    if isinstance(s, Select):
        return Select(tuple((substitute(g, mapping), substitute_reads(b, mapping)) for g, b in s.branches),
                      None if s.orelse is None else substitute_reads(s.orelse, mapping))
    if isinstance(s, Any):
        names = {n for n, _ in s.bound}
        inner = {k: v for k, v in mapping.items() if k not in names}
        return Any(s.bound, substitute(s.where, inner), substitute_reads(s.body, inner))
    raise TypeError(f"not a substitution: {s!r}")


def rename_vars(t, renaming: Mapping[str, str]):
    """Rename free variables everywhere, including assignment targets."""
    if not renaming:
        return t
    if isinstance(t, (Expr, Pred)):
        return substitute(t, {k: Var(v) for k, v in renaming.items()})
    if isinstance(t, Skip):
        return t
    if isinstance(t, Assign):
        return Assign(renaming.get(t.var, t.var), rename_vars(t.expr, renaming))
    if isinstance(t, ChooseFrom):
        return ChooseFrom(renaming.get(t.var, t.var), t.domain)
    if isinstance(t, Parallel):
        return Parallel(tuple(rename_vars(b, renaming) for b in t.branches))
    if isinstance(t, Choice):
        return Choice(tuple(rename_vars(b, renaming) for b in t.branches))
    if isinstance(t, Seq):
        return Seq(tuple(rename_vars(b, renaming) for b in t.steps))
    if isinstance(t, If):
        return If(rename_vars(t.cond, renaming), rename_vars(t.then, renaming), rename_vars(t.orelse, renaming))
    if isinstance(t, Select):
        return Select(tuple((rename_vars(g, renaming), rename_vars(b, renaming)) for g, b in t.branches),
                      None if t.orelse is None else rename_vars(t.orelse, renaming))
    if isinstance(t, Any):
        names = {n for n, _ in t.bound}
        inner = {k: v for k, v in renaming.items() if k not in names}
        return Any(t.bound, rename_vars(t.where, inner), rename_vars(t.body, inner))
    raise TypeError(f"cannot rename in {t!r}")


# ------------------------------------------------------------------ simplify

def simplify(p):
    """Constant folding, flattening and duplicate removal.  Not a normal form."""
    if isinstance(p, Expr):
        return _simp_expr(p)
    return _simp(p)


def _simp_expr(e: Expr) -> Expr:
    if isinstance(e, BoolOf):
        inner = _simp(e.pred)
        if isinstance(inner, Lit):
            return TRUE_C if inner.value else FALSE_C
        return BoolOf(inner)
    if isinstance(e, Arith):
        l, r = _simp_expr(e.left), _simp_expr(e.right)
        if isinstance(l, Const) and isinstance(r, Const):
            return Const(l.value + r.value if e.op == "+" else l.value - r.value, INT_TYPE)
        return Arith(e.op, l, r)
    return e


def _simp(p: Pred) -> Pred:
    if isinstance(p, Lit):
        return p
    if isinstance(p, Not):
        a = _simp(p.arg)
        if isinstance(a, Lit):
            return Lit(not a.value)
        if isinstance(a, Not):
            return a.arg
        if isinstance(a, Cmp) and a.op in ("=", "/="):
            return Cmp(NEGATED_CMP[a.op], a.left, a.right)
        return Not(a)
    if isinstance(p, And):
        out: list[Pred] = []
        for a in p.args:
            a = _simp(a)
            if a == FALSE:
                return FALSE
            for x in conjuncts(a):
                if x != TRUE and x not in out:
                    out.append(x)
        if any(_complement(x) in out for x in out):
            return FALSE
        out = _same_var_constants(out, conj_mode=True)
        if out is None:
            return FALSE
        return conj(*out)
    if isinstance(p, Or):
        out = []
        for a in p.args:
            a = _simp(a)
            if a == TRUE:
                return TRUE
            for x in disjuncts(a):
                if x != FALSE and x not in out:
                    out.append(x)
        if any(_complement(x) in out for x in out):
            return TRUE
        out = _same_var_constants(out, conj_mode=False)
        if out is None:
            return TRUE
        return disj(*out)
    if isinstance(p, Implies):
        l, r = _simp(p.left), _simp(p.right)
        if l == TRUE:
            return r
        if l == FALSE or r == TRUE or l == r:
            return TRUE
        if r == FALSE:
            return _simp(Not(l))
        return Implies(l, r)
    if isinstance(p, Iff):
        l, r = _simp(p.left), _simp(p.right)
        if l == r:
            return TRUE
        if l == TRUE:
            return r
        if r == TRUE:
            return l
        if l == FALSE:
            return _simp(Not(r))
        if r == FALSE:
            return _simp(Not(l))
        return Iff(l, r)
    if isinstance(p, Cmp):
        l, r = _simp_expr(p.left), _simp_expr(p.right)
        if isinstance(l, Const) and isinstance(r, Const):
            return Lit(_compare(p.op, l.value, r.value))
        if l == r and p.op in ("=", "<=", ">="):
            return TRUE
        if l == r and p.op in ("/=", "<", ">"):
            return FALSE
        if p.op in ("=", "/="):
            # bool(P) = TRUE  ~>  P
            for a, b in ((l, r), (r, l)):
                if isinstance(a, BoolOf) and isinstance(b, Const):
                    positive = (b.value == "TRUE") == (p.op == "=")
                    return a.pred if positive else _simp(Not(a.pred))
        return Cmp(p.op, l, r)
    if isinstance(p, Member):
        e = _simp_expr(p.elem)
        if isinstance(e, Const):
            return Lit(e.value in p.domain.values)
        return Member(e, p.domain)
    if isinstance(p, (Forall, Exists)):
        body = _simp(p.body)
        if isinstance(p, Forall):
            body = _drop_own_typing(body, p.var, p.domain, conj_mode=False)
        else:
            body = _drop_own_typing(body, p.var, p.domain, conj_mode=True)
        if not p.domain.values:
            return TRUE if isinstance(p, Forall) else FALSE
        point = _one_point(p.var, p.domain, body, isinstance(p, Exists))
        if point is not None:
            return _simp(point)
        fv = free_vars(body)
        if p.var not in fv:
            return body
        if len(fv) == 1 and len(p.domain.values) <= 64:
            from .prover import evaluate  # closed: decide it outright
            return Lit(evaluate(type(p)(p.var, p.domain, body), {}))
        return type(p)(p.var, p.domain, body)
    raise TypeError(f"not a predicate: {p!r}")


def _var_const(p: Pred):
    """(name, op, value) for ``x = c`` / ``x /= c`` atoms, else None."""
    if isinstance(p, Cmp) and p.op in ("=", "/="):
        if isinstance(p.left, Var) and isinstance(p.right, Const):
            return p.left.name, p.op, p.right.value
        if isinstance(p.right, Var) and isinstance(p.left, Const):
            return p.right.name, p.op, p.left.value
    return None


def _same_var_constants(items: list, conj_mode: bool):
    """Combine equalities with distinct constants on one variable.

    In a conjunction x=a & x=b (a /= b) is false and x=a makes x/=b redundant;
    dually in a disjunction.  None signals the absorbing literal.
    """
    pinned: dict = {}
    strong = "=" if conj_mode else "/="
    for x in items:
        vc = _var_const(x)
        if vc and vc[1] == strong:
            if vc[0] in pinned and pinned[vc[0]] != vc[2]:
                return None
            pinned[vc[0]] = vc[2]
    if not pinned:
        return items
    out = []
    for x in items:
        vc = _var_const(x)
        if vc and vc[1] != strong and vc[0] in pinned and pinned[vc[0]] != vc[2]:
            continue
        out.append(x)
    return out


def simplify_typed(p: Pred, domains: Mapping[str, Domain]) -> Pred:
    """simplify, additionally using that each variable ranges over its domain."""
    for _ in range(4):
        q = _simp(_typed(p, dict(domains)))
        if q == p:
            break
        p = q
    return p


def _typed(p: Pred, doms: dict) -> Pred:
    if isinstance(p, Member):
        e = p.elem
        if isinstance(e, Var) and e.name in doms and set(doms[e.name].values) <= set(p.domain.values):
            return TRUE
        if isinstance(e, BoolOf) and {"TRUE", "FALSE"} <= set(p.domain.values):
            return TRUE
        return p
    if isinstance(p, Cmp):
        vc = _var_const(p)
        if vc and vc[0] in doms:
            name, op, value = vc
            values = doms[name].values
            if value not in values:
                return Lit(op == "/=")
            if op == "/=" and len(values) == 2:
                other = values[0] if values[1] == value else values[1]
                return Cmp("=", Var(name), Const(other, doms[name].type))
        return p
    if isinstance(p, Not):
        return Not(_typed(p.arg, doms))
    if isinstance(p, (And, Or)):
        return type(p)(tuple(_typed(a, doms) for a in p.args))
    if isinstance(p, (Implies, Iff)):
        return type(p)(_typed(p.left, doms), _typed(p.right, doms))
    if isinstance(p, (Forall, Exists)):
        inner = dict(doms)
        inner[p.var] = p.domain
        return type(p)(p.var, p.domain, _typed(p.body, inner))
    return p


def _one_point(var: str, dom: Domain, body: Pred, existential: bool):
    """#x.(x=c & P) ~> P[c/x] and !x.(x=c => P) ~> P[c/x] for a constant c of the domain."""
    if existential:
        parts = conjuncts(body)
    elif isinstance(body, Implies):
        parts = conjuncts(body.left)
    else:
        return None
    for a in parts:
        vc = _var_const(a)
        if vc and vc[0] == var and vc[1] == "=":
            c = a.right if isinstance(a.right, Const) else a.left
            if c.value not in dom.values:
                return FALSE if existential else TRUE
            return substitute(body, {var: c})
    return None


def _drop_own_typing(body: Pred, var: str, dom: Domain, conj_mode: bool) -> Pred:
    typing = Member(Var(var), dom)
    if body == typing:
        return TRUE
    if conj_mode and isinstance(body, And) and typing in body.args:
        return conj(*(a for a in body.args if a != typing))
    if not conj_mode and isinstance(body, Implies):
        left = body.left
        if left == typing:
            return body.right
        if isinstance(left, And) and typing in left.args:
            return Implies(conj(*(a for a in left.args if a != typing)), body.right)
    return body


def _complement(p: Pred) -> Pred:
    if isinstance(p, Not):
        return p.arg
    if isinstance(p, Cmp) and p.op in ("=", "/="):
        return Cmp(NEGATED_CMP[p.op], p.left, p.right)
    return Not(p)


def _compare(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "/=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(op)


# ------------------------------------------------------------ pretty printer

_IFF, _IMP, _OR, _AND, _ATOM = 1, 2, 3, 4, 5


def _prec(p: Pred) -> int:
    if isinstance(p, Iff):
        return _IFF
    if isinstance(p, Implies):
        return _IMP
    if isinstance(p, Or):
        return _OR
    if isinstance(p, And):
        return _AND
    return _ATOM


def _wrap(p: Pred, parens: bool) -> str:
    s = show(p)
    return f"({s})" if parens else s


def show(t) -> str:
    """Canonical concrete syntax for an expression or predicate."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, BoolOf):
        return f"bool({show(t.pred)})"
    if isinstance(t, Arith):
        left = show(t.left)
        right = show(t.right)
        if isinstance(t.right, Arith):
            right = f"({right})"
        return f"{left} {t.op} {right}"
    if isinstance(t, Lit):
        return "true" if t.value else "false"
    if isinstance(t, Cmp):
        return f"{show(t.left)}{t.op}{show(t.right)}"
    if isinstance(t, Member):
        return f"{show(t.elem)}:{t.domain}"
    if isinstance(t, Not):
        return f"not({show(t.arg)})"
    if isinstance(t, And):
        return " & ".join(_wrap(a, _prec(a) <= _AND) for a in t.args)
    if isinstance(t, Or):
        return " or ".join(_wrap(a, _prec(a) <= _OR) for a in t.args)
    if isinstance(t, Implies):
        return f"{_wrap(t.left, _prec(t.left) <= _IMP)} => {_wrap(t.right, _prec(t.right) <= _IMP)}"
    if isinstance(t, Iff):
        return f"{_wrap(t.left, _prec(t.left) <= _IFF)} <=> {_wrap(t.right, _prec(t.right) <= _IFF)}"
    if isinstance(t, Forall):
        return f"!{t.var}.({t.var}:{t.domain} => {_wrap(t.body, _prec(t.body) <= _IMP)})"
    if isinstance(t, Exists):
        if t.body == TRUE:
            return f"#{t.var}.({t.var}:{t.domain})"
        return f"#{t.var}.({t.var}:{t.domain} & {_wrap(t.body, _prec(t.body) < _AND)})"
    if isinstance(t, Subst):
        return show_subst(t)
    raise TypeError(f"cannot show {t!r}")


def show_subst(s: Subst, indent: int = 0) -> str:
    pad = "  " * indent
    inner = indent + 1

    def block(x: Subst) -> str:
        return show_subst(x, inner)

    if isinstance(s, Skip):
        return pad + "skip"
    if isinstance(s, Assign):
        return f"{pad}{s.var} := {show(s.expr)}"
    if isinstance(s, ChooseFrom):
        return f"{pad}{s.var} :: {s.domain}"
    if isinstance(s, Parallel):
        parts = []
        for b in s.branches:
            if isinstance(b, (Seq, Parallel)):
                parts.append("BEGIN\n" + show_subst(b, inner) + "\n" + pad + "END")
            else:
                parts.append(show_subst(b, indent).strip())
        return pad + (" ||\n" + pad).join(parts)
    if isinstance(s, Seq):
        parts = []
        for b in s.steps:
            if isinstance(b, Seq):
                parts.append(f"{pad}BEGIN\n{show_subst(b, inner)}\n{pad}END")
            else:
                parts.append(show_subst(b, indent))
        return " ;\n".join(parts)
    if isinstance(s, If):
        out = f"{pad}IF {show(s.cond)} THEN\n{block(s.then)}"
        if s.orelse != SKIP:
            out += f"\n{pad}ELSE\n{block(s.orelse)}"
        return out + f"\n{pad}END"
    if isinstance(s, Select):
        (g0, b0), *rest = s.branches
        out = f"{pad}SELECT {show(g0)} THEN\n{block(b0)}"
        for g, b in rest:
            out += f"\n{pad}WHEN {show(g)} THEN\n{block(b)}"
        if s.orelse is not None:
            out += f"\n{pad}ELSE\n{block(s.orelse)}"
        return out + f"\n{pad}END"
    if isinstance(s, Choice):
        return f"{pad}CHOICE\n" + f"\n{pad}OR\n".join(block(b) for b in s.branches) + f"\n{pad}END"
    if isinstance(s, Any):
        names = ", ".join(n for n, _ in s.bound)
        typing = [Member(Var(n), d) for n, d in s.bound]
        rest = [] if s.where == TRUE else list(conjuncts(s.where))
        where = show(And(tuple(typing + rest))) if len(typing + rest) > 1 else show((typing + rest)[0])
        return f"{pad}ANY {names} WHERE {where} THEN\n{block(s.body)}\n{pad}END"
    raise TypeError(f"cannot show {s!r}")
