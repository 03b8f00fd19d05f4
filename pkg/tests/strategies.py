"""Hypothesis strategies: random predicates and substitutions over a:BOOL, b:0..2."""
from hypothesis import strategies as st

from bslts.terms import (BOOL, FALSE_C, INT_TYPE, TRUE_C, And, Any, Arith, Assign, BoolOf, ChooseFrom, Choice,
                         Cmp, Const, Domain, Exists, Forall, If, Implies, Member, Not, Or, Parallel, Select, Seq,
                         Skip, Var, interval)

B_DOM = interval(0, 2)
K_DOM = interval(0, 1)
VARIABLES = [("a", BOOL), ("b", B_DOM)]
PRIMED = [("a'", BOOL), ("b'", B_DOM)]


def atoms(extra_int=()):
    ints = ["b", *extra_int]
    bool_atoms = st.sampled_from([Cmp("=", Var("a"), TRUE_C), Cmp("=", Var("a"), FALSE_C)])
    int_atoms = st.builds(lambda op, v, k: Cmp(op, Var(v), Const(k, INT_TYPE)),
                          st.sampled_from(["=", "/=", "<", "<=", ">", ">="]), st.sampled_from(ints),
                          st.integers(0, 3))
    member = st.builds(lambda vals: Member(Var("b"), Domain(None, tuple(sorted(vals)), INT_TYPE)),
                       st.sets(st.integers(0, 2), max_size=3))
    return st.one_of(bool_atoms, int_atoms, member)


def preds(extra_int=(), quantifiers=True):
    def extend(children):
        parts = [
            st.builds(Not, children),
            st.builds(lambda xs: And(tuple(xs)), st.lists(children, min_size=2, max_size=3)),
            st.builds(lambda xs: Or(tuple(xs)), st.lists(children, min_size=2, max_size=3)),
            st.builds(Implies, children, children),
        ]
        if quantifiers:
            parts.append(st.builds(lambda body: Exists("q", K_DOM, body), children))
            parts.append(st.builds(lambda body: Forall("q", K_DOM, body), children))
        return st.one_of(*parts)

    base = atoms(("q",) + tuple(extra_int)) if quantifiers else atoms(extra_int)
    # q may occur free; close it so every generated predicate reads only a and b
    closed = st.recursive(base, extend, max_leaves=6)
    return closed.map(lambda p: Exists("q", K_DOM, p) if quantifiers else p)


def _expr(var, locals_):
    if var == "a":
        return st.one_of(st.sampled_from([TRUE_C, FALSE_C, Var("a")]),
                         st.builds(BoolOf, preds(locals_, quantifiers=False)))
    ints = [Var("b"), *(Var(k) for k in locals_)]
    return st.one_of(st.builds(lambda k: Const(k, INT_TYPE), st.integers(0, 2)), st.sampled_from(ints),
                     st.builds(lambda e, k: Arith("+", e, Const(k, INT_TYPE)), st.sampled_from(ints),
                               st.integers(0, 1)),
                     st.builds(lambda e: Arith("-", e, Const(1, INT_TYPE)), st.sampled_from(ints)))


@st.composite
def substs(draw, writable=("a", "b"), depth=3, locals_=()):
    """A substitution writing only ``writable``; ANY-bound names are read-only."""
    writable = tuple(writable)
    leaf = ["skip"] + (["assign", "choose"] if writable else [])
    nodes = leaf if depth == 0 else leaf + ["if", "select", "choice", "any", "seq"] + \
        (["parallel"] if len(writable) > 1 else [])
    kind = draw(st.sampled_from(nodes))
    guard = preds(locals_, quantifiers=False)
    sub = lambda w=writable, lc=locals_: substs(w, depth - 1, lc)  # noqa: E731
    if kind == "skip":
        return Skip()
    if kind == "assign":
        v = draw(st.sampled_from(writable))
        return Assign(v, draw(_expr(v, locals_)))
    if kind == "choose":
        v = draw(st.sampled_from(writable))
        if v == "a":
            return ChooseFrom(v, BOOL)
        vals = draw(st.sets(st.integers(0, 2), max_size=3))
        return ChooseFrom(v, Domain(None, tuple(sorted(vals)), INT_TYPE))
    if kind == "if":
        return If(draw(guard), draw(sub()), draw(sub()))
    if kind == "select":
        branches = tuple(draw(st.lists(st.tuples(guard, sub()), min_size=1, max_size=2)))
        orelse = draw(st.one_of(st.none(), sub()))
        return Select(branches, orelse)
    if kind == "choice":
        return Choice(tuple(draw(st.lists(sub(), min_size=2, max_size=3))))
    if kind == "any":
        k = f"k{len(locals_)}"
        lc = locals_ + (k,)
        where = draw(preds(lc, quantifiers=False))
        return Any(((k, K_DOM),), where, draw(sub(writable, lc)))
    if kind == "seq":
        return Seq(tuple(draw(st.lists(sub(), min_size=2, max_size=3))))
    # parallel: split the writable variables between two branches
    first = draw(st.sampled_from(writable))
    rest = tuple(v for v in writable if v != first)
    return Parallel((draw(sub((first,))), draw(sub(rest))))
