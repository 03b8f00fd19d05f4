"""Weakest preconditions, feasibility, conjugates and before-after predicates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .terms import (And, Any, Assign, Choice, ChooseFrom, Cmp, Exists, FALSE, Forall, If, Iff, Implies, Lit,
                    NEGATED_CMP, Not, Or, Parallel, Pred, Select, Seq, Skip, Subst, TRUE, Var, all_names,
                    conj, disj, free_vars, fresh_name, simplify, substitute, substitute_reads, written_vars)


def negate(p: Pred) -> Pred:
    """Negation pushed through connectives and quantifiers."""
    if isinstance(p, Lit):
        return Lit(not p.value)
    if isinstance(p, Not):
        return p.arg
    if isinstance(p, And):
        return Or(tuple(negate(a) for a in p.args))
    if isinstance(p, Or):
        return And(tuple(negate(a) for a in p.args))
    if isinstance(p, Implies):
        return And((p.left, negate(p.right)))
    if isinstance(p, Cmp):
        return Cmp(NEGATED_CMP[p.op], p.left, p.right)
    if isinstance(p, Forall):
        return Exists(p.var, p.domain, negate(p.body))
    if isinstance(p, Exists):
        return Forall(p.var, p.domain, negate(p.body))
    if isinstance(p, Iff):
        return Iff(p.left, negate(p.right))
    return Not(p)


def wp(s: Subst, r: Pred) -> Pred:
    """[s]r, simplified."""
    return simplify(_wp(s, r))


def _wp(s: Subst, r: Pred) -> Pred:
    if isinstance(s, Skip):
        return r
    if isinstance(s, Assign):
        return substitute(r, {s.var: s.expr})
    if isinstance(s, ChooseFrom):
        if s.var not in free_vars(r):
            return r if s.domain.values else TRUE
        v = fresh_name(s.var, all_names(r) | {s.var})
        return Forall(v, s.domain, substitute(r, {s.var: Var(v)}))
    if isinstance(s, Parallel):
        return _wp_parallel(s, r)
    if isinstance(s, If):
        return conj(Implies(s.cond, _wp(s.then, r)), Implies(negate(s.cond), _wp(s.orelse, r)))
    if isinstance(s, Select):
        parts = [Implies(g, _wp(b, r)) for g, b in s.branches]
        if s.orelse is not None:
            none = conj(*(negate(g) for g, _ in s.branches))
            parts.append(Implies(none, _wp(s.orelse, r)))
        return conj(*parts)
    if isinstance(s, Choice):
        return conj(*(_wp(b, r) for b in s.branches))
    if isinstance(s, Any):
        return _wp_any(s, r)
    if isinstance(s, Seq):
        out = r
        for step in reversed(s.steps):
            out = simplify(_wp(step, out))
        return out
    raise TypeError(f"not a substitution: {s!r}")


def _wp_any(s: Any, r: Pred) -> Pred:
    clash = {n for n, _ in s.bound} & free_vars(r)
    where, body, bound = s.where, s.body, list(s.bound)
    if clash:
        avoid = set(all_names(r)) | set(all_names(s.body)) | set(all_names(s.where))
        ren = {}
        for i, (n, d) in enumerate(bound):
            if n in clash:
                new = fresh_name(n, avoid)
                avoid.add(new)
                ren[n] = new
                bound[i] = (new, d)
        where = substitute(where, {k: Var(v) for k, v in ren.items()})
        # ANY-bound variables are never assignment targets, so only reads move
        body = substitute_reads(body, {k: Var(v) for k, v in ren.items()})
    out = Implies(where, _wp(body, r))
    for n, d in reversed(bound):
        out = Forall(n, d, out)
    return out


def _wp_parallel(s: Parallel, r: Pred) -> Pred:
    branches = s.branches
    if all(isinstance(b, Assign) for b in branches):
        return substitute(r, {b.var: b.expr for b in branches})
    # Reads of written variables are redirected to copies holding the old values,
    # then the (now independent) branches are run one after the other.
    written = sorted(frozenset().union(*(written_vars(b) for b in branches)))
    avoid = set(all_names(r)) | set().union(*(all_names(b) for b in branches))
    copies = {}
    for w in written:
        c = fresh_name(w + "_old", avoid)
        avoid.add(c)
        copies[w] = c
    to_copy = {w: Var(c) for w, c in copies.items()}
    out = r
    for b in reversed(branches):
        out = _wp(substitute_reads(b, to_copy), out)
    return substitute(out, {c: Var(w) for w, c in copies.items()})


def conjugate_wp(s: Subst, r: Pred) -> Pred:
    """<s>r = not [s] not r: some execution of s establishes r."""
    return simplify(negate(simplify(_wp(s, negate(r)))))


def fis(s: Subst) -> Pred:
    """Feasibility, not [s] false, computed case by case so guards stay readable."""
    return simplify(_fis(s))


def _fis(s: Subst) -> Pred:
    if isinstance(s, (Skip, Assign)):
        return TRUE
    if isinstance(s, ChooseFrom):
        return TRUE if s.domain.values else FALSE
    if isinstance(s, Parallel):
        return conj(*(_fis(b) for b in s.branches))
    if isinstance(s, If):
        return conj(Implies(s.cond, _fis(s.then)), Implies(negate(s.cond), _fis(s.orelse)))
    if isinstance(s, Select):
        parts = [conj(g, _fis(b)) for g, b in s.branches]
        if s.orelse is not None:
            parts.append(conj(*(negate(g) for g, _ in s.branches), _fis(s.orelse)))
        return disj(*parts)
    if isinstance(s, Choice):
        return disj(*(_fis(b) for b in s.branches))
    if isinstance(s, Any):
        out = conj(s.where, _fis(s.body))
        for n, d in reversed(s.bound):
            out = Exists(n, d, out)
        return out
    if isinstance(s, Seq):
        rest = simplify(_fis(Seq(s.steps[1:]) if len(s.steps) > 2 else s.steps[1]))
        if rest == TRUE:
            return _fis(s.steps[0])
        return conjugate_wp(s.steps[0], rest)
    raise TypeError(f"not a substitution: {s!r}")


def primed(name: str) -> str:
    return name + "'"


def prd(s: Subst, variables: Iterable[str]) -> Pred:
    """Before-after predicate over ``variables`` and their primed copies."""
    names = list(variables)
    same = conj(*(Cmp("=", Var(x), Var(primed(x))) for x in names))
    return conjugate_wp(s, same)


@dataclass(frozen=True)
class NormalizedEvent:
    """An event in the form guard => action."""

    guard: Pred
    action: Subst
    body: Subst


def normalize_event(body: Subst) -> NormalizedEvent:
    guard = fis(body)
    action = body
    if isinstance(body, Select) and len(body.branches) == 1 and body.orelse is None:
        action = body.branches[0][1]
    return NormalizedEvent(guard, action, body)


def box(event: NormalizedEvent, r: Pred) -> Pred:
    """[G => T]r."""
    return simplify(Implies(event.guard, wp(event.action, r)))


def diamond(event: NormalizedEvent, r: Pred) -> Pred:
    """<G => T>r."""
    return simplify(conj(event.guard, conjugate_wp(event.action, r)))


def any_empty_domains(s: Subst) -> list:
    """ANY variables and :: choices over empty domains (feasibility is false there)."""
    out = []

    def walk(x):
        if isinstance(x, Any):
            out.extend(n for n, d in x.bound if not d.values)
            walk(x.body)
        elif isinstance(x, ChooseFrom):
            if not x.domain.values:
                out.append(x.var)
        elif isinstance(x, (Parallel, Choice)):
            for b in x.branches:
                walk(b)
        elif isinstance(x, Seq):
            for b in x.steps:
                walk(b)
        elif isinstance(x, If):
            walk(x.then)
            walk(x.orelse)
        elif isinstance(x, Select):
            for _, b in x.branches:
                walk(b)
            if x.orelse is not None:
                walk(x.orelse)

    walk(s)
    return out


__all__ = ["wp", "fis", "conjugate_wp", "prd", "normalize_event", "NormalizedEvent", "negate", "box", "diamond",
           "any_empty_domains", "primed"]
