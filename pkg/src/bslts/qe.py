"""Quantifier elimination over finite domains and small two-level minimization.

Eliminating variables is done by enumeration: the satisfying valuations of the
remaining variables are collected and then covered by cubes.  A cube fixes a
set of allowed values per variable; cubes are grown greedily inside the
on-set plus the don't-care set, then a greedy cover picks a small subset.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .prover import compile_pred, enumerate_valuations
from .terms import FALSE, TRUE, Cmp, Const, Domain, Member, Pred, Var, conj, disj, show


def satisfying(p: Pred, keep: Sequence, drop: Sequence = ()) -> set:
    """Valuations (as tuples over ``keep``) for which some valuation of ``drop`` satisfies p."""
    fn = compile_pred(p)
    names = [n for n, _ in keep]
    out = set()
    for kv in itertools.product(*(d.values for _, d in keep)):
        env = dict(zip(names, kv))
        for dv in itertools.product(*(d.values for _, d in drop)):
            env.update(zip((n for n, _ in drop), dv))
            if fn(env):
                out.add(kv)
                break
    return out


def _cube_points(cube: tuple) -> Iterable[tuple]:
    return itertools.product(*cube)


def _expand(point: tuple, domains: list, allowed: set, order: Sequence[int]) -> tuple:
    cube = [frozenset([v]) for v in point]
    for i in order:
        whole = frozenset(domains[i])
        trial = cube[:i] + [whole] + cube[i + 1:]
        if all(p in allowed for p in _cube_points(trial)):
            cube = trial
            continue
        for v in domains[i]:
            if v in cube[i]:
                continue
            trial = cube[:i] + [cube[i] | {v}] + cube[i + 1:]
            if all(p in allowed for p in _cube_points(trial)):
                cube = trial
    return tuple(cube)


def minimize(on: set, dc: set, variables: Sequence) -> list:
    """A small list of cubes covering ``on`` and staying inside on | dc."""
    if not on:
        return []
    domains = [list(d.values) for _, d in variables]
    allowed = set(on) | set(dc)
    n = len(domains)
    if n <= 4:
        orders = list(itertools.permutations(range(n)))
    else:
        orders = [tuple(range(k, n)) + tuple(range(k)) for k in range(n)]
    candidates = []
    for point in sorted(on, key=lambda t: tuple(map(str, t))):
        for order in orders:
            c = _expand(point, domains, allowed, order)
            if c not in candidates:
                candidates.append(c)
    # drop candidates contained in another
    primes = [c for c in candidates
              if not any(o != c and all(a <= b for a, b in zip(c, o)) for o in candidates)]
    cover = []
    todo = set(on)
    while todo:
        best = max(primes, key=lambda c: (len(todo & set(_cube_points(c))), -_literal_count(c, domains)))
        cover.append(best)
        todo -= set(_cube_points(best))
    return cover


def _literal_count(cube: tuple, domains: list) -> int:
    return sum(1 for vals, dom in zip(cube, domains) if len(vals) < len(dom))


def cube_pred(cube: tuple, variables: Sequence) -> Pred:
    parts = []
    for vals, (name, dom) in zip(cube, variables):
        if len(vals) == len(dom.values):
            continue
        if len(vals) == 1:
            parts.append(Cmp("=", Var(name), Const(next(iter(vals)), dom.type)))
        elif len(vals) == len(dom.values) - 1:
            (missing,) = [v for v in dom.values if v not in vals]
            parts.append(Cmp("/=", Var(name), Const(missing, dom.type)))
        else:
            ordered = tuple(v for v in dom.values if v in vals)
            parts.append(Member(Var(name), Domain(None, ordered, dom.type)))
    return conj(*parts)


def cover_pred(cubes: list, variables: Sequence) -> Pred:
    if not cubes:
        return FALSE
    preds = [cube_pred(c, variables) for c in cubes]
    if TRUE in preds:
        return TRUE
    preds.sort(key=lambda p: (len(show(p)), show(p)))
    return disj(*preds)


def eliminate(p: Pred, keep: Sequence, drop: Sequence = (), care: Pred = TRUE) -> Pred:
    """Quantifier-free predicate over ``keep`` equivalent to (exists drop . p) wherever ``care`` holds."""
    keep = list(keep)
    on = satisfying(p, keep, drop)
    if care == TRUE:
        dc = set()
    else:
        inside = satisfying(care, keep)
        dc = {v for v in itertools.product(*(d.values for _, d in keep)) if v not in inside}
    return cover_pred(minimize(on - dc, dc, keep), keep)


def equivalent(p: Pred, q: Pred, variables: Sequence, under: Pred = TRUE) -> bool:
    fp, fq, fu = compile_pred(p), compile_pred(q), compile_pred(under)
    return all(fp(dict(v)) == fq(dict(v)) for v in enumerate_valuations(variables) if fu(dict(v)))


__all__ = ["eliminate", "minimize", "satisfying", "cover_pred", "cube_pred", "equivalent"]
