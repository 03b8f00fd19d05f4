"""Finite-domain decision procedure with an enumeration budget.

Predicates are compiled to Python closures once and then evaluated over every
valuation of the declared domains.  A proof obligation whose valuation space is
larger than the budget is answered Unknown without enumerating anything, which
keeps the answer monotone in the budget.
"""
from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping

from .terms import (And, Arith, BoolOf, Cmp, Const, Exists, Forall, Iff, Implies, Lit, Member, Not, Or, Pred,
                    Var)


class UnboundVariable(KeyError):
    pass


class AssumptionError(ValueError):
    pass


class Outcome(enum.Enum):
    VALID = "VALID"
    INVALID = "INVALID"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


VALIDITY = "validity"
SATISFIABILITY = "satisfiability"


@dataclass(frozen=True)
class ProofObligation:
    """A closed question about ``formula`` over ``variables``.

    validity: does the formula hold for every valuation?
    satisfiability: does it hold for at least one?
    """

    id: str
    formula: Pred
    kind: str
    variables: tuple  # of (name, Domain)

    def __post_init__(self):
        if self.kind not in (VALIDITY, SATISFIABILITY):
            raise ValueError(f"unknown proof obligation kind {self.kind!r}")
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def space(self) -> int:
        return math.prod(len(d.values) for _, d in self.variables)


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    po_id: str
    kind: str = VALIDITY
    witness: tuple | None = None  # of (name, value)
    examined: int = 0
    assumed: bool = False

    @property
    def valid(self) -> bool:
        return self.outcome is Outcome.VALID

    @property
    def invalid(self) -> bool:
        return self.outcome is Outcome.INVALID

    @property
    def unknown(self) -> bool:
        return self.outcome is Outcome.UNKNOWN

    def witness_dict(self) -> dict | None:
        return None if self.witness is None else dict(self.witness)

    @property
    def provenance(self) -> str:
        if self.assumed:
            return "assumed"
        return "budget" if self.unknown else "proved"


# ------------------------------------------------------------------ compiler

_compiled: dict = {}


def compile_pred(p: Pred) -> Callable[[dict], bool]:
    """Closure evaluating ``p`` in an environment dict (mutated only transiently)."""
    hit = _compiled.get(id(p))
    if hit is not None and hit[0] is p:
        return hit[1]
    fn = _cp(p)
    if len(_compiled) > 200_000:
        _compiled.clear()
    _compiled[id(p)] = (p, fn)
    return fn


def _ce(e) -> Callable[[dict], object]:
    if isinstance(e, Const):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        name = e.name

        def var(env):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariable(name) from None
        return var
    if isinstance(e, BoolOf):
        f = _cp(e.pred)
        return lambda env: "TRUE" if f(env) else "FALSE"
    if isinstance(e, Arith):
        l, r = _ce(e.left), _ce(e.right)
        if e.op == "+":
            return lambda env: l(env) + r(env)
        return lambda env: l(env) - r(env)
    raise TypeError(f"not an expression: {e!r}")


def _cp(p) -> Callable[[dict], bool]:
    if isinstance(p, Lit):
        v = p.value
        return lambda env: v
    if isinstance(p, Not):
        f = _cp(p.arg)
        return lambda env: not f(env)
    if isinstance(p, And):
        fs = [_cp(a) for a in p.args]
        return lambda env: all(f(env) for f in fs)
    if isinstance(p, Or):
        fs = [_cp(a) for a in p.args]
        return lambda env: any(f(env) for f in fs)
    if isinstance(p, Implies):
        l, r = _cp(p.left), _cp(p.right)
        return lambda env: (not l(env)) or r(env)
    if isinstance(p, Iff):
        l, r = _cp(p.left), _cp(p.right)
        return lambda env: l(env) == r(env)
    if isinstance(p, Cmp):
        l, r = _ce(p.left), _ce(p.right)
        op = p.op
        if op == "=":
            return lambda env: l(env) == r(env)
        if op == "/=":
            return lambda env: l(env) != r(env)
        if op == "<":
            return lambda env: l(env) < r(env)
        if op == "<=":
            return lambda env: l(env) <= r(env)
        if op == ">":
            return lambda env: l(env) > r(env)
        return lambda env: l(env) >= r(env)
    if isinstance(p, Member):
        e = _ce(p.elem)
        values = frozenset(p.domain.values)
        return lambda env: e(env) in values
    if isinstance(p, (Forall, Exists)):
        body = _cp(p.body)
        var = p.var
        values = p.domain.values
        want_all = isinstance(p, Forall)
        missing = object()

        def quant(env):
            saved = env.get(var, missing)
            try:
                for v in values:
                    env[var] = v
                    if body(env) != want_all:
                        return not want_all
                return want_all
            finally:
                if saved is missing:
                    env.pop(var, None)
                else:
                    env[var] = saved
        return quant
    raise TypeError(f"not a predicate: {p!r}")


def evaluate(p: Pred, valuation: Mapping[str, object]) -> bool:
    """Truth of ``p`` under ``valuation``; quantifiers range over their declared domains."""
    return bool(compile_pred(p)(dict(valuation)))


def evaluate_expr(e, valuation: Mapping[str, object]):
    return _ce(e)(dict(valuation))


# ---------------------------------------------------------------- valuations

def enumerate_valuations(variables: Iterable) -> Iterator[dict]:
    """All valuations, variables in declaration order, values in domain order."""
    variables = list(variables)
    names = [n for n, _ in variables]
    for values in itertools.product(*(d.values for _, d in variables)):
        yield dict(zip(names, values))


# ---------------------------------------------------------------- assumptions

class AssumptionTable:
    """PO identifier -> externally asserted outcome."""

    def __init__(self, entries: Mapping[str, Outcome] | None = None):
        self._entries = dict(entries or {})

    def __contains__(self, po_id: str) -> bool:
        return po_id in self._entries

    def __getitem__(self, po_id: str) -> Outcome:
        return self._entries[po_id]

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def items(self):
        return self._entries.items()

    @classmethod
    def parse(cls, text: str) -> "AssumptionTable":
        entries: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = re.split(r"(?:^|\s)#", raw, maxsplit=1)[0].strip()
            if not line:
                continue
            parts = line.rsplit(None, 1)
            if len(parts) != 2 or parts[1].upper() not in ("VALID", "INVALID") or re.search(r"\s", parts[0]):
                raise AssumptionError(f"line {lineno}: expected '<po-identifier> VALID|INVALID', got {raw.strip()!r}")
            outcome = Outcome(parts[1].upper())
            if parts[0] in entries and entries[parts[0]] is not outcome:
                raise AssumptionError(f"line {lineno}: conflicting assumptions for {parts[0]}")
            entries[parts[0]] = outcome
        return cls(entries)


def load_assumptions(path: str | Path) -> AssumptionTable:
    return AssumptionTable.parse(Path(path).read_text(encoding="utf-8"))


EMPTY_ASSUMPTIONS = AssumptionTable()


# --------------------------------------------------------------------- decide

def decide(po: ProofObligation, budget: int | None = None,
           assumptions: AssumptionTable | None = None) -> Verdict:
    """Answer a proof obligation by exhaustive enumeration.

    ``budget`` caps the number of valuations; None means unlimited.
    """
    if budget is not None and budget < 1:
        raise ValueError("budget must be at least 1")
    if assumptions is not None and po.id in assumptions:
        return Verdict(assumptions[po.id], po.id, po.kind, None, 0, True)
    if budget is not None and po.space > budget:
        return Verdict(Outcome.UNKNOWN, po.id, po.kind, None, 0)
    fn = compile_pred(po.formula)
    names = [n for n, _ in po.variables]
    examined = 0
    validity = po.kind == VALIDITY
    for values in itertools.product(*(d.values for _, d in po.variables)):
        env = dict(zip(names, values))
        examined += 1
        holds = fn(env)
        if validity and not holds:
            return Verdict(Outcome.INVALID, po.id, po.kind, tuple(zip(names, values)), examined)
        if not validity and holds:
            return Verdict(Outcome.VALID, po.id, po.kind, tuple(zip(names, values)), examined)
    return Verdict(Outcome.VALID if validity else Outcome.INVALID, po.id, po.kind, None, examined)


def is_valid(formula: Pred, variables: Iterable, budget: int | None = None) -> bool:
    return decide(ProofObligation("_", formula, VALIDITY, tuple(variables)), budget).valid


def is_satisfiable(formula: Pred, variables: Iterable, budget: int | None = None) -> bool:
    return decide(ProofObligation("_", formula, SATISFIABILITY, tuple(variables)), budget).valid


def models(formula: Pred, variables: Iterable) -> list:
    """Every satisfying valuation, in enumeration order."""
    fn = compile_pred(formula)
    return [v for v in enumerate_valuations(variables) if fn(dict(v))]


def format_witness(w: tuple | None) -> str:
    if not w:
        return ""
    return ", ".join(f"{k}={v}" for k, v in w)


def ledger_lines(verdicts: Iterable[Verdict]) -> list:
    """Line-oriented PO listing: identifier, kind, outcome, provenance."""
    return [f"{v.po_id} {v.kind} {v.outcome} {v.provenance}" for v in sorted(verdicts, key=lambda v: v.po_id)]


__all__ = ["Outcome", "Verdict", "ProofObligation", "AssumptionTable", "AssumptionError", "UnboundVariable",
           "VALIDITY", "SATISFIABILITY", "decide", "evaluate", "evaluate_expr", "enumerate_valuations",
           "load_assumptions", "is_valid", "is_satisfiable", "models", "format_witness", "ledger_lines",
           "compile_pred", "EMPTY_ASSUMPTIONS"]
