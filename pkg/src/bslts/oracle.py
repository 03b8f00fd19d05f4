"""Brute-force semantics: relational execution, traces, paths and their comparison.

Nothing here goes through the predicate transformers; substitutions are run
directly on valuations so the results can be used to cross-check them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .model import INIT_EVENT, Machine, Refinement
from .prover import compile_pred, enumerate_valuations, evaluate_expr
from .slts import Slts
from .terms import Any, Assign, Choice, ChooseFrom, If, Parallel, Select, Seq, Skip, Subst, written_vars

DEFAULT_DEPTH = 5


def _frozen(env: dict, names: Iterable[str]) -> tuple:
    return tuple((n, env[n]) for n in names)


def run(s: Subst, env: dict) -> list:
    """Every final environment reachable by executing s from env (duplicates removed, order kept)."""
    out: list = []
    seen = set()
    for r in _run(s, env):
        key = tuple(sorted(r.items(), key=lambda kv: kv[0]))
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def _holds(p, env: dict) -> bool:
    return bool(compile_pred(p)(dict(env)))


def _run(s: Subst, env: dict):
    if isinstance(s, Skip):
        yield dict(env)
    elif isinstance(s, Assign):
        new = dict(env)
        new[s.var] = evaluate_expr(s.expr, env)
        yield new
    elif isinstance(s, ChooseFrom):
        for v in s.domain.values:
            new = dict(env)
            new[s.var] = v
            yield new
    elif isinstance(s, Parallel):
        # branches read the same initial env and write disjoint variables
        partial = [dict()]
        for b in s.branches:
            writes = written_vars(b)
            options = [{k: r[k] for k in writes} for r in _run(b, env)]
            partial = [{**p, **o} for p in partial for o in options]
        for p in partial:
            new = dict(env)
            new.update(p)
            yield new
    elif isinstance(s, If):
        yield from _run(s.then if _holds(s.cond, env) else s.orelse, env)
    elif isinstance(s, Select):
        fired = False
        for g, b in s.branches:
            if _holds(g, env):
                fired = True
                yield from _run(b, env)
        if not fired and s.orelse is not None:
            yield from _run(s.orelse, env)
    elif isinstance(s, Choice):
        for b in s.branches:
            yield from _run(b, env)
    elif isinstance(s, Any):
        names = [n for n, _ in s.bound]
        for local in enumerate_valuations(s.bound):
            inner = dict(env)
            inner.update(local)
            if not _holds(s.where, inner):
                continue
            for r in _run(s.body, inner):
                for n in names:
                    if n in env:
                        r[n] = env[n]
                    else:
                        r.pop(n, None)
                yield r
    elif isinstance(s, Seq):
        frontier = [dict(env)]
        for step in s.steps:
            frontier = [r for e in frontier for r in _run(step, e)]
        yield from frontier
    else:
        raise TypeError(f"not a substitution: {s!r}")


def _machine(m) -> Machine:
    if isinstance(m, Refinement):
        from .refinement import concrete_machine
        return concrete_machine(m)
    return m


def successors(v: dict, event: str, m) -> list:
    """Valuations reachable by one occurrence of ``event`` (the initialisation included)."""
    m = _machine(m)
    body = m.initialisation if event == INIT_EVENT else m.events[event]
    names = list(m.variables)
    return [dict(_frozen(r, names)) for r in run(body, dict(v))]


def initial_valuations(m) -> list:
    m = _machine(m)
    out, seen = [], set()
    for v in enumerate_valuations(m.variables.items()):
        for w in successors(v, INIT_EVENT, m):
            key = tuple(w.items())
            if key not in seen:
                seen.add(key)
                out.append(w)
    return out


@dataclass(frozen=True)
class ConcreteTrace:
    events: tuple
    witness: tuple  # of valuation tuples, x_1 .. x_{n+1} (the pre-initialisation value is irrelevant)

    def __len__(self) -> int:
        return len(self.events) - 1


@dataclass(frozen=True)
class ConcretePath:
    events: tuple
    states: tuple
    witness: tuple

    def __len__(self) -> int:
        return len(self.events) - 1


def enumerate_traces(m, max_len: int, all_witnesses: bool = False) -> list:
    """Traces with at most ``max_len`` events after the initialisation.

    One witness is kept per (event sequence, end valuation) unless
    ``all_witnesses`` asks for every valuation sequence.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    m = _machine(m)
    names = list(m.variables)
    events = sorted(m.events)
    frontier = {}
    for v in initial_valuations(m):
        t = ConcreteTrace((INIT_EVENT,), (_frozen(v, names),))
        frontier.setdefault((t.events, t.witness if all_witnesses else t.witness[-1]), t)
    out = list(frontier.values())
    for _ in range(max_len):
        nxt: dict = {}
        for t in frontier.values():
            v = dict(t.witness[-1])
            for e in events:
                for w in successors(v, e, m):
                    fw = _frozen(w, names)
                    nt = ConcreteTrace(t.events + (e,), t.witness + (fw,))
                    nxt.setdefault((nt.events, nt.witness if all_witnesses else fw), nt)
        frontier = nxt
        out.extend(frontier.values())
    return out


def enumerate_paths(s: Slts, m, max_len: int, all_witnesses: bool = False) -> list:
    """Paths of the SLTS witnessed by legal crossings, at most ``max_len`` events after the initialisation."""
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    m = _machine(m)
    names = list(m.variables)
    interp = {st.name: compile_pred(st.interpretation) for st in s.states}
    labels = {t.key: (compile_pred(t.D), compile_pred(t.A)) for t in s.transitions}
    init = s.initial.name
    frontier: dict = {}

    def cross(t, v):
        if not interp[t.source](dict(v)):
            return
        d, a = labels[t.key]
        if not (d(dict(v)) and a(dict(v))):
            return
        for w in successors(v, t.event, m):
            if interp[t.target](dict(w)):
                yield w

    for v in enumerate_valuations(m.variables.items()):
        for t in s.outgoing(init):
            for w in cross(t, v):
                fw = _frozen(w, names)
                np = ConcretePath((INIT_EVENT,), (init, t.target), (fw,))
                frontier.setdefault((np.events, np.states if all_witnesses else t.target, fw), np)
    out = list(frontier.values())
    for _ in range(max_len):
        nxt: dict = {}
        for p in frontier.values():
            v = dict(p.witness[-1])
            for t in s.outgoing(p.states[-1]):
                for w in cross(t, v):
                    fw = _frozen(w, names)
                    ev = p.events + (t.event,)
                    np = ConcretePath(ev, p.states + (t.target,), p.witness + (fw,))
                    key = (ev, np.states, np.witness) if all_witnesses else (ev, t.target, fw)
                    nxt.setdefault(key, np)
        frontier = nxt
        out.extend(frontier.values())
    return out


def event_sequences(items: Iterable) -> set:
    return {x.events for x in items}


def witnessed_sequences(items: Iterable) -> set:
    """(event, valuation) sequences: finer than event sequences."""
    return {tuple(zip(x.events, x.witness)) for x in items}


@dataclass
class EqualityReport:
    depth: int
    traces: set = field(default_factory=set)
    paths: set = field(default_factory=set)
    witnesses: bool = False

    @property
    def equal(self) -> bool:
        return self.traces == self.paths

    @property
    def only_traces(self) -> list:
        return sorted(self.traces - self.paths, key=lambda s: (len(s), s))

    @property
    def only_paths(self) -> list:
        return sorted(self.paths - self.traces, key=lambda s: (len(s), s))

    @property
    def first_divergence(self) -> tuple | None:
        diff = sorted(self.traces ^ self.paths, key=lambda s: (len(s), s))
        return diff[0] if diff else None

    def lines(self) -> list:
        out = [f"depth {self.depth}: {len(self.traces)} trace sequences, {len(self.paths)} path sequences",
               "equal" if self.equal else "different"]
        d = self.first_divergence
        if d is not None:
            side = "traces only" if d in self.traces else "paths only"
            out.append(f"first divergence ({side}): {format_sequence(d)}")
        return out


def format_sequence(seq: tuple) -> str:
    if seq and isinstance(seq[0], tuple):
        return ".".join(f"{e}[{', '.join(f'{k}={v}' for k, v in val)}]" for e, val in seq)
    return ".".join(seq)


def check_trace_path_equality(m, s: Slts, max_len: int = DEFAULT_DEPTH, witnesses: bool = False) -> EqualityReport:
    """Compare event sequences of traces and SLTS paths up to ``max_len``.

    With ``witnesses`` the comparison is on sequences of (event, valuation)
    pairs instead, which also sees transitions that are redundant for the
    event-level sets.
    """
    if witnesses:
        return EqualityReport(max_len, witnessed_sequences(enumerate_traces(m, max_len, True)),
                              witnessed_sequences(enumerate_paths(s, m, max_len, True)), True)
    return EqualityReport(max_len, event_sequences(enumerate_traces(m, max_len)),
                          event_sequences(enumerate_paths(s, m, max_len)))


__all__ = ["run", "successors", "initial_valuations", "enumerate_traces", "enumerate_paths",
           "check_trace_path_equality", "ConcreteTrace", "ConcretePath", "EqualityReport", "DEFAULT_DEPTH"]
