"""SLTS generation: states from assertions, transition classification, worklist."""
from __future__ import annotations

import logging
import math
from collections import deque
from typing import Iterable

from .model import INIT_EVENT, Machine, ModelError
from .prover import (AssumptionTable, Outcome, ProofObligation, SATISFIABILITY, VALIDITY, Verdict, decide)
from .slts import (AProv, DProv, Eliminated, INIT_STATE, Slts, SymbolicState, Transition, is_minimal, state_key,
                   transition_sort_key)
from .qe import eliminate
from .terms import FALSE, TRUE, Implies, conj, disj, show, simplify_typed
from .wp import NormalizedEvent, any_empty_domains, conjugate_wp, negate, normalize_event, wp

log = logging.getLogger(__name__)

MODES = ("default", "strict")


class EmptyAssertions(ModelError):
    pass


class IncompleteStates(ModelError):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        w = ", ".join(f"{k}={v}" for k, v in verdict.witness or ())
        super().__init__(f"state predicates do not cover the invariant (uncovered valuation: {w or 'unknown'})")


def build_states(m: Machine) -> list:
    """Init plus one state per assertion disjunct, interpretation P_i & I."""
    preds = m.state_predicates
    if not preds:
        raise EmptyAssertions(f"machine {m.name} has no state predicates in ASSERTIONS")
    states = [SymbolicState(INIT_STATE, TRUE, TRUE, True)]
    seen = set()
    for p in preds:
        name = " ".join(show(p).split())
        if name in seen:
            raise ModelError(f"state predicate {name} appears twice")
        seen.add(name)
        states.append(SymbolicState(name, conj(p, m.invariant), p))
    return states


def check_completeness(m: Machine, budget: int | None = None,
                       assumptions: AssumptionTable | None = None, states: Iterable | None = None) -> Verdict:
    """I => P_1 or ... or P_n."""
    preds = [s.predicate for s in states] if states is not None else m.state_predicates
    po = ProofObligation(f"{m.name}|completeness", Implies(m.invariant, disj(*preds)), VALIDITY,
                         tuple(m.variables.items()))
    return decide(po, budget, assumptions)


class Classifier:
    """Decides the transition obligations of one machine, caching by identifier."""

    def __init__(self, m: Machine, mode: str = "strict", budget: int | None = None,
                 assumptions: AssumptionTable | None = None):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.m = m
        self.mode = mode
        self.budget = budget
        self.assumptions = assumptions
        self.variables = tuple(m.variables.items())
        self.events = {e: normalize_event(b) for e, b in m.events.items()}
        self.init_event = NormalizedEvent(TRUE, m.initialisation, m.initialisation)
        self.verdicts: dict = {}
        self.domains = dict(m.variables)

    def event(self, name: str) -> NormalizedEvent:
        if name == INIT_EVENT:
            return self.init_event
        return self.events[name]

    def decide(self, po_id: str, formula, kind: str) -> Verdict:
        v = self.verdicts.get(po_id)
        if v is None:
            v = decide(ProofObligation(po_id, formula, kind, self.variables), self.budget, self.assumptions)
            self.verdicts[po_id] = v
        return v

    def tidy(self, p, care):
        """Shorter predicate agreeing with p wherever ``care`` holds (when affordable)."""
        p = simplify_typed(p, self.domains)
        space = math.prod(len(d.values) for _, d in self.variables)
        if self.budget is not None and space > self.budget:
            return p
        q = eliminate(p, self.variables, care=care)
        return q if q != FALSE else p

    def classify(self, E: SymbolicState, event: str, F: SymbolicState):
        ev = self.event(event)
        guard = ev.guard
        base = f"{self.m.name}|{state_key(E.name)}|{event}"
        strict = self.mode == "strict"
        # enabledness
        if E.is_initial and event == INIT_EVENT:
            D, d_prov = TRUE, DProv.PROVED_TRUE
        else:
            v1 = self.decide(f"{base}|1", Implies(E.interpretation, guard), VALIDITY)
            if v1.valid:
                D, d_prov = TRUE, DProv.ASSUMED if v1.assumed else DProv.PROVED_TRUE
            else:
                v2 = self.decide(f"{base}|2", Implies(E.interpretation, negate(guard)), VALIDITY)
                if v2.valid:
                    return Eliminated(E.name, event, F.name, "D", v2.po_id, v2.assumed)
                D, d_prov = self.tidy(guard, E.interpretation), DProv.GUARD_BY_DEFAULT
                if strict:
                    v3 = self.decide(f"{base}|3", conj(E.interpretation, guard), SATISFIABILITY)
                    if v3.valid:
                        d_prov = DProv.ASSUMED if v3.assumed else DProv.GUARD_BY_PROOF
        # reachability
        hyp = conj(E.interpretation, guard)
        base = f"{base}|{state_key(F.name)}"
        reach = conjugate_wp(ev.action, F.interpretation)
        v4 = self.decide(f"{base}|4", Implies(hyp, reach), VALIDITY)
        if v4.valid:
            A, a_prov = TRUE, AProv.ASSUMED if v4.assumed else AProv.PROVED_TRUE
        else:
            v5 = self.decide(f"{base}|5", Implies(hyp, wp(ev.action, negate(F.interpretation))), VALIDITY)
            if v5.valid:
                return Eliminated(E.name, event, F.name, "A", v5.po_id, v5.assumed)
            A, a_prov = self.tidy(reach, hyp), AProv.REACH_BY_DEFAULT
            if strict:
                v6 = self.decide(f"{base}|6", conj(hyp, reach), SATISFIABILITY)
                if v6.valid:
                    a_prov = AProv.ASSUMED if v6.assumed else AProv.REACH_BY_PROOF
        return Transition(E.name, event, F.name, D, A, d_prov, a_prov)


def classify_transition(m: Machine, E: SymbolicState, event: str, F: SymbolicState, mode: str = "strict",
                        budget: int | None = None, assumptions: AssumptionTable | None = None):
    """Transition or Eliminated record for one (E, event, F) triple."""
    if F.is_initial:
        raise ValueError("the initial state is never a target")
    if E.is_initial != (event == INIT_EVENT):
        raise ValueError("the initialisation is classified from the initial state only")
    return Classifier(m, mode, budget, assumptions).classify(E, event, F)


def generate(m: Machine, mode: str = "strict", budget: int | None = None,
             assumptions: AssumptionTable | None = None, force: bool = False,
             states: list | None = None, keep_unreached: bool = False, skip: Iterable = (),
             kind: str = "machine", extra_ledger: Iterable = ()) -> Slts:
    """Build the SLTS of a machine by exploring from the initial state.

    ``states`` overrides the assertion-derived states (used for projected
    systems); states named in ``skip`` are neither explored nor targeted.
    """
    all_states = states if states is not None else build_states(m)
    init = [s for s in all_states if s.is_initial]
    if len(init) != 1:
        raise ModelError("exactly one initial state is required")
    init_state = init[0]
    targets = [s for s in all_states if not s.is_initial]
    if not targets:
        raise EmptyAssertions(f"machine {m.name} has no state predicates in ASSERTIONS")
    names = [s.name for s in all_states]
    if len(set(names)) != len(names):
        raise ModelError("two states share a name")
    warnings: list = []
    completeness = check_completeness(m, budget, assumptions, targets)
    if completeness.invalid:
        if not force:
            raise IncompleteStates(completeness)
        warnings.append("state predicates do not cover the invariant; generation was forced")
    elif completeness.unknown:
        warnings.append("completeness of the state predicates could not be decided within the budget")
    for ev_name, body in sorted(m.events.items()):
        empty = any_empty_domains(body)
        if empty:
            warnings.append(f"event {ev_name} chooses from an empty domain ({', '.join(empty)}); it is never enabled")
    warnings.extend(_overlaps(m, targets, budget))

    clf = Classifier(m, mode, budget, assumptions)
    skip = set(skip)
    live_targets = [s for s in targets if s.name not in skip]
    interface = sorted(m.events)
    transitions: list = []
    eliminated: list = []
    reached = {init_state.name}
    visited = deque([init_state])
    while visited:
        E = visited.popleft()
        events = [INIT_EVENT] if E.is_initial else interface
        for ev in events:
            for F in live_targets:
                r = clf.classify(E, ev, F)
                if isinstance(r, Transition):
                    transitions.append(r)
                    if F.name not in reached:
                        reached.add(F.name)
                        visited.append(F)
                else:
                    eliminated.append(r)
    for w in warnings:
        log.warning(w)
    unreached = tuple(s for s in targets if s.name not in reached)
    kept = [init_state] + [s for s in targets if s.name in reached or keep_unreached]
    ledger = sorted([completeness, *clf.verdicts.values(), *extra_ledger], key=lambda v: v.po_id)
    transitions.sort(key=lambda t: transition_sort_key(t, init_state.name))
    eliminated.sort(key=lambda x: (x.source, x.event, x.target))
    return Slts(m.name, m.signature, m.invariant, tuple(kept), tuple(transitions), tuple(ledger),
                tuple(eliminated), unreached, (), mode, budget, tuple(warnings), kind)


def _overlaps(m: Machine, states: list, budget) -> list:
    out = []
    variables = tuple(m.variables.items())
    for i, a in enumerate(states):
        for b in states[i + 1:]:
            po = ProofObligation("_overlap", conj(a.interpretation, b.interpretation), SATISFIABILITY, variables)
            if decide(po, budget).outcome is Outcome.VALID:
                out.append(f"states {a.name} and {b.name} overlap")
    return out


__all__ = ["build_states", "check_completeness", "classify_transition", "generate", "is_minimal", "Classifier",
           "EmptyAssertions", "IncompleteStates", "MODES"]
