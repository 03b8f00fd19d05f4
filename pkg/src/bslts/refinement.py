"""Refinements: state projection, hierarchical SLTS, projection lemma, refinement POs."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from .model import INIT_EVENT, Machine, ModelError, Refinement
from .prover import (AssumptionTable, ProofObligation, SATISFIABILITY, VALIDITY, Verdict, decide)
from .qe import eliminate
from .slts import INIT_STATE, Slts, SuperState, SymbolicState, state_key
from .sltsgen import build_states, generate
from .terms import (INT_TYPE, TRUE, Cmp, Const, Iff, Implies, Pred, Var, conj, disj, fresh_name, all_names,
                    rename_vars, show, substitute)
from .wp import conjugate_wp, normalize_event, wp

log = logging.getLogger(__name__)


class DecompositionError(ModelError):
    pass


@dataclass(frozen=True)
class ProjectedState:
    """Image of an abstract state through the gluing invariant."""

    state: SymbolicState
    source: str
    empty: bool


@dataclass(frozen=True)
class DecompositionCheck:
    """A super-state, its substate predicates and the verdict on their union."""

    super_state: str
    substates: tuple
    verdict: Verdict


@dataclass
class LemmaReport:
    verdicts: list = field(default_factory=list)

    @property
    def invalid(self) -> list:
        return [v for v in self.verdicts if v.invalid]

    @property
    def ok(self) -> bool:
        return not self.invalid and not any(v.unknown for v in self.verdicts)


def display_name(p: Pred, r: Refinement) -> str:
    """Predicate text with renamed abstract variables shown under their original names."""
    back = {new: old for old, new in r.renaming.items()}
    return " ".join(show(rename_vars(p, back) if back else p).split())


def abstract_variables(r: Refinement) -> list:
    return list(r.abstraction.variables.items())


def concrete_variables(r: Refinement) -> list:
    return list(r.concrete.variables.items())


def concrete_invariant(r: Refinement) -> Pred:
    """The concrete-side invariant: abstract variables eliminated from I and L."""
    return eliminate(conj(r.abstraction.invariant, r.linking), concrete_variables(r), abstract_variables(r))


def project_predicate(p: Pred, r: Refinement, inv_r: Pred | None = None) -> Pred:
    """Quantifier-free image of abstract predicate p, minimized modulo the concrete invariant."""
    if inv_r is None:
        inv_r = concrete_invariant(r)
    body = conj(p, r.abstraction.invariant, r.linking)
    return eliminate(body, concrete_variables(r), abstract_variables(r), care=inv_r)


def project_state(abstract_state: SymbolicState, r: Refinement) -> ProjectedState:
    inv_r = concrete_invariant(r)
    if abstract_state.is_initial:
        return ProjectedState(SymbolicState(INIT_STATE, TRUE, TRUE, True), abstract_state.name, False)
    pred = project_predicate(abstract_state.predicate, r, inv_r)
    interp = conj(pred, inv_r)
    empty = not decide(ProofObligation("_", interp, SATISFIABILITY, concrete_variables(r))).valid
    name = " ".join(show(pred).split())
    return ProjectedState(SymbolicState(name, interp, pred, False, abstract_state.name), abstract_state.name, empty)


def concrete_machine(r: Refinement, inv_r: Pred | None = None) -> Machine:
    """The refinement seen as a machine over its own variables only."""
    if inv_r is None:
        inv_r = concrete_invariant(r)
    c = r.concrete
    return Machine(r.name, c.sets, c.variables, inv_r, c.assertion, c.initialisation, c.events)


def decompositions(r: Refinement, inv_r: Pred | None = None) -> list:
    """(abstract predicate, [substate predicates]) per abstract state, declared ones first.

    Abstract states without a declared decomposition get their projection as
    single substate.
    """
    if inv_r is None:
        inv_r = concrete_invariant(r)
    declared = [(d.abstract, list(d.substates)) for d in r.decompositions]
    covered = {show(a) for a, _ in declared}
    out = list(declared)
    for p in r.abstraction.state_predicates:
        if show(p) not in covered:
            out.append((p, [project_predicate(p, r, inv_r)]))
    return out


def check_decomposition(abstract: Pred, substates: list, r: Refinement, inv_r: Pred | None = None) -> Verdict:
    """Union of substate interpretations equals the projected super-state (full enumeration)."""
    if inv_r is None:
        inv_r = concrete_invariant(r)
    proj = project_predicate(abstract, r, inv_r)
    po = ProofObligation(f"{r.name}|decomposition|{state_key(display_name(abstract, r))}",
                         Implies(inv_r, Iff(disj(*substates), proj)), VALIDITY, concrete_variables(r))
    return decide(po)


def generate_projected(r: Refinement, mode: str = "strict", budget: int | None = None,
                       assumptions: AssumptionTable | None = None, force: bool = False) -> Slts:
    """Hierarchical SLTS of the refinement, substates grouped under projected abstract states."""
    inv_r = concrete_invariant(r)
    cvars = concrete_variables(r)
    states = [SymbolicState(INIT_STATE, TRUE, TRUE, True)]
    hierarchy = []
    checks = []
    empty = []
    used = set()
    abstract_names = {show(p): display_name(p, r) for p in r.abstraction.state_predicates}
    for abstract, subs in decompositions(r, inv_r):
        super_name = abstract_names.get(show(abstract), display_name(abstract, r))
        verdict = check_decomposition(abstract, subs, r, inv_r)
        checks.append(verdict)
        if not verdict.valid:
            raise DecompositionError(f"substates of {super_name} do not decompose its projection")
        members = []
        for q in subs:
            name = " ".join(show(q).split())
            if name in used:
                name = f"{name} [{super_name}]"
            used.add(name)
            interp = conj(q, inv_r)
            if not decide(ProofObligation("_", interp, SATISFIABILITY, cvars)).valid:
                empty.append(name)
            states.append(SymbolicState(name, interp, q, False, super_name))
            members.append(name)
        proj = project_predicate(abstract, r, inv_r)
        hierarchy.append(SuperState(super_name, conj(proj, inv_r), tuple(members), verdict, proj))
    cm = concrete_machine(r, inv_r)
    s = generate(cm, mode, budget, assumptions, force, states=states, keep_unreached=True, skip=empty,
                 kind="refinement", extra_ledger=checks)
    warnings = list(s.warnings)
    for name in empty:
        warnings.append(f"substate {name} is empty under the concrete invariant")
    if r.new_events and _overlapping(r):
        warnings.append("abstract states overlap; new-event transitions are drawn as ordinary transitions")
    for w in warnings[len(s.warnings):]:
        log.warning(w)
    return replace(s, hierarchy=tuple(hierarchy), warnings=tuple(warnings))


def _overlapping(r: Refinement) -> bool:
    states = build_states(r.abstraction)[1:]
    avars = abstract_variables(r)
    for i, a in enumerate(states):
        for b in states[i + 1:]:
            po = ProofObligation("_", conj(a.interpretation, b.interpretation), SATISFIABILITY, avars)
            if decide(po).valid:
                return True
    return False


def super_of(s: Slts, name: str) -> str | None:
    for h in s.hierarchy:
        if name in h.substates:
            return h.name
    return None


def check_projection_lemma(abstract_slts: Slts, projected: Slts, r: Refinement) -> LemmaReport:
    """For each projected transition of an abstract event: I(E^S) & L & I(E^R) & D' => D."""
    report = LemmaReport()
    joint = list(r.joint_variables.items())
    abstract_states = {display_name(st.predicate, r): st for st in abstract_slts.states if not st.is_initial}
    for t in projected.transitions:
        if t.event == INIT_EVENT or t.event not in r.abstraction.events:
            continue
        src_super = super_of(projected, t.source)
        tgt_super = super_of(projected, t.target)
        es = abstract_states.get(src_super)
        if es is None:
            continue
        abstract_t = abstract_slts.transition(es.name, t.event, abstract_states[tgt_super].name) \
            if tgt_super in abstract_states else None
        d = abstract_t.D if abstract_t is not None else normalize_event(r.abstraction.events[t.event]).guard
        formula = Implies(conj(es.interpretation, r.linking, projected.state(t.source).interpretation, t.D), d)
        po_id = f"{r.name}|proj|{state_key(t.source)}|{t.event}|{state_key(t.target)}"
        report.verdicts.append(decide(ProofObligation(po_id, formula, VALIDITY, joint)))
    return report


def gen_refinement_pos(r: Refinement, budget: int | None = None,
                       assumptions: AssumptionTable | None = None) -> list:
    """Refinement obligations with their verdicts, as (ProofObligation, Verdict) pairs."""
    new = r.new_events
    if new and r.variant is None:
        raise ModelError(f"refinement {r.name} introduces events {', '.join(new)} but declares no VARIANT")
    joint = tuple(r.joint_variables.items())
    inv = r.abstraction.invariant
    J = r.linking
    hyp = conj(inv, J)
    pos = [ProofObligation(f"{r.name}|ref|init",
                           wp(r.concrete.initialisation, conjugate_wp(r.abstraction.initialisation, J)),
                           VALIDITY, joint)]
    for e in sorted(r.abstraction.events):
        body = wp(r.concrete.events[e], conjugate_wp(r.abstraction.events[e], J))
        pos.append(ProofObligation(f"{r.name}|ref|event|{e}", Implies(hyp, body), VALIDITY, joint))
    for e in sorted(new):
        pos.append(ProofObligation(f"{r.name}|ref|new|{e}", Implies(hyp, wp(r.concrete.events[e], J)),
                                   VALIDITY, joint))
    if new:
        V = r.variant
        pos.append(ProofObligation(f"{r.name}|ref|variant-nat", Implies(hyp, Cmp(">=", V, Const(0, INT_TYPE))),
                                   VALIDITY, joint))
        for e in sorted(new):
            body = r.concrete.events[e]
            v = fresh_name("variant", set(all_names(body)) | set(r.joint_variables))
            dec = substitute(wp(body, Cmp("<", V, Var(v))), {v: V})
            pos.append(ProofObligation(f"{r.name}|ref|variant-dec|{e}", Implies(hyp, dec), VALIDITY, joint))
    abstract_guards = disj(*(normalize_event(b).guard for b in r.abstraction.events.values()))
    concrete_guards = disj(*(normalize_event(b).guard for b in r.concrete.events.values()))
    pos.append(ProofObligation(f"{r.name}|ref|liveness", Implies(conj(hyp, abstract_guards), concrete_guards),
                               VALIDITY, joint))
    return [(po, decide(po, budget, assumptions)) for po in pos]


__all__ = ["ProjectedState", "DecompositionCheck", "LemmaReport", "DecompositionError", "project_state",
           "project_predicate", "concrete_invariant", "concrete_machine", "generate_projected",
           "check_decomposition", "check_projection_lemma", "gen_refinement_pos", "display_name", "super_of"]
