"""Security properties: Enabled, AlwaysEnabled, Crossable, AlwaysCrossable.

Properties are checked either semantically (one proof obligation per event)
or syntactically over a generated SLTS, reading enabledness and reachability
off the transition labels and the eliminated triples.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .model import Machine, ModelError, Refinement, Signature
from .parser import parse_predicate
from .prover import ProofObligation, SATISFIABILITY, VALIDITY, decide
from .slts import AProv, DProv, Slts
from .terms import TRUE, Implies, Pred, conj, show
from .wp import box, diamond, negate, normalize_event


class Kind(str, enum.Enum):
    ENABLED = "Enabled"
    ALWAYS_ENABLED = "AlwaysEnabled"
    CROSSABLE = "Crossable"
    ALWAYS_CROSSABLE = "AlwaysCrossable"

    @property
    def has_target(self) -> bool:
        return self in (Kind.CROSSABLE, Kind.ALWAYS_CROSSABLE)

    @property
    def universal(self) -> bool:
        return self in (Kind.ALWAYS_ENABLED, Kind.ALWAYS_CROSSABLE)


class Truth(str, enum.Enum):
    TRUE = "True"
    FALSE = "False"
    INCONCLUSIVE = "Inconclusive"

    def negate(self) -> "Truth":
        if self is Truth.TRUE:
            return Truth.FALSE
        if self is Truth.FALSE:
            return Truth.TRUE
        return self


class PropertyError(ModelError):
    pass


@dataclass(frozen=True)
class PropertyFormula:
    """One property, possibly over several events.

    ``event`` is an event name, or None for "every interface event except
    the ones in ``excluded``".
    """

    kind: Kind
    p1: Pred
    event: str | None
    p2: Pred | None = None
    negated: bool = False
    excluded: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.kind.has_target != (self.p2 is not None):
            raise PropertyError(f"{self.kind.value} {'needs' if self.kind.has_target else 'takes no'} target predicate")

    def events(self, interface) -> list:
        if self.event is not None:
            return [self.event]
        return sorted(e for e in interface if e not in self.excluded)

    def for_event(self, event: str) -> "PropertyFormula":
        return replace(self, event=event, excluded=())

    def text(self) -> str:
        sel = self.event if self.event is not None else " ".join(["*"] + (["except", *self.excluded] if self.excluded else []))
        out = f"{'NOT ' if self.negated else ''}{self.kind.value.upper()} ({show(self.p1)}) {sel}"
        if self.p2 is not None:
            out += f" -> ({show(self.p2)})"
        return out


@dataclass(frozen=True)
class CheckResult:
    truth: Truth
    method: str  # "semantic" or "syntactic"
    cases: tuple = ()
    justification: tuple = ()
    warnings: tuple = ()
    verdicts: tuple = field(default=(), compare=False)

    @property
    def case(self) -> int | None:
        return self.cases[0] if len(self.cases) == 1 else None

    def describe(self) -> str:
        how = self.method
        if self.cases:
            how += "-case-" + "/".join(str(c) for c in self.cases)
        return f"{self.truth.value} ({how})"


def combine(results: list, method: str) -> CheckResult:
    """Conjunction of results: False wins, then Inconclusive."""
    if not results:
        return CheckResult(Truth.TRUE, method, (), ("no event selected",))
    if any(r.truth is Truth.FALSE for r in results):
        truth = Truth.FALSE
        used = [r for r in results if r.truth is Truth.FALSE]
    elif any(r.truth is Truth.INCONCLUSIVE for r in results):
        truth = Truth.INCONCLUSIVE
        used = [r for r in results if r.truth is Truth.INCONCLUSIVE]
    else:
        truth = Truth.TRUE
        used = results
    cases = tuple(sorted({c for r in used for c in r.cases}))
    just = tuple(j for r in used for j in r.justification)
    warns = tuple(dict.fromkeys(w for r in results for w in r.warnings))
    verdicts = tuple(v for r in results for v in r.verdicts)
    return CheckResult(truth, method, cases, just, warns, verdicts)


# ------------------------------------------------------------------ semantic

def _machine(m) -> Machine:
    if isinstance(m, Refinement):
        from .refinement import concrete_machine
        return concrete_machine(m)
    return m


def semantic_formula(f: PropertyFormula, m: Machine, event: str) -> tuple:
    """(formula, kind) of the defining obligation for one event; p1 is read inside the invariant."""
    if event not in m.events:
        raise PropertyError(f"unknown event {event}")
    ev = normalize_event(m.events[event])
    p1 = conj(f.p1, m.invariant)
    if f.kind is Kind.ENABLED:
        return conj(p1, ev.guard), SATISFIABILITY
    if f.kind is Kind.ALWAYS_ENABLED:
        return Implies(p1, ev.guard), VALIDITY
    if f.kind is Kind.CROSSABLE:
        return conj(p1, diamond(ev, f.p2)), SATISFIABILITY
    return Implies(p1, box(ev, f.p2)), VALIDITY


def check_semantic(f: PropertyFormula, m, budget: int | None = None) -> CheckResult:
    m = _machine(m)
    for e in ([f.event] if f.event is not None else f.excluded):
        if e not in m.events:
            raise PropertyError(f"unknown event {e}")
    results = []
    for event in f.events(m.events):
        formula, kind = semantic_formula(f, m, event)
        po_id = f"{m.name}|prop|{f.label or f.kind.value}|{event}"
        v = decide(ProofObligation(po_id, formula, kind, tuple(m.variables.items())), budget)
        if v.unknown:
            truth = Truth.INCONCLUSIVE
        else:
            truth = Truth.TRUE if v.valid else Truth.FALSE
        if f.negated:
            truth = truth.negate()
        warns = ()
        if f.kind.universal and not decide(ProofObligation("_", conj(f.p1, m.invariant, normalize_event(
                m.events[event]).guard), SATISFIABILITY, tuple(m.variables.items())), budget).valid:
            warns = (f"{f.kind.value} on {event} holds only vacuously: the event is never enabled in p1",)
        just = (f"{po_id} {v.outcome}" + (f" at {', '.join(f'{k}={x}' for k, x in v.witness)}" if v.witness else ""),)
        results.append(CheckResult(truth, "semantic", (), just, warns, (v,)))
    return combine(results, "semantic")


# ----------------------------------------------------------------- syntactic

INSIDE, OUTSIDE, STRADDLE, EMPTY = "inside", "outside", "straddle", "empty"


def classify_states(p: Pred, s: Slts) -> dict:
    """State name -> inside / outside / straddle / empty with respect to p (full enumeration)."""
    variables = tuple(s.signature.variables.items())
    out = {}
    for st in list(s.states) + list(s.unreached):
        if st.is_initial or st.name in out:
            continue
        if not decide(ProofObligation("_", st.interpretation, SATISFIABILITY, variables)).valid:
            out[st.name] = EMPTY
        elif decide(ProofObligation("_", Implies(st.interpretation, p), VALIDITY, variables)).valid:
            out[st.name] = INSIDE
        elif decide(ProofObligation("_", Implies(st.interpretation, negate(p)), VALIDITY, variables)).valid:
            out[st.name] = OUTSIDE
        else:
            out[st.name] = STRADDLE
    return out


def state_union(p: Pred, s: Slts) -> list | None:
    """Names of the (nonempty) states whose union is p within the invariant, or None."""
    cls = classify_states(p, s)
    if STRADDLE in cls.values():
        return None
    return [n for n, c in cls.items() if c == INSIDE]


def _proved_nonfalse_d(t) -> bool:
    return t.d_prov is not DProv.GUARD_BY_DEFAULT


def _d_true(t) -> bool:
    return t.D == TRUE and t.d_prov in (DProv.PROVED_TRUE, DProv.ASSUMED)


def _a_true(t) -> bool:
    return t.A == TRUE and t.a_prov in (AProv.PROVED_TRUE, AProv.ASSUMED)


def _d_eliminated(s: Slts, q: str, e: str) -> bool:
    return any(x.reason == "D" for x in s.eliminated_from(q, e))


def _cite(t) -> str:
    d = "" if t.D == TRUE else "G"
    a = "" if t.A == TRUE else "G"
    return f"{t.source} -[{d}][{a}]{t.event}-> {t.target}"


def _result(truth: Truth, case: int | None, just: list, negated: bool, warnings=()) -> CheckResult:
    if negated:
        truth = truth.negate()
    return CheckResult(truth, "syntactic", () if case is None else (case,), tuple(just), tuple(warnings))


def _inconclusive(reason: str) -> CheckResult:
    return CheckResult(Truth.INCONCLUSIVE, "syntactic", (), (reason,))


def check_syntactic(f: PropertyFormula, s: Slts) -> CheckResult:
    interface = {t.event for t in s.transitions} | {x.event for x in s.eliminated}
    interface.discard("INITIALISATION")
    q1 = state_union(f.p1, s)
    if q1 is None:
        return _inconclusive("p1 is not a state-predicate union")
    q2 = None
    if f.p2 is not None:
        q2 = state_union(f.p2, s)
        if q2 is None:
            return _inconclusive("p2 is not a state-predicate union")
    results = [_check_one(f, e, s, q1, q2) for e in f.events(interface)]
    return combine(results, "syntactic")


def _check_one(f: PropertyFormula, e: str, s: Slts, q1: list, q2: list | None) -> CheckResult:
    neg = f.negated
    minimal = s.minimal
    if not q1:
        truth = Truth.TRUE if f.kind.universal else Truth.FALSE
        warns = [] if f.kind.universal else [f"p1 is empty: {f.kind.value} on {e} is false vacuously"]
        return _result(truth, None, ["p1 contains no nonempty state"], neg, warns)
    unprocessed = [q for q in q1 if not s.processed(q)]
    out = {t for t in s.transitions if t.source in q1 and t.event == e}

    if f.kind is Kind.ENABLED:
        for t in sorted(out, key=lambda t: t.key):
            if _d_true(t):
                return _result(Truth.TRUE, 1, [_cite(t)], neg)
        if minimal:
            for t in sorted(out, key=lambda t: t.key):
                return _result(Truth.TRUE, 1, [_cite(t) + " (minimal)"], neg)
        if not unprocessed and all(_d_eliminated(s, q, e) for q in q1):
            return _result(Truth.FALSE, 2, [f"{e} eliminated by enabledness from {q}" for q in q1], neg,
                           [f"Enabled is false for {e}: universal properties over p1 hold vacuously"])
        return _inconclusive(f"no enabledness case decides {e}")

    if f.kind is Kind.ALWAYS_ENABLED:
        for q in q1:
            if s.processed(q) and _d_eliminated(s, q, e):
                return _result(Truth.FALSE, 4, [f"{e} eliminated by enabledness from {q}"], neg)
        if minimal:
            for t in sorted(out, key=lambda t: t.key):
                if t.D != TRUE:
                    return _result(Truth.FALSE, 4, [_cite(t) + " (minimal)"], neg)
        if unprocessed:
            return _inconclusive(f"states not explored: {', '.join(unprocessed)}")
        just = []
        for q in q1:
            hit = [t for t in out if t.source == q and _d_true(t)]
            if not hit:
                return _inconclusive(f"no enabledness case decides {e} from {q}")
            just.append(_cite(sorted(hit, key=lambda t: t.key)[0]))
        return _result(Truth.TRUE, 3, just, neg)

    inside = set(q2)
    if f.kind is Kind.CROSSABLE:
        into = sorted((t for t in out if t.target in inside), key=lambda t: t.key)
        for t in into:
            if _a_true(t) and _proved_nonfalse_d(t):
                return _result(Truth.TRUE, 5, [_cite(t)], neg)
        if minimal and into:
            return _result(Truth.TRUE, 5, [_cite(into[0]) + " (minimal)"], neg)
        if not unprocessed and not into:
            just = [f"no {e} transition from {', '.join(q1)} into {', '.join(q2) or 'nothing'}"]
            return _result(Truth.FALSE, 5 if minimal else 6, just, neg)
        return _inconclusive(f"no reachability case decides {e}")

    # AlwaysCrossable
    leaving = sorted((t for t in out if t.target not in inside), key=lambda t: t.key)
    for t in leaving:
        if minimal or (_proved_nonfalse_d(t) and t.a_prov is not AProv.REACH_BY_DEFAULT):
            return _result(Truth.FALSE, 8, [_cite(t)], neg)
    for q in q1:
        if not s.processed(q):
            continue
        from_q = [t for t in out if t.source == q]
        enabled = any(_d_true(t) for t in from_q)
        a_elim = all(any(x.target == q2n and x.reason == "A" for x in s.eliminated_from(q, e)) for q2n in q2)
        if enabled and a_elim:
            return _result(Truth.FALSE, 8, [f"{e} enabled in {q} but every target in p2 eliminated"], neg)
    if unprocessed:
        return _inconclusive(f"states not explored: {', '.join(unprocessed)}")
    if leaving:
        return _inconclusive(f"{e} may leave p2 through transitions kept by default")
    just = [_cite(t) for t in sorted(out, key=lambda t: t.key)] or [f"{e} never fires from p1"]
    return _result(Truth.TRUE, 7, just, neg)


def check(f: PropertyFormula, s: Slts | None = None, m=None, semantic: bool = False,
          budget: int | None = None) -> CheckResult:
    if semantic:
        if m is None:
            raise PropertyError("semantic checking needs the model")
        return check_semantic(f, m, budget)
    if s is None:
        raise PropertyError("syntactic checking needs an SLTS")
    return check_syntactic(f, s)


# ---------------------------------------------------------------- weakening

WEAKEN_P1, STRENGTHEN_P1, WEAKEN_P2, STRENGTHEN_P2 = "weaken-p1", "strengthen-p1", "weaken-p2", "strengthen-p2"
DIRECTIONS = (WEAKEN_P1, STRENGTHEN_P1, WEAKEN_P2, STRENGTHEN_P2)

# directions under which a true (un-negated) formula stays true
_SOUND = {
    Kind.ENABLED: {WEAKEN_P1},
    Kind.ALWAYS_ENABLED: {STRENGTHEN_P1},
    Kind.CROSSABLE: {WEAKEN_P1, WEAKEN_P2},
    Kind.ALWAYS_CROSSABLE: {STRENGTHEN_P1, WEAKEN_P2},
}
_FLIP = {WEAKEN_P1: STRENGTHEN_P1, STRENGTHEN_P1: WEAKEN_P1, WEAKEN_P2: STRENGTHEN_P2, STRENGTHEN_P2: WEAKEN_P2}


def weaken(f: PropertyFormula, direction: str, new: Pred, signature: Signature, invariant: Pred = TRUE,
           budget: int | None = None) -> tuple:
    """Replace p1 or p2 by ``new`` so the result is entailed by f; returns (formula, Verdict).

    The premise (old => new for weakening, new => old for strengthening) is
    checked within the invariant.
    """
    if direction not in DIRECTIONS:
        raise PropertyError(f"unknown direction {direction!r}")
    effective = _FLIP[direction] if f.negated else direction
    if effective not in _SOUND[f.kind]:
        raise PropertyError(f"{direction} does not preserve {'NOT ' if f.negated else ''}{f.kind.value}")
    on_p2 = direction.endswith("p2")
    old = f.p2 if on_p2 else f.p1
    if old is None:
        raise PropertyError(f"{f.kind.value} has no target predicate")
    premise = Implies(conj(invariant, old), new) if direction.startswith("weaken") else \
        Implies(conj(invariant, new), old)
    po = ProofObligation(f"weaken|{direction}", premise, VALIDITY, tuple(signature.variables.items()))
    v = decide(po, budget)
    if not v.valid:
        raise PropertyError(f"{direction}: implication between the predicates is {v.outcome}")
    return (replace(f, p2=new) if on_p2 else replace(f, p1=new)), v


# ------------------------------------------------------------------ schemas

def reactivity(m) -> list:
    m = _machine(m)
    return [PropertyFormula(Kind.ALWAYS_ENABLED, m.invariant, e, label="reactivity") for e in sorted(m.events)]


def unicity(m, target: Pred, begin: str) -> list:
    m = _machine(m)
    if begin not in m.events:
        raise PropertyError(f"unknown event {begin}")
    return [PropertyFormula(Kind.ALWAYS_CROSSABLE, m.invariant, e, negate(target), label="unicity")
            for e in sorted(m.events) if e != begin]


def builtin_schemas(m, target: Pred | None = None, begin: str | None = None) -> dict:
    """Reactivity always; unicity when a target predicate and begin event are given."""
    out = {"reactivity": reactivity(m)}
    if target is not None and begin is not None:
        out["unicity"] = unicity(m, target, begin)
    return out


# -------------------------------------------------------------- file format

_KINDS = {k.value.upper(): k for k in Kind}
_LINE = re.compile(r"^(?:(?P<label>[A-Za-z_][\w.-]*)\s*:\s*)?(?P<not>NOT\s+)?(?P<kind>[A-Za-z]+)\s*(?P<rest>.*)$")


def _paren(text: str, pos: int, lineno: int) -> tuple:
    """Contents of the balanced parenthesis starting at text[pos] and the index after it."""
    if pos >= len(text) or text[pos] != "(":
        raise PropertyError(f"line {lineno}: expected '('")
    depth = 0
    for i in range(pos, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return text[pos + 1:i], i + 1
    raise PropertyError(f"line {lineno}: unbalanced parenthesis")


def parse_properties(text: str, signature: Signature, invariant: Pred = TRUE) -> list:
    """Formulas of a property file in order; see docs/properties.md for the syntax."""
    aliases = {"INVARIANT": invariant}
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m or m.group("kind").upper() not in _KINDS:
            raise PropertyError(f"line {lineno}: expected [label:] [NOT] KIND (p1) event [-> (p2)]")
        kind = _KINDS[m.group("kind").upper()]
        rest = m.group("rest")
        body, pos = _paren(rest, 0, lineno)
        try:
            p1 = parse_predicate(body, signature, aliases=aliases)
        except ModelError as exc:
            raise PropertyError(f"line {lineno}: {exc}") from None
        rest = rest[pos:].strip()
        sel, _, tail = rest.partition("->")
        words = sel.split()
        if not words:
            raise PropertyError(f"line {lineno}: missing event selector")
        if words[0] == "*":
            if len(words) > 1 and words[1].lower() != "except":
                raise PropertyError(f"line {lineno}: expected 'except' after '*'")
            event, excluded = None, tuple(words[2:])
        elif len(words) == 1:
            event, excluded = words[0], ()
        else:
            raise PropertyError(f"line {lineno}: a selector is one event or '* except ...'")
        p2 = None
        if tail.strip():
            inner, end = _paren(tail.strip(), 0, lineno)
            if tail.strip()[end:].strip():
                raise PropertyError(f"line {lineno}: trailing text after target predicate")
            try:
                p2 = parse_predicate(inner, signature, aliases=aliases)
            except ModelError as exc:
                raise PropertyError(f"line {lineno}: {exc}") from None
        elif "->" in rest:
            raise PropertyError(f"line {lineno}: missing target predicate after '->'")
        label = m.group("label") or f"line{lineno}"
        try:
            out.append(PropertyFormula(kind, p1, event, p2, bool(m.group("not")), excluded, label))
        except PropertyError as exc:
            raise PropertyError(f"line {lineno}: {exc}") from None
    return out


def load_properties(path, signature: Signature, invariant: Pred = TRUE) -> list:
    return parse_properties(Path(path).read_text(encoding="utf-8"), signature, invariant)


def group_by_label(formulas: list) -> dict:
    """Label -> formulas sharing it (their conjunction is the property)."""
    out: dict = {}
    for f in formulas:
        out.setdefault(f.label, []).append(f)
    return out


def check_all(formulas: list, s: Slts | None = None, m=None, semantic: bool = False,
              budget: int | None = None) -> dict:
    """Label -> combined CheckResult."""
    method = "semantic" if semantic else "syntactic"
    return {label: combine([check(f, s, m, semantic, budget) for f in fs], method)
            for label, fs in group_by_label(formulas).items()}


__all__ = ["Kind", "Truth", "PropertyFormula", "CheckResult", "PropertyError", "check_semantic", "check_syntactic",
           "check", "check_all", "weaken", "reactivity", "unicity", "builtin_schemas", "parse_properties",
           "load_properties", "state_union", "classify_states", "group_by_label", "DIRECTIONS"]
