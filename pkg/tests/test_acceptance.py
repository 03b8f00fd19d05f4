"""One test per acceptance criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line; the conftest
summary hook repeats the verdicts at the end of the run.  All comparisons
are exact: predicates are compared by evaluation on every valuation, and
the exploration depths below are fixed.
"""
import itertools

from bslts.model import INIT_EVENT, Refinement
from bslts.oracle import check_trace_path_equality, enumerate_paths, enumerate_traces, event_sequences, run
from bslts.prover import enumerate_valuations, evaluate
from bslts.refinement import (check_projection_lemma, concrete_machine, gen_refinement_pos, generate_projected,
                              super_of)
from bslts.secprops import (Kind, PropertyFormula, Truth, check_all, check_semantic, check_syntactic,
                            parse_properties)
from bslts.sltsgen import generate
from bslts.terms import conj, disjuncts, eq, show
from bslts.wp import conjugate_wp, fis, negate, wp

from conftest import MODELS, load, slts_of

DEMONEY_DEPTH = 5
R1_DEPTH = 4
BUDGET_ONE_DEPTH = 4

F, T = "Error=FALSE", "Error=TRUE"
OK_NONE = "StatusWord=ISO_Ok & CurTransaction=None"
OK_SOME = "StatusWord=ISO_Ok & CurTransaction/=None"
ERR_NONE = "StatusWord/=ISO_Ok & CurTransaction=None"
ERR_SOME = "StatusWord/=ISO_Ok & CurTransaction/=None"


def verdict(n, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    print(f"criterion {n}: {status} {detail}".rstrip())
    assert not failures, "\n".join(failures)


def same_on(p, q, variables, under):
    return all(evaluate(p, v) == evaluate(q, v) for v in enumerate_valuations(variables) if evaluate(under, v))


def test_criterion_1_demoney_slts():
    m, s = load("demoney.mch"), slts_of("demoney.mch")
    fails = []
    variables = list(m.variables.items())
    for src, ev in itertools.product((F, T), sorted(m.events)):
        out = s.outgoing(src, ev)
        if not out or any(show(t.D) != "true" for t in out):
            fails.append(f"{ev} from {src} is not enabled with D=true")
    t = s.transition(T, "GetData", F)
    if t is None or show(t.A) != "true":
        fails.append("(Error=TRUE, GetData, Error=FALSE) must have A=true")
    t = s.transition(F, "GetData", T)
    if t is None or not same_on(t.A, eq("EngagedTrans", "TRUE"), variables, s.state(F).interpretation):
        fails.append("(Error=FALSE, GetData, Error=TRUE) must have A equivalent to EngagedTrans=TRUE")
    if s.transition(T, "GetData", T) is not None:
        fails.append("(Error=TRUE, GetData, Error=TRUE) must not exist")
    for src in (F, T):
        targets = [(x.target, show(x.A)) for x in s.outgoing(src, "Reset")]
        if targets != [(F, "true")]:
            fails.append(f"Reset from {src} goes to {targets}")
    if not s.minimal:
        fails.append("the SLTS is not minimal")
    verdict(1, fails, f"({len(s.transitions)} transitions)")


def test_criterion_2_refinement_hierarchy():
    s = slts_of("demoney_r1.ref")
    fails = []
    subs = [n for h in s.hierarchy for n in h.substates]
    if len(s.hierarchy) != 2 or len(subs) != 4:
        fails.append(f"expected 4 substates under 2 super-states, got {[(h.name, h.substates) for h in s.hierarchy]}")
    if s.unreached_names != {ERR_SOME} or any(ERR_SOME in (t.source, t.target) for t in s.transitions):
        fails.append(f"{ERR_SOME} must be the only unreachable substate")
    abstract = slts_of("demoney.mch")
    for a_key, c_key in [((F, "CompleteTransaction", T), (OK_NONE, "CompleteTransaction", ERR_NONE)),
                         ((F, "CompleteTransaction", F), (OK_SOME, "CompleteTransaction", OK_NONE))]:
        a = abstract.transition(*a_key)
        c = s.transition(*c_key)
        if a is None or show(a.D) != "true" or show(a.A) == "true":
            fails.append(f"abstract {a_key} should be [][G]")
        if c is None or (show(c.D), show(c.A)) != ("true", "true"):
            fails.append(f"projected {c_key} should be [][]")
    if super_of(s, OK_SOME) != F or super_of(s, OK_NONE) != F:
        fails.append("the reflexive abstract transition must specialize inside Error=FALSE")
    verdict(2, fails)


def test_criterion_3_trace_path_equality_and_mutations():
    fails = []
    cases = [("demoney.mch", DEMONEY_DEPTH), ("demoney_r1.ref", R1_DEPTH)]
    survivors = []
    for name, depth in cases:
        m, s = load(name), slts_of(name)
        report = check_trace_path_equality(m, s, depth)
        if not report.equal:
            fails.append(f"{name} at depth {depth}: {report.lines()}")
        for t in s.transitions:
            if check_trace_path_equality(m, s.without(t.key), depth).equal:
                survivors.append(f"{name}: deleting {t.key} keeps equality")
    fails.extend(survivors)
    verdict(3, fails, f"({len(survivors)} undetected deletions)")


def test_criterion_4_atomicity_formulas():
    r, s = load("demoney_r1.ref"), slts_of("demoney_r1.ref")
    fs = parse_properties((MODELS / "atomicity.props").read_text(), s.signature, s.invariant)
    syn = check_all(fs, s=s)
    sem = check_all(fs, m=r, semantic=True)
    expected = {"F1": {5}, "F2": {7}, "F3": {7}, "F4": {7}, "F5": {5, 6}}
    fails = []
    for label, cases in expected.items():
        res = syn[label]
        if res.truth is not Truth.TRUE or not set(res.cases) or not set(res.cases) <= cases:
            fails.append(f"{label}: {res.describe()}, expected True with case in {sorted(cases)}")
        if sem[label].truth is not res.truth:
            fails.append(f"{label}: semantic {sem[label].describe()} disagrees")
    verdict(4, fails, " ".join(f"{k}={v.describe()}" for k, v in syn.items()))


def test_criterion_5_projection_lemma():
    fails = []
    good = check_projection_lemma(slts_of("demoney.mch"), slts_of("demoney_r1.ref"), load("demoney_r1.ref"))
    if not good.verdicts or not all(v.valid for v in good.verdicts):
        fails.append(f"Demoney pair: {[(v.po_id, v.outcome) for v in good.verdicts if not v.valid]}")
    r = load("toggle_broken.ref")
    projected = slts_of("toggle_broken.ref")
    bad = check_projection_lemma(slts_of("toggle.mch"), projected, r)
    if len(bad.invalid) != 1 or any(v.unknown for v in bad.verdicts):
        fails.append(f"broken fixture: {[(v.po_id, v.outcome) for v in bad.verdicts]}")
    else:
        # re-check the witness against the obligation rebuilt from the SLTSs
        v = bad.invalid[0]
        w = v.witness_dict()
        _, _, src, event, tgt = v.po_id.split("|")
        t = projected.transition(src, event, tgt)
        abstract_state = next(st for st in slts_of("toggle.mch").states if st.name == "x=TRUE")
        hyp = conj(abstract_state.interpretation, r.linking, projected.state(src).interpretation, t.D)
        guard = fis(r.abstraction.events[event])
        if not (evaluate(hyp, w) and not evaluate(guard, w)):
            fails.append(f"witness {w} does not falsify {v.po_id}")
    verdict(5, fails, f"({len(good.verdicts)} Demoney implications)")


def test_criterion_6_refinement_pos():
    fails = []
    for po, v in gen_refinement_pos(load("demoney_r1.ref")):
        if not v.valid:
            fails.append(f"{po.id} {v.outcome}")
    bad = [po.id for po, v in gen_refinement_pos(load("counter_variant.ref")) if not v.valid]
    if bad != ["CounterVariant|ref|variant-dec|Tick"]:
        fails.append(f"variant fixture: invalid POs {bad}")
    verdict(6, fails)


def _substitutions(m):
    yield INIT_EVENT, m.initialisation
    yield from sorted(m.events.items())


def test_criterion_7_property_suite():
    fails = []
    checked = 0
    corpus = sorted(p.name for p in MODELS.iterdir() if p.suffix in (".mch", ".ref"))
    for name in corpus:
        m = load(name)
        m = concrete_machine(m) if isinstance(m, Refinement) else m
        posts = [m.invariant, *(disjuncts(m.assertion) if m.assertion is not None else ())]
        posts += [eq(x, d.values[0], d.type) for x, d in m.variables.items()]
        vals = list(enumerate_valuations(m.variables.items()))
        for ev, body in _substitutions(m):
            f = fis(body)
            for v in vals:
                outs = run(body, v)
                if evaluate(f, v) != bool(outs):
                    fails.append(f"{name} {ev}: fis disagrees at {v}")
            for r in posts:
                w, c, dual = wp(body, r), conjugate_wp(body, r), negate(wp(body, negate(r)))
                for v in vals:
                    outs = run(body, v)
                    checked += 1
                    if evaluate(w, v) != all(evaluate(r, x) for x in outs):
                        fails.append(f"{name} {ev}: wp of {show(r)} disagrees at {v}")
                    if evaluate(c, v) != any(evaluate(r, x) for x in outs) or evaluate(c, v) != evaluate(dual, v):
                        fails.append(f"{name} {ev}: conjugate of {show(r)} disagrees at {v}")
    for name, po_id in [("demoney.mch", "Demoney|completeness"), ("demoney_r1.ref", "Demoney_R1|completeness")]:
        v = slts_of(name).verdict(po_id)
        if v is None or not v.valid:
            fails.append(f"{po_id} is not Valid")
    verdict(7, fails[:20], f"({checked} wp/relational comparisons)")


def test_criterion_8_budget_one():
    fails = []
    wrong = 0
    for name in ("demoney.mch", "demoney_r1.ref"):
        m = load(name)
        s = generate_projected(m, budget=1) if name.endswith(".ref") else generate(m, budget=1)
        if not all(t.by_default for t in s.transitions):
            fails.append(f"{name}: some transition is not by default")
        if s.minimal:
            fails.append(f"{name}: reported minimal")
        cm = concrete_machine(m) if name.endswith(".ref") else m
        traces = event_sequences(enumerate_traces(cm, BUDGET_ONE_DEPTH))
        paths = event_sequences(enumerate_paths(s, cm, BUDGET_ONE_DEPTH))
        if not traces <= paths:
            fails.append(f"{name}: {len(traces - paths)} trace sequences are not paths")
        names = [st.predicate for st in s.states if not st.is_initial]
        for kind, e, p1, p2, neg in itertools.product(Kind, sorted(cm.events), names, names, (False, True)):
            f = PropertyFormula(kind, p1, e, p2 if kind.has_target else None, neg)
            syn = check_syntactic(f, s)
            if syn.truth is not Truth.INCONCLUSIVE and syn.truth is not check_semantic(f, m).truth:
                wrong += 1
                fails.append(f"{name}: {f.text()} gave {syn.describe()}")
    s = generate_projected(load("demoney_r1.ref"), budget=1)
    fs = parse_properties((MODELS / "atomicity.props").read_text(), s.signature, s.invariant)
    for label, res in check_all(fs, s=s).items():
        if res.truth is not Truth.INCONCLUSIVE:
            fails.append(f"{label} at budget 1: {res.describe()}, expected Inconclusive")
    verdict(8, fails[:20], f"({wrong} wrong syntactic verdicts)")

