import pytest

from bslts.model import ModelError
from bslts.parser import parse_component
from bslts.prover import evaluate
from bslts.refinement import (DecompositionError, check_projection_lemma, concrete_invariant, gen_refinement_pos,
                              generate_projected, project_state, super_of)
from bslts.sltsgen import build_states, generate
from bslts.terms import show
from bslts.wp import normalize_event

from conftest import load, slts_of

OK_NONE = "StatusWord=ISO_Ok & CurTransaction=None"
OK_SOME = "StatusWord=ISO_Ok & CurTransaction/=None"
ERR_NONE = "StatusWord/=ISO_Ok & CurTransaction=None"
ERR_SOME = "StatusWord/=ISO_Ok & CurTransaction/=None"


def test_concrete_invariant(r1):
    assert show(concrete_invariant(r1)) == "CurTransaction=None or StatusWord=ISO_Ok & ChannelIsSecured=TRUE"


def test_state_projection(r1):
    states = build_states(r1.abstraction)
    p = project_state(states[2], r1)
    assert p.source == "Error=TRUE"
    assert show(p.state.predicate) == "StatusWord=ISO_Error"
    assert not p.empty
    assert project_state(states[0], r1).state.is_initial


def test_r1_hierarchy(r1_slts):
    assert [(h.name, h.substates) for h in r1_slts.hierarchy] == [
        ("Error=TRUE", (ERR_NONE, ERR_SOME)), ("Error=FALSE", (OK_NONE, OK_SOME))]
    assert all(h.verdict.valid for h in r1_slts.hierarchy)
    assert r1_slts.unreached_names == {ERR_SOME}
    assert super_of(r1_slts, OK_SOME) == "Error=FALSE"
    assert any("empty" in w for w in r1_slts.warnings)


def test_r1_transitions(r1_slts):
    keys = {(t.source, t.event, t.target): (show(t.D), show(t.A)) for t in r1_slts.transitions}
    assert keys[(OK_NONE, "CompleteTransaction", ERR_NONE)] == ("true", "true")
    assert keys[(OK_SOME, "CompleteTransaction", OK_NONE)] == ("true", "true")
    assert keys[(OK_NONE, "InitializeTransaction", OK_SOME)] == ("true", "ChannelIsSecured=TRUE")
    assert not any(ERR_SOME in (t.source, t.target) for t in r1_slts.transitions)
    assert r1_slts.minimal
    assert len(r1_slts.transitions) == 15


def test_projection_lemma_holds_for_demoney(r1, demoney_slts, r1_slts):
    report = check_projection_lemma(demoney_slts, r1_slts, r1)
    assert report.ok
    assert len(report.verdicts) == 14


def test_projection_lemma_broken_fixture():
    r = load("toggle_broken.ref")
    projected = slts_of("toggle_broken.ref")
    report = check_projection_lemma(slts_of("toggle.mch"), projected, r)
    assert [v.po_id for v in report.invalid] == ["ToggleBroken|proj|y=TRUE|Flip|y=TRUE"]
    w = report.invalid[0].witness_dict()
    assert w == {"x": "TRUE", "y": "TRUE"}
    # re-check: the hypotheses hold at the witness and the abstract guard does not
    abstract_state = build_states(r.abstraction)[2]
    assert evaluate(abstract_state.interpretation, w)
    assert evaluate(r.linking, w)
    assert evaluate(projected.state("y=TRUE").interpretation, w)
    assert not evaluate(normalize_event(r.abstraction.events["Flip"]).guard, w)


def test_refinement_pos_r1(r1):
    results = gen_refinement_pos(r1)
    assert [po.id for po, _ in results] == [
        "Demoney_R1|ref|init", "Demoney_R1|ref|event|CompleteTransaction", "Demoney_R1|ref|event|GetData",
        "Demoney_R1|ref|event|InitializeTransaction", "Demoney_R1|ref|event|Reset", "Demoney_R1|ref|liveness"]
    assert all(v.valid for _, v in results)


def test_variant_violation():
    results = gen_refinement_pos(load("counter_variant.ref"))
    bad = [po.id for po, v in results if not v.valid]
    assert bad == ["CounterVariant|ref|variant-dec|Tick"]


def test_new_events_need_variant():
    src = ("REFINEMENT R REFINES Gate VARIABLES y INVARIANT y : BOOL & y = x INITIALISATION y := FALSE "
           "EVENTS Go = y := TRUE ; Idle = skip END")
    r = parse_component(src, lambda n: load("gate.mch"))
    with pytest.raises(ModelError):
        gen_refinement_pos(r)


def test_identity_refinement_is_isomorphic():
    a, b = slts_of("toggle.mch"), slts_of("toggle_identity.ref")
    assert {t.key for t in a.transitions} == {t.key for t in b.transitions}
    assert all(v.valid for _, v in gen_refinement_pos(load("toggle_identity.ref")))


def test_bad_decomposition():
    src = ("REFINEMENT R REFINES Gate VARIABLES y INVARIANT y : BOOL & y = x "
           "ASSERTIONS (x = TRUE <=> y = FALSE) INITIALISATION y := FALSE EVENTS Go = y := TRUE END")
    r = parse_component(src, lambda n: load("gate.mch"))
    with pytest.raises(DecompositionError):
        generate_projected(r)


def test_undeclared_states_get_their_projection():
    s = slts_of("toggle_broken.ref")
    assert [(h.name, h.substates) for h in s.hierarchy] == [("x=FALSE", ("y=FALSE",)), ("x=TRUE", ("y=TRUE",))]


def test_projected_budget_one_is_not_minimal(r1):
    s = generate_projected(r1, budget=1)
    assert not s.minimal
    assert len(s.hierarchy) == 2
    abstract = generate(r1.abstraction, budget=1)
    assert not check_projection_lemma(abstract, s, r1).invalid
