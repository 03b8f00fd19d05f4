import itertools

import pytest

from bslts.model import INIT_EVENT, Refinement
from bslts.oracle import successors
from bslts.parser import parse_component
from bslts.prover import AssumptionTable, Outcome, compile_pred, enumerate_valuations
from bslts.refinement import concrete_machine
from bslts.slts import AProv, DProv, INIT_STATE, is_minimal
from bslts.sltsgen import (EmptyAssertions, IncompleteStates, build_states, check_completeness, classify_transition,
                           generate)
from bslts.terms import TRUE, show

from conftest import load, slts_of

MACHINES = ["demoney.mch", "toggle.mch", "counter.mch", "gate.mch"]


def brute_force(m, states):
    """Transitions and pointwise D/A straight from the successor relation."""
    interp = {s.name: compile_pred(s.interpretation) for s in states}
    vals = list(enumerate_valuations(m.variables.items()))
    out = {}
    for E in states:
        events = [INIT_EVENT] if E.is_initial else sorted(m.events)
        inside = vals if E.is_initial else [v for v in vals if interp[E.name](v)]
        for ev, F in itertools.product(events, [s for s in states if not s.is_initial]):
            enabled = {tuple(v.items()) for v in inside if successors(v, ev, m)}
            crossing = {tuple(v.items()) for v in inside
                        if any(interp[F.name](w) for w in successors(v, ev, m))}
            if crossing:
                out[(E.name, ev, F.name)] = (inside, enabled, crossing)
    return out


@pytest.mark.parametrize("name", MACHINES + ["demoney_r1.ref"])
def test_full_budget_matches_brute_force(name):
    s = slts_of(name)
    m = load(name)
    m = concrete_machine(m) if isinstance(m, Refinement) else m
    states = [st for st in s.states]
    expected = brute_force(m, states)
    assert {t.key for t in s.transitions} == set(expected)
    for t in s.transitions:
        inside, enabled, crossing = expected[t.key]
        d, a = compile_pred(t.D), compile_pred(t.A)
        for v in inside:
            key = tuple(v.items())
            if t.source != INIT_STATE:
                assert d(v) == (key in enabled), (t.key, v)
            if key in enabled:
                assert a(v) == (key in crossing), (t.key, v)


@pytest.mark.parametrize("name", MACHINES)
def test_full_budget_is_minimal(name):
    assert slts_of(name).minimal


def test_demoney_labels(demoney_slts):
    labels = {t.key: (show(t.D), show(t.A)) for t in demoney_slts.transitions}
    F, T = "Error=FALSE", "Error=TRUE"
    assert labels == {
        (INIT_STATE, INIT_EVENT, F): ("true", "true"),
        (F, "CompleteTransaction", F): ("true", "EngagedTrans=TRUE"),
        (F, "CompleteTransaction", T): ("true", "EngagedTrans=FALSE"),
        (F, "GetData", F): ("true", "EngagedTrans=FALSE"),
        (F, "GetData", T): ("true", "EngagedTrans=TRUE"),
        (F, "InitializeTransaction", F): ("true", "EngagedTrans=FALSE"),
        (F, "InitializeTransaction", T): ("true", "true"),
        (F, "Reset", F): ("true", "true"),
        (T, "CompleteTransaction", T): ("true", "true"),
        (T, "GetData", F): ("true", "true"),
        (T, "InitializeTransaction", F): ("true", "true"),
        (T, "InitializeTransaction", T): ("true", "true"),
        (T, "Reset", F): ("true", "true"),
    }


def test_demoney_eliminations(demoney_slts):
    gone = {(x.source, x.event, x.target, x.reason) for x in demoney_slts.eliminated}
    assert gone == {(INIT_STATE, INIT_EVENT, "Error=TRUE", "A"), ("Error=FALSE", "Reset", "Error=TRUE", "A"), ("Error=TRUE", "GetData", "Error=TRUE", "A"),
                    ("Error=TRUE", "Reset", "Error=TRUE", "A"),
                    ("Error=TRUE", "CompleteTransaction", "Error=FALSE", "A")}


def test_budget_one_keeps_everything_by_default(demoney):
    s = generate(demoney, budget=1)
    assert not s.minimal
    assert not s.eliminated
    assert len(s.transitions) == 2 + 2 * 4 * 2
    for t in s.transitions:
        if t.source == INIT_STATE:
            assert t.d_prov is DProv.PROVED_TRUE
        else:
            assert t.d_prov is DProv.GUARD_BY_DEFAULT
        assert t.a_prov is AProv.REACH_BY_DEFAULT
    assert any("completeness" in w for w in s.warnings)


def test_default_mode_leaves_computed_labels_by_default(demoney):
    s = generate(demoney, mode="default")
    assert not is_minimal(s)
    assert {t.key for t in s.transitions} == {t.key for t in slts_of("demoney.mch").transitions}
    assert all(t.a_prov in (AProv.PROVED_TRUE, AProv.REACH_BY_DEFAULT) for t in s.transitions)
    assert not any(v.po_id.endswith(("|3", "|6")) for v in s.ledger)


def test_strict_mode_upgrades_guards():
    s = slts_of("counter.mch")
    step = s.transition("n=0", "Step", "n:1..2")
    assert step.d_prov is DProv.GUARD_BY_PROOF
    assert show(step.D) == "up=TRUE"


def test_unknown_mode_is_rejected(demoney):
    with pytest.raises(ValueError):
        generate(demoney, mode="lazy")


def test_assumed_obligations(demoney):
    table = AssumptionTable({"Demoney|Error=FALSE|Reset|1": Outcome.VALID,
                             "Demoney|Error=FALSE|Reset|Error=FALSE|4": Outcome.VALID,
                             "Demoney|Error=FALSE|Reset|Error=TRUE|5": Outcome.VALID})
    s = generate(demoney, budget=1, assumptions=table)
    t = s.transition("Error=FALSE", "Reset", "Error=FALSE")
    assert t.D == TRUE and t.A == TRUE
    assert t.d_prov is DProv.ASSUMED and t.a_prov is AProv.ASSUMED
    assert s.transition("Error=FALSE", "Reset", "Error=TRUE") is None
    assert s.eliminated[0].assumed


def test_incomplete_states_need_force():
    src = ("MACHINE P VARIABLES x INVARIANT x : BOOL ASSERTIONS x = TRUE "
           "INITIALISATION x := TRUE EVENTS Go = x := FALSE END")
    m = parse_component(src)
    assert check_completeness(m).invalid
    with pytest.raises(IncompleteStates) as info:
        generate(m)
    assert "x=FALSE" in str(info.value)
    s = generate(m, force=True)
    assert any("forced" in w for w in s.warnings)
    assert s.transition("x=TRUE", "Go", "x=TRUE") is None


def test_missing_assertions():
    m = parse_component("MACHINE P VARIABLES x INVARIANT x : BOOL INITIALISATION x := TRUE END")
    with pytest.raises(EmptyAssertions):
        build_states(m)


def test_overlapping_states_warn():
    src = ("MACHINE P VARIABLES x INVARIANT x : BOOL ASSERTIONS x = TRUE or x : BOOL "
           "INITIALISATION x := TRUE EVENTS Go = x := FALSE END")
    s = generate(parse_component(src))
    assert any("overlap" in w for w in s.warnings)


def test_classify_transition_rejects_init_target(demoney):
    states = build_states(demoney)
    with pytest.raises(ValueError):
        classify_transition(demoney, states[1], "Reset", states[0])
    with pytest.raises(ValueError):
        classify_transition(demoney, states[1], INIT_EVENT, states[1])


def test_generation_is_deterministic(demoney):
    a, b = generate(demoney), generate(demoney)
    assert a == b
    assert [t.key for t in a.transitions] == [t.key for t in b.transitions]


def test_transitions_from_reached_states_only():
    s = slts_of("gate.mch")
    assert [st.name for st in s.states] == [INIT_STATE, "x=FALSE", "x=TRUE"]
    assert all(t.source in s.state_names for t in s.transitions)
