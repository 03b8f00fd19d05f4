import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bslts.model import INIT_EVENT
from bslts.oracle import (EqualityReport, check_trace_path_equality, enumerate_paths, enumerate_traces,
                          event_sequences, format_sequence, initial_valuations, run, successors)
from bslts.sltsgen import generate
from bslts.terms import Assign, Choice, Parallel, Var

from conftest import load, slts_of

SMALL = ["toggle.mch", "gate.mch", "counter.mch", "demoney.mch"]


def test_successors_of_demoney(demoney):
    v = {"Error": "FALSE", "EngagedTrans": "FALSE"}
    outs = successors(v, "InitializeTransaction", demoney)
    assert outs == [{"Error": "FALSE", "EngagedTrans": "TRUE"}, {"Error": "TRUE", "EngagedTrans": "FALSE"}]
    assert initial_valuations(demoney) == [{"Error": "FALSE", "EngagedTrans": "FALSE"}]


def test_parallel_swaps():
    s = Parallel((Assign("a", Var("b")), Assign("b", Var("a"))))
    assert run(s, {"a": 1, "b": 2}) == [{"a": 2, "b": 1}]


def test_choice_collects_branches():
    s = Choice((Assign("a", Var("b")), Assign("a", Var("a"))))
    assert run(s, {"a": 1, "b": 2}) == [{"a": 2, "b": 2}, {"a": 1, "b": 2}]


def test_trace_counts(demoney):
    traces = enumerate_traces(demoney, 2)
    seqs = event_sequences(traces)
    assert (INIT_EVENT,) in seqs
    assert len(seqs) == 1 + 4 + 16


@pytest.mark.parametrize("name", SMALL)
@settings(max_examples=10, deadline=None)
@given(st.integers(0, 3))
def test_traces_are_prefix_closed(name, depth):
    seqs = event_sequences(enumerate_traces(load(name), depth))
    for s in seqs:
        for k in range(1, len(s)):
            assert s[:k] in seqs


@pytest.mark.parametrize("name", SMALL + ["demoney_r1.ref"])
def test_full_budget_equality(name):
    depth = 3 if name.endswith(".ref") else 4
    report = check_trace_path_equality(load(name), slts_of(name), depth)
    assert report.equal, report.lines()


@pytest.mark.parametrize("name", SMALL)
def test_witness_equality(name):
    report = check_trace_path_equality(load(name), slts_of(name), 3, witnesses=True)
    assert report.equal


@pytest.mark.parametrize("name", SMALL)
def test_budget_one_paths_cover_traces(name):
    m = load(name)
    s = generate(m, budget=1)
    traces = event_sequences(enumerate_traces(m, 3))
    paths = event_sequences(enumerate_paths(s, m, 3))
    assert traces <= paths


def test_report_lines_show_divergence(demoney, demoney_slts):
    broken = demoney_slts.without(("Error=TRUE", "Reset", "Error=FALSE"))
    report = check_trace_path_equality(demoney, broken, 2)
    assert not report.equal
    assert report.only_paths == []
    assert report.first_divergence in report.only_traces
    assert report.lines()[1] == "different"
    assert "traces only" in report.lines()[2]


def test_witness_level_sees_redundant_transitions(demoney, demoney_slts):
    key = ("Error=FALSE", "CompleteTransaction", "Error=FALSE")
    broken = demoney_slts.without(key)
    assert check_trace_path_equality(demoney, broken, 3).equal
    assert not check_trace_path_equality(demoney, broken, 3, witnesses=True).equal


def test_format_sequence():
    assert format_sequence(("INITIALISATION", "Go")) == "INITIALISATION.Go"
    assert format_sequence((("Go", (("x", "TRUE"),)),)) == "Go[x=TRUE]"
    assert EqualityReport(0).equal


def test_negative_depth(demoney):
    with pytest.raises(ValueError):
        enumerate_traces(demoney, -1)
