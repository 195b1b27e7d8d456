import pytest

from pairwise_nf import build_gstd, parse_program
from pairwise_nf.errors import DomainEscape, StateSpaceBudgetExceeded
from pairwise_nf.fastpath import Semantics
from pairwise_nf.model import successors as reference_successors

from conftest import SMALL, corpus_program, pipeline
from oracles import naive_gstd, product_gstd


def as_sets(m):
    states = set(m.states)
    inits = {m.states[s] for s in m.initials}
    trans = {(m.states[s], i, m.states[u]) for s, i, u in m.transitions}
    return states, inits, trans


def test_matches_worklist_oracle(corpus_name):
    program = corpus_program(corpus_name)
    assert as_sets(build_gstd(program)) == naive_gstd(program)


def test_matches_product_oracle(corpus_name):
    program = corpus_program(corpus_name)
    assert as_sets(build_gstd(program)) == product_gstd(program)


@pytest.mark.parametrize("name", SMALL)
def test_compiled_programs_match_oracle(name):
    res = pipeline(name)
    assert as_sets(res.mp) == naive_gstd(res.intermediate.program)
    assert as_sets(res.mpp) == naive_gstd(res.pairwise)


@pytest.mark.parametrize("name", SMALL)
def test_fast_path_agrees_with_reference(name):
    res = pipeline(name)
    for program, m in ((res.source, res.mq), (res.intermediate.program, res.mp), (res.pairwise, res.mpp)):
        sem = Semantics(program)
        for st in m.states:
            assert sorted(sem.successors(st)) == sorted(reference_successors(program, st))


def test_states_are_reachable_and_canonical(corpus_name):
    m = build_gstd(corpus_program(corpus_name))
    assert m.reachable_mask().all()
    assert list(m.states) == sorted(m.states)
    m.check_wellformed()


def test_toggle_has_two_states():
    m = build_gstd(corpus_program("toggle"))
    assert len(m) == 2 and len(m.transitions) == 2


def test_budget_is_an_error_not_a_truncation():
    program = corpus_program("mutex2")
    with pytest.raises(StateSpaceBudgetExceeded) as exc:
        build_gstd(program, budget=5)
    assert exc.value.budget == 5 and exc.value.measured == 6
    assert len(build_gstd(program, budget=16)) == 16


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("PAIRWISE_NF_STATE_BUDGET", "3")
    with pytest.raises(StateSpaceBudgetExceeded):
        build_gstd(corpus_program("mutex2"))


def test_domain_escape_is_reported():
    program = parse_program(
        """
        program esc;
        shared x : {0,1} init 0;
        process P { props a; state A {}; state B {a};
          arc A -> B do x := x + 1;
          arc B -> A; }
        init (A);
        """
    )
    with pytest.raises(DomainEscape):
        build_gstd(program)


def test_simultaneous_assignment_reads_prestate():
    m = build_gstd(corpus_program("swap2"))
    swaps = [
        (m.states[s], m.states[u]) for s, i, u in m.transitions
        if i == 1 and m.states[s].locals[0].name == "S"
    ]
    assert swaps
    for a, b in swaps:
        x, y = a.shared
        assert b.shared == (y, x)
