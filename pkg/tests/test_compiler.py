import itertools

import pytest

from pairwise_nf import build_gstd, parse_program, transform
from pairwise_nf.compiler import (
    build_intermediate, expand, expand_dnf, extract_jsystem, initial_timestamps, invariant_violations,
    pair_system, split_disjunct, to_expanded, triple_system, validate_pairwise,
)
from pairwise_nf.compiler.phase3 import _targets, all_stamps
from pairwise_nf.errors import ArcBudgetExceeded, CompileError, EmptyRange
from pairwise_nf.naming import diagonal_partner, partner, stamped_name, tv_var
from pairwise_nf.pipeline import guard_equivalences
from pairwise_nf.timestamps import gt_o, step

from conftest import SMALL, corpus_program, pipeline
from oracles import NEWER, eval_in


# --------------------------------------------------------------------------
# timestamps of the intermediate program


@pytest.mark.parametrize("K", [2, 3, 4])
def test_initial_timestamps_make_c_last(K):
    for c in range(1, K + 1):
        t = initial_timestamps(c, K)
        newest = [
            d for d in range(1, K + 1)
            if all((t[(d, j)], t[(j, d)]) in NEWER for j in range(1, K + 1) if j != d)
        ]
        assert newest == [c]
        for (i, j), v in t.items():
            assert v != t[(j, i)]


def test_single_process_with_variables_is_rejected():
    p = parse_program(
        "program one; shared x : {0,1} init 0;\n"
        "process P { props a; state A {}; state B {a}; arc A -> B do x := 1; arc B -> A do x := 0; }\n"
        "init (A);\n"
    )
    with pytest.raises(CompileError):
        build_intermediate(transform(build_gstd(p)), p)


def test_reserved_variable_names_are_rejected():
    p = parse_program(
        "program r; shared x__1 : {0,1} init 0;\n"
        "process P { props a; state A {}; state B {a}; arc A -> B do x__1 := 1; arc B -> A do x__1 := 0; }\n"
        "process Q { props b; state A {}; state B {b}; arc A -> B; arc B -> A; }\n"
        "init (A, A);\n"
    )
    with pytest.raises(CompileError):
        build_intermediate(transform(build_gstd(p)), p)


@pytest.mark.parametrize("name", SMALL)
def test_one_family_per_marked_transition(name):
    res = pipeline(name)
    fams = res.intermediate.families
    assert len(fams) == len(res.marked.transitions)
    assert {(f.u, f.i, f.v) for f in fams} == set(res.marked.transitions)


@pytest.mark.parametrize("name", SMALL)
def test_intermediate_invariants(name):
    res = pipeline(name)
    assert invariant_violations(res.intermediate, res.mp) == []


def test_invariant_checker_catches_tampering():
    res = pipeline("mutex2")
    program = res.intermediate.program
    st = res.mp.states[0]
    ix = program.var_index[tv_var(1, 2, 2)]
    bad = list(st.shared)
    bad[ix] = (bad[ix] + 1) % 3
    tampered = type(res.mp)(
        (type(st)(st.locals, tuple(bad)),) + res.mp.states[1:],
        res.mp.initials, res.mp.transitions, res.mp.variables, res.mp.processes,
    )
    found = invariant_violations(res.intermediate, tampered)
    assert any(kind == 1 for _, kind, _ in found)


# --------------------------------------------------------------------------
# the last = c expansion


def last_is(c, i, K, values):
    """``last = c`` read through the vectors process i can see."""
    return all(
        (values[tv_var(c, i, j)], values[tv_var(j, i, c)]) in NEWER for j in range(1, K + 1) if j != c
    )


@pytest.mark.parametrize("K", [2, 3, 4])
def test_dnf_is_exhaustively_equivalent(K):
    for c, i in itertools.product(range(1, K + 1), repeat=2):
        dnf = expand_dnf(c, i, K)
        assert dnf.width <= 3 ** (K - 1)
        names = dnf.variables()
        g = dnf.guard()
        for combo in itertools.product(range(3), repeat=len(names)):
            values = dict(zip(names, combo))
            want = last_is(c, i, K, values)
            assert eval_in(values, g) == want
            literal = any(all(values[lit.var] == lit.value for lit in d) for d in dnf.disjuncts)
            assert literal == want


def test_dnf_disjuncts_are_disjoint():
    # each disjunct fixes every variable it mentions, and no two agree on all
    for K in (2, 3):
        for c in range(1, K + 1):
            dnf = expand_dnf(c, 1, K)
            keys = [tuple(sorted((lit.var, lit.value) for lit in d)) for d in dnf.disjuncts]
            assert len(set(keys)) == len(keys)


def test_dnf_width_is_three_to_the_k_minus_one():
    for K in (2, 3, 4):
        assert expand_dnf(1, 2, K).width == 3 ** (K - 1)


@pytest.mark.parametrize("name", SMALL)
def test_split_blocks_reference_only_their_pair(name):
    res = pipeline(name)
    marked, K = res.marked, res.source.K
    if K == 1:
        pytest.skip("no neighbors")
    for fam in res.intermediate.families[:10]:
        u = marked.states[fam.u]
        for dis in expand_dnf(fam.mark, fam.i, K).disjuncts:
            split = split_disjunct(marked, u, fam.i, dis)
            assert set(split) == {j for j in range(1, K + 1) if j != fam.i}
            for lit in dis:
                assert partner(fam.i, lit.writer, K) in split


@pytest.mark.parametrize("name", SMALL)
def test_guard_equivalences_hold(name):
    res = pipeline(name)
    assert guard_equivalences(res.intermediate, res.marked, res.mp) == []


# --------------------------------------------------------------------------
# stamped expansion


def test_naming():
    assert stamped_name("C", (0, 2, 1)) == "C_t021"
    assert diagonal_partner(1, 3) == 2 and diagonal_partner(2, 3) == 1
    assert partner(2, 3, 3) == 3 and partner(2, 2, 3) == 1


@pytest.mark.parametrize("K", [2, 3])
def test_targets_step_every_other_component(K):
    for i in range(1, K + 1):
        for d in all_stamps(K):
            targets = list(_targets(d, i, K))
            assert len(targets) == 2 ** (K - 1)
            for new, pre in targets:
                assert new[i - 1] == d[i - 1]
                for j, w in pre.items():
                    assert w != d[j - 1] and step(d[j - 1], w) == new[j - 1]
                    assert gt_o(new[j - 1], w)


@pytest.mark.parametrize("name", SMALL)
def test_expansion_factor(name):
    res = pipeline(name)
    st = res.expanded.stats
    K = res.source.K
    for i, n in st.base_local_states.items():
        assert st.expanded_local_states[i] == 3**K * n
    assert st.emitted_arcs == sum(st.dnf_widths) * 3**K * 2 ** (K - 1)
    assert st.kept_arcs <= st.emitted_arcs


@pytest.mark.parametrize("name", SMALL)
def test_pruning_keeps_the_graph(name):
    res = pipeline(name)
    pp = res.pairwise
    for p in pp.processes:
        used = {st.locals[p.index - 1].name for st in res.mpp.states}
        assert {s.name for s in p.states} == used
    unpruned = build_gstd(res.expanded.program)
    assert unpruned == res.mpp


@pytest.mark.parametrize("name", SMALL)
def test_state_correspondence_is_a_bijection(name):
    res = pipeline(name)
    image = [res.mpp.index[to_expanded(res.intermediate.program, st)] for st in res.mp.states]
    assert sorted(image) == list(range(len(res.mpp)))
    mapped = {(image[s], i, image[u]) for s, i, u in res.mp.transitions}
    assert mapped == set(res.mpp.transitions)


def test_arc_budget_is_checked_before_emission():
    res = pipeline("mutex2")
    with pytest.raises(ArcBudgetExceeded) as exc:
        expand(res.intermediate, res.marked, arc_budget=10)
    assert exc.value.measured == res.expanded.stats.emitted_arcs and exc.value.budget == 10


def test_arc_budget_from_environment(monkeypatch):
    res = pipeline("toggle")
    monkeypatch.setenv("PAIRWISE_NF_ARC_BUDGET", "1")
    with pytest.raises(ArcBudgetExceeded):
        expand(res.intermediate, res.marked)


# --------------------------------------------------------------------------
# J-systems


def test_pair_and_triple_systems():
    pp = pipeline("ring3").pairwise
    pair = pair_system(pp, 1, 2)
    assert pair.K == 2 and validate_pairwise(pair)[0]
    build_gstd(pair)
    triple = triple_system(pp, 1, 2, 3)
    assert triple.K == 3 and validate_pairwise(triple)[0]
    build_gstd(triple)


def test_renumbering_of_a_non_initial_pair():
    pp = pipeline("ring3").pairwise
    sub = extract_jsystem(pp, [(2, 3)])
    assert [p.name for p in sub.processes] == ["P2", "P3"]
    assert [p.index for p in sub.processes] == [1, 2]
    for p in sub.processes:
        for arc in p.arcs:
            assert [j for j, _ in arc.command.parts] == [3 - p.index]
    assert validate_pairwise(sub)[0]


def test_full_relation_is_identity():
    pp = pipeline("ring3").pairwise
    assert extract_jsystem(pp, [(1, 2), (2, 3), (1, 3)]) == pp


def test_jsystem_errors():
    pp = pipeline("ring3").pairwise
    with pytest.raises(EmptyRange):
        extract_jsystem(pp, [])
    with pytest.raises(EmptyRange):
        extract_jsystem(pp, [(1, 7)])
    with pytest.raises(ValueError):
        extract_jsystem(pp, [(2, 2)])
