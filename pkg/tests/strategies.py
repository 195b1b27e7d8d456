"""Hypothesis strategies for random Kripke structures."""

from hypothesis import strategies as st

from pairwise_nf.kripke import KripkeStructure
from pairwise_nf.model import GlobalState, LocalState

PROPS = ("a", "b")


def make_structure(labels, edges, initials, K=2, self_loops=True):
    """States ``s0..s{n-1}`` owned by process 1; ``labels[n]`` is the set of
    propositions true in state n."""
    states = []
    for n, props in enumerate(labels):
        locs = (LocalState(1, f"s{n}", frozenset(props)),) + tuple(
            LocalState(k, "z", frozenset()) for k in range(2, K + 1)
        )
        states.append(GlobalState(locs, (n,)))
    trans = [(states[a], i, states[b]) for a, i, b in edges if self_loops or a != b]
    procs = (("P1", PROPS),) + tuple((f"P{k}", ()) for k in range(2, K + 1))
    return KripkeStructure.from_states(states, [states[s] for s in initials], trans, ("id",), procs)


@st.composite
def structures(draw, max_states=7, K=2, self_loops=True):
    n = draw(st.integers(1, max_states))
    labels = draw(st.lists(st.sets(st.sampled_from(PROPS)), min_size=n, max_size=n))
    edges = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(1, K), st.integers(0, n - 1)),
            max_size=3 * n,
        )
    )
    initials = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
    return make_structure(labels, edges, sorted(initials), K, self_loops)
