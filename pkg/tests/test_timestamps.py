import pytest

from pairwise_nf.errors import UndefinedStep
from pairwise_nf.timestamps import TIMESTAMPS, gt_o, lt_o, step, step_preimage

from oracles import NEWER, STEP_TABLE

# t <_o u, one row per t
LESS_TABLE = {
    0: {0: False, 1: True, 2: False},
    1: {0: False, 1: False, 2: True},
    2: {0: True, 1: False, 2: False},
}


@pytest.mark.parametrize("t", TIMESTAMPS)
@pytest.mark.parametrize("u", TIMESTAMPS)
def test_order_table(t, u):
    assert lt_o(t, u) is LESS_TABLE[t][u]
    assert gt_o(t, u) is LESS_TABLE[u][t]
    assert gt_o(t, u) == ((t, u) in NEWER)


def test_order_is_cyclic_not_transitive():
    assert lt_o(0, 1) and lt_o(1, 2) and lt_o(2, 0)
    assert not lt_o(0, 2)


def test_order_irreflexive_and_total_on_distinct():
    for t in TIMESTAMPS:
        assert not lt_o(t, t)
        for u in TIMESTAMPS:
            if t != u:
                assert lt_o(t, u) != lt_o(u, t)


@pytest.mark.parametrize("pair,want", sorted(STEP_TABLE.items()))
def test_step_table(pair, want):
    assert step(*pair) == want
    assert gt_o(step(*pair), pair[1])


@pytest.mark.parametrize("t", TIMESTAMPS)
def test_step_undefined_on_equal(t):
    with pytest.raises(UndefinedStep):
        step(t, t)


def test_step_keeps_newer():
    for t in TIMESTAMPS:
        for u in TIMESTAMPS:
            if gt_o(t, u):
                assert step(t, u) == t


def test_preimage_inverts_step():
    for d in TIMESTAMPS:
        for w in TIMESTAMPS:
            if w != d:
                assert step_preimage(d, step(d, w)) == w
    # each d reaches exactly two results: itself (when newer) and one advance
    for d in TIMESTAMPS:
        hits = [dn for dn in TIMESTAMPS if step_preimage(d, dn) is not None]
        assert len(hits) == 2 and d in hits
