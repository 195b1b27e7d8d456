"""Cyclic timestamp order on {0, 1, 2} and the ``step`` advance procedure."""

from .errors import UndefinedStep

TIMESTAMPS = (0, 1, 2)

# (t, u) with t <_o u
_LESS = frozenset({(0, 1), (1, 2), (2, 0)})


def lt_o(t, u):
    """``t <_o u``. Not transitive: 0 < 1 < 2 < 0."""
    return (t, u) in _LESS


def gt_o(t, u):
    return (u, t) in _LESS


def step(t, u):
    """Advance ``t`` so that the result is more recent than ``u``.

    Raises UndefinedStep when ``t == u``; no case of the procedure covers it.
    """
    if gt_o(t, u):
        return t
    if t == 0 and u == 1:
        return 2
    if t == 1 and u == 2:
        return 0
    if t == 2 and u == 0:
        return 1
    raise UndefinedStep(f"step({t}, {u}) is undefined")


def step_preimage(d, d_new):
    """The unique ``w`` with ``step(d, w) == d_new``, or None if there is none."""
    hits = [w for w in TIMESTAMPS if w != d and step(d, w) == d_new]
    return hits[0] if hits else None
