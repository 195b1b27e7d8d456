"""Evaluate a guard at every state of a structure at once.

The structure is laid out as an integer matrix of shared values and a boolean
matrix of propositions; a guard evaluates to one boolean per state. Used for
the exhaustive guard-equivalence checks, where the same states are queried
with thousands of guards.
"""

from __future__ import annotations

import numpy as np

from . import naming
from .errors import UndeclaredSymbol
from .model import And, BinOp, Cmp, Const, Int, LastIs, Not, Or, Prop, Step, Var

# newer[t, u] is True iff t >_o u
_NEWER = np.zeros((3, 3), dtype=bool)
_NEWER[1, 0] = _NEWER[2, 1] = _NEWER[0, 2] = True

# _STEP[t, u]; -1 where undefined
_STEP = np.full((3, 3), -1, dtype=np.int64)
for _t in range(3):
    for _u in range(3):
        if _NEWER[_t, _u]:
            _STEP[_t, _u] = _t
_STEP[0, 1], _STEP[1, 2], _STEP[2, 0] = 2, 0, 1


class StateTable:
    def __init__(self, states, variables, props, K):
        self.K = K
        self.variables = tuple(variables)
        self.var_index = {v: n for n, v in enumerate(self.variables)}
        self.props = tuple(props)
        self.prop_index = {p: n for n, p in enumerate(self.props)}
        self.n = len(states)
        self.values = np.array([st.shared for st in states], dtype=np.int64).reshape(self.n, len(self.variables))
        self.truth = np.zeros((self.n, len(self.props)), dtype=bool)
        for r, st in enumerate(states):
            for a in st.ap:
                self.truth[r, self.prop_index[a]] = True

    @classmethod
    def of(cls, m):
        props = [a for _, pr in m.processes for a in pr]
        return cls(m.states, m.variables, props, m.K)

    def column(self, name):
        try:
            return self.values[:, self.var_index[name]]
        except KeyError:
            raise UndeclaredSymbol(f"undeclared variable {name!r}") from None

    def expr(self, e):
        if isinstance(e, Int):
            return np.full(self.n, e.value, dtype=np.int64)
        if isinstance(e, Var):
            return self.column(e.name)
        if isinstance(e, BinOp):
            a, b = self.expr(e.left), self.expr(e.right)
            return a + b if e.op == "+" else a - b
        if isinstance(e, Step):
            return _STEP[self.expr(e.t), self.expr(e.u)]
        raise TypeError(f"not an expression: {e!r}")

    def guard(self, g):
        if isinstance(g, Const):
            return np.full(self.n, g.value, dtype=bool)
        if isinstance(g, Prop):
            if g.name not in self.prop_index:
                raise UndeclaredSymbol(f"undeclared proposition {g.name!r}")
            return self.truth[:, self.prop_index[g.name]].copy()
        if isinstance(g, Cmp):
            a, b = self.expr(g.left), self.expr(g.right)
            return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b}[g.op]
        if isinstance(g, Not):
            return ~self.guard(g.arg)
        if isinstance(g, And):
            out = np.ones(self.n, dtype=bool)
            for a in g.args:
                out &= self.guard(a)
            return out
        if isinstance(g, Or):
            out = np.zeros(self.n, dtype=bool)
            for a in g.args:
                out |= self.guard(a)
            return out
        if isinstance(g, LastIs):
            out = np.ones(self.n, dtype=bool)
            for j in range(1, self.K + 1):
                if j != g.process:
                    a = self.column(naming.ts_var(g.process, j))
                    b = self.column(naming.ts_var(j, g.process))
                    out &= _NEWER[a, b]
            return out
        raise TypeError(f"not a guard: {g!r}")
