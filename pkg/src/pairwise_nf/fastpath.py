"""Closure compilation of guards, actions and arcs for state exploration.

A compiled guard is ``f(ap, values) -> bool`` where ``ap`` is the frozenset of
true propositions and ``values`` the shared-value tuple. Pure conjunctions of
literals (the overwhelming majority of compiled pairwise guards) become a
single subset/index check.
"""

from __future__ import annotations

import contextlib
import gc
import operator

from . import naming
from .errors import ConflictingWrites, DomainEscape, UndeclaredSymbol
from .model import (
    Action, And, BinOp, Cmp, Const, GlobalState, Int, LastIs, Not, Or, Prop, Step, Var, alternatives, conj,
)
from .timestamps import gt_o, step

_CMP = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le}


def _index(program, name):
    try:
        return program.var_index[name]
    except KeyError:
        raise UndeclaredSymbol(f"undeclared variable {name!r}") from None


def compile_expr(program, e):
    if isinstance(e, Int):
        v = e.value
        return lambda vals: v
    if isinstance(e, Var):
        ix = _index(program, e.name)
        return lambda vals: vals[ix]
    if isinstance(e, BinOp):
        a, b = compile_expr(program, e.left), compile_expr(program, e.right)
        if e.op == "+":
            return lambda vals: a(vals) + b(vals)
        return lambda vals: a(vals) - b(vals)
    if isinstance(e, Step):
        a, b = compile_expr(program, e.t), compile_expr(program, e.u)
        return lambda vals: step(a(vals), b(vals))
    raise TypeError(f"not an expression: {e!r}")


def _literal(program, g):
    """Decompose a literal into ('pos'|'neg', prop) or ('eq', index, value)."""
    if isinstance(g, Prop):
        return ("pos", g.name)
    if isinstance(g, Not) and isinstance(g.arg, Prop):
        return ("neg", g.arg.name)
    if isinstance(g, Cmp) and g.op == "=":
        if isinstance(g.left, Var) and isinstance(g.right, Int):
            return ("eq", _index(program, g.left.name), g.right.value)
        if isinstance(g.left, Int) and isinstance(g.right, Var):
            return ("eq", _index(program, g.right.name), g.left.value)
    return None


def _check_prop(program, name):
    if name not in program.prop_owner:
        raise UndeclaredSymbol(f"undeclared proposition {name!r}")


def compile_guard(program, g):
    lits = None
    if isinstance(g, And):
        lits = [_literal(program, a) for a in g.args]
        if any(x is None for x in lits):
            lits = None
    elif _literal(program, g) is not None:
        lits = [_literal(program, g)]
    if lits is not None:
        pos, neg, eqs = set(), set(), []
        for lit in lits:
            if lit[0] == "eq":
                eqs.append((lit[1], lit[2]))
            else:
                _check_prop(program, lit[1])
                (pos if lit[0] == "pos" else neg).add(lit[1])
        pos, neg, eqs = frozenset(pos), frozenset(neg), tuple(eqs)

        def conj_literals(ap, vals):
            if not pos <= ap or not neg.isdisjoint(ap):
                return False
            for ix, v in eqs:
                if vals[ix] != v:
                    return False
            return True

        return conj_literals
    if isinstance(g, Const):
        v = g.value
        return lambda ap, vals: v
    if isinstance(g, Prop):
        _check_prop(program, g.name)
        name = g.name
        return lambda ap, vals: name in ap
    if isinstance(g, Cmp):
        a, b = compile_expr(program, g.left), compile_expr(program, g.right)
        op = _CMP[g.op]
        return lambda ap, vals: op(a(vals), b(vals))
    if isinstance(g, Not):
        f = compile_guard(program, g.arg)
        return lambda ap, vals: not f(ap, vals)
    if isinstance(g, And):
        fs = [compile_guard(program, a) for a in g.args]
        return lambda ap, vals: all(f(ap, vals) for f in fs)
    if isinstance(g, Or):
        fs = [compile_guard(program, a) for a in g.args]
        return lambda ap, vals: any(f(ap, vals) for f in fs)
    if isinstance(g, LastIs):
        c, K = g.process, program.K
        pairs = [
            (_index(program, naming.ts_var(c, j)), _index(program, naming.ts_var(j, c)))
            for j in range(1, K + 1)
            if j != c
        ]
        return lambda ap, vals: all(gt_o(vals[a], vals[b]) for a, b in pairs)
    raise TypeError(f"not a guard: {g!r}")


def compile_action(program, action):
    """``f(values) -> new values``; all right-hand sides read the pre-state."""
    writes = []
    for name, e in action.assignments:
        ix = _index(program, name)
        writes.append((ix, compile_expr(program, e), frozenset(program.shared[ix].domain), name))
    if not writes:
        return lambda vals: vals
    const = all(isinstance(e, Int) for _, e in action.assignments)
    if const:
        fixed = [(ix, f(()), dom, name) for ix, f, dom, name in writes]
        for ix, v, dom, name in fixed:
            if v not in dom:
                # surfaced when the action actually fires
                def escaping(vals, name=name, v=v):
                    raise DomainEscape(f"{name} := {v} is outside its domain")
                return escaping
        pairs = [(ix, v) for ix, v, _, _ in fixed]

        def assign_consts(vals):
            out = list(vals)
            for ix, v in pairs:
                out[ix] = v
            return tuple(out)

        return assign_consts

    def assign(vals):
        out = list(vals)
        for ix, f, dom, name in writes:
            v = f(vals)
            if v not in dom:
                raise DomainEscape(f"{name} := {v} is outside its domain")
            out[ix] = v
        return tuple(out)

    return assign


@contextlib.contextmanager
def gc_paused():
    """Bulk construction allocates many long-lived objects; collecting
    during it only costs time."""
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


class CompiledArc:
    __slots__ = ("target", "selections", "position")

    def __init__(self, program, arc, process, position=None, cache=None):
        cache = {} if cache is None else cache
        self.position = position
        self.target = process.state(arc.target)
        self.selections = []
        for combo in alternatives(arc.command):
            # the blocks of one selection are tested together
            g = compile_guard(program, conj(*(s.guard for s in combo)))
            targets = [s.action.targets for s in combo]
            conflict = sum(len(t) for t in targets) != len(frozenset().union(*targets)) if targets else False
            action = None
            if not conflict:
                assigns = tuple(a for s in combo for a in s.action.assignments)
                action = cache.get(assigns)
                if action is None:
                    action = cache[assigns] = compile_action(program, Action(assigns))
            self.selections.append((g, action))


class Semantics:
    """Compiled next-state function of a program."""

    def __init__(self, program):
        self.program = program
        self.table = []
        cache = {}
        with gc_paused():
            for p in program.processes:
                arcs = {}
                for n, arc in enumerate(p.arcs):
                    arcs.setdefault(arc.source, []).append(CompiledArc(program, arc, p, n, cache))
                self.table.append(arcs)

    def successors(self, state):
        return [(i, u) for i, _, u in self.firings(state)]

    def firings(self, state):
        """``(i, arc position in process i, state')`` for every enabled selection."""
        ap, vals = state.ap, state.shared
        out = []
        for i, loc in enumerate(state.locals):
            for carc in self.table[i].get(loc.name, ()):
                for guard, action in carc.selections:
                    if guard(ap, vals):
                        if action is None:
                            raise ConflictingWrites(f"conflicting writes on an enabled arc of process {i + 1}")
                        locs = state.locals[:i] + (carc.target,) + state.locals[i + 1:]
                        out.append((i + 1, carc.position, GlobalState(locs, action(vals))))
        return out
