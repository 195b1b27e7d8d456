"""The intermediate program: per-pair copies of every shared variable,
timestamps and timestamp vectors, one arc per transition of the marked
structure.

Guards still test the ghost ``last`` (``LastIs``) and actions still update
every timestamp of the executing process at once, so this program is not yet
pairwise. It is executable, though, and its state graph is what the later
stages are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import naming
from ..errors import CompileError
from ..model import (
    Action, GlobalState, Int, LastIs, Process, Program, SharedVar, Simple, SkeletonArc, Step, Var,
    conj, eq, stof,
)
from ..timestamps import TIMESTAMPS, gt_o

TS_DOMAIN = TIMESTAMPS


def others(i, K):
    return [j for j in range(1, K + 1) if j != i]


@dataclass(frozen=True)
class Layout:
    """Variable names of the intermediate program for K processes over the
    source variables ``xs``."""

    K: int
    xs: tuple

    def copies(self):
        return [naming.copy_var(x, w, r) for x in self.xs for w in range(1, self.K + 1) for r in range(1, self.K + 1)]

    def timestamps(self):
        return [naming.ts_var(i, j) for i in range(1, self.K + 1) for j in others(i, self.K)]

    def vectors(self):
        return [
            naming.tv_var(w, r, k)
            for w in range(1, self.K + 1)
            for r in range(1, self.K + 1)
            for k in others(w, self.K)
        ]


def initial_timestamps(c, K):
    """Timestamp table making process ``c`` the last one to have executed.

    ``t_c^j = 1`` and ``t_j^c = 0``. Entries between two other processes are
    free; they are filled antisymmetrically (the lower index holds 1) so that
    no timestamp ever equals the one it is compared against.
    """
    t = {}
    for i in range(1, K + 1):
        for j in others(i, K):
            if i == c:
                t[(i, j)] = 1
            elif j == c:
                t[(i, j)] = 0
            else:
                t[(i, j)] = 1 if i < j else 0
    return t


def synth_initial_state(marked, u0, layout):
    """The intermediate initial state emulating marked initial state ``u0``."""
    K = layout.K
    values = {}
    for x, v in zip(marked.variables, u0.shared):
        for w in range(1, K + 1):
            for r in range(1, K + 1):
                values[naming.copy_var(x, w, r)] = v
    t = initial_timestamps(u0.mark, K)
    for (i, j), v in t.items():
        values[naming.ts_var(i, j)] = v
    for w in range(1, K + 1):
        for r in range(1, K + 1):
            for k in others(w, K):
                values[naming.tv_var(w, r, k)] = t[(w, k)]
    names = layout.copies() + layout.timestamps() + layout.vectors()
    return GlobalState(u0.locals, tuple(values[n] for n in names))


def synth_initial_states(marked, layout=None):
    layout = layout or Layout(marked.K, tuple(marked.variables))
    return [synth_initial_state(marked, marked.states[s], layout) for s in sorted(marked.initials)]


def arc_guard(marked, u, i):
    """``last = c`` and the other processes' propositions and c's copies of
    the shared variables as in ``u``, where ``c`` is u's mark."""
    K = marked.K
    c = u.mark
    props = {n: tuple(pr) for n, (_, pr) in enumerate(marked.processes, start=1)}
    parts = [LastIs(c)]
    parts += [stof(u.local(j), props[j]) for j in others(i, K)]
    parts += [eq(naming.copy_var(x, c, i), val) for x, val in zip(marked.variables, u.shared)]
    return conj(*parts)


def arc_action(marked, i, v):
    """Advance i's timestamps past every other process, publish them in every
    vector i writes and copy v's shared values into every copy i writes."""
    K = marked.K
    stepped = {j: Step(Var(naming.ts_var(i, j)), Var(naming.tv_var(j, i, i))) for j in others(i, K)}
    assigns = [(naming.ts_var(i, j), stepped[j]) for j in others(i, K)]
    for r in range(1, K + 1):
        for k in others(i, K):
            assigns.append((naming.tv_var(i, r, k), stepped[k]))
    for x, val in zip(marked.variables, v.shared):
        for r in range(1, K + 1):
            assigns.append((naming.copy_var(x, i, r), Int(val)))
    return Action(tuple(assigns))


@dataclass(frozen=True)
class ArcFamily:
    """One transition ``(u, i, v)`` of the marked structure and the
    intermediate arc generated for it."""

    index: int
    u: int
    i: int
    v: int
    mark: int
    arc: SkeletonArc


@dataclass(frozen=True)
class Intermediate:
    program: Program
    families: tuple
    layout: Layout
    initial_last: dict  # initial state -> process that counts as last there


def build_intermediate(marked, source=None, name=None):
    """The intermediate program P for a marked structure.

    Local states and propositions come from
    ``source`` when given (so unreached local states are kept), otherwise
    from the local states occurring in ``marked``.
    """
    K = marked.K
    if K == 1 and marked.variables:
        raise CompileError("a single process has no partner to share variables with")
    for x in marked.variables:
        if naming.RESERVED.search(x):
            raise CompileError(f"variable name {x!r} collides with generated names")
    layout = Layout(K, tuple(marked.variables))
    local_states = {n: {} for n in range(1, K + 1)}
    if source is not None:
        for p in source.processes:
            for st in p.states:
                local_states[p.index][st.name] = st
    for st in marked.states:
        for loc in st.locals:
            local_states[loc.process].setdefault(loc.name, loc)

    arcs = {n: [] for n in range(1, K + 1)}
    families = []
    for n, (a, i, b) in enumerate(marked.sorted_transitions):
        u, v = marked.states[a], marked.states[b]
        arc = SkeletonArc(u.local(i).name, v.local(i).name, Simple(arc_guard(marked, u, i), arc_action(marked, i, v)))
        arcs[i].append(arc)
        families.append(ArcFamily(n, a, i, b, u.mark, arc))

    domains = {}
    if source is not None:
        domains = {v.name: v.domain for v in source.shared}
    for x in marked.variables:
        if x not in domains:
            domains[x] = tuple(sorted({st.shared[marked.variables.index(x)] for st in marked.states}))
    initial_last = {}
    for s in sorted(marked.initials):
        u0 = marked.states[s]
        initial_last[synth_initial_state(marked, u0, layout)] = u0.mark
    shared = []
    for x in layout.xs:
        for w in range(1, K + 1):
            for r in range(1, K + 1):
                name_ = naming.copy_var(x, w, r)
                shared.append(SharedVar(name_, domains[x], ()))
    shared += [SharedVar(n_, TS_DOMAIN, ()) for n_ in layout.timestamps() + layout.vectors()]
    processes = tuple(
        Process(
            n,
            marked.processes[n - 1][0],
            tuple(marked.processes[n - 1][1]),
            tuple(local_states[n].values()),
            tuple(arcs[n]),
        )
        for n in range(1, K + 1)
    )
    prog = Program(name or "intermediate", processes, tuple(shared), tuple(sorted(initial_last)))
    return Intermediate(prog, tuple(families), layout, initial_last)


# --------------------------------------------------------------------------
# invariants of the intermediate program


def invariant_violations(inter, mp, limit=20):
    """Check at every state of ``mp`` (the state graph of ``program``):

    1. every vector component equals the writer's timestamp;
    2. the ghost last agrees with the label of every incoming transition
       (and with the mark an initial state was built from);
    3. all copies a process writes of a variable are equal.
    """
    program = inter.program
    K = program.K
    ix = program.var_index
    xs = inter.layout.xs
    problems = []
    expected_last = {}
    for s in mp.initials:
        expected_last.setdefault(s, set()).add(inter.initial_last[mp.states[s]])
    for s, i, u in mp.transitions:
        expected_last.setdefault(u, set()).add(i)
    for sid, st in enumerate(mp.states):
        vals = st.shared
        for w in range(1, K + 1):
            for r in range(1, K + 1):
                for k in others(w, K):
                    if vals[ix[naming.tv_var(w, r, k)]] != vals[ix[naming.ts_var(w, k)]]:
                        problems.append((sid, 1, f"tv__{w}_{r}__{k} differs from t__{w}_{k}"))
        last = program.ghost_last(st)
        for want in expected_last.get(sid, ()):
            if last != want:
                problems.append((sid, 2, f"timestamps say last={last} but the state was entered by {want}"))
        for c in range(1, K + 1):
            holds = all(gt_o(vals[ix[naming.ts_var(c, j)]], vals[ix[naming.ts_var(j, c)]]) for j in others(c, K))
            if holds != (last == c):
                problems.append((sid, 2, f"last={last} disagrees with the timestamps of {c}"))
        for x in xs:
            for w in range(1, K + 1):
                seen = {vals[ix[naming.copy_var(x, w, r)]] for r in range(1, K + 1)}
                if len(seen) > 1:
                    problems.append((sid, 3, f"copies of {x} written by {w} disagree"))
        if len(problems) >= limit:
            break
    return problems
