"""Brute-force reference implementations used only by the tests.

None of these call the package's semantics, refinement or transform code;
they share only the syntax tree classes, which they walk on their own.
"""

from itertools import product

from pairwise_nf.model import (
    And, BinOp, Choice, Cmp, Const, GlobalState, Int, LastIs, Not, Or, Prop, Simple, Step, Sync, Var,
)

# step table written out by hand: (t, u) -> result
STEP_TABLE = {(0, 1): 2, (1, 2): 0, (2, 0): 1, (1, 0): 1, (2, 1): 2, (0, 2): 0}
NEWER = {(1, 0), (2, 1), (0, 2)}  # (t, u) with t more recent than u


class Env:
    def __init__(self, program):
        self.program = program
        self.names = [v.name for v in program.shared]
        self.domains = {v.name: set(v.domain) for v in program.shared}

    def val(self, state, name):
        return state.shared[self.names.index(name)]

    def props(self, state):
        out = set()
        for loc in state.locals:
            out |= set(loc.props)
        return out

    def expr(self, state, e):
        if isinstance(e, Int):
            return e.value
        if isinstance(e, Var):
            return self.val(state, e.name)
        if isinstance(e, BinOp):
            a, b = self.expr(state, e.left), self.expr(state, e.right)
            return a + b if e.op == "+" else a - b
        if isinstance(e, Step):
            return STEP_TABLE[(self.expr(state, e.t), self.expr(state, e.u))]
        raise AssertionError(e)

    def last(self, state):
        K = self.program.K
        hits = [
            c for c in range(1, K + 1)
            if all((self.val(state, f"t__{c}_{j}"), self.val(state, f"t__{j}_{c}")) in NEWER
                   for j in range(1, K + 1) if j != c)
        ]
        return hits[0] if hits else None

    def holds(self, state, g):
        if isinstance(g, Const):
            return g.value
        if isinstance(g, Prop):
            return g.name in self.props(state)
        if isinstance(g, Cmp):
            a, b = self.expr(state, g.left), self.expr(state, g.right)
            return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b}[g.op]
        if isinstance(g, Not):
            return not self.holds(state, g.arg)
        if isinstance(g, And):
            return all(self.holds(state, a) for a in g.args)
        if isinstance(g, Or):
            return any(self.holds(state, a) for a in g.args)
        if isinstance(g, LastIs):
            return self.last(state) == g.process
        raise AssertionError(g)

    def options(self, state, cmd):
        """Every way ``cmd`` can fire: a list of assignment lists."""
        if isinstance(cmd, Simple):
            if not self.holds(state, cmd.guard):
                return []
            return [[(n, self.expr(state, e)) for n, e in cmd.action.assignments]]
        if isinstance(cmd, Choice):
            return [o for alt in cmd.alternatives for o in self.options(state, alt)]
        if isinstance(cmd, Sync):
            out = [[]]
            for _, part in cmd.parts:
                out = [a + b for a in out for b in self.options(state, part)]
            return out
        raise AssertionError(cmd)

    def moves(self, state):
        out = set()
        for p in self.program.processes:
            here = state.locals[p.index - 1]
            for arc in p.arcs:
                if arc.source != here.name:
                    continue
                target = next(s for s in p.states if s.name == arc.target)
                for assigns in self.options(state, arc.command):
                    vals = list(state.shared)
                    for n, v in assigns:
                        assert v in self.domains[n], (n, v)
                        vals[self.names.index(n)] = v
                    locs = list(state.locals)
                    locs[p.index - 1] = target
                    out.add((p.index, GlobalState(tuple(locs), tuple(vals))))
        return out


def naive_gstd(program):
    """(states, initials, transitions) as sets of GlobalStates, by worklist search."""
    env = Env(program)
    seen = set(program.initials)
    work = list(program.initials)
    trans = set()
    while work:
        s = work.pop()
        for i, u in env.moves(s):
            trans.add((s, i, u))
            if u not in seen:
                seen.add(u)
                work.append(u)
    return seen, set(program.initials), trans


def product_gstd(program):
    """Same as naive_gstd, but by enumerating the full product of local
    states and domains and then keeping what is reachable."""
    env = Env(program)
    local_choices = [p.states for p in program.processes]
    domains = [v.domain for v in program.shared]
    edges = {}
    for locs in product(*local_choices):
        for vals in product(*domains):
            s = GlobalState(tuple(locs), tuple(vals))
            edges[s] = env.moves(s)
    seen = set(program.initials)
    frontier = list(program.initials)
    while frontier:
        nxt = []
        for s in frontier:
            for _, u in edges[s]:
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    trans = {(s, i, u) for s in seen for i, u in edges[s]}
    return seen, set(program.initials), trans


def naive_bisim(m1, m2):
    """Greatest fixpoint: start from all AP-equal pairs and delete pairs that
    fail a transfer condition until nothing changes."""
    succ1 = {s: set() for s in range(len(m1))}
    for s, i, u in m1.transitions:
        succ1[s].add((i, u))
    succ2 = {s: set() for s in range(len(m2))}
    for s, i, u in m2.transitions:
        succ2[s].add((i, u))
    rel = {(a, b) for a in range(len(m1)) for b in range(len(m2)) if m1.states[a].ap == m2.states[b].ap}
    changed = True
    while changed:
        changed = False
        for a, b in sorted(rel):
            fwd = all(any(j == i and (u, w) in rel for j, w in succ2[b]) for i, u in succ1[a])
            bwd = all(any(j == i and (w, u) in rel for j, w in succ1[a]) for i, u in succ2[b])
            if not (fwd and bwd):
                rel.discard((a, b))
                changed = True
    covered = all(any((s, t) in rel for t in m2.initials) for s in m1.initials) and all(
        any((s, t) in rel for s in m1.initials) for t in m2.initials
    )
    return rel, covered


def literal_transform(states, initials, transitions):
    """The splitting loop over plain sets, one offender per round.

    States are arbitrary hashables; copies are ``(s, i)`` tuples. Returns
    (states, initials, transitions, mark) with mark a dict over the result.
    """
    St, S, R = set(initials), set(states), set(transitions)
    marks = {}
    while True:
        offenders = sorted(
            (s for s in S if len({i for (_, i, t) in R if t == s}) > 1), key=repr
        )
        if not offenders:
            break
        s = offenders[0]
        in_s = sorted({i for (_, i, t) in R if t == s})
        out = [(j, u) for (a, j, u) in R if a == s]
        inc = [(u, i) for (u, i, t) in R if t == s]
        for i in in_s:
            si = (s, i)
            marks[si] = i
            if s in St:
                St.add(si)
            S.add(si)
            for j, u in out:
                R.add((si, j, (s, j) if u == s else u))
            for u, k in inc:
                if k == i and u != s:
                    R.add((u, i, si))
        St.discard(s)
        S.discard(s)
        R = {(a, i, b) for (a, i, b) in R if a != s and b != s}
    for s in S:
        if s not in marks:
            labels = {i for (_, i, t) in R if t == s}
            marks[s] = labels.pop() if labels else 1
    return S, St, R, marks


def eval_in(values, g):
    """Truth of a guard over a plain ``{variable: value}`` dict (no propositions)."""
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Cmp):
        a, b = _expr_in(values, g.left), _expr_in(values, g.right)
        return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b}[g.op]
    if isinstance(g, Not):
        return not eval_in(values, g.arg)
    if isinstance(g, And):
        return all(eval_in(values, a) for a in g.args)
    if isinstance(g, Or):
        return any(eval_in(values, a) for a in g.args)
    raise AssertionError(g)


def _expr_in(values, e):
    if isinstance(e, Int):
        return e.value
    if isinstance(e, Var):
        return values[e.name]
    raise AssertionError(e)
