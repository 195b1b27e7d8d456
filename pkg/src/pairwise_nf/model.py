"""Programs, states, guards and actions, with their reference semantics.

Everything here is an immutable value. The evaluators in this module walk the
syntax trees directly; :mod:`pairwise_nf.fastpath` compiles the same trees
into closures for exploration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import naming
from .errors import ConflictingWrites, DomainEscape, UndeclaredSymbol
from .timestamps import gt_o, step

# --------------------------------------------------------------------------
# expressions


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Int(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # "+" or "-"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Step(Expr):
    """``step(t, u)`` over timestamp-valued expressions (intermediate programs only)."""

    t: Expr
    u: Expr


# --------------------------------------------------------------------------
# guards


class Guard:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Guard):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Prop(Guard):
    name: str


CMP_OPS = ("=", "!=", "<", "<=")


@dataclass(frozen=True)
class Cmp(Guard):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Guard):
    arg: Guard


@dataclass(frozen=True)
class And(Guard):
    args: tuple


@dataclass(frozen=True)
class Or(Guard):
    args: tuple


@dataclass(frozen=True)
class LastIs(Guard):
    """Ghost test ``last = process``.

    Never stored in a state; it is derived from the timestamps as the unique
    process c with ``t_c^j >_o t_j^c`` for every other j.
    """

    process: int


def conj(*guards):
    """Flattened conjunction; ``true`` operands vanish, ``false`` absorbs."""
    out = []
    for g in guards:
        if isinstance(g, And):
            out.extend(g.args)
        elif g == TRUE:
            continue
        elif g == FALSE:
            return FALSE
        else:
            out.append(g)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*guards):
    out = []
    for g in guards:
        if isinstance(g, Or):
            out.extend(g.args)
        elif g == FALSE:
            continue
        elif g == TRUE:
            return TRUE
        else:
            out.append(g)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def eq(var, value):
    return Cmp("=", Var(var), Int(value))


def guard_symbols(guard):
    """(propositions, variables) referenced by a guard."""
    props, names = set(), set()

    def expr(e):
        if isinstance(e, Var):
            names.add(e.name)
        elif isinstance(e, BinOp):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, Step):
            expr(e.t)
            expr(e.u)

    def walk(g):
        if isinstance(g, Prop):
            props.add(g.name)
        elif isinstance(g, Cmp):
            expr(g.left)
            expr(g.right)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)

    walk(guard)
    return props, names


def expr_vars(e):
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Step):
        return expr_vars(e.t) | expr_vars(e.u)
    return set()


# --------------------------------------------------------------------------
# actions and general guarded commands


@dataclass(frozen=True)
class Action:
    """Parallel assignment; every right-hand side reads the pre-state."""

    assignments: tuple = ()

    def __post_init__(self):
        seen = set()
        for name, _ in self.assignments:
            if name in seen:
                raise ConflictingWrites(f"variable {name!r} assigned twice")
            seen.add(name)

    @property
    def targets(self):
        return frozenset(name for name, _ in self.assignments)

    def merge(self, other):
        clash = self.targets & other.targets
        if clash:
            raise ConflictingWrites(f"simultaneous writes to {sorted(clash)}")
        return Action(self.assignments + other.assignments)


SKIP = Action()


class Command:
    __slots__ = ()


@dataclass(frozen=True)
class Simple(Command):
    guard: Guard = TRUE
    action: Action = SKIP


@dataclass(frozen=True)
class Choice(Command):
    """Exclusive alternatives (the ``⊕`` operator)."""

    alternatives: tuple


@dataclass(frozen=True)
class Sync(Command):
    """Simultaneous composition (the ``⊗`` operator).

    ``parts`` is a tuple of ``(partner, command)``; partner is the neighbor
    process index a pairwise block synchronizes with, or None.
    """

    parts: tuple


def alternatives(cmd):
    """Flatten a command into its list of Simple-combinations.

    Each entry is a tuple of Simple commands that execute together.
    """
    if isinstance(cmd, Simple):
        return [(cmd,)]
    if isinstance(cmd, Choice):
        return [combo for alt in cmd.alternatives for combo in alternatives(alt)]
    if isinstance(cmd, Sync):
        per_part = [alternatives(c) for _, c in cmd.parts]
        return [sum(combo, ()) for combo in itertools.product(*per_part)]
    raise TypeError(f"not a command: {cmd!r}")


def command_guards(cmd):
    """Every Simple guard in a command, paired with the partner of its block."""
    if isinstance(cmd, Simple):
        return [(None, cmd)]
    if isinstance(cmd, Choice):
        return [x for alt in cmd.alternatives for x in command_guards(alt)]
    out = []
    for partner, part in cmd.parts:
        out.extend((partner, s) for _, s in command_guards(part))
    return out


# --------------------------------------------------------------------------
# skeletons and programs


@dataclass(frozen=True, order=True)
class LocalState:
    process: int
    name: str
    props: frozenset = field(compare=True, default=frozenset())
    stamp: Optional[tuple] = None

    @property
    def valuation(self):
        return self.props


@dataclass(frozen=True)
class SharedVar:
    name: str
    domain: tuple
    initial: tuple = ()


@dataclass(frozen=True)
class SkeletonArc:
    source: str
    target: str
    command: Command = Simple()


@dataclass(frozen=True)
class Process:
    index: int
    name: str
    props: tuple
    states: tuple
    arcs: tuple

    @cached_property
    def state_by_name(self):
        return {s.name: s for s in self.states}

    def state(self, name):
        try:
            return self.state_by_name[name]
        except KeyError:
            raise UndeclaredSymbol(f"process {self.name} has no state {name!r}") from None

    @cached_property
    def arcs_from(self):
        out = {s.name: [] for s in self.states}
        for arc in self.arcs:
            out.setdefault(arc.source, []).append(arc)
        return out


@dataclass(frozen=True)
class GlobalState:
    """Local states, shared values (in program declaration order) and the
    optional incoming-process mark."""

    locals: tuple
    shared: tuple = ()
    mark: Optional[int] = None

    @cached_property
    def ap(self):
        return frozenset().union(*(loc.props for loc in self.locals))

    def local(self, i):
        return self.locals[i - 1]

    @cached_property
    def sort_key(self):
        return (
            tuple((loc.name, loc.stamp or ()) for loc in self.locals),
            self.shared,
            -1 if self.mark is None else self.mark,
        )

    def __lt__(self, other):
        return self.sort_key < other.sort_key


@dataclass(frozen=True)
class Program:
    name: str
    processes: tuple
    shared: tuple = ()
    initials: tuple = ()

    @property
    def K(self):
        return len(self.processes)

    @cached_property
    def var_index(self):
        return {v.name: n for n, v in enumerate(self.shared)}

    @cached_property
    def var_by_name(self):
        return {v.name: v for v in self.shared}

    @cached_property
    def prop_owner(self):
        owner = {}
        for p in self.processes:
            for a in p.props:
                owner.setdefault(a, p.index)
        return owner

    @cached_property
    def process_by_name(self):
        return {p.name: p for p in self.processes}

    def process(self, i):
        return self.processes[i - 1]

    @property
    def variables(self):
        return tuple(v.name for v in self.shared)

    def value(self, state, name):
        try:
            return state.shared[self.var_index[name]]
        except KeyError:
            raise UndeclaredSymbol(f"undeclared variable {name!r}") from None

    def ghost_last(self, state):
        """The process that executed last, as encoded by the timestamps."""
        K = self.K
        for c in range(1, K + 1):
            if all(
                gt_o(self.value(state, naming.ts_var(c, j)), self.value(state, naming.ts_var(j, c)))
                for j in range(1, K + 1)
                if j != c
            ):
                return c
        return None


# --------------------------------------------------------------------------
# reference semantics


def eval_expr(program, state, e):
    if isinstance(e, Int):
        return e.value
    if isinstance(e, Var):
        return program.value(state, e.name)
    if isinstance(e, BinOp):
        a = eval_expr(program, state, e.left)
        b = eval_expr(program, state, e.right)
        return a + b if e.op == "+" else a - b
    if isinstance(e, Step):
        return step(eval_expr(program, state, e.t), eval_expr(program, state, e.u))
    raise TypeError(f"not an expression: {e!r}")


def eval_guard(program, state, guard):
    """``s(B)``: the truth value of ``guard`` in ``state``."""
    if isinstance(guard, Const):
        return guard.value
    if isinstance(guard, Prop):
        if guard.name not in program.prop_owner:
            raise UndeclaredSymbol(f"undeclared proposition {guard.name!r}")
        return guard.name in state.ap
    if isinstance(guard, Cmp):
        a = eval_expr(program, state, guard.left)
        b = eval_expr(program, state, guard.right)
        if guard.op == "=":
            return a == b
        if guard.op == "!=":
            return a != b
        if guard.op == "<":
            return a < b
        if guard.op == "<=":
            return a <= b
        raise ValueError(f"bad comparison {guard.op!r}")
    if isinstance(guard, Not):
        return not eval_guard(program, state, guard.arg)
    if isinstance(guard, And):
        return all(eval_guard(program, state, g) for g in guard.args)
    if isinstance(guard, Or):
        return any(eval_guard(program, state, g) for g in guard.args)
    if isinstance(guard, LastIs):
        return program.ghost_last(state) == guard.process
    raise TypeError(f"not a guard: {guard!r}")


def apply_action(program, state, action):
    """New shared valuation after ``action``; unassigned variables keep their value."""
    values = list(state.shared)
    for name, e in action.assignments:
        if name not in program.var_index:
            raise UndeclaredSymbol(f"undeclared variable {name!r}")
        v = eval_expr(program, state, e)
        var = program.var_by_name[name]
        if v not in var.domain:
            raise DomainEscape(f"{name} := {v} is outside {set(var.domain)}")
        values[program.var_index[name]] = v
    return tuple(values)


def stof(local, props):
    """State-to-formula: the conjunction pinning every proposition of the
    owning process to its value in ``local``."""
    return conj(*(Prop(p) if p in local.props else Not(Prop(p)) for p in props))


@dataclass(frozen=True)
class Selection:
    guards: tuple
    action: Action


def enabled_branches(program, state, cmd):
    """All satisfied choices through ``cmd`` with their merged actions."""
    out = []
    for combo in alternatives(cmd):
        if all(eval_guard(program, state, s.guard) for s in combo):
            merged = SKIP
            for s in combo:
                merged = merged.merge(s.action)
            out.append(Selection(tuple(s.guard for s in combo), merged))
    return out


def successors(program, state):
    """Reference next-state relation: ``(i, state')`` pairs, unsorted."""
    out = []
    for p in program.processes:
        loc = state.locals[p.index - 1]
        for arc in p.arcs_from.get(loc.name, ()):
            target = p.state(arc.target)
            for sel in enabled_branches(program, state, arc.command):
                shared = apply_action(program, state, sel.action)
                locs = state.locals[: p.index - 1] + (target,) + state.locals[p.index :]
                out.append((p.index, GlobalState(locs, shared)))
    return out


# --------------------------------------------------------------------------
# well-formedness


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    subject: tuple = ()
    severity: str = "error"


def is_pairwise_form(program):
    """Compiled shape: some arc is a block composition, or local states carry
    stamps (a compiled program whose arcs were all pruned has only those)."""
    return any(isinstance(a.command, Sync) for p in program.processes for a in p.arcs) or any(
        s.stamp is not None for p in program.processes for s in p.states
    )


def program_issues(program):
    """Every violation of the model constraints, as Issues.

    ``subject`` names what is at fault so a caller holding source positions
    can locate it: ("prop", i, p), ("state", i, name), ("arc", i, n),
    ("var", name), ("init", n) or ().
    """
    issues = []
    seen_props = {}
    var_names = {v.name for v in program.shared}
    for v in program.shared:
        if not v.domain:
            issues.append(Issue("BadInitialState", f"variable {v.name} has an empty domain", ("var", v.name)))
        bad = [x for x in v.initial if x not in v.domain]
        if bad:
            issues.append(Issue("BadInitialState", f"initial value(s) {bad} of {v.name} outside its domain", ("var", v.name)))
    for p in program.processes:
        for a in p.props:
            if a in seen_props:
                issues.append(Issue("DuplicateProposition", f"proposition {a} declared by {seen_props[a]} and {p.name}", ("prop", p.index, a)))
            elif a in var_names:
                issues.append(Issue("DuplicateProposition", f"{a} is both a proposition and a shared variable", ("prop", p.index, a)))
            else:
                seen_props[a] = p.name
    for p in program.processes:
        own = set(p.props)
        seen_val = {}
        names = set()
        for s in p.states:
            if s.name in names:
                issues.append(Issue("IndistinctLocalStates", f"state {s.name} declared twice in {p.name}", ("state", p.index, s.name)))
            names.add(s.name)
            extra = s.props - own
            if extra:
                issues.append(Issue("UndeclaredSymbol", f"state {s.name} uses propositions {sorted(extra)} not owned by {p.name}", ("state", p.index, s.name)))
            key = (s.props, s.stamp)
            if key in seen_val:
                issues.append(Issue("IndistinctLocalStates", f"states {seen_val[key]} and {s.name} of {p.name} have the same valuation", ("state", p.index, s.name)))
            else:
                seen_val[key] = s.name
        sources = set()
        for n, arc in enumerate(p.arcs):
            subj = ("arc", p.index, n)
            for end in (arc.source, arc.target):
                if end not in p.state_by_name:
                    issues.append(Issue("UndeclaredSymbol", f"arc endpoint {end} is not a state of {p.name}", subj))
            if arc.source == arc.target:
                issues.append(Issue("SelfLoop", f"arc {arc.source} -> {arc.target} is a self-loop", subj))
            sources.add(arc.source)
            issues.extend(_command_issues(program, p, arc.command, subj))
        dead_severity = "warning" if is_pairwise_form(program) else "error"
        for s in p.states:
            if s.name not in sources:
                issues.append(Issue("DeadEndState", f"state {s.name} of {p.name} has no outgoing arc", ("state", p.index, s.name), dead_severity))
    if not program.initials:
        issues.append(Issue("BadInitialState", "program has no initial state"))
    for n, g in enumerate(program.initials):
        subj = ("init", n)
        if len(g.locals) != program.K or len(g.shared) != len(program.shared):
            issues.append(Issue("BadInitialState", "initial state does not match the declared processes and variables", subj))
            continue
        for p, loc in zip(program.processes, g.locals):
            if p.state_by_name.get(loc.name) != loc:
                issues.append(Issue("BadInitialState", f"{loc.name} is not a state of {p.name}", subj))
        for v, x in zip(program.shared, g.shared):
            if x not in v.domain:
                issues.append(Issue("BadInitialState", f"initial value {v.name}={x} outside its domain", subj))
    return issues


def _command_issues(program, process, cmd, subj):
    issues = []
    for partner, simple in command_guards(cmd):
        if partner is not None and not (1 <= partner <= program.K and partner != process.index):
            issues.append(Issue("UndeclaredSymbol", f"bad sync partner {partner} in {process.name}", subj))
        props, names = guard_symbols(simple.guard)
        for a in sorted(props - set(program.prop_owner)):
            issues.append(Issue("UndeclaredSymbol", f"undeclared proposition {a}", subj))
        used = set(names)
        for name, e in simple.action.assignments:
            used.add(name)
            used |= expr_vars(e)
        for x in sorted(used - set(program.var_index)):
            issues.append(Issue("UndeclaredSymbol", f"undeclared variable {x}", subj))
    for combo in alternatives(cmd):
        seen = set()
        for s in combo:
            clash = seen & s.action.targets
            if clash:
                issues.append(Issue("ConflictingWrites", f"simultaneous writes to {sorted(clash)}", subj))
                break
            seen |= s.action.targets
    return issues
