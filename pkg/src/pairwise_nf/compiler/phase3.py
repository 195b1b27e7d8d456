"""Timestamps move into the local states; arcs become per-neighbor blocks.

Every local state ``r`` of process i is replaced by 3^K stamped copies, one
per tuple ``d`` of values for ``t_i^1..t_i^K``. For each intermediate arc
family, each disjunct of the ``last = c`` expansion and each source tuple
``d``, the arc to target tuple ``d'`` is emitted when every ``d'_j`` is a
possible ``step(d_j, .)``; the block for neighbor j then also tests the
unique value of ``tv_ji^j.i`` that steps ``d_j`` to ``d'_j``. Component i of
the tuple has no timestamp behind it and is carried over unchanged.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

from .. import naming
from ..errors import ArcBudgetExceeded
from ..fastpath import gc_paused
from ..model import Action, GlobalState, Int, LocalState, Process, Program, SharedVar, Simple, SkeletonArc, Sync, conj, eq
from ..timestamps import TIMESTAMPS, step_preimage
from .dnf import expand_dnf, split_disjunct
from .phase2 import others

DEFAULT_ARC_BUDGET = 2 * 10**6


def default_arc_budget():
    return int(os.environ.get("PAIRWISE_NF_ARC_BUDGET", DEFAULT_ARC_BUDGET))


def all_stamps(K):
    return list(itertools.product(TIMESTAMPS, repeat=K))


def stamped_state(loc, stamp):
    return LocalState(loc.process, naming.stamped_name(loc.name, stamp), loc.props, tuple(stamp))


@dataclass
class ExpansionStats:
    base_local_states: dict = field(default_factory=dict)  # process -> count
    expanded_local_states: dict = field(default_factory=dict)  # before pruning
    dnf_widths: list = field(default_factory=list)  # per arc family
    raw_arc_pairs: int = 0  # families x stamp pairs x disjuncts
    emitted_arcs: int = 0
    kept_arcs: int = 0
    kept_local_states: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Expanded:
    program: Program
    stats: ExpansionStats
    # base local state name + stamp per expanded local state, for mapping back
    origin: dict


def _block_action(marked, i, j, new_stamp, v, K):
    """Assignments of process i's block for neighbor j."""
    readers = [j]
    if j == naming.diagonal_partner(i, K):
        readers.append(i)
    assigns = []
    for r in readers:
        for k in others(i, K):
            assigns.append((naming.tv_var(i, r, k), Int(new_stamp[k - 1])))
    for r in readers:
        for x, val in zip(marked.variables, v.shared):
            assigns.append((naming.copy_var(x, i, r), Int(val)))
    return Action(tuple(assigns))


def _targets(stamp, i, K):
    """``(new stamp, {j: tv value stepping stamp_j to new_j})`` for every
    reachable target tuple."""
    choices = []
    for j in range(1, K + 1):
        if j == i:
            choices.append([(stamp[j - 1], None)])
        else:
            opts = []
            for dn in TIMESTAMPS:
                w = step_preimage(stamp[j - 1], dn)
                if w is not None:
                    opts.append((dn, w))
            choices.append(opts)
    for combo in itertools.product(*choices):
        new = tuple(dn for dn, _ in combo)
        pre = {j: w for j, (_, w) in enumerate(combo, start=1) if j != i}
        yield new, pre


def expand(inter, marked, arc_budget=None, name=None):
    """The pairwise program for an intermediate program (before pruning)."""
    program = inter.program
    K = program.K
    if arc_budget is None:
        arc_budget = default_arc_budget()
    n_stamps = 3**K
    stats = ExpansionStats()
    dnfs = {}
    per_family = []
    for fam in inter.families:
        key = (fam.mark, fam.i)
        if key not in dnfs:
            dnfs[key] = expand_dnf(fam.mark, fam.i, K)
        per_family.append(dnfs[key])
        stats.dnf_widths.append(dnfs[key].width)
    targets_per_stamp = 2 ** (K - 1)
    projected = sum(d.width for d in per_family) * n_stamps * targets_per_stamp
    stats.raw_arc_pairs = sum(d.width for d in per_family) * n_stamps * n_stamps
    if projected > arc_budget:
        raise ArcBudgetExceeded(
            f"expansion would emit {projected} arcs, over the budget of {arc_budget}", projected, arc_budget
        )

    origin = {}
    processes = []
    for p in program.processes:
        stats.base_local_states[p.index] = len(p.states)
        states = []
        for loc in p.states:
            for d in all_stamps(K):
                st = stamped_state(loc, d)
                states.append(st)
                origin[(p.index, st.name)] = (loc.name, d)
        stats.expanded_local_states[p.index] = len(states)
        processes.append((p, states))

    arcs = {p.index: [] for p in program.processes}
    stamps = all_stamps(K)
    moves = {i: [(d, list(_targets(d, i, K))) for d in stamps] for i in range(1, K + 1)}
    actions = {}
    with gc_paused():
        for fam, dnf in zip(inter.families, per_family):
            u, v = marked.states[fam.u], marked.states[fam.v]
            i = fam.i
            src = {d: naming.stamped_name(fam.arc.source, d) for d in stamps}
            dst = {d: naming.stamped_name(fam.arc.target, d) for d in stamps}
            for dis in dnf.disjuncts:
                split = split_disjunct(marked, u, i, dis)
                guards = {
                    (j, w): conj(split[j], eq(naming.tv_var(j, i, i), w))
                    for j in others(i, K) for w in TIMESTAMPS
                }
                for d, targets in moves[i]:
                    for new, pre in targets:
                        parts = []
                        for j in others(i, K):
                            key = (i, j, new, v.shared)
                            act = actions.get(key)
                            if act is None:
                                act = actions[key] = _block_action(marked, i, j, new, v, K)
                            parts.append((j, Simple(guards[(j, pre[j])], act)))
                        arcs[i].append(SkeletonArc(src[d], dst[new], Sync(tuple(parts))))
    stats.emitted_arcs = sum(len(a) for a in arcs.values())

    procs = tuple(
        Process(p.index, p.name, p.props, tuple(states), tuple(arcs[p.index])) for p, states in processes
    )
    keep = [v for v in program.shared if not v.name.startswith("t__")]
    shared = tuple(SharedVar(v.name, v.domain, ()) for v in keep)
    initials = tuple(sorted({to_expanded(program, r) for r in program.initials}))
    pp = Program(name or program.name, procs, shared, initials)
    return Expanded(pp, stats, origin)


def stamp_of(program, state, i):
    """Tuple of i's timestamps in an intermediate state; component i is 0."""
    K = program.K
    return tuple(0 if k == i else program.value(state, naming.ts_var(i, k)) for k in range(1, K + 1))


def to_expanded(program, r):
    """The pairwise-program state corresponding to intermediate state ``r``."""
    locs = tuple(stamped_state(loc, stamp_of(program, r, loc.process)) for loc in r.locals)
    vals = tuple(x for v, x in zip(program.shared, r.shared) if not v.name.startswith("t__"))
    return GlobalState(locs, vals)


def prune(pp, firings, reachable_states):
    """Drop local states absent from every reachable state and arcs that never fire.

    ``firings`` is a set of (process, arc position) that fired somewhere.
    """
    used = {(loc.process, loc.name) for st in reachable_states for loc in st.locals}
    procs = []
    for p in pp.processes:
        states = tuple(s for s in p.states if (p.index, s.name) in used)
        arcs = tuple(a for n, a in enumerate(p.arcs) if (p.index, n) in firings)
        procs.append(Process(p.index, p.name, p.props, states, arcs))
    return Program(pp.name, tuple(procs), pp.shared, pp.initials)
