"""Restriction of a pairwise program to a sub-relation of its neighbors."""

from __future__ import annotations

from ..errors import EmptyRange
from ..model import GlobalState, Process, Program, SkeletonArc, Sync
from .validate import _block_uses, block_alternatives


def normalize_pairs(J):
    pairs = set()
    for a, b in J:
        if a == b:
            raise ValueError(f"pair ({a}, {b}) is reflexive")
        pairs.add(frozenset((a, b)))
    return pairs


def extract_jsystem(program, J, name=None):
    """Keep the processes in range(J); each arc keeps only its blocks for
    J-neighbors. Processes are renumbered in their original order."""
    pairs = normalize_pairs(J)
    rng = sorted({k for q in pairs for k in q})
    if not rng:
        raise EmptyRange("the relation has an empty range")
    for k in rng:
        if not 1 <= k <= program.K:
            raise EmptyRange(f"process {k} does not exist")
    renum = {old: new for new, old in enumerate(rng, start=1)}

    referenced, kept_refs = set(), set()
    procs = []
    for old in rng:
        p = program.process(old)
        arcs = []
        for arc in p.arcs:
            cmd = arc.command
            if isinstance(cmd, Sync):
                parts = []
                for j, body in cmd.parts:
                    alts = block_alternatives(body)
                    uses = set()
                    if alts is not None:
                        _, reads, writes = _block_uses(alts)
                        uses = reads | writes
                    if frozenset((old, j)) in pairs:
                        parts.append((renum[j], body))
                        kept_refs |= uses
                    referenced |= uses
                cmd = Sync(tuple(parts))
            arcs.append(SkeletonArc(arc.source, arc.target, cmd))
        procs.append(Process(renum[old], p.name, p.props, p.states, tuple(arcs)))
    for p in program.processes:
        if p.index not in renum:
            for arc in p.arcs:
                if isinstance(arc.command, Sync):
                    for _, body in arc.command.parts:
                        alts = block_alternatives(body)
                        if alts is not None:
                            _, reads, writes = _block_uses(alts)
                            referenced |= reads | writes

    keep = [n for n, v in enumerate(program.shared) if v.name in kept_refs or v.name not in referenced]
    shared = tuple(program.shared[n] for n in keep)
    initials = sorted(
        {
            GlobalState(
                tuple(
                    type(loc)(renum[loc.process], loc.name, loc.props, loc.stamp)
                    for loc in (g.locals[old - 1] for old in rng)
                ),
                tuple(g.shared[n] for n in keep),
            )
            for g in program.initials
        }
    )
    procs = [_renumber_states(p, p.index) for p in procs]
    return Program(name or program.name, tuple(procs), shared, tuple(initials))


def _renumber_states(p, index):
    states = tuple(type(s)(index, s.name, s.props, s.stamp) for s in p.states)
    return Process(index, p.name, p.props, states, p.arcs)


def pair_system(program, i, j):
    return extract_jsystem(program, [(i, j)], f"{program.name}_pair{i}{j}")


def triple_system(program, i, j, k):
    return extract_jsystem(program, [(i, j), (j, k)], f"{program.name}_triple{i}{j}{k}")
