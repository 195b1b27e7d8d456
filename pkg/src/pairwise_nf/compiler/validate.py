"""Structural check for pairwise normal form.

A program is pairwise when

1. every arc of process i is a synchronous composition with exactly one
   block per neighbor j in I(i), each block a choice of simple commands;
2. every shared variable is used by the blocks of a single pair {i, j};
3. a block of i for neighbor j reads only j's propositions and variables
   of the pair {i, j};
4. a block of i for neighbor j writes only variables of the pair {i, j}.

The interconnection relation I and the pair each variable belongs to are
inferred from the program itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import Choice, Simple, Sync, expr_vars, guard_symbols


@dataclass(frozen=True)
class PairwiseDiagnostic:
    clause: int
    process: int
    arc: int  # position in the process's arc list, or -1
    message: str

    @property
    def code(self):
        return f"PairwiseClause{self.clause}"

    def __str__(self):
        where = f"process {self.process}" + (f" arc {self.arc}" if self.arc >= 0 else "")
        return f"clause {self.clause}: {where}: {self.message}"


def block_alternatives(cmd):
    """Simple commands of a block, or None if the block is not a flat choice."""
    if isinstance(cmd, Simple):
        return [cmd]
    if isinstance(cmd, Choice) and all(isinstance(a, Simple) for a in cmd.alternatives):
        return list(cmd.alternatives)
    return None


def _block_uses(alts):
    reads, writes, props = set(), set(), set()
    for s in alts:
        ps, vs = guard_symbols(s.guard)
        props |= ps
        reads |= vs
        for name, e in s.action.assignments:
            writes.add(name)
            reads |= expr_vars(e)
    return props, reads, writes


def neighbors(program):
    """Inferred interconnection relation: i -> set of neighbors (symmetric)."""
    nb = {p.index: set() for p in program.processes}
    for p in program.processes:
        for arc in p.arcs:
            if isinstance(arc.command, Sync):
                for j, _ in arc.command.parts:
                    if j in nb and j != p.index:
                        nb[p.index].add(j)
                        nb[j].add(p.index)
    return nb


def variable_pairs(program):
    """Variable -> set of unordered pairs whose blocks reference it."""
    pairs = {}
    for p in program.processes:
        for arc in p.arcs:
            if not isinstance(arc.command, Sync):
                continue
            for j, body in arc.command.parts:
                alts = block_alternatives(body)
                if alts is None:
                    continue
                _, reads, writes = _block_uses(alts)
                for x in reads | writes:
                    pairs.setdefault(x, set()).add(frozenset((p.index, j)))
    return pairs


def validate_pairwise(program):
    """``(ok, diagnostics)`` for the four clauses above."""
    diags = []
    nb = neighbors(program)
    owners = variable_pairs(program)
    for x, ps in sorted(owners.items()):
        if len(ps) > 1:
            names = ", ".join("{" + ",".join(str(k) for k in sorted(q)) + "}" for q in sorted(ps, key=sorted))
            diags.append(PairwiseDiagnostic(2, 0, -1, f"variable {x} is used by pairs {names}"))
    prop_owner = program.prop_owner
    for p in program.processes:
        i = p.index
        for n, arc in enumerate(p.arcs):
            cmd = arc.command
            if not isinstance(cmd, Sync):
                diags.append(PairwiseDiagnostic(1, i, n, "arc is not a composition of per-neighbor blocks"))
                continue
            partners = [j for j, _ in cmd.parts]
            if len(set(partners)) != len(partners):
                diags.append(PairwiseDiagnostic(1, i, n, "two blocks for the same neighbor"))
            if set(partners) != nb[i]:
                want = sorted(nb[i])
                diags.append(PairwiseDiagnostic(1, i, n, f"blocks for {sorted(set(partners))}, neighbors are {want}"))
            for j, body in cmd.parts:
                if j == i or j not in nb:
                    diags.append(PairwiseDiagnostic(1, i, n, f"block partner {j} is not another process"))
                    continue
                alts = block_alternatives(body)
                if alts is None:
                    diags.append(PairwiseDiagnostic(1, i, n, f"block for {j} is not a choice of guarded commands"))
                    continue
                pair = frozenset((i, j))
                props, reads, writes = _block_uses(alts)
                for a in sorted(props):
                    if prop_owner.get(a) != j:
                        diags.append(PairwiseDiagnostic(3, i, n, f"block for {j} reads proposition {a} of process {prop_owner.get(a)}"))
                guard_vars = set()
                for s in alts:
                    guard_vars |= guard_symbols(s.guard)[1]
                    for _, e in s.action.assignments:
                        guard_vars |= expr_vars(e)
                for x in sorted(guard_vars):
                    if owners.get(x, {pair}) != {pair}:
                        diags.append(PairwiseDiagnostic(3, i, n, f"block for {j} reads {x}, which is not private to the pair"))
                for x in sorted(writes):
                    if owners.get(x, {pair}) != {pair}:
                        diags.append(PairwiseDiagnostic(4, i, n, f"block for {j} writes {x}, which is not private to the pair"))
    return not diags, diags
