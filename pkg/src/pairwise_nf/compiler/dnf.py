"""Pairwise replacement of the ``last = c`` test, and the per-neighbor split.

Process i cannot read the other processes' timestamps, but it can read the
vectors they publish to it. ``last = c`` holds iff c's published timestamp
for every other j is newer than j's published timestamp for c; each of those
K-1 comparisons is a 3-way disjunction of value pairs, and distributing them
gives 3^(K-1) conjunctions of equality literals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .. import naming
from ..model import conj, disj, eq, stof
from ..timestamps import TIMESTAMPS, gt_o

# (a, b) with a newer than b, in lexicographic order
NEWER_PAIRS = tuple(sorted((a, b) for a in TIMESTAMPS for b in TIMESTAMPS if gt_o(a, b)))


@dataclass(frozen=True)
class Literal:
    """``var = value`` where ``var`` is a vector component written by ``writer``."""

    var: str
    value: int
    writer: int

    def guard(self):
        return eq(self.var, self.value)


@dataclass(frozen=True)
class DnfGuard:
    c: int
    i: int
    K: int
    disjuncts: tuple  # of tuples of Literal
    raw_width: int  # disjuncts before dropping contradictory ones

    @property
    def width(self):
        return len(self.disjuncts)

    def variables(self):
        return sorted({lit.var for d in self.disjuncts for lit in d})

    def guard(self):
        return disj(*(conj(*(lit.guard() for lit in d)) for d in self.disjuncts))


def _contradictory(literals):
    seen = {}
    for lit in literals:
        if seen.setdefault(lit.var, lit.value) != lit.value:
            return True
    return False


def expand_dnf(c, i, K):
    """``last = c`` as read by process i, in disjunctive normal form.

    Conjunct j (for each j != c, ascending) compares component j of the
    vector c writes for i against component c of the vector j writes for i.
    """
    conjuncts = []
    for j in range(1, K + 1):
        if j == c:
            continue
        left = naming.tv_var(c, i, j)
        right = naming.tv_var(j, i, c)
        conjuncts.append([(Literal(left, a, c), Literal(right, b, j)) for a, b in NEWER_PAIRS])
    raw = list(itertools.product(*conjuncts))
    disjuncts = []
    for combo in raw:
        lits = tuple(lit for pair in combo for lit in pair)
        if not _contradictory(lits):
            disjuncts.append(lits)
    return DnfGuard(c, i, K, tuple(disjuncts), len(raw))


def split_disjunct(marked, u, i, disjunct):
    """Per-neighbor guards ``{j: guard}`` whose conjunction is disjunct ∧ the
    propositional and copy tests of the intermediate guard at ``u``.

    A literal on a variable written by w lands in the block of the process
    that shares it with i: w itself, or the diagonal partner when w == i.
    ``stof(u|j)`` lands in block j. The copy tests ``x_ci^c = u(x)`` land
    in c's block (the diagonal partner's when c == i). The proposition test
    for process i itself is absent: the arc's source local state fixes it.
    """
    K = marked.K
    c = u.mark
    props = {n: tuple(pr) for n, (_, pr) in enumerate(marked.processes, start=1)}
    parts = {j: [] for j in range(1, K + 1) if j != i}
    for lit in disjunct:
        parts[naming.partner(i, lit.writer, K)].append(lit.guard())
    for j in parts:
        parts[j].append(stof(u.local(j), props[j]))
    if marked.variables:
        home = naming.partner(i, c, K)
        for x, val in zip(marked.variables, u.shared):
            parts[home].append(eq(naming.copy_var(x, c, i), val))
    return {j: conj(*gs) for j, gs in parts.items()}


def disjunct_guard(marked, u, i, disjunct):
    """The unsplit guard for one disjunct: D_m ∧ props of others ∧ copies."""
    split = split_disjunct(marked, u, i, disjunct)
    return conj(*split.values()) if split else conj(*(lit.guard() for lit in disjunct))

