"""Split join states so every state is entered by at most one process.

A state ``s`` entered by several processes is replaced by one marked copy
``s^i`` per entering process ``i``. Each copy keeps every outgoing transition
of ``s`` and receives exactly the ``i``-labelled incoming ones. Afterwards
every state carries its mark: the unique incoming index, or 1 for an initial
state nobody enters.
"""

from __future__ import annotations

import heapq
from dataclasses import replace

from .kripke import KripkeStructure

SOURCE_MARK = 1


def transform(m):
    """Marked structure bisimilar to ``m`` with ``|in_procs(s)| <= 1`` everywhere.

    Offending states are handled least-first in canonical order. Copying the
    outgoing transitions of a split state never changes the set of incoming
    labels of any other state, so only the offenders of the input are ever
    split and the loop runs at most ``len(m)`` times.
    """
    succ = {s: set() for s in m.states}
    pred = {s: set() for s in m.states}
    for a, i, b in m.transitions:
        sa, sb = m.states[a], m.states[b]
        succ[sa].add((i, sb))
        pred[sb].add((i, sa))
    initials = {m.states[s] for s in m.initials}

    heap = [s for s in m.states if len({i for i, _ in pred[s]}) > 1]
    heapq.heapify(heap)
    while heap:
        s = heapq.heappop(heap)
        labels = sorted({i for i, _ in pred[s]})
        outgoing = sorted(succ[s])
        incoming = sorted(pred[s])
        copies = {i: replace(s, mark=i) for i in labels}
        for i, copy in copies.items():
            succ[copy], pred[copy] = set(), set()
            if s in initials:
                initials.add(copy)
        for copy in copies.values():
            for j, u in outgoing:
                # a j-labelled self-loop on s now enters the copy for j
                v = copies[j] if u == s else u
                succ[copy].add((j, v))
                pred[v].add((j, copy))
        for i, u in incoming:
            if u == s:
                continue
            copy = copies[i]
            succ[u].add((i, copy))
            pred[copy].add((i, u))
        # delete s with all of its transitions
        for j, u in outgoing:
            if u != s:
                pred[u].discard((j, s))
        for i, u in incoming:
            if u != s:
                succ[u].discard((i, s))
        del succ[s], pred[s]
        initials.discard(s)

    rename = {}
    for s in succ:
        if s.mark is None:
            labels = {i for i, _ in pred[s]}
            rename[s] = replace(s, mark=min(labels) if labels else SOURCE_MARK)
        else:
            rename[s] = s
    transitions = [(rename[s], i, rename[u]) for s, out in succ.items() for i, u in out]
    return KripkeStructure.from_states(
        rename.values(), [rename[s] for s in initials], transitions, m.variables, m.processes
    )


def check_unique_incoming(m):
    """True iff every state of ``m`` is entered by at most one process."""
    return all(len(m.in_procs(s)) <= 1 for s in range(len(m)))


def marks_consistent(m):
    """Each mark equals the unique incoming index; unentered states carry 1."""
    for s, st in enumerate(m.states):
        labels = m.in_procs(s)
        want = next(iter(labels)) if len(labels) == 1 else SOURCE_MARK
        if len(labels) > 1 or st.mark != want:
            return False
    return True


def keys_injective(m):
    """(AP, SH, mark) distinguishes every pair of distinct states."""
    keys = {(st.ap, st.shared, st.mark) for st in m.states}
    return len(keys) == len(m.states)
