"""Forward reachability: the global state transition diagram of a program."""

from __future__ import annotations

import os

from .errors import StateSpaceBudgetExceeded
from .fastpath import Semantics, gc_paused
from .kripke import KripkeStructure

DEFAULT_STATE_BUDGET = 10**6


def default_state_budget():
    return int(os.environ.get("PAIRWISE_NF_STATE_BUDGET", DEFAULT_STATE_BUDGET))


def explore(initials, successors, budget=None):
    """Breadth-first closure under ``successors``.

    ``successors(state)`` returns ``(i, state')`` pairs. Each level is
    expanded in sorted order so the traversal is reproducible. Returns
    (states, transitions).
    """
    if budget is None:
        budget = default_state_budget()
    seen = set(initials)
    if len(seen) > budget:
        raise StateSpaceBudgetExceeded(f"{len(seen)} initial states exceed the budget of {budget}", len(seen), budget)
    transitions = set()
    frontier = sorted(seen)
    with gc_paused():
        _bfs(frontier, seen, transitions, successors, budget)
    return seen, transitions


def _bfs(frontier, seen, transitions, successors, budget):
    while frontier:
        nxt = set()
        for s in frontier:
            for i, u in successors(s):
                transitions.add((s, i, u))
                if u not in seen:
                    seen.add(u)
                    nxt.add(u)
                    if len(seen) > budget:
                        raise StateSpaceBudgetExceeded(
                            f"state space exceeds the budget of {budget} states", len(seen), budget
                        )
        frontier = sorted(nxt)


def build_gstd(program, budget=None):
    """The Kripke structure of all states reachable from the program's initial states."""
    sem = Semantics(program)
    states, transitions = explore(program.initials, sem.successors, budget)
    return KripkeStructure.from_states(
        states,
        program.initials,
        transitions,
        program.variables,
        tuple((p.name, tuple(p.props)) for p in program.processes),
    )
