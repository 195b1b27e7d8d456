"""Kripke structures: the global state transition diagrams everything else
works on, with their text serialization and DOT export."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _jit
from .errors import PairwiseError, UnknownState
from .model import GlobalState, LocalState


@dataclass(frozen=True)
class KripkeStructure:
    """States are numbered by canonical order; transitions are ``(s, i, u)``
    triples of state ids and 1-based process indices.

    ``variables`` names the shared-value positions of every state and
    ``processes`` records (name, props) per process so the structure can be
    serialized and read back on its own.
    """

    states: tuple
    initials: frozenset
    transitions: frozenset
    variables: tuple = ()
    processes: tuple = ()

    @classmethod
    def from_states(cls, states, initials, transitions, variables=(), processes=()):
        """Build from GlobalStates; ids are assigned in canonical sort order."""
        ordered = tuple(sorted(set(states)))
        ids = {s: n for n, s in enumerate(ordered)}
        return cls(
            ordered,
            frozenset(ids[s] for s in initials),
            frozenset((ids[s], i, ids[u]) for s, i, u in transitions),
            tuple(variables),
            tuple(processes),
        )

    @property
    def K(self):
        return len(self.processes)

    def __len__(self):
        return len(self.states)

    @cached_property
    def index(self):
        return {s: n for n, s in enumerate(self.states)}

    def id_of(self, state):
        try:
            return self.index[state]
        except KeyError:
            raise UnknownState(f"state {state!r} is not in the structure") from None

    @cached_property
    def sorted_transitions(self):
        return tuple(sorted(self.transitions))

    @cached_property
    def succ(self):
        out = [[] for _ in self.states]
        for s, i, u in self.sorted_transitions:
            out[s].append((i, u))
        return out

    @cached_property
    def pred(self):
        out = [[] for _ in self.states]
        for s, i, u in self.sorted_transitions:
            out[u].append((i, s))
        return out

    def in_procs(self, s):
        """Indices labelling the incoming transitions of state id ``s``."""
        if not 0 <= s < len(self.states):
            raise UnknownState(f"no state with id {s}")
        return frozenset(i for i, _ in self.pred[s])

    def ap(self, s):
        return self.states[s].ap

    def sh(self, s):
        return tuple(zip(self.variables, self.states[s].shared))

    def key(self, s):
        return state_key(self.states[s])

    def edge_arrays(self):
        if not self.transitions:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z
        arr = np.array(self.sorted_transitions, dtype=np.int64)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    def reachable_mask(self):
        src, _, dst = self.edge_arrays()
        return _jit.reachable(len(self.states), src, dst, sorted(self.initials))

    def is_reachability_closed(self):
        return bool(self.reachable_mask().all())

    def check_wellformed(self):
        """Structural invariants: initials and endpoints exist, no global self-loops."""
        n = len(self.states)
        problems = []
        if any(not 0 <= s < n for s in self.initials):
            problems.append("initial state outside the state set")
        for s, i, u in self.transitions:
            if not (0 <= s < n and 0 <= u < n):
                problems.append(f"transition ({s},{i},{u}) has an unknown endpoint")
            elif s == u:
                problems.append(f"self-loop on state {self.key(s)}")
        return problems

    def max_branching(self):
        """Largest out-degree among the local moves of a single process."""
        moves = {}
        for s, i, u in self.transitions:
            a, b = self.states[s].locals[i - 1], self.states[u].locals[i - 1]
            moves.setdefault((i, a), set()).add(b)
        return max((len(v) for v in moves.values()), default=0)

    def stats(self):
        return {
            "states": len(self.states),
            "transitions": len(self.transitions),
            "initials": len(self.initials),
            "max_branching": self.max_branching(),
        }


# --------------------------------------------------------------------------
# canonical keys and text format


def state_key(state):
    locs = ".".join(loc.name for loc in state.locals)
    vals = ",".join(str(v) for v in state.shared)
    mark = "-" if state.mark is None else str(state.mark)
    return f"{locs}|{vals}|{mark}"


def _braced(items):
    return "{" + ",".join(items) + "}"


def dump_kripke(m):
    """Line-oriented, sorted, bit-exact text form of a structure."""
    lines = ["kripke"]
    for v in m.variables:
        lines.append(f"var {v}")
    locals_seen = {}
    for st in m.states:
        for loc in st.locals:
            locals_seen[(loc.process, loc.name)] = loc
    for n, (name, props) in enumerate(m.processes, start=1):
        lines.append(f"process {n} {name} props{_braced(props)}")
    for (_, _), loc in sorted(locals_seen.items()):
        stamp = "" if loc.stamp is None else " stamp=" + "".join(str(d) for d in loc.stamp)
        lines.append(f"local {loc.process} {loc.name} {_braced(sorted(loc.props))}{stamp}")
    for s in sorted(m.initials):
        lines.append(f"init {m.key(s)}")
    for s, st in enumerate(m.states):
        sh = _braced(f"{k}={v}" for k, v in m.sh(s))
        mark = "-" if st.mark is None else str(st.mark)
        lines.append(f"state {m.key(s)} ap{_braced(sorted(st.ap))} sh{sh} mark={mark}")
    for s, i, u in m.sorted_transitions:
        lines.append(f"trans {m.key(s)} {i} {m.key(u)}")
    return "\n".join(lines) + "\n"


class KripkeFormatError(PairwiseError):
    code = "KripkeFormat"


_BRACED = re.compile(r"\{([^}]*)\}")


def load_kripke(text):
    variables, processes, local_by = [], [], {}
    initial_keys, state_lines, trans = [], [], []
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0] != "kripke":
        raise KripkeFormatError("missing 'kripke' header")
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln or ln.startswith("#"):
            continue
        kind, _, rest = ln.partition(" ")
        if kind == "var":
            variables.append(rest)
        elif kind == "process":
            idx, name, tail = rest.split(" ", 2)
            props = tuple(p for p in _BRACED.search(tail).group(1).split(",") if p)
            processes.append((name, props))
        elif kind == "local":
            parts = rest.split(" ")
            proc, name = int(parts[0]), parts[1]
            props = frozenset(p for p in _BRACED.search(parts[2]).group(1).split(",") if p)
            stamp = None
            if len(parts) > 3 and parts[3].startswith("stamp="):
                stamp = tuple(int(c) for c in parts[3][len("stamp="):])
            local_by[(proc, name)] = LocalState(proc, name, props, stamp)
        elif kind == "init":
            initial_keys.append(rest)
        elif kind == "state":
            state_lines.append(rest.split(" ", 1)[0])
        elif kind == "trans":
            a, i, b = rest.split(" ")
            trans.append((a, int(i), b))
        else:
            raise KripkeFormatError(f"line {lineno}: unknown record {kind!r}")

    def parse_key(key):
        try:
            locs, vals, mark = key.split("|")
            loc_states = tuple(local_by[(n, name)] for n, name in enumerate(locs.split("."), start=1))
            shared = tuple(int(v) for v in vals.split(",")) if vals else ()
        except (KeyError, ValueError) as exc:
            raise KripkeFormatError(f"bad state key {key!r}") from exc
        return GlobalState(loc_states, shared, None if mark == "-" else int(mark))

    by_key = {k: parse_key(k) for k in state_lines}
    try:
        inits = [by_key[k] for k in initial_keys]
        ts = [(by_key[a], i, by_key[b]) for a, i, b in trans]
    except KeyError as exc:
        raise KripkeFormatError(f"reference to undeclared state {exc}") from None
    return KripkeStructure.from_states(by_key.values(), inits, ts, variables, processes)


# --------------------------------------------------------------------------
# DOT


def _dot_quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(m, name="gstd"):
    """DOT digraph; nodes carry AP/SH projections (and marks), edges the
    process index."""
    out = [f"digraph {_dot_quote(name)} {{"]
    for s, st in enumerate(m.states):
        label = "{" + ",".join(sorted(st.ap)) + "}"
        if m.variables:
            label += "\n" + ",".join(f"{k}={v}" for k, v in m.sh(s))
        if st.mark is not None:
            label += f"\nin={st.mark}"
        shape = "doublecircle" if s in m.initials else "circle"
        out.append(f"  s{s} [label={_dot_quote(label)}, shape={shape}];")
    for s, i, u in m.sorted_transitions:
        out.append(f"  s{s} -> s{u} [label={_dot_quote(str(i))}];")
    out.append("}")
    return "\n".join(out) + "\n"
