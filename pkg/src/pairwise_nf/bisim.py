"""Strong bisimulation between Kripke structures.

Two structures are compared on their disjoint union: the partition by
proposition valuation is refined until every block is stable under every
(process index, block) splitter. Cross-structure pairs inside one final block
form the largest bisimulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _jit, naming
from .errors import ApMismatch, PairwiseError


@dataclass(frozen=True)
class Witness:
    pair: tuple  # (id in first structure, id in second)
    clause: int  # 1 propositions, 2 first moves unmatched, 3 second moves unmatched, 0 initial coverage
    transition: tuple = None  # the unmatched (s, i, u), in the structure it belongs to

    def describe(self, m1, m2):
        a, b = self.pair
        keys = (m1.key(a) if a is not None else "-", m2.key(b) if b is not None else "-")
        if self.clause == 1:
            return f"{keys[0]} and {keys[1]} differ in their propositions"
        if self.clause == 0:
            side = "first" if b is None else "second"
            return f"initial state {keys[0] if b is None else keys[1]} of the {side} structure has no bisimilar initial state"
        mine = m1 if self.clause == 2 else m2
        s, i, u = self.transition
        return f"move {mine.key(s)} -{i}-> {mine.key(u)} cannot be matched from {keys[1] if self.clause == 2 else keys[0]}"


@dataclass(frozen=True)
class BisimRelation:
    pairs: frozenset
    certified: bool = True

    def __len__(self):
        return len(self.pairs)

    def transpose(self):
        return BisimRelation(frozenset((b, a) for a, b in self.pairs), self.certified)


@dataclass(frozen=True)
class NotBisimilar:
    pairs: frozenset  # the largest bisimulation, which fails initial coverage
    witness: Witness
    certified: bool = False


def ap_universe(m):
    if m.processes:
        return frozenset(a for _, props in m.processes for a in props)
    return frozenset().union(*(st.ap for st in m.states)) if m.states else frozenset()


def _union_blocks(m1, m2, use_jit=None):
    n1, n2 = len(m1), len(m2)
    aps = {}
    seed = np.empty(n1 + n2, dtype=np.int64)
    for n, st in enumerate(m1.states):
        seed[n] = aps.setdefault(st.ap, len(aps))
    for n, st in enumerate(m2.states):
        seed[n1 + n] = aps.setdefault(st.ap, len(aps))
    s1, l1, d1 = m1.edge_arrays()
    s2, l2, d2 = m2.edge_arrays()
    src = np.concatenate([s1, s2 + n1])
    lab = np.concatenate([l1, l2])
    dst = np.concatenate([d1, d2 + n1])
    return _jit.refine(n1 + n2, src, lab, dst, seed, use_jit=use_jit), seed


def bisim_classes(m, use_jit=None):
    """Block id per state of a single structure (its bisimilarity classes)."""
    seed = {}
    block0 = np.array([seed.setdefault(st.ap, len(seed)) for st in m.states], dtype=np.int64)
    src, lab, dst = m.edge_arrays()
    return _jit.refine(len(m), src, lab, dst, block0, use_jit=use_jit)


def compute_bisim(m1, m2, use_jit=None):
    """Largest bisimulation between ``m1`` and ``m2``.

    Returns a BisimRelation when every initial state on either side has a
    bisimilar initial state on the other, otherwise NotBisimilar carrying a
    one-step witness for a least uncovered initial state.
    """
    if ap_universe(m1) != ap_universe(m2):
        raise ApMismatch(
            f"proposition sets differ: {sorted(ap_universe(m1) ^ ap_universe(m2))}"
        )
    n1 = len(m1)
    block, _ = _union_blocks(m1, m2, use_jit)
    b1, b2 = block[:n1], block[n1:]
    members2 = {}
    for t, b in enumerate(b2.tolist()):
        members2.setdefault(b, []).append(t)
    pairs = frozenset((s, t) for s, b in enumerate(b1.tolist()) for t in members2.get(b, ()))
    init_blocks1 = {int(b1[s]) for s in m1.initials}
    init_blocks2 = {int(b2[t]) for t in m2.initials}
    for s in sorted(m1.initials):
        if int(b1[s]) not in init_blocks2:
            return NotBisimilar(pairs, _witness(m1, m2, block, s, None, first=True))
    for t in sorted(m2.initials):
        if int(b2[t]) not in init_blocks1:
            return NotBisimilar(pairs, _witness(m1, m2, block, None, t, first=False))
    return BisimRelation(pairs, True)


def _witness(m1, m2, block, s, t, first):
    """Explain why an uncovered initial state differs from the least initial
    state on the other side."""
    n1 = len(m1)
    if first:
        others = sorted(m2.initials)
        if not others:
            return Witness((s, None), 0)
        t = others[0]
    else:
        others = sorted(m1.initials)
        if not others:
            return Witness((None, t), 0)
        s = others[0]
    if m1.states[s].ap != m2.states[t].ap:
        return Witness((s, t), 1)
    sig2 = {(i, int(block[n1 + u])) for i, u in m2.succ[t]}
    for i, u in m1.succ[s]:
        if (i, int(block[u])) not in sig2:
            return Witness((s, t), 2, (s, i, u))
    sig1 = {(i, int(block[u])) for i, u in m1.succ[s]}
    for i, u in m2.succ[t]:
        if (i, int(block[n1 + u])) not in sig1:
            return Witness((s, t), 3, (t, i, u))
    return Witness((s, t), 0)


def bisimilar(m1, m2, use_jit=None):
    return isinstance(compute_bisim(m1, m2, use_jit), BisimRelation)


# --------------------------------------------------------------------------
# checking a given relation


@dataclass(frozen=True)
class Violation:
    clause: int  # 0 initial coverage, 1 props, 2 forward, 3 backward
    pair: tuple
    transition: tuple = None

    def __str__(self):
        return f"clause {self.clause} at {self.pair}" + (f" via {self.transition}" if self.transition else "")


def check_relation(m1, m2, rel, limit=None):
    """Verify propositions, both transfer conditions and initial coverage.

    Returns ``(ok, violations)``; stops after ``limit`` violations if given.
    """
    out = []

    def report(v):
        out.append(v)
        return limit is not None and len(out) >= limit

    fwd, bwd = {}, {}
    for a, b in rel:
        fwd.setdefault(a, set()).add(b)
        bwd.setdefault(b, set()).add(a)
    succ2 = [{} for _ in m2.states]
    for t, i, u in m2.transitions:
        succ2[t].setdefault(i, set()).add(u)
    succ1 = [{} for _ in m1.states]
    for s, i, u in m1.transitions:
        succ1[s].setdefault(i, set()).add(u)
    for a, b in sorted(rel):
        if not (0 <= a < len(m1) and 0 <= b < len(m2)):
            if report(Violation(1, (a, b))):
                return False, out
            continue
        if m1.states[a].ap != m2.states[b].ap:
            if report(Violation(1, (a, b))):
                return False, out
        for i, us in sorted(succ1[a].items()):
            targets = succ2[b].get(i, set())
            for u in sorted(us):
                if fwd.get(u, set()).isdisjoint(targets):
                    if report(Violation(2, (a, b), (a, i, u))):
                        return False, out
        for i, us in sorted(succ2[b].items()):
            targets = succ1[a].get(i, set())
            for u in sorted(us):
                if bwd.get(u, set()).isdisjoint(targets):
                    if report(Violation(3, (a, b), (b, i, u))):
                        return False, out
    for s in sorted(m1.initials):
        if fwd.get(s, set()).isdisjoint(m2.initials):
            if report(Violation(0, (s, None))):
                return False, out
    for t in sorted(m2.initials):
        if bwd.get(t, set()).isdisjoint(m1.initials):
            if report(Violation(0, (None, t))):
                return False, out
    return not out, out


def compose(r1, r2):
    """Relational composition ``{(a, c) | (a, b) in r1, (b, c) in r2}``."""
    by_b = {}
    for b, c in r2:
        by_b.setdefault(b, []).append(c)
    return frozenset((a, c) for a, b in r1 for c in by_b.get(b, ()))


# --------------------------------------------------------------------------
# the constructive relation between the marked and intermediate structures


def build_join(mq, mp, program, layout):
    """The constructive bisimulation between marked structure ``mq`` and the
    intermediate structure ``mp`` of ``program``."""
    K = program.K
    ix = program.var_index
    xs = layout.xs
    by_key = {}
    for r, st in enumerate(mp.states):
        c = program.ghost_last(st)
        if c is None:
            continue
        values = []
        ok = True
        for x in xs:
            vals = {st.shared[ix[naming.copy_var(x, c, i)]] for i in range(1, K + 1)}
            if len(vals) != 1:
                ok = False
                break
            values.append(vals.pop())
        if ok:
            by_key.setdefault((st.ap, c, tuple(values)), []).append(r)
    pairs = set()
    for u, st in enumerate(mq.states):
        for r in by_key.get((st.ap, st.mark, st.shared), ()):
            pairs.add((u, r))
    return frozenset(pairs)


# --------------------------------------------------------------------------
# certificates


class CertificateError(PairwiseError):
    code = "Certificate"


def dump_certificate(m1, m2, rel, title=""):
    lines = [f"# bisimulation {title}".rstrip(), f"# pairs {len(rel)}"]
    lines += sorted(f"{m1.key(a)} {m2.key(b)}" for a, b in rel)
    return "\n".join(lines) + "\n"


def load_certificate(m1, m2, text):
    idx1 = {m1.key(s): s for s in range(len(m1))}
    idx2 = {m2.key(s): s for s in range(len(m2))}
    rel = set()
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise CertificateError(f"line {n}: expected two state keys")
        try:
            rel.add((idx1[parts[0]], idx2[parts[1]]))
        except KeyError as exc:
            raise CertificateError(f"line {n}: unknown state {exc}") from None
    return frozenset(rel)
