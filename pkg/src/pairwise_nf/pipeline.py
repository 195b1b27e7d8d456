"""End-to-end compilation with every stage certified.

Stages:

* ``source``: the source program's state graph (M_Q);
* ``marked``: after splitting join states (M'_Q);
* ``intermediate``: the timestamped program P and its graph M_P;
* ``pairwise``: the stamped, block-structured program PP and its graph M_PP.

Four relations link them: the computed bisimulation source/marked, the
constructed relation marked/intermediate, the stamp correspondence
intermediate/pairwise, and their composition source/pairwise. Each one is
checked clause by clause.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from pathlib import Path

from . import bisim
from .compiler import (
    build_intermediate, expand, invariant_violations, prune, split_disjunct, to_expanded, validate_pairwise,
)
from .compiler.dnf import expand_dnf
from .compiler.phase2 import arc_guard
from .fastpath import Semantics
from .gstd import build_gstd, default_state_budget, explore
from .kripke import KripkeStructure, dump_kripke, export_dot
from .frontend import print_text
from .model import And, LastIs, conj
from .transform import check_unique_incoming, keys_injective, marks_consistent, transform
from .vectorized import StateTable


@dataclass
class PipelineConfig:
    state_budget: int = None
    arc_budget: int = None
    prune_unreachable: bool = True
    emit_dot: bool = False
    emit_certificates: bool = True
    check_guards: bool = True
    record_times: bool = False

    def __post_init__(self):
        if self.state_budget is None:
            self.state_budget = default_state_budget()
        for name in ("state_budget", "arc_budget"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class Certificate:
    name: str
    left: KripkeStructure
    right: KripkeStructure
    pairs: frozenset
    ok: bool
    violations: list = field(default_factory=list)

    def text(self):
        return bisim.dump_certificate(self.left, self.right, self.pairs, self.name)


@dataclass
class PipelineResult:
    source: object
    mq: KripkeStructure
    marked: KripkeStructure
    intermediate: object  # compiler.Intermediate
    mp: KripkeStructure
    expanded: object  # compiler.Expanded, before pruning
    pairwise: object  # the emitted Program
    mpp: KripkeStructure
    certificates: list
    checks: dict
    stats: dict
    times: dict

    @property
    def ok(self):
        return all(c.ok for c in self.certificates) and all(self.checks.values())


def build_with_firings(program, budget=None):
    """State graph of ``program`` plus the set of (process, arc position)
    pairs that fire somewhere in it."""
    sem = Semantics(program)
    fired = set()

    def successors(s):
        out = []
        for i, n, u in sem.firings(s):
            fired.add((i, n))
            out.append((i, u))
        return out

    states, transitions = explore(program.initials, successors, budget)
    m = KripkeStructure.from_states(
        states, program.initials, transitions, program.variables,
        tuple((p.name, tuple(p.props)) for p in program.processes),
    )
    return m, fired


def correspondence(inter_program, mp, mpp):
    """Map every intermediate state to its pairwise counterpart.

    Returns (pairs, identical) where identical means the map is a bijection
    carrying initial states and transitions exactly onto those of ``mpp``.
    """
    image = []
    for st in mp.states:
        image.append(mpp.index.get(to_expanded(inter_program, st)))
    pairs = frozenset((r, t) for r, t in enumerate(image) if t is not None)
    identical = (
        None not in image
        and len(set(image)) == len(mpp)
        and {image[s] for s in mp.initials} == set(mpp.initials)
        and {(image[s], i, image[u]) for s, i, u in mp.transitions} == set(mpp.transitions)
    )
    return pairs, identical


def guard_equivalences(inter, marked, mp):
    """Per arc family: does the disjunction of the per-disjunct guards equal
    the intermediate guard, and does each disjunct's block split conjoin back
    to it, at every state of ``mp``? Returns a list of failures."""
    table = StateTable.of(mp)
    failures = []
    K = inter.program.K
    cache = {}
    for fam in inter.families:
        u = marked.states[fam.u]
        key = (fam.mark, fam.i)
        if key not in cache:
            cache[key] = expand_dnf(fam.mark, fam.i, K)
        dnf = cache[key]
        whole = table.guard(fam.arc.command.guard)
        rest = _phase2_rest(marked, u, fam.i)
        union = None
        for m, dis in enumerate(dnf.disjuncts):
            split = split_disjunct(marked, u, fam.i, dis)
            b_m = table.guard(conj(*(lit.guard() for lit in dis), *rest))
            joined = table.guard(conj(*split.values())) if split else table.guard(conj(*(lit.guard() for lit in dis)))
            if not (joined == b_m).all():
                failures.append((fam.index, m, "split"))
            union = b_m if union is None else union | b_m
        if union is None or not (union == whole).all():
            failures.append((fam.index, None, "disjunction"))
    return failures


def _phase2_rest(marked, u, i):
    """The intermediate guard without its ``last`` conjunct."""
    g = arc_guard(marked, u, i)
    args = g.args if isinstance(g, And) else (g,)
    return [a for a in args if not isinstance(a, LastIs)]


def size_checks(mq, marked, expanded, K):
    st = expanded.stats
    n_bound = 3 ** (K - 1)
    factor = 3**K
    expansion_ok = all(
        st.expanded_local_states[i] == factor * st.base_local_states[i] for i in st.base_local_states
    )
    return {
        "states_bound": {
            "measured": len(marked), "bound": K * len(mq), "pass": len(marked) <= K * len(mq),
        },
        "transitions_bound": {
            "measured": len(marked.transitions),
            "bound": K * len(mq.transitions),
            "pass": len(marked.transitions) <= K * len(mq.transitions),
        },
        "dnf_width_bound": {
            "measured": max(st.dnf_widths, default=0), "bound": n_bound,
            "pass": all(w <= n_bound for w in st.dnf_widths),
        },
        "expansion_factor": {
            "measured": {str(i): [st.base_local_states[i], st.expanded_local_states[i]] for i in sorted(st.base_local_states)},
            "factor": factor,
            "pass": expansion_ok,
        },
    }


def run_pipeline(program, config=None):
    cfg = config or PipelineConfig()
    times = {}

    def timed(name, f, *args, **kw):
        t0 = time.perf_counter()
        out = f(*args, **kw)
        times[name] = round(time.perf_counter() - t0, 6)
        return out

    K = program.K
    mq = timed("source", build_gstd, program, cfg.state_budget)
    marked = timed("transform", transform, mq)
    checks = {
        "unique_incoming": check_unique_incoming(marked),
        "marks_consistent": marks_consistent(marked),
        "keys_injective": keys_injective(marked),
    }
    certs = []

    r1 = timed("bisim_source_marked", bisim.compute_bisim, mq, marked)
    ok1, v1 = bisim.check_relation(mq, marked, r1.pairs, limit=20)
    certs.append(Certificate("source~marked", mq, marked, r1.pairs, r1.certified and ok1, v1))

    inter = timed("phase2", build_intermediate, marked, program, f"{program.name}_intermediate")
    mp = timed("intermediate", build_gstd, inter.program, cfg.state_budget)
    join = timed("join", bisim.build_join, marked, mp, inter.program, inter.layout)
    ok2, v2 = bisim.check_relation(marked, mp, join, limit=20)
    certs.append(Certificate("marked~intermediate", marked, mp, join, ok2, v2))
    inv = timed("invariants", invariant_violations, inter, mp)
    checks["intermediate_invariants"] = not inv

    if cfg.check_guards:
        failures = timed("guard_equivalences", guard_equivalences, inter, marked, mp)
        checks["guard_equivalences"] = not failures

    expanded = timed("phase3", expand, inter, marked, cfg.arc_budget, program.name + "_pairwise")
    raw_mpp, fired = timed("pairwise_raw", build_with_firings, expanded.program, cfg.state_budget)
    if cfg.prune_unreachable:
        pp = prune(expanded.program, fired, raw_mpp.states)
        mpp = timed("pairwise", build_gstd, pp, cfg.state_budget)
    else:
        pp, mpp = expanded.program, raw_mpp
    expanded.stats.kept_arcs = sum(len(p.arcs) for p in pp.processes)
    expanded.stats.kept_local_states = {p.index: len(p.states) for p in pp.processes}

    r3, identical = correspondence(inter.program, mp, mpp)
    _, identical_raw = correspondence(inter.program, mp, raw_mpp)
    checks["intermediate_equals_pairwise"] = identical and identical_raw
    ok3, v3 = bisim.check_relation(mp, mpp, r3, limit=20)
    certs.append(Certificate("intermediate~pairwise", mp, mpp, r3, ok3, v3))

    composed = bisim.compose(bisim.compose(r1.pairs, join), r3)
    ok4, v4 = timed("composed_check", bisim.check_relation, mq, mpp, composed, 20)
    certs.append(Certificate("source~pairwise", mq, mpp, composed, ok4, v4))

    valid, vdiags = validate_pairwise(pp)
    checks["pairwise_form"] = valid

    sizes = size_checks(mq, marked, expanded, K)
    for name, rec in sizes.items():
        checks[name] = rec["pass"]

    st = expanded.stats
    stats = {
        "program": program.name,
        "K": K,
        "stages": {
            "source": mq.stats(),
            "marked": marked.stats(),
            "intermediate": dict(mp.stats(), arcs=len(inter.families)),
            "pairwise": dict(
                mpp.stats(),
                arcs_raw_pairs=st.raw_arc_pairs,
                arcs_emitted=st.emitted_arcs,
                arcs_kept=st.kept_arcs,
                local_states_base={str(k): v for k, v in sorted(st.base_local_states.items())},
                local_states_expanded={str(k): v for k, v in sorted(st.expanded_local_states.items())},
                local_states_kept={str(k): v for k, v in sorted(st.kept_local_states.items())},
            ),
        },
        "dnf_widths": _histogram(st.dnf_widths),
        "bounds": sizes,
        "certificates": {c.name: {"pairs": len(c.pairs), "ok": c.ok} for c in certs},
        "checks": dict(sorted(checks.items())),
        "pairwise_diagnostics": [str(d) for d in vdiags],
        "invariant_violations": [list(map(str, v)) for v in inv],
    }
    if cfg.record_times:
        stats["wall_time_s"] = times
    return PipelineResult(program, mq, marked, inter, mp, expanded, pp, mpp, certs, checks, stats, times)


def _histogram(widths):
    out = {}
    for w in widths:
        out[str(w)] = out.get(str(w), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def stats_json(stats):
    return json.dumps(stats, indent=2, sort_keys=False) + "\n"


def write_artifacts(result, outdir, cfg=None):
    """Write the compiled program, stats, structures, certificates and DOT
    files into ``outdir``; returns the written paths in order."""
    cfg = cfg or PipelineConfig()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.source.name
    files = {
        f"{name}.pairwise.skel": print_text(result.pairwise),
        "stats.json": stats_json(result.stats),
        "source.kripke": dump_kripke(result.mq),
        "marked.kripke": dump_kripke(result.marked),
        "intermediate.kripke": dump_kripke(result.mp),
        "pairwise.kripke": dump_kripke(result.mpp),
    }
    if cfg.emit_certificates:
        for c in result.certificates:
            files[f"cert_{c.name.replace('~', '_')}.txt"] = c.text()
    if cfg.emit_dot:
        for stage, m in (("source", result.mq), ("marked", result.marked), ("intermediate", result.mp), ("pairwise", result.mpp)):
            files[f"{stage}.dot"] = export_dot(m, stage)
    written = []
    for fname, text in files.items():
        p = out / fname
        p.write_text(text)
        written.append(p)
    return written
