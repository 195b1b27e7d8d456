"""One test per acceptance criterion.

Each test records a PASS/FAIL line (with the measured figures) that the
terminal summary prints at the end of the run.
"""

import itertools
import time
from functools import lru_cache

import pytest

from pairwise_nf import build_gstd, parse_program, print_text, transform
from pairwise_nf.bisim import check_relation, compute_bisim
from pairwise_nf.compiler import validate_pairwise
from pairwise_nf.errors import UndefinedStep
from pairwise_nf.pipeline import PipelineConfig, correspondence, guard_equivalences, run_pipeline, write_artifacts
from pairwise_nf.timestamps import TIMESTAMPS, gt_o, lt_o, step
from pairwise_nf.transform import check_unique_incoming, keys_injective

from conftest import CORPUS_NAMES, corpus_program, pipeline, record_acceptance
from oracles import naive_bisim, naive_gstd
from test_gstd import as_sets
from test_validate import CHAIN


@lru_cache(maxsize=None)
def fresh(name):
    """A second, independent pipeline run (the conftest cache holds the first)."""
    return run_pipeline(corpus_program(name), PipelineConfig())


def stage_time(res, *names):
    return sum(res.times[n] for n in names)


def conclude(n, failures, detail):
    record_acceptance(n, not failures, detail if not failures else f"{detail}; failures: {failures[:3]}")
    assert not failures, failures


def test_criterion_1_timestamp_tables():
    less = {(0, 1), (1, 2), (2, 0)}
    steps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
    t0 = time.perf_counter()
    failures = []
    for t, u in itertools.product(TIMESTAMPS, repeat=2):
        if lt_o(t, u) != ((t, u) in less):
            failures.append(("lt", t, u))
        if t == u:
            try:
                step(t, u)
                failures.append(("step defined", t, u))
            except UndefinedStep:
                pass
            continue
        want = steps.get((t, u), t if (u, t) in less else None)
        got = step(t, u)
        if got != want or not gt_o(got, u):
            failures.append(("step", t, u, got))
    elapsed = time.perf_counter() - t0
    if elapsed >= 1e-3:
        failures.append(("time", elapsed))
    conclude(1, failures, f"9 order pairs, 6 step pairs, 3 undefined; {elapsed * 1e6:.0f} us")


def test_criterion_2_transform():
    failures = []
    slowest = 0.0
    assert len(CORPUS_NAMES) >= 6
    for name in CORPUS_NAMES:
        program = corpus_program(name)
        shape_ok = (
            program.K in (1, 2, 3)
            and all(len(p.states) <= 4 for p in program.processes)
            and len(program.shared) <= 2
            and all(len(v.domain) <= 3 for v in program.shared)
        )
        t0 = time.perf_counter()
        mq = build_gstd(program)
        marked = transform(mq)
        rel = compute_bisim(mq, marked)
        ok = rel.certified and check_relation(mq, marked, rel.pairs)[0]
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        if not (shape_ok and check_unique_incoming(marked) and keys_injective(marked) and ok and elapsed < 10):
            failures.append(name)
    conclude(2, failures, f"{len(CORPUS_NAMES)} programs; slowest {slowest:.2f} s (limit 10 s)")


def test_criterion_3_intermediate():
    failures = []
    slowest = 0.0
    for name in CORPUS_NAMES:
        res = fresh(name)
        cert = res.certificates[1]
        t0 = time.perf_counter()
        ok, _ = check_relation(res.marked, res.mp, cert.pairs)
        elapsed = time.perf_counter() - t0 + stage_time(res, "phase2", "intermediate", "join", "invariants")
        slowest = max(slowest, elapsed)
        if not (ok and res.checks["intermediate_invariants"] and elapsed < 60):
            failures.append(name)
    conclude(3, failures, f"join relation and invariants on {len(CORPUS_NAMES)} programs; slowest {slowest:.2f} s (limit 60 s)")


def test_criterion_4_pairwise_expansion():
    failures = []
    slowest_k3 = 0.0
    for name in CORPUS_NAMES:
        res = fresh(name)
        t0 = time.perf_counter()
        eq_fail = guard_equivalences(res.intermediate, res.marked, res.mp)
        _, identical = correspondence(res.intermediate.program, res.mp, res.mpp)
        composed = res.certificates[3]
        ok, _ = check_relation(res.mq, res.mpp, composed.pairs)
        elapsed = time.perf_counter() - t0 + stage_time(res, "phase3", "pairwise_raw", "pairwise")
        if res.source.K == 3:
            slowest_k3 = max(slowest_k3, elapsed)
        if eq_fail or not identical or not ok or (res.source.K == 3 and elapsed >= 300):
            failures.append(name)
    conclude(4, failures, f"guard equivalences, identical structures, composed certificate; slowest K=3 {slowest_k3:.1f} s (limit 300 s)")


def test_criterion_5_validation():
    failures = [name for name in CORPUS_NAMES if not validate_pairwise(fresh(name).pairwise)[0]]
    counterexamples = {
        1: CHAIN.replace("arc Y -> X { sync with P2 { alt do a := 0; } } }", "arc Y -> X do a := 0; }"),
        3: CHAIN.replace("alt !q & a = 0 do a := 1;", "alt !r & a = 0 do a := 1;"),
        4: CHAIN.replace("arc Y -> X { sync with P2 { alt do a := 0; } } }",
                         "arc Y -> X { sync with P2 { alt do a := 0 || b := 0; } } }"),
    }
    for clause, src in counterexamples.items():
        ok, diags = validate_pairwise(parse_program(src))
        if ok or clause not in {d.clause for d in diags}:
            failures.append(f"clause {clause} counterexample accepted")
    conclude(5, failures, f"{len(CORPUS_NAMES)} compiled outputs accepted; clauses 1, 3, 4 counterexamples rejected")


def test_criterion_6_sizes():
    failures = []
    worst = []
    for name in CORPUS_NAMES:
        res = fresh(name)
        b = res.stats["bounds"]
        K = res.source.K
        exact = (
            len(res.marked) <= K * len(res.mq)
            and all(w <= 3 ** (K - 1) for w in res.expanded.stats.dnf_widths)
            and all(
                res.expanded.stats.expanded_local_states[i] == 3**K * n
                for i, n in res.expanded.stats.base_local_states.items()
            )
        )
        reported = all(b[k]["pass"] for k in ("states_bound", "dnf_width_bound", "expansion_factor"))
        if not (exact and reported):
            failures.append(name)
        worst.append(f"{name} {len(res.marked)}/{K * len(res.mq)}")
    conclude(6, failures, "|M'| vs K|M|: " + ", ".join(worst))


def test_criterion_7_oracles():
    failures = []
    checked_g = checked_b = 0
    for name in CORPUS_NAMES:
        res = fresh(name)
        for program, m in ((res.source, res.mq), (res.intermediate.program, res.mp), (res.pairwise, res.mpp)):
            if len(m) <= 2000:
                checked_g += 1
                if as_sets(m) != naive_gstd(program):
                    failures.append((name, "gstd", program.name))
        pairs = ((res.mq, res.marked), (res.marked, res.mp), (res.mp, res.mpp), (res.mq, res.mpp))
        for a, b in pairs:
            if len(a) <= 2000 and len(b) <= 2000:
                checked_b += 1
                rel = compute_bisim(a, b)
                want, covered = naive_bisim(a, b)
                if rel.pairs != frozenset(want) or rel.certified != covered:
                    failures.append((name, "bisim"))
    conclude(7, failures, f"{checked_g} state graphs and {checked_b} bisimulations match the oracles")


def test_criterion_8_determinism(tmp_path):
    failures = []
    for name in CORPUS_NAMES:
        dumps = []
        for tag, res in (("a", pipeline(name)), ("b", fresh(name))):
            out = tmp_path / name / tag
            write_artifacts(res, out, PipelineConfig(emit_dot=True))
            dumps.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if dumps[0] != dumps[1]:
            failures.append((name, "artifacts differ"))
        for program in (corpus_program(name), fresh(name).pairwise):
            if parse_program(print_text(program)) != program:
                failures.append((name, "round trip", program.name))
    conclude(8, failures, f"two runs byte-identical and print/parse identity on {2 * len(CORPUS_NAMES)} programs")
