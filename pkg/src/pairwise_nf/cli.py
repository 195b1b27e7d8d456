"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 parse or validation error,
3 budget exceeded.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import bisim
from .compiler import extract_jsystem, validate_pairwise
from .errors import BudgetExceeded, DiagnosticError, PairwiseError
from .frontend import parse_with_diagnostics, print_text
from .gstd import build_gstd
from .kripke import dump_kripke, export_dot, load_kripke
from .pipeline import PipelineConfig, run_pipeline, stats_json, write_artifacts
from .transform import check_unique_incoming, transform

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


def _emit(text, output):
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _load_program(path):
    text = Path(path).read_text()
    program, diags = parse_with_diagnostics(text, str(path))
    for d in diags:
        click.echo(str(d), err=True)
    if program is None:
        raise Failure(EXIT_INPUT)
    return program


def _load_structure(path, budget=None):
    """A Kripke structure from a ``.kripke`` file or the graph of a ``.skel`` program."""
    p = Path(path)
    text = p.read_text()
    if text.startswith("kripke"):
        return load_kripke(text)
    return build_gstd(_load_program(path), budget)


def _run(f):
    """Map package errors onto exit codes."""
    try:
        f()
    except Failure as exc:
        if str(exc):
            click.echo(str(exc), err=True)
        sys.exit(exc.code)
    except BudgetExceeded as exc:
        click.echo(f"error[{exc.code}]: {exc} (measured {exc.measured}, budget {exc.budget})", err=True)
        sys.exit(EXIT_BUDGET)
    except DiagnosticError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INPUT)
    except PairwiseError as exc:
        click.echo(f"error[{exc.code}]: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    sys.exit(EXIT_OK)


budget_opt = click.option("--state-budget", type=click.IntRange(min=1), default=None, help="Cap on explored states.")
arc_budget_opt = click.option("--arc-budget", type=click.IntRange(min=1), default=None, help="Cap on emitted arcs.")
output_opt = click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Output file.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Compile synchronization skeletons into pairwise normal form."""


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("--print", "do_print", is_flag=True, help="Print the program in canonical form.")
def parse(source, do_print):
    """Parse and validate a .skel program."""

    def go():
        program = _load_program(source)
        if do_print:
            click.echo(print_text(program), nl=False)
        else:
            arcs = sum(len(p.arcs) for p in program.processes)
            click.echo(f"{program.name}: {program.K} processes, {len(program.shared)} shared variables, "
                       f"{arcs} arcs, {len(program.initials)} initial states")

    _run(go)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@output_opt
@click.option("--dot", type=click.Path(dir_okay=False), default=None, help="Also write DOT here.")
@click.option("--check-unique-incoming", "check_incoming", is_flag=True,
              help="Fail unless every state has one incoming index.")
@budget_opt
def gstd(source, output, dot, check_incoming, state_budget):
    """Build the state graph of a program (or read a .kripke file)."""

    def go():
        m = _load_structure(source, state_budget)
        if dot:
            Path(dot).write_text(export_dot(m, Path(source).stem))
        if check_incoming:
            ok = check_unique_incoming(m)
            click.echo(f"unique incoming: {'pass' if ok else 'FAIL'}", err=True)
            if not ok:
                raise Failure(EXIT_VERIFY)
        if output and output.endswith(".dot"):
            _emit(export_dot(m, Path(source).stem), output)
        else:
            _emit(dump_kripke(m), output)

    _run(go)


@main.command(name="transform")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@output_opt
@budget_opt
def transform_cmd(source, output, state_budget):
    """Split join states; writes the marked structure."""

    def go():
        m = _load_structure(source, state_budget)
        _emit(dump_kripke(transform(m)), output)

    _run(go)


@main.command(name="compile")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@output_opt
@click.option("--prune-unreachable/--no-prune-unreachable", default=True, show_default=True)
@budget_opt
@arc_budget_opt
def compile_cmd(source, output, prune_unreachable, state_budget, arc_budget):
    """Compile a program into pairwise normal form."""

    def go():
        program = _load_program(source)
        cfg = PipelineConfig(state_budget, arc_budget, prune_unreachable, check_guards=False)
        result = run_pipeline(program, cfg)
        _emit(print_text(result.pairwise), output)
        if not result.ok:
            raise Failure(EXIT_VERIFY, _failure_summary(result))

    _run(go)


@main.command()
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--relation", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Check this certificate instead of computing the bisimulation.")
@click.option("--certificate", type=click.Path(dir_okay=False), default=None, help="Write the computed relation.")
@budget_opt
def verify(first, second, relation, certificate, state_budget):
    """Decide whether two structures (or programs) are strongly bisimilar."""

    def go():
        m1 = _load_structure(first, state_budget)
        m2 = _load_structure(second, state_budget)
        if relation:
            rel = bisim.load_certificate(m1, m2, Path(relation).read_text())
            ok, violations = bisim.check_relation(m1, m2, rel, limit=10)
            for v in violations:
                click.echo(str(v), err=True)
            click.echo(f"relation of {len(rel)} pairs: {'verified' if ok else 'REJECTED'}")
            if not ok:
                raise Failure(EXIT_VERIFY)
            return
        res = bisim.compute_bisim(m1, m2)
        if certificate:
            Path(certificate).write_text(bisim.dump_certificate(m1, m2, res.pairs, f"{first} {second}"))
        if isinstance(res, bisim.NotBisimilar):
            click.echo(f"not bisimilar: {res.witness.describe(m1, m2)}")
            raise Failure(EXIT_VERIFY)
        click.echo(f"bisimilar ({len(res.pairs)} related pairs)")

    _run(go)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("--pair", "pair", nargs=2, type=int, default=None, help="Extract the pair-system of i and j.")
@click.option("--triple", "triple", nargs=3, type=int, default=None, help="Extract the triple-system i-j-k.")
@output_opt
def extract(source, pair, triple, output):
    """Restrict a pairwise program to a pair- or triple-system."""

    def go():
        if bool(pair) == bool(triple):
            raise Failure(EXIT_INPUT, "give exactly one of --pair or --triple")
        program = _load_program(source)
        J = [tuple(pair)] if pair else [(triple[0], triple[1]), (triple[1], triple[2])]
        for i, j in J:
            if i == j:
                raise Failure(EXIT_INPUT, f"pair ({i}, {j}) is reflexive")
        sub = extract_jsystem(program, J)
        ok, diags = validate_pairwise(sub)
        for d in diags:
            click.echo(str(d), err=True)
        _emit(print_text(sub), output)
        if not ok:
            raise Failure(EXIT_INPUT)

    _run(go)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@output_opt
@click.option("--prune-unreachable/--no-prune-unreachable", default=True, show_default=True)
@click.option("--timings", is_flag=True, help="Include wall times (makes the report run-dependent).")
@budget_opt
@arc_budget_opt
def stats(source, output, prune_unreachable, timings, state_budget, arc_budget):
    """Run the pipeline and print the statistics report as JSON."""

    def go():
        program = _load_program(source)
        cfg = PipelineConfig(state_budget, arc_budget, prune_unreachable, record_times=timings)
        result = run_pipeline(program, cfg)
        _emit(stats_json(result.stats), output)
        if not result.ok:
            raise Failure(EXIT_VERIFY, _failure_summary(result))

    _run(go)


@main.command(name="export-dot")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@output_opt
@click.option("--marked", is_flag=True, help="Export the structure after splitting join states.")
@budget_opt
def export_dot_cmd(source, output, marked, state_budget):
    """Write a program's state graph (or a .kripke file) as DOT."""

    def go():
        m = _load_structure(source, state_budget)
        if marked:
            m = transform(m)
        _emit(export_dot(m, Path(source).stem), output)

    _run(go)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--outdir", type=click.Path(file_okay=False), required=True, help="Artifact directory.")
@click.option("--prune-unreachable/--no-prune-unreachable", default=True, show_default=True)
@click.option("--dot/--no-dot", "emit_dot", default=False, show_default=True, help="Write DOT per stage.")
@click.option("--certificates/--no-certificates", "emit_certificates", default=True, show_default=True)
@click.option("--timings", is_flag=True, help="Include wall times in stats.json.")
@budget_opt
@arc_budget_opt
def run(source, outdir, prune_unreachable, emit_dot, emit_certificates, timings, state_budget, arc_budget):
    """Full pipeline: parse, explore, transform, compile, verify; write artifacts."""

    def go():
        program = _load_program(source)
        cfg = PipelineConfig(
            state_budget, arc_budget, prune_unreachable, emit_dot, emit_certificates, record_times=timings
        )
        result = run_pipeline(program, cfg)
        for path in write_artifacts(result, outdir, cfg):
            click.echo(str(path))
        for c in result.certificates:
            click.echo(f"certificate {c.name}: {len(c.pairs)} pairs, {'verified' if c.ok else 'FAILED'}", err=True)
        if not result.ok:
            raise Failure(EXIT_VERIFY, _failure_summary(result))

    _run(go)


def _failure_summary(result):
    lines = [f"check {k} failed" for k, v in result.checks.items() if not v]
    for c in result.certificates:
        if not c.ok:
            lines.append(f"certificate {c.name} failed: " + "; ".join(str(v) for v in c.violations[:3]))
    return "\n".join(lines)


if __name__ == "__main__":  # pragma: no cover
    main()
