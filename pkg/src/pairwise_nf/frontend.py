"""The ``.skel`` text format: parser, validator front end and printer.

Source programs::

    program mutex;
    shared turn : {1,2} init 1;
    process P1 {
      props n1 t1 c1;
      state N1 {n1};
      state T1 {t1};
      state C1 {c1};
      arc N1 -> T1;
      arc T1 -> C1 when turn = 1 | n2;
      arc C1 -> N1 do turn := 2;
    }
    init (N1, N2; turn=1);

Pairwise programs wrap every arc body in per-neighbor blocks, one ``alt`` per
exclusive alternative, and may attach a timestamp tuple to a local state::

    state T1_t010 {t1} stamp 0 1 0;
    arc T1_t010 -> C1_t020 {
      sync with P2 { alt tv__2_1__1 = 1 & n2 do tv__1_2__2 := 2; }
    }
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .errors import ConflictingWrites, DiagnosticError
from .model import (
    CMP_OPS, FALSE, TRUE, Action, And, BinOp, Choice, Cmp, Const, GlobalState, Int, LastIs,
    LocalState, Not, Or, Process, Program, Prop, SharedVar, Simple, SkeletonArc, Step, Sync, Var,
    conj, disj, program_issues,
)


@dataclass(frozen=True)
class SourceUnit:
    text: str
    origin: str = "<inline>"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    col: int
    code: str
    message: str
    origin: str = "<inline>"

    def __str__(self):
        return f"{self.origin}:{self.line}:{self.col}: {self.severity}[{self.code}]: {self.message}"


# --------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\|\||:=|->|!=|<=|[{}();,:|&!=<+\-])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "program", "shared", "init", "process", "props", "state", "stamp", "arc",
    "when", "do", "skip", "sync", "with", "alt", "true", "false",
}


@dataclass(frozen=True)
class Token:
    kind: str  # 'id', 'int', 'op', 'kw', 'eof'
    text: str
    line: int
    col: int


class _SyntaxError(Exception):
    def __init__(self, message, token):
        super().__init__(message)
        self.token = token


def tokenize(text):
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise _SyntaxError(f"unexpected character {text[pos]!r}", Token("op", text[pos], line, col))
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "id" and lexeme in KEYWORDS:
                kind = "kw"
            if kind not in ("ws", "comment"):
                out.append(Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.pos = 0
        self.where = {}  # subject -> (line, col)

    @property
    def tok(self):
        return self.toks[self.pos]

    def peek(self, k=1):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def take(self):
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text):
        if not self.at(text):
            raise _SyntaxError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok)
        return self.take()

    def accept(self, text):
        if self.at(text):
            return self.take()
        return None

    def ident(self):
        if self.tok.kind != "id":
            raise _SyntaxError(f"expected an identifier, found {self.tok.text or 'end of input'!r}", self.tok)
        return self.take().text

    def integer(self):
        neg = self.accept("-")
        if self.tok.kind != "int":
            raise _SyntaxError(f"expected an integer, found {self.tok.text or 'end of input'!r}", self.tok)
        v = int(self.take().text)
        return -v if neg else v

    def int_set(self):
        self.expect("{")
        vals = []
        if not self.at("}"):
            vals.append(self.integer())
            while self.accept(","):
                vals.append(self.integer())
        self.expect("}")
        return vals

    # -- top level

    def program(self):
        self.expect("program")
        name = self.ident()
        self.accept(";")
        shared, procs, init_lines = [], [], []
        while self.tok.kind != "eof":
            if self.at("shared"):
                shared.append(self.shared_decl())
            elif self.at("process"):
                procs.append(self.process_decl(len(procs) + 1))
            elif self.at("init"):
                init_lines.append(self.init_line())
            else:
                raise _SyntaxError(f"expected 'shared', 'process' or 'init', found {self.tok.text!r}", self.tok)
        return name, shared, procs, init_lines

    def shared_decl(self):
        t = self.expect("shared")
        name = self.ident()
        self.expect(":")
        domain = self.int_set()
        initial = []
        if self.accept("init"):
            initial = self.int_set() if self.at("{") else [self.integer()]
        self.expect(";")
        self.where[("var", name)] = (t.line, t.col)
        return SharedVar(name, tuple(domain), tuple(initial))

    def process_decl(self, index):
        t = self.expect("process")
        name = self.ident()
        self.where[("process", index)] = (t.line, t.col)
        self.expect("{")
        props, states, arcs = [], [], []
        while not self.at("}"):
            if self.at("props"):
                self.take()
                while self.tok.kind == "id":
                    pt = self.tok
                    props.append(self.ident())
                    self.where.setdefault(("prop", index, props[-1]), (pt.line, pt.col))
                    self.accept(",")
                self.expect(";")
            elif self.at("state"):
                st = self.take()
                sname = self.ident()
                self.expect("{")
                vals = []
                while not self.at("}"):
                    vals.append(self.ident())
                    self.accept(",")
                self.expect("}")
                stamp = None
                if self.accept("stamp"):
                    stamp = []
                    while self.tok.kind == "int":
                        stamp.append(self.integer())
                    stamp = tuple(stamp)
                self.expect(";")
                self.where.setdefault(("state", index, sname), (st.line, st.col))
                states.append(LocalState(index, sname, frozenset(vals), stamp))
            elif self.at("arc"):
                at = self.tok
                arc = self.arc_decl()
                self.where[("arc", index, len(arcs))] = (at.line, at.col)
                arcs.append(arc)
            else:
                raise _SyntaxError(f"expected 'props', 'state', 'arc' or '}}', found {self.tok.text!r}", self.tok)
        self.expect("}")
        return name, props, states, arcs

    def arc_decl(self):
        self.expect("arc")
        src = self.ident()
        self.expect("->")
        dst = self.ident()
        if self.accept("{"):
            parts = []
            while not self.at("}"):
                parts.append(self.sync_block())
            self.expect("}")
            self.accept(";")
            return SkeletonArc(src, dst, Sync(tuple(parts)))
        guard = TRUE
        action = Action()
        if self.accept("when"):
            guard = self.guard()
        if self.accept("do"):
            action = self.assigns()
        self.expect(";")
        return SkeletonArc(src, dst, Simple(guard, action))

    def sync_block(self):
        self.expect("sync")
        self.expect("with")
        pt = self.tok
        partner = self.ident()
        self.expect("{")
        alts = []
        while not self.at("}"):
            self.expect("alt")
            guard = TRUE
            if not self.at("do") and not self.at(";"):
                guard = self.guard()
            action = Action()
            if self.accept("do"):
                action = self.assigns()
            self.expect(";")
            alts.append(Simple(guard, action))
        self.expect("}")
        cmd = alts[0] if len(alts) == 1 else Choice(tuple(alts))
        return (_PartnerRef(partner, pt), cmd)

    def assigns(self):
        if self.accept("skip"):
            return Action()
        pairs = []
        start = self.tok
        while True:
            name = self.ident()
            self.expect(":=")
            pairs.append((name, self.expr()))
            if not self.accept("||"):
                break
        try:
            return Action(tuple(pairs))
        except ConflictingWrites as exc:
            raise _Semantic("ConflictingWrites", str(exc), start) from None

    def init_line(self):
        t = self.expect("init")
        self.expect("(")
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        vals = []
        if self.accept(";"):
            while self.tok.kind == "id":
                x = self.ident()
                self.expect("=")
                vals.append((x, self.integer()))
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect(";")
        return names, vals, (t.line, t.col)

    # -- guards and expressions

    def guard(self):
        items = [self.guard_and()]
        while self.accept("|"):
            items.append(self.guard_and())
        return disj(*items) if len(items) > 1 else items[0]

    def guard_and(self):
        items = [self.guard_unary()]
        while self.accept("&"):
            items.append(self.guard_unary())
        return conj(*items) if len(items) > 1 else items[0]

    def guard_unary(self):
        if self.accept("!"):
            return Not(self.guard_unary())
        if self.accept("("):
            g = self.guard()
            self.expect(")")
            return g
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        start = self.tok
        left = self.expr()
        if self.tok.kind == "op" and self.tok.text in CMP_OPS:
            op = self.take().text
            return Cmp(op, left, self.expr())
        if isinstance(left, Var):
            return Prop(left.name)
        raise _SyntaxError("expected a comparison", start)

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        if self.tok.kind == "int" or (self.at("-") and self.peek().kind == "int"):
            return Int(self.integer())
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        return Var(self.ident())


@dataclass(frozen=True)
class _PartnerRef:
    name: str
    token: Token


class _Semantic(Exception):
    def __init__(self, code, message, token):
        super().__init__(message)
        self.code = code
        self.token = token


def parse_with_diagnostics(src, origin=None):
    """Parse and validate; returns ``(program or None, diagnostics)``.

    The program is None whenever any diagnostic has error severity.
    """
    if isinstance(src, SourceUnit):
        text, origin = src.text, origin or src.origin
    else:
        text, origin = src, origin or "<inline>"
    try:
        parser = _Parser(text)
        name, shared, procs, init_lines = parser.program()
    except _SyntaxError as exc:
        return None, [Diagnostic("error", exc.token.line, exc.token.col, "SyntaxError", str(exc), origin)]
    except _Semantic as exc:
        return None, [Diagnostic("error", exc.token.line, exc.token.col, exc.code, str(exc), origin)]

    diags = []

    def diag(code, message, where, severity="error"):
        line, col = where if where else (1, 1)
        diags.append(Diagnostic(severity, line, col, code, message, origin))

    proc_index = {pname: n for n, (pname, *_ ) in enumerate(procs, start=1)}
    processes = []
    for n, (pname, props, states, arcs) in enumerate(procs, start=1):
        fixed = []
        for a, arc in enumerate(arcs):
            cmd = arc.command
            if isinstance(cmd, Sync):
                parts = []
                for ref, body in cmd.parts:
                    j = proc_index.get(ref.name)
                    if j is None:
                        diag("UndeclaredSymbol", f"unknown process {ref.name}", (ref.token.line, ref.token.col))
                        j = 0
                    parts.append((j, body))
                cmd = Sync(tuple(parts))
            fixed.append(SkeletonArc(arc.source, arc.target, cmd))
        processes.append(Process(n, pname, tuple(props), tuple(states), tuple(fixed)))

    var_by = {v.name: v for v in shared}
    initials = []
    for names, vals, where in init_lines:
        if len(names) != len(processes):
            diag("BadInitialState", f"initial state lists {len(names)} local states for {len(processes)} processes", where)
            continue
        locs = []
        ok = True
        for p, sname in zip(processes, names):
            st = p.state_by_name.get(sname)
            if st is None:
                diag("BadInitialState", f"{sname} is not a state of {p.name}", where)
                ok = False
            locs.append(st)
        given = {}
        for x, v in vals:
            if x not in var_by:
                diag("UndeclaredSymbol", f"undeclared variable {x} in initial state", where)
                ok = False
            elif x in given:
                diag("BadInitialState", f"{x} given twice in initial state", where)
                ok = False
            given[x] = v
        choices = []
        for v in shared:
            if v.name in given:
                choices.append((given[v.name],))
            elif v.initial:
                choices.append(v.initial)
            else:
                diag("BadInitialState", f"no initial value for {v.name}", where)
                ok = False
        if not ok:
            continue
        for combo in itertools.product(*choices):
            initials.append((GlobalState(tuple(locs), tuple(combo)), where))

    program = Program(name, tuple(processes), tuple(shared), tuple(sorted({g for g, _ in initials})))
    init_where = {}
    for g, where in initials:
        init_where.setdefault(g, where)
    for issue in program_issues(program):
        subj = issue.subject
        where = None
        if subj and subj[0] == "init":
            where = init_where.get(program.initials[subj[1]])
        elif subj:
            where = parser.where.get(subj)
            if where is None and subj[0] in ("state", "prop", "arc"):
                where = parser.where.get(("process", subj[1]))
        if issue.code == "BadInitialState" and subj and subj[0] == "var":
            where = parser.where.get(subj)
        diag(issue.code, issue.message, where, issue.severity)
    diags.sort(key=lambda d: (d.line, d.col, d.code, d.message))
    if any(d.severity == "error" for d in diags):
        return None, diags
    return program, diags


def parse_program(src, origin=None):
    """Parse and validate a ``.skel`` source; raises DiagnosticError on error."""
    program, diags = parse_with_diagnostics(src, origin)
    if program is None:
        raise DiagnosticError(diags)
    return program


# --------------------------------------------------------------------------
# printer


def format_expr(e):
    if isinstance(e, Int):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        right = format_expr(e.right)
        if isinstance(e.right, BinOp):
            right = f"({right})"
        return f"{format_expr(e.left)} {e.op} {right}"
    if isinstance(e, Step):
        return f"step({format_expr(e.t)}, {format_expr(e.u)})"
    raise TypeError(f"not an expression: {e!r}")


def format_guard(g, prec=0):
    """Precedence: 0 = or, 1 = and, 2 = unary."""
    if isinstance(g, Const):
        return "true" if g.value else "false"
    if isinstance(g, Prop):
        return g.name
    if isinstance(g, Cmp):
        s = f"{format_expr(g.left)} {g.op} {format_expr(g.right)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(g, LastIs):
        return f"@last = {g.process}"
    if isinstance(g, Not):
        return "!" + format_guard(g.arg, 2)
    if isinstance(g, And):
        s = " & ".join(format_guard(a, 2 if isinstance(a, And) else 1) for a in g.args)
        return f"({s})" if prec >= 2 else s
    if isinstance(g, Or):
        s = " | ".join(format_guard(a, 1) for a in g.args)
        return f"({s})" if prec >= 1 else s
    raise TypeError(f"not a guard: {g!r}")


def format_action(a):
    if not a.assignments:
        return "skip"
    return " || ".join(f"{x} := {format_expr(e)}" for x, e in a.assignments)


def _format_set(vals):
    return "{" + ",".join(str(v) for v in vals) + "}"


def _format_arc(program, arc):
    head = f"arc {arc.source} -> {arc.target}"
    cmd = arc.command
    if isinstance(cmd, Simple):
        s = head
        if cmd.guard != TRUE:
            s += " when " + format_guard(cmd.guard)
        if cmd.action.assignments:
            s += " do " + format_action(cmd.action)
        return [s + ";"]
    if isinstance(cmd, Sync):
        if not cmd.parts:
            return [head + " {}"]
        lines = [head + " {"]
        for partner, body in cmd.parts:
            alts = body.alternatives if isinstance(body, Choice) else (body,)
            pname = program.process(partner).name if 1 <= partner <= program.K else f"P{partner}"
            inner = []
            for alt in alts:
                if not isinstance(alt, Simple):
                    raise TypeError("sync blocks hold simple alternatives only")
                s = "alt " + format_guard(alt.guard)
                if alt.action.assignments:
                    s += " do " + format_action(alt.action)
                inner.append(s + ";")
            lines.append(f"  sync with {pname} {{ " + " ".join(inner) + " }")
        lines.append("}")
        return lines
    raise TypeError(f"cannot print command {cmd!r} outside a sync block")


def print_program(program):
    """Render a program; ``parse_program(print_program(p)) == p``."""
    out = [f"program {program.name};", ""]
    if program.shared:
        for v in program.shared:
            s = f"shared {v.name} : {_format_set(v.domain)}"
            if v.initial:
                s += " init " + (str(v.initial[0]) if len(v.initial) == 1 else _format_set(v.initial))
            out.append(s + ";")
        out.append("")
    for p in program.processes:
        out.append(f"process {p.name} {{")
        out.append("  props " + " ".join(p.props) + ";" if p.props else "  props;")
        for st in p.states:
            vals = [a for a in p.props if a in st.props] + sorted(st.props - set(p.props))
            s = f"  state {st.name} {{{', '.join(vals)}}}"
            if st.stamp is not None:
                s += " stamp " + " ".join(str(d) for d in st.stamp)
            out.append(s + ";")
        for arc in p.arcs:
            out.extend("  " + ln for ln in _format_arc(program, arc))
        out.append("}")
        out.append("")
    for g in program.initials:
        s = "init (" + ", ".join(loc.name for loc in g.locals)
        if program.shared:
            s += "; " + ", ".join(f"{v.name}={x}" for v, x in zip(program.shared, g.shared))
        out.append(s + ");")
    return SourceUnit("\n".join(out) + "\n", f"<printed {program.name}>")


def print_text(program):
    return print_program(program).text
