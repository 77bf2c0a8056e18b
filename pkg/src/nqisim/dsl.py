"""Line-oriented circuit description language.

A ``.nqi`` file declares paths, sinks and atom levels, names the input
mode, and lists element statements; ``repeat`` blocks unroll into stage
chains and a single ``classify`` statement maps exit ports to branch
labels.  Expressions are limited to +, -, *, /, sin, cos, pi and named
parameters.  Example::

    paths l u
    sinks S+ S-
    atom-levels m+ m- g
    input l +
    repeat N {
      bs u l t=sin(pi/(2*N)) r=cos(pi/(2*N))
      atom u
      ...
    }
    classify l=success u=failure sinks=absorbed

The compiler substitutes parameter bindings, checks beam-splitter
unitarity after substitution, unrolls repeat blocks, and allocates a
fresh sink pair per unrolled atom statement.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence, Union

import numpy as np

from .elements import (
    AtomInteraction,
    BeamSplitter,
    Element,
    Mirror,
    PhaseShift,
    PolRotator,
    Relabel,
    POL_FLIP,
    sink_pair_labels,
)
from .state import BasisLayout, JointState, PhotonMode, make_layout
from .protocols import (
    AtomSpec,
    POL_STATES,
    ProtocolOutcome,
    assemble_outcome,
    make_classifier,
    run_sequence,
)
from .tolerances import NORM_TOL, PROB_TOL


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.token = token
        super().__init__(f"line {line}, column {column}: {message}")


class CompileError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


Expr = Union[Num, Name, Call, BinOp, Neg]

_FUNCTIONS = {"sin": math.sin, "cos": math.cos}

_EXPR_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()+\-*/,]))"
)


class _ExprParser:
    """Recursive-descent parser for the tiny arithmetic language."""

    def __init__(self, text: str, line: int, col_offset: int):
        self.text = text
        self.line = line
        self.col_offset = col_offset
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _EXPR_TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:]
                if rest.strip() == "":
                    break
                bad = pos + len(rest) - len(rest.lstrip())
                raise ParseError(
                    line,
                    col_offset + bad + 1,
                    f"unexpected character in expression: {text[bad]!r}",
                    text[bad],
                )
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _error(self, message: str) -> ParseError:
        if self.i < len(self.tokens):
            _, tok, start = self.tokens[self.i]
            return ParseError(self.line, self.col_offset + start + 1, message, tok)
        return ParseError(self.line, self.col_offset + len(self.text), message)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def accept(self, kind: str, value: str | None = None):
        tok = self.peek()
        if tok and tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return tok
        return None

    def parse(self) -> Expr:
        expr = self.sum()
        if self.peek() is not None:
            raise self._error("trailing tokens in expression")
        return expr

    def sum(self) -> Expr:
        expr = self.term()
        while True:
            if self.accept("op", "+"):
                expr = BinOp("+", expr, self.term())
            elif self.accept("op", "-"):
                expr = BinOp("-", expr, self.term())
            else:
                return expr

    def term(self) -> Expr:
        expr = self.factor()
        while True:
            if self.accept("op", "*"):
                expr = BinOp("*", expr, self.factor())
            elif self.accept("op", "/"):
                expr = BinOp("/", expr, self.factor())
            else:
                return expr

    def factor(self) -> Expr:
        if self.accept("op", "-"):
            return Neg(self.factor())
        tok = self.accept("num")
        if tok:
            return Num(float(tok[1]))
        tok = self.accept("name")
        if tok:
            name = tok[1]
            if name in _FUNCTIONS:
                if not self.accept("op", "("):
                    raise self._error(f"{name} needs an argument in parentheses")
                arg = self.sum()
                if not self.accept("op", ")"):
                    raise self._error("unbalanced parentheses")
                return Call(name, arg)
            return Name(name)
        if self.accept("op", "("):
            expr = self.sum()
            if not self.accept("op", ")"):
                raise self._error("unbalanced parentheses")
            return expr
        raise self._error("expected a number, name, or parenthesized expression")


def parse_expr(text: str, line: int = 1, col_offset: int = 0) -> Expr:
    return _ExprParser(text, line, col_offset).parse()


def eval_expr(expr: Expr, env: dict[str, float], line: int) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Name):
        if expr.ident == "pi":
            return math.pi
        if expr.ident not in env:
            raise CompileError(line, f"unbound parameter: {expr.ident}")
        return float(env[expr.ident])
    if isinstance(expr, Call):
        return _FUNCTIONS[expr.fn](eval_expr(expr.arg, env, line))
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, env, line)
    if isinstance(expr, BinOp):
        left = eval_expr(expr.left, env, line)
        right = eval_expr(expr.right, env, line)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0:
                raise CompileError(line, "division by zero in expression")
            return left / right
    raise CompileError(line, f"unknown expression node: {expr!r}")


def print_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return f"{expr.value:g}" if expr.value == int(expr.value) else repr(expr.value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Call):
        return f"{expr.fn}({print_expr(expr.arg)})"
    if isinstance(expr, Neg):
        return f"(-{print_expr(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({print_expr(expr.left)}{expr.op}{print_expr(expr.right)})"
    raise ValueError(f"unknown expression node: {expr!r}")


# --------------------------------------------------------------------------
# Statements and AST


@dataclass(frozen=True)
class BsStmt:
    line: int
    path_a: str
    path_b: str
    t_expr: Expr
    r_expr: Expr


@dataclass(frozen=True)
class MirrorStmt:
    line: int
    path: str


@dataclass(frozen=True)
class RotStmt:
    line: int
    path: str
    entries: tuple[Expr, Expr, Expr, Expr] | None  # None means flip


@dataclass(frozen=True)
class PhaseStmt:
    line: int
    path: str
    phi_expr: Expr


@dataclass(frozen=True)
class AtomStmt:
    line: int
    path: str
    transparent: tuple[str, ...] = ()


@dataclass(frozen=True)
class RelabelStmt:
    line: int
    src: str
    dst: str


@dataclass(frozen=True)
class RepeatStmt:
    line: int
    count_expr: Expr
    body: tuple["Stmt", ...]


Stmt = Union[BsStmt, MirrorStmt, RotStmt, PhaseStmt, AtomStmt, RelabelStmt, RepeatStmt]


@dataclass(frozen=True)
class LetBinding:
    line: int
    name: str
    expr: Expr


@dataclass(frozen=True)
class CircuitAst:
    paths: tuple[str, ...]
    sinks: tuple[str, str]
    atom_levels: tuple[str, ...]
    input_path: str
    input_pol: str
    lets: tuple[LetBinding, ...]
    statements: tuple[Stmt, ...]
    classifier: tuple[tuple[str, str], ...]  # (port-or-"sinks", label) pairs


_LABEL = r"[A-Za-z_][A-Za-z0-9_+\-#.]*|[+\-]"
_LABEL_RE = re.compile(f"^(?:{_LABEL})$")

_POLS = ("+", "-", "x", "y")


class _Parser:
    def __init__(self, source: str):
        self.lines = source.splitlines()
        self.i = 0
        self.paths: list[str] = []
        self.sinks: list[str] = []
        self.levels: list[str] = []
        self.input_decl: tuple[str, str] | None = None
        self.lets: list[LetBinding] = []
        self.classifier: list[tuple[str, str]] | None = None
        self.let_names: set[str] = set()

    def error(self, lineno: int, message: str, token: str = "") -> ParseError:
        line = self.lines[lineno - 1] if 0 < lineno <= len(self.lines) else ""
        col = (line.find(token) + 1) if token and token in line else 1
        return ParseError(lineno, max(col, 1), message, token)

    def _check_path(self, lineno: int, label: str) -> str:
        if label not in self.paths:
            raise self.error(lineno, f"undeclared path: {label}", label)
        return label

    def parse(self) -> CircuitAst:
        statements = self._parse_block(top_level=True)
        if not self.paths:
            raise ParseError(1, 1, "no declarations")
        if self.input_decl is None:
            raise ParseError(1, 1, "missing input statement")
        if self.classifier is None:
            raise ParseError(len(self.lines) or 1, 1, "missing classify statement")
        return CircuitAst(
            paths=tuple(self.paths),
            sinks=tuple(self.sinks),
            atom_levels=tuple(self.levels),
            input_path=self.input_decl[0],
            input_pol=self.input_decl[1],
            lets=tuple(self.lets),
            statements=tuple(statements),
            classifier=tuple(self.classifier),
        )

    def _parse_block(self, top_level: bool) -> list[Stmt]:
        statements: list[Stmt] = []
        while self.i < len(self.lines):
            lineno = self.i + 1
            raw = self.lines[self.i]
            self.i += 1
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line == "}":
                if top_level:
                    raise self.error(lineno, "unbalanced '}'", "}")
                return statements
            stmt = self._parse_statement(lineno, line, top_level)
            if stmt is not None:
                statements.append(stmt)
        if not top_level:
            raise ParseError(len(self.lines), 1, "unclosed repeat block")
        return statements

    def _parse_statement(self, lineno: int, line: str, top_level: bool) -> Stmt | None:
        words = line.split()
        keyword = words[0]

        if keyword in ("paths", "sinks", "atom-levels", "input", "classify") and not top_level:
            raise self.error(lineno, f"{keyword} is not allowed inside repeat", keyword)

        if keyword == "paths":
            self._declare(lineno, words[1:], self.paths, "path")
            return None
        if keyword == "sinks":
            if len(words) != 3:
                raise self.error(lineno, "sinks needs exactly two labels", keyword)
            self._declare(lineno, words[1:], self.sinks, "sink")
            return None
        if keyword == "atom-levels":
            self._declare(lineno, words[1:], self.levels, "atom level")
            return None
        if keyword == "input":
            if len(words) != 3:
                raise self.error(lineno, "input needs a path and a polarization", keyword)
            path = self._check_path(lineno, words[1])
            if words[2] not in _POLS:
                raise self.error(lineno, f"unknown polarization: {words[2]}", words[2])
            if self.input_decl is not None:
                raise self.error(lineno, "duplicate input statement", keyword)
            self.input_decl = (path, words[2])
            return None
        if keyword == "let":
            m = re.match(r"^let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$", line)
            if m is None:
                raise self.error(lineno, "malformed let binding", keyword)
            name = m.group(1)
            if name in self.let_names:
                raise self.error(lineno, f"duplicate let binding: {name}", name)
            self.let_names.add(name)
            expr = parse_expr(m.group(2), lineno, line.find(m.group(2)))
            self.lets.append(LetBinding(lineno, name, expr))
            return None
        if keyword == "bs":
            m = re.match(
                rf"^bs\s+({_LABEL})\s+({_LABEL})\s+t=(\S+)\s+r=(\S+)$", line
            )
            if m is None:
                raise self.error(lineno, "malformed bs statement (bs A B t=... r=...)", keyword)
            a = self._check_path(lineno, m.group(1))
            b = self._check_path(lineno, m.group(2))
            t_expr = parse_expr(m.group(3), lineno, m.start(3))
            r_expr = parse_expr(m.group(4), lineno, m.start(4))
            return BsStmt(lineno, a, b, t_expr, r_expr)
        if keyword == "mirror":
            if len(words) != 2:
                raise self.error(lineno, "mirror needs one path", keyword)
            return MirrorStmt(lineno, self._check_path(lineno, words[1]))
        if keyword == "rot":
            m = re.match(rf"^rot\s+({_LABEL})\s+(flip|matrix\((.*)\))$", line)
            if m is None:
                raise self.error(lineno, "malformed rot statement (rot PATH flip|matrix(...))", keyword)
            path = self._check_path(lineno, m.group(1))
            if m.group(2) == "flip":
                return RotStmt(lineno, path, None)
            parts = self._split_args(lineno, m.group(3))
            if len(parts) != 4:
                raise self.error(lineno, "matrix(...) needs four entries", "matrix")
            entries = tuple(parse_expr(p, lineno, line.find(p)) for p in parts)
            return RotStmt(lineno, path, entries)
        if keyword == "phase":
            if len(words) < 3:
                raise self.error(lineno, "phase needs a path and an expression", keyword)
            path = self._check_path(lineno, words[1])
            expr_text = line.split(None, 2)[2]
            return PhaseStmt(lineno, path, parse_expr(expr_text, lineno, line.find(expr_text)))
        if keyword == "atom":
            m = re.match(rf"^atom\s+({_LABEL})(?:\s+transparent:\s*(.+))?$", line)
            if m is None:
                raise self.error(lineno, "malformed atom statement", keyword)
            path = self._check_path(lineno, m.group(1))
            transparent: tuple[str, ...] = ()
            if m.group(2):
                levels = tuple(m.group(2).split())
                for lev in levels:
                    if lev not in self.levels:
                        raise self.error(lineno, f"undeclared atom level: {lev}", lev)
                transparent = levels
            return AtomStmt(lineno, path, transparent)
        if keyword == "relabel":
            m = re.match(rf"^relabel\s+({_LABEL})\s*->\s*({_LABEL})$", line)
            if m is None:
                raise self.error(lineno, "malformed relabel statement (relabel A -> B)", keyword)
            return RelabelStmt(
                lineno,
                self._check_path(lineno, m.group(1)),
                self._check_path(lineno, m.group(2)),
            )
        if keyword == "repeat":
            m = re.match(r"^repeat\s+(.+?)\s*\{$", line)
            if m is None:
                raise self.error(lineno, "malformed repeat statement (repeat N {)", keyword)
            count = parse_expr(m.group(1), lineno, line.find(m.group(1)))
            body = self._parse_block(top_level=False)
            return RepeatStmt(lineno, count, tuple(body))
        if keyword == "classify":
            if self.classifier is not None:
                raise self.error(lineno, "duplicate classify statement", keyword)
            pairs = []
            seen_ports = set()
            for word in words[1:]:
                m = re.match(rf"^({_LABEL}|sinks)=([A-Za-z_][A-Za-z0-9_]*)$", word)
                if m is None:
                    raise self.error(lineno, f"malformed classify entry: {word}", word)
                port = m.group(1)
                if port != "sinks":
                    self._check_path(lineno, port)
                if port in seen_ports:
                    raise self.error(lineno, f"duplicate classify port: {port}", port)
                seen_ports.add(port)
                pairs.append((port, m.group(2)))
            if "sinks" not in seen_ports:
                raise self.error(lineno, "classify must assign sinks=...", keyword)
            missing = [p for p in self.paths if p not in seen_ports]
            if missing:
                raise self.error(lineno, f"classify misses paths: {', '.join(missing)}", keyword)
            self.classifier = pairs
            return None

        raise self.error(lineno, f"unknown keyword: {keyword}", keyword)

    def _split_args(self, lineno: int, text: str) -> list[str]:
        parts, depth, cur = [], 0, ""
        for ch in text:
            if ch == "," and depth == 0:
                parts.append(cur.strip())
                cur = ""
                continue
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise self.error(lineno, "unbalanced parentheses in matrix(...)", ")")
            cur += ch
        parts.append(cur.strip())
        return [p for p in parts if p]

    def _declare(self, lineno: int, labels: Sequence[str], target: list[str], kind: str):
        if not labels:
            raise self.error(lineno, f"empty {kind} declaration")
        for label in labels:
            if not _LABEL_RE.match(label):
                raise self.error(lineno, f"invalid {kind} label: {label}", label)
            if label in self.paths or label in self.sinks or label in self.levels:
                raise self.error(lineno, f"duplicate label: {label}", label)
            target.append(label)


def parse(source: str) -> CircuitAst:
    """Parse a circuit description; raises ParseError with a location."""
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# Canonical printer


def _print_stmt(stmt: Stmt, indent: str, out: list[str]) -> None:
    if isinstance(stmt, BsStmt):
        out.append(
            f"{indent}bs {stmt.path_a} {stmt.path_b} "
            f"t={print_expr(stmt.t_expr)} r={print_expr(stmt.r_expr)}"
        )
    elif isinstance(stmt, MirrorStmt):
        out.append(f"{indent}mirror {stmt.path}")
    elif isinstance(stmt, RotStmt):
        if stmt.entries is None:
            out.append(f"{indent}rot {stmt.path} flip")
        else:
            entries = ", ".join(print_expr(e) for e in stmt.entries)
            out.append(f"{indent}rot {stmt.path} matrix({entries})")
    elif isinstance(stmt, PhaseStmt):
        out.append(f"{indent}phase {stmt.path} {print_expr(stmt.phi_expr)}")
    elif isinstance(stmt, AtomStmt):
        if stmt.transparent:
            out.append(f"{indent}atom {stmt.path} transparent: {' '.join(stmt.transparent)}")
        else:
            out.append(f"{indent}atom {stmt.path}")
    elif isinstance(stmt, RelabelStmt):
        out.append(f"{indent}relabel {stmt.src} -> {stmt.dst}")
    elif isinstance(stmt, RepeatStmt):
        out.append(f"{indent}repeat {print_expr(stmt.count_expr)} {{")
        for inner in stmt.body:
            _print_stmt(inner, indent + "  ", out)
        out.append(f"{indent}}}")
    else:
        raise ValueError(f"unknown statement: {stmt!r}")


def print_circuit(ast: CircuitAst) -> str:
    """Render an AST back to canonical source; parse(print_circuit(x)) == x
    up to statement line numbers."""
    out = [
        f"paths {' '.join(ast.paths)}",
        f"sinks {' '.join(ast.sinks)}",
        f"atom-levels {' '.join(ast.atom_levels)}",
        f"input {ast.input_path} {ast.input_pol}",
    ]
    for let in ast.lets:
        out.append(f"let {let.name} = {print_expr(let.expr)}")
    for stmt in ast.statements:
        _print_stmt(stmt, "", out)
    out.append("classify " + " ".join(f"{p}={l}" for p, l in ast.classifier))
    return "\n".join(out) + "\n"


def strip_positions(ast: CircuitAst) -> CircuitAst:
    """AST with all line numbers zeroed, for position-independent comparison."""

    def strip(stmt: Stmt) -> Stmt:
        if isinstance(stmt, RepeatStmt):
            return RepeatStmt(0, stmt.count_expr, tuple(strip(s) for s in stmt.body))
        return type(stmt)(0, *[getattr(stmt, f) for f in stmt.__dataclass_fields__ if f != "line"])

    return CircuitAst(
        paths=ast.paths,
        sinks=ast.sinks,
        atom_levels=ast.atom_levels,
        input_path=ast.input_path,
        input_pol=ast.input_pol,
        lets=tuple(LetBinding(0, l.name, l.expr) for l in ast.lets),
        statements=tuple(strip(s) for s in ast.statements),
        classifier=ast.classifier,
    )


# --------------------------------------------------------------------------
# Compiler


@dataclass(frozen=True)
class CompiledCircuit:
    layout: BasisLayout
    elements: tuple[Element, ...]
    path_labels: dict[str, str]
    sink_label: str
    input_path: str
    input_pol: str

    def classifier(self):
        return make_classifier(self.path_labels, self.sink_label)


def compile_circuit(ast: CircuitAst, bindings: dict[str, float] | None = None) -> CompiledCircuit:
    """Substitute bindings, unroll repeats, and validate the element sequence."""
    env: dict[str, float] = dict(bindings or {})
    for let in ast.lets:
        env[let.name] = eval_expr(let.expr, env, let.line)

    base_plus, base_minus = ast.sinks
    sinks: list[str] = []
    elements: list[Element] = []
    event = 0

    def emit(stmts: Iterable[Stmt]) -> None:
        nonlocal event
        for stmt in stmts:
            if isinstance(stmt, BsStmt):
                t = eval_expr(stmt.t_expr, env, stmt.line)
                r = eval_expr(stmt.r_expr, env, stmt.line)
                if abs(t * t + r * r - 1.0) > NORM_TOL or t < 0 or r < 0:
                    raise CompileError(
                        stmt.line,
                        f"beam splitter is not unitary after substitution: t={t!r} r={r!r}",
                    )
                elements.append(BeamSplitter(t, r, stmt.path_a, stmt.path_b))
            elif isinstance(stmt, MirrorStmt):
                elements.append(Mirror(stmt.path))
            elif isinstance(stmt, RotStmt):
                if stmt.entries is None:
                    u = POL_FLIP
                else:
                    vals = [eval_expr(e, env, stmt.line) for e in stmt.entries]
                    u = np.array(vals, dtype=complex).reshape(2, 2)
                try:
                    elements.append(PolRotator(stmt.path, u))
                except ValueError as exc:
                    raise CompileError(stmt.line, str(exc)) from None
            elif isinstance(stmt, PhaseStmt):
                elements.append(PhaseShift(stmt.path, eval_expr(stmt.phi_expr, env, stmt.line)))
            elif isinstance(stmt, AtomStmt):
                sp, sm = sink_pair_labels(event, base_plus, base_minus)
                event += 1
                sinks.extend([sp, sm])
                elements.append(
                    AtomInteraction(
                        stmt.path,
                        frozenset(stmt.transparent),
                        sink_plus=sp,
                        sink_minus=sm,
                    )
                )
            elif isinstance(stmt, RelabelStmt):
                elements.append(Relabel(stmt.src, stmt.dst))
            elif isinstance(stmt, RepeatStmt):
                count = eval_expr(stmt.count_expr, env, stmt.line)
                if abs(count - round(count)) > 1e-9 or round(count) < 1:
                    raise CompileError(
                        stmt.line, f"repeat count must be a positive integer, got {count!r}"
                    )
                for _ in range(int(round(count))):
                    emit(stmt.body)
            else:
                raise CompileError(getattr(stmt, "line", 0), f"unknown statement: {stmt!r}")

    emit(ast.statements)

    if not sinks:
        sinks = [base_plus, base_minus]
    layout = make_layout(ast.paths, sinks, ast.atom_levels)
    path_labels = {p: l for p, l in ast.classifier if p != "sinks"}
    sink_label = dict(ast.classifier)["sinks"]
    return CompiledCircuit(
        layout=layout,
        elements=tuple(elements),
        path_labels=path_labels,
        sink_label=sink_label,
        input_path=ast.input_path,
        input_pol=ast.input_pol,
    )


def initial_state(circuit: CompiledCircuit, atom: AtomSpec) -> JointState:
    layout = circuit.layout
    amps = np.zeros(layout.dim, dtype=complex)
    mat = amps.reshape(layout.n_photon_modes, layout.n_levels)
    pol = POL_STATES[circuit.input_pol]
    atom_vec = atom.level_vector(layout)
    for i, pol_label in enumerate(layout.polarizations):
        mat[layout.photon_index((circuit.input_path, pol_label))] = pol[i] * atom_vec
    return JointState(layout, amps)


def run_compiled(
    circuit: CompiledCircuit, atom: AtomSpec, prob_tol: float = PROB_TOL
) -> ProtocolOutcome:
    """Execute a compiled circuit for one atom specification."""
    initial = initial_state(circuit, atom)
    final = run_sequence(
        circuit.layout,
        circuit.elements,
        initial,
        atom_present=atom.present,
        mask_override=atom.transparency_mask if atom.present else None,
    )
    atom_vec = atom.level_vector(circuit.layout)
    atom_init = atom_vec / np.linalg.norm(atom_vec)
    return assemble_outcome(final, circuit.classifier(), atom_init, prob_tol=prob_tol)


def load_golden(name: str) -> str:
    """Source text of a bundled circuit (mz, fp, or direct)."""
    return (
        resources.files("nqisim").joinpath("circuits").joinpath(f"{name}.nqi").read_text()
    )
