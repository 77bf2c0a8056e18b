"""Circuit language: parser, canonical printer, compiler, golden circuits."""

import math
import random

import numpy as np
import pytest

from nqisim import dsl
from nqisim.dsl import (
    CompileError,
    ParseError,
    compile_circuit,
    load_golden,
    parse,
    parse_expr,
    print_circuit,
    run_compiled,
    strip_positions,
)
from nqisim.elements import AtomInteraction, BeamSplitter, Mirror, Relabel
from nqisim.protocols import (
    AtomSpec,
    build_mz,
    haar_random_atoms,
    mz_closed_form,
    run_fabry_perot,
    run_mz_chain,
)

MINIMAL = """\
paths a
sinks S+ S-
atom-levels m+ m- g
input a x
atom a
classify a=failure sinks=absorbed
"""


class TestExpressions:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2", 2.0),
            ("1+2*3", 7.0),
            ("(1+2)*3", 9.0),
            ("-4/2", -2.0),
            ("sin(pi/2)", 1.0),
            ("cos(0)", 1.0),
            ("2-3-4", -5.0),
            ("1e-3", 0.001),
        ],
    )
    def test_arithmetic(self, text, expected):
        expr = parse_expr(text)
        assert dsl.eval_expr(expr, {}, 1) == pytest.approx(expected)

    def test_parameters(self):
        expr = parse_expr("sin(pi/(2*N))")
        assert dsl.eval_expr(expr, {"N": 2}, 1) == pytest.approx(math.sin(math.pi / 4))

    def test_unbound_parameter_named(self):
        with pytest.raises(CompileError, match="unbound parameter: Q"):
            dsl.eval_expr(parse_expr("Q+1"), {}, 7)

    def test_bad_tokens_located(self):
        with pytest.raises(ParseError) as exc:
            parse_expr("1 + $", line=3, col_offset=10)
        assert exc.value.line == 3
        assert exc.value.column == 15

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError, match="unbalanced"):
            parse_expr("(1+2")

    def test_print_reparses_to_same_tree(self):
        for text in ["1+2*3", "-(a+b)/c", "sin(pi/(2*N))-cos(x)*2"]:
            expr = parse_expr(text)
            assert parse_expr(dsl.print_expr(expr)) == expr


class TestParser:
    def test_minimal_circuit(self):
        ast = parse(MINIMAL)
        assert ast.paths == ("a",)
        assert ast.sinks == ("S+", "S-")
        assert ast.input_path == "a"
        assert ast.input_pol == "x"
        assert ast.classifier == (("a", "failure"), ("sinks", "absorbed"))

    def test_comments_and_blank_lines_ignored(self):
        src = MINIMAL.replace("atom a", "# comment\n\natom a  # trailing")
        assert strip_positions(parse(src)) == strip_positions(parse(MINIMAL))

    def test_undeclared_path_is_located(self):
        src = MINIMAL.replace("atom a", "atom b")
        with pytest.raises(ParseError) as exc:
            parse(src)
        assert "undeclared path: b" in exc.value.message
        assert exc.value.line == 5
        lines = src.splitlines()
        assert 1 <= exc.value.line <= len(lines)
        assert 1 <= exc.value.column <= len(lines[exc.value.line - 1]) + 1

    def test_empty_source(self):
        with pytest.raises(ParseError, match="no declarations"):
            parse("")

    def test_missing_classify(self):
        src = "\n".join(MINIMAL.splitlines()[:-1]) + "\n"
        with pytest.raises(ParseError, match="missing classify"):
            parse(src)

    def test_missing_input(self):
        src = MINIMAL.replace("input a x\n", "")
        with pytest.raises(ParseError, match="missing input"):
            parse(src)

    def test_classify_must_cover_paths(self):
        src = MINIMAL.replace("paths a", "paths a b").replace(
            "classify a=failure sinks=absorbed", "classify a=failure sinks=absorbed"
        )
        with pytest.raises(ParseError, match="classify misses paths: b"):
            parse(src)

    def test_classify_requires_sinks(self):
        src = MINIMAL.replace("classify a=failure sinks=absorbed", "classify a=failure")
        with pytest.raises(ParseError, match="must assign sinks"):
            parse(src)

    def test_unclosed_repeat(self):
        src = MINIMAL + "repeat 2 {\natom a\n"
        with pytest.raises(ParseError, match="unclosed repeat"):
            parse(src)

    def test_unbalanced_close(self):
        src = MINIMAL.replace("atom a", "}")
        with pytest.raises(ParseError, match="unbalanced"):
            parse(src)

    def test_duplicate_labels(self):
        src = MINIMAL.replace("paths a", "paths a a")
        with pytest.raises(ParseError, match="duplicate label: a"):
            parse(src)

    def test_declarations_not_allowed_in_repeat(self):
        src = MINIMAL.replace("atom a", "repeat 2 {\npaths b\n}")
        with pytest.raises(ParseError, match="not allowed inside repeat"):
            parse(src)

    def test_unknown_keyword_located(self):
        src = MINIMAL.replace("atom a", "detector a")
        with pytest.raises(ParseError) as exc:
            parse(src)
        assert exc.value.token == "detector"
        assert exc.value.line == 5

    def test_malformed_bs(self):
        src = MINIMAL.replace("atom a", "bs a t=1")
        with pytest.raises(ParseError, match="malformed bs"):
            parse(src)

    def test_bad_polarization(self):
        src = MINIMAL.replace("input a x", "input a z")
        with pytest.raises(ParseError, match="unknown polarization: z"):
            parse(src)


class TestCompiler:
    def test_compiled_mz_matches_library_builder(self):
        # [DERIVED] dual implementation: the golden circuit compiles to the
        # exact element list the library constructs by hand.
        ast = parse(load_golden("mz"))
        for n in (1, 2, 5):
            circuit = compile_circuit(ast, {"N": n})
            layout, elements, _ = build_mz(n)
            assert circuit.layout == layout
            assert list(circuit.elements) == list(elements)

    def test_fresh_sink_pairs_per_atom_statement(self):
        src = MINIMAL.replace("atom a", "repeat 3 {\natom a\n}")
        circuit = compile_circuit(parse(src))
        atoms = [el for el in circuit.elements if isinstance(el, AtomInteraction)]
        assert [a.sink_plus for a in atoms] == ["S+", "S+#2", "S+#3"]
        assert len(set(circuit.layout.sinks)) == 6

    def test_missing_binding_names_parameter(self):
        ast = parse(load_golden("mz"))
        with pytest.raises(CompileError, match="unbound parameter: N"):
            compile_circuit(ast)

    def test_non_unitary_bs_cites_line(self):
        src = (
            MINIMAL.replace("paths a", "paths a a2")
            .replace("atom a", "bs a a2 t=T r=0.9")
            .replace("classify a=failure", "classify a=failure a2=failure")
        )
        with pytest.raises(CompileError, match="not unitary") as exc:
            compile_circuit(parse(src), {"T": 0.9})
        assert exc.value.line == 5

    def test_repeat_count_must_be_positive_integer(self):
        src = MINIMAL.replace("atom a", "repeat K {\natom a\n}")
        ast = parse(src)
        with pytest.raises(CompileError, match="positive integer"):
            compile_circuit(ast, {"K": 2.5})
        with pytest.raises(CompileError, match="positive integer"):
            compile_circuit(ast, {"K": 0})

    def test_non_unitary_rot_cites_line(self):
        src = MINIMAL.replace("atom a", "rot a matrix(1,1,0,1)")
        with pytest.raises(CompileError, match="not unitary") as exc:
            compile_circuit(parse(src))
        assert exc.value.line == 5

    def test_division_by_zero(self):
        src = MINIMAL.replace("atom a", "phase a 1/K")
        with pytest.raises(CompileError, match="division by zero"):
            compile_circuit(parse(src), {"K": 0.0})


class TestGoldens:
    def test_goldens_parse_and_round_trip(self):
        for name in ("mz", "fp", "direct"):
            ast = parse(load_golden(name))
            again = parse(print_circuit(ast))
            assert strip_positions(again) == strip_positions(ast)
            # Printing is idempotent once canonical.
            assert print_circuit(again) == print_circuit(ast)

    @pytest.mark.parametrize("n", [1, 2, 4, 9])
    def test_compiled_mz_reproduces_runner(self, n):
        circuit = compile_circuit(parse(load_golden("mz")), {"N": n})
        for atom in haar_random_atoms(3, seed=n):
            out = run_compiled(circuit, atom)
            ref = run_mz_chain(n, atom)
            assert out.success_prob == pytest.approx(ref.success_prob, abs=1e-12)
            assert out.success_prob == pytest.approx(mz_closed_form(n), abs=1e-10)
            assert out.absorbed_prob == pytest.approx(ref.absorbed_prob, abs=1e-12)

    def test_compiled_fp_reproduces_runner(self):
        ast = parse(load_golden("fp"))
        atom = AtomSpec(0.6, 0.8)
        r = 0.9
        t = math.sqrt(1 - r * r)
        ref = run_fabry_perot(r, t, r, t, atom, eps=1e-22)
        circuit = compile_circuit(
            ast, {"T": t, "R": r, "TP": t, "RP": r, "K": ref.details["round_trips"]}
        )
        out = run_compiled(circuit, atom, prob_tol=1e-9)
        assert out.success_prob == pytest.approx(ref.success_prob, abs=1e-10)
        assert out.failure_prob == pytest.approx(ref.failure_prob, abs=1e-10)
        assert out.success_fidelity == pytest.approx(1.0, abs=1e-10)

    def test_compiled_direct_amplitudes(self):
        circuit = compile_circuit(parse(load_golden("direct")))
        out = run_compiled(circuit, AtomSpec(0.6, 0.8))
        assert out.absorbed_prob == pytest.approx(0.5, abs=1e-12)
        assert out.failure_prob == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# Fuzzed round-trip


def _random_expr(rng: random.Random, names: list[str], depth: int = 0) -> str:
    if depth >= 3 or rng.random() < 0.35:
        choice = rng.random()
        if choice < 0.4:
            return str(rng.randint(0, 9))
        if choice < 0.6:
            return f"{rng.uniform(0, 2):.3f}"
        if choice < 0.7 or not names:
            return "pi"
        return rng.choice(names)
    kind = rng.random()
    a = _random_expr(rng, names, depth + 1)
    b = _random_expr(rng, names, depth + 1)
    if kind < 0.2:
        return f"sin({a})"
    if kind < 0.3:
        return f"cos({a})"
    if kind < 0.45:
        return f"({a}+{b})"
    if kind < 0.6:
        return f"({a}-{b})"
    if kind < 0.8:
        return f"({a}*{b})"
    if kind < 0.9:
        return f"({a}/{b})"
    return f"(-{a})"


def _random_source(rng: random.Random) -> str:
    n_paths = rng.randint(1, 4)
    paths = [f"p{i}" for i in range(n_paths)]
    levels = ["m+", "m-", "g"]
    names = [f"v{i}" for i in range(rng.randint(0, 2))]
    lines = [
        "paths " + " ".join(paths),
        "sinks S+ S-",
        "atom-levels " + " ".join(levels),
        f"input {rng.choice(paths)} {rng.choice(['+', '-', 'x', 'y'])}",
    ]
    for name in names:
        lines.append(f"let {name} = {_random_expr(rng, [])}")

    def statement(depth: int) -> list[str]:
        kind = rng.randint(0, 7 if depth == 0 else 6)
        p = rng.choice(paths)
        if kind == 0:
            return [f"mirror {p}"]
        if kind == 1:
            return [f"phase {p} {_random_expr(rng, names)}"]
        if kind == 2:
            if rng.random() < 0.5:
                return [f"rot {p} flip"]
            return [f"rot {p} matrix(1, 0, 0, 1)"]
        if kind == 3:
            if rng.random() < 0.5:
                return [f"atom {p}"]
            return [f"atom {p} transparent: {rng.choice(levels)}"]
        if kind == 4 and n_paths > 1:
            q = rng.choice([x for x in paths if x != p])
            return [f"bs {p} {q} t={_random_expr(rng, names)} r={_random_expr(rng, names)}"]
        if kind == 5 and n_paths > 1:
            q = rng.choice([x for x in paths if x != p])
            return [f"relabel {p} -> {q}"]
        if kind == 7:
            body = [
                line
                for _ in range(rng.randint(1, 3))
                for line in statement(depth + 1)
            ]
            return [f"repeat {_random_expr(rng, names)} {{"] + body + ["}"]
        return [f"mirror {p}"]

    for _ in range(rng.randint(1, 6)):
        lines.extend(statement(0))
    lines.append(
        "classify "
        + " ".join(f"{p}={rng.choice(['success', 'failure', 'other'])}" for p in paths)
        + " sinks=absorbed"
    )
    return "\n".join(lines) + "\n"


class TestFuzzedRoundTrip:
    def test_100_fuzzed_sources(self):
        rng = random.Random(20260823)
        for _ in range(100):
            src = _random_source(rng)
            ast = parse(src)
            printed = print_circuit(ast)
            again = parse(printed)
            assert strip_positions(again) == strip_positions(ast), src
            assert print_circuit(again) == printed, src
