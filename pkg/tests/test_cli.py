"""Command line interface: output formats, determinism, exit codes."""

import json
import math

import pytest

from nqisim.cli import format_complex, main, parse_complex


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestComplexLiterals:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("0.6", 0.6),
            ("0.6+0.8i", 0.6 + 0.8j),
            ("-0.5i", -0.5j),
            ("1-1i", 1 - 1j),
        ],
    )
    def test_parse(self, text, value):
        assert parse_complex(text) == value

    def test_round_trip(self):
        for z in (0.6 + 0.8j, -1.25j, 3.0, -0.5 - 0.5j):
            assert parse_complex(format_complex(z)) == pytest.approx(z)

    def test_rejects_garbage(self):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError):
            parse_complex("zebra")


class TestMzSweep:
    def test_csv_header_and_values(self, capsys):
        code, out, err = run_cli(capsys, "mz-sweep", "--min", "2", "--max", "3")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("n_stages,closed_form,")
        assert lines[1].startswith("2,0.25,")
        assert lines[2].startswith("3,0.421875,")

    def test_seeded_runs_are_byte_identical(self, capsys):
        args = ("mz-sweep", "--min", "4", "--max", "5", "--atoms", "3", "--seed", "11")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second
        assert first.splitlines()[0] == "# seed=11"

    def test_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "mz-sweep", "--min", "2", "--max", "2", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["rows"][0]["success_prob"] == "0.25"
        assert doc["rows"][0]["fidelity"] == "1"

    def test_bad_range(self, capsys):
        code, _, err = run_cli(capsys, "mz-sweep", "--min", "5", "--max", "2")
        assert code == 2
        assert "min <= max" in err

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        code, out, _ = run_cli(capsys, "mz-sweep", "--min", "2", "--max", "2", "-o", str(target))
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("n_stages,")


class TestFp:
    def test_symmetric_cavity_with_atom(self, capsys):
        code, out, _ = run_cli(
            capsys, "fp", "--r", "0.9", "--alpha", "0.6", "--beta", "0.8"
        )
        assert code == 0
        row = dict(zip(*[line.split(",") for line in out.strip().splitlines()]))
        assert float(row["success_prob"]) == pytest.approx(0.81, abs=1e-10)
        assert float(row["fidelity"]) == pytest.approx(1.0, abs=1e-10)
        assert row["exit_polarization"] == "x"
        assert row["round_trips"] == "1"

    def test_no_atom_transmission(self, capsys):
        code, out, _ = run_cli(capsys, "fp", "--r", "0.7", "--no-atom", "--eps", "1e-22")
        assert code == 0
        row = dict(zip(*[line.split(",") for line in out.strip().splitlines()]))
        assert float(row["transmitted"]) == pytest.approx(1.0, abs=1e-9)
        assert row["alpha"] == ""


class TestDirect:
    def test_amplitude_table(self, capsys):
        code, out, _ = run_cli(
            capsys, "direct", "--alpha", "0.6", "--beta", "0.8"
        )
        assert code == 0
        rows = dict(
            (tuple(line.split(",")[:2]), line.split(",")[2])
            for line in out.strip().splitlines()[1:]
        )
        s = 1 / math.sqrt(2)
        assert parse_complex(rows[("a:+", "m-")]) == pytest.approx(-0.8 * s)
        assert parse_complex(rows[("a:-", "m+")]) == pytest.approx(0.6 * s)
        assert parse_complex(rows[("S+", "g")]) == pytest.approx(-0.6 * s)
        assert parse_complex(rows[("S-", "g")]) == pytest.approx(0.8 * s)

    def test_bad_polarization(self, capsys):
        code, _, err = run_cli(capsys, "direct", "--pol", "q")
        assert code == 2
        assert "unknown polarization" in err


class TestNogoCheck:
    def test_masks_and_seed_header(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "nogo-check", "--stages", "4", "--mask", "none", "--mask", "m+",
            "--atoms", "2", "--seed", "7",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "# seed=7"
        body = [line.split(",") for line in lines[2:]]
        empty_rows = [r for r in body if r[0] == "none"]
        masked_rows = [r for r in body if r[0] == "m+"]
        assert all(r[3] == "yes" for r in empty_rows)
        assert all(r[3] == "no" for r in masked_rows)

    def test_unknown_level_rejected(self, capsys):
        code, _, err = run_cli(capsys, "nogo-check", "--mask", "bogus")
        assert code == 2
        assert "unknown atom levels" in err


class TestRun:
    def test_bundled_circuit_with_binding(self, capsys):
        code, out, _ = run_cli(capsys, "run", "mz", "--bind", "N=4")
        assert code == 0
        row = dict(zip(*[line.split(",") for line in out.strip().splitlines()]))
        assert float(row["success_prob"]) == pytest.approx(0.530790042945, abs=1e-10)

    def test_print_canonical(self, capsys):
        code, out, _ = run_cli(capsys, "run", "mz", "--print")
        assert code == 0
        assert out.startswith("paths l u\n")
        assert "repeat N {" in out

    def test_file_circuit(self, capsys, tmp_path):
        circuit = tmp_path / "tiny.nqi"
        circuit.write_text(
            "paths a\nsinks S+ S-\natom-levels m+ m- g\ninput a +\n"
            "atom a\nclassify a=failure sinks=absorbed\n"
        )
        code, out, _ = run_cli(
            capsys, "run", str(circuit), "--alpha", "0.6", "--beta", "0.8"
        )
        assert code == 0
        row = dict(zip(*[line.split(",") for line in out.strip().splitlines()]))
        assert float(row["absorbed_prob"]) == pytest.approx(0.36, abs=1e-12)

    def test_missing_circuit_file(self, capsys):
        code, _, err = run_cli(capsys, "run", "nope.nqi")
        assert code == 2
        assert "no such circuit" in err

    def test_missing_binding(self, capsys):
        code, _, err = run_cli(capsys, "run", "mz")
        assert code == 2
        assert "unbound parameter: N" in err

    def test_malformed_binding(self, capsys):
        code, _, err = run_cli(capsys, "run", "mz", "--bind", "N")
        assert code == 2
        assert "malformed binding" in err

    def test_parse_error_exit_code(self, capsys, tmp_path):
        bad = tmp_path / "bad.nqi"
        bad.write_text("paths a\nwhat now\n")
        code, _, err = run_cli(capsys, "run", str(bad))
        assert code == 2
        assert "unknown keyword" in err

    def test_conservation_failure_exit_code(self, capsys, monkeypatch):
        import nqisim.cli as cli
        from nqisim.protocols import ConservationError

        def boom(*args, **kwargs):
            raise ConservationError("branch probabilities sum to 0.5, expected 1")

        monkeypatch.setattr(cli, "run_mz_chain", boom)
        code, _, err = run_cli(capsys, "mz-sweep", "--min", "2", "--max", "2")
        assert code == 1
        assert "sum to" in err
