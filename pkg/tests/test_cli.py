"""Tests for the command-line interface."""

import json

import pytest

from subatomic_kernel.__main__ import EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, run
from subatomic_kernel.services.builtin_systems import BUILTIN_DOCUMENTS
from subatomic_kernel.services.derivation_service import render_derivation

DETOUR = """\
(step =
  (form one)
  (step atom.down
    (form (((bot par one) a (one par bot)) ten ((one par bot) a (bot par one))))
    (form (((bot a one) par (one a bot)) ten ((one par bot) a (bot par one))))))
"""


@pytest.fixture
def pi0_file(tmp_path, pi0):
    path = tmp_path / "pi0.sad"
    path.write_text(render_derivation(pi0) + "\n")
    return path


class TestCheckCommand:
    """Tests for the check command."""

    def test_valid_proof(self, pi0_file, capsys):
        assert run(["check", "-s", "samlls.down", str(pi0_file)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "valid proof in samlls.down: one -> ((bot a one) par (one a bot))"

    def test_json(self, pi0_file, capsys):
        assert run(["check", "-s", "samlls.down", "--json", str(pi0_file)]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["length_plus"] == 2

    def test_invalid_step(self, tmp_path, capsys):
        path = tmp_path / "bad.sad"
        path.write_text("(step ten.down (form ((bot par one) a (one par bot))) (form ((bot a one) par (one a bot))))\n")
        assert run(["check", "-s", "samlls.down", str(path)]) == EXIT_NEGATIVE
        assert "ten.down" in capsys.readouterr().err

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.sad"
        path.write_text("(form (one par bot)\n")
        assert run(["check", "-s", "samlls.down", str(path)]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["check", "-s", "samlls.down", str(tmp_path / "absent.sad")]) == EXIT_USAGE

    def test_system_file(self, tmp_path, pi0_file):
        sas = tmp_path / "mll.sas"
        sas.write_text(BUILTIN_DOCUMENTS["samlls.down"])
        assert run(["check", "-s", str(sas), str(pi0_file)]) == EXIT_OK


class TestUsage:
    """Tests for argument handling."""

    def test_unknown_command(self):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_help(self):
        assert run(["--help"]) == EXIT_OK

    def test_bench_needs_source(self, capsys):
        assert run(["bench"]) == EXIT_USAGE
        assert "--system or --corpus" in capsys.readouterr().err

    def test_systems(self, capsys):
        assert run(["systems"]) == EXIT_OK
        assert "samlls.down" in capsys.readouterr().out.split()

    def test_show_system(self, capsys):
        assert run(["systems", "saks.down"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("system saks.down\n")


class TestLintCommand:
    """Tests for the lint command."""

    def test_pass(self, capsys):
        assert run(["lint", "-s", "saks.down"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "saks.down: conditions 1-5: pass"

    def test_fail(self, capsys):
        assert run(["lint", "-s", "saks"]) == EXIT_NEGATIVE
        assert "condition 2: FAIL" in capsys.readouterr().out

    def test_inline_document(self, capsys):
        doc = BUILTIN_DOCUMENTS["sabvu.down"].replace("assign par o o = one\n", "")
        assert run(["lint", "-s", doc, "--json"]) == EXIT_NEGATIVE
        assert json.loads(capsys.readouterr().out)["splittable"] is False


class TestSplittingCommands:
    """Tests for split, ctxred and cut-elim."""

    def test_split(self, pi0_file, capsys):
        assert run(["split", "-s", "samlls.down", "--at", "l", str(pi0_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("Q1 = ")
        assert "; psi.sad" in out

    def test_split_out_dir(self, pi0_file, tmp_path):
        out_dir = tmp_path / "parts"
        assert run(["split", "-s", "samlls.down", "--at", "l", "-o", str(out_dir), str(pi0_file)]) == EXIT_OK
        assert sorted(p.name for p in out_dir.iterdir()) == ["phi1.sad", "phi2.sad", "psi.sad"]

    def test_split_trace_on_stderr(self, pi0_file, capsys):
        assert run(["split", "-s", "samlls.down", "--at", "l", "--trace", "--json", str(pi0_file)]) == EXIT_OK
        captured = capsys.readouterr()
        assert "# case" in captured.err
        assert json.loads(captured.out)["alpha"] == "a"

    def test_split_at_constant(self, pi0_file):
        assert run(["split", "-s", "samlls.down", "--at", "l.l", str(pi0_file)]) == EXIT_USAGE

    def test_split_full_system_uses_fragment(self, pi0_file):
        assert run(["split", "-s", "samlls", "--at", "l", str(pi0_file)]) == EXIT_OK

    def test_ctxred(self, pi0_file, capsys):
        assert run(["ctxred", "-s", "samlls.down", "--at", ".", str(pi0_file)]) == EXIT_OK
        assert "K = bot" in capsys.readouterr().out

    def test_cut_elim(self, tmp_path, capsys):
        assert run(["gen", "-s", "samlls", "--cuts", "1", "--max-nodes", "9", "--steps", "6",
                    "-o", str(tmp_path / "c")]) == EXIT_OK
        capsys.readouterr()
        assert run(["cut-elim", "-s", "samlls", "--json", str(tmp_path / "c" / "0000.sad")]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["cuts"] == 1
        assert "atom.up" not in data["proof"]
        assert "par.up" not in data["proof"]

    def test_cut_elim_out_dir(self, tmp_path):
        assert run(["gen", "-s", "samlls", "--cuts", "1", "--max-nodes", "9", "--steps", "6",
                    "-o", str(tmp_path / "c")]) == EXIT_OK
        assert run(["cut-elim", "-s", "samlls", "-o", str(tmp_path / "out"),
                    str(tmp_path / "c" / "0000.sad")]) == EXIT_OK
        assert (tmp_path / "out" / "0000.cutfree.sad").is_file()

    def test_occurrence_under_ten(self, tmp_path):
        path = tmp_path / "d.sad"
        path.write_text(DETOUR)
        assert run(["split", "-s", "samlls.down", "--at", "l", str(path)]) == EXIT_NEGATIVE


class TestInterpretationCommands:
    """Tests for interpret, represent and audit."""

    def test_interpret_formula(self, capsys):
        assert run(["interpret", "-m", "mll", "--formula", "((bot a one) par (one a bot))"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "(a par ~a)"

    def test_not_interpretable(self, capsys):
        assert run(["interpret", "-m", "mll", "--formula", "(bot a (bot a one))", "--json"]) == EXIT_NEGATIVE
        assert json.loads(capsys.readouterr().out) == {"interpretable": False, "path": "."}

    def test_interpret_derivation(self, pi0_file, capsys):
        assert run(["interpret", "-m", "mll", str(pi0_file)]) == EXIT_OK
        assert capsys.readouterr().out == "seq smlls\nstart one\nstep ai.down @. (a par ~a)\n"

    def test_represent_formula(self, capsys):
        assert run(["represent", "-m", "classical", "--formula", "(a or ~a)"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "((f a t) or (t a f))"

    def test_represent_derivation(self, tmp_path, capsys):
        path = tmp_path / "id.seq"
        path.write_text("seq smlls\nstart one\nstep ai.down @. (a par ~a)\n")
        assert run(["represent", "-m", "mll", str(path)]) == EXIT_OK
        assert "atom.down" in capsys.readouterr().out

    def test_unknown_map(self):
        assert run(["interpret", "-m", "lk", "--formula", "one"]) == EXIT_USAGE

    def test_audit(self, capsys):
        code = run(["audit", "-m", "mll", "--samples", "20", "--json"])
        data = json.loads(capsys.readouterr().out)
        assert data["samples"] == 20
        assert code == (EXIT_OK if data["preservable"] else EXIT_NEGATIVE)


class TestOracleCommands:
    """Tests for prove, gen and bench."""

    def test_prove(self, capsys):
        assert run(["prove", "-s", "samlls.down", "-d", "3", "((bot a one) par (one a bot))"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("(step")

    def test_prove_fails(self, capsys):
        assert run(["prove", "-s", "samlls.down", "bot"]) == EXIT_NEGATIVE
        assert capsys.readouterr().out.startswith("unprovable: no proof of bot")

    def test_prove_formula_file(self, tmp_path, capsys):
        path = tmp_path / "goal.saf"
        path.write_text("((bot a one) par (one a bot))\n")
        assert run(["prove", "-s", "samlls.down", "--json", str(path)]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["status"] == "proved"

    def test_gen_stdout(self, capsys):
        assert run(["gen", "-s", "saks.down", "--count", "2", "--max-nodes", "9"]) == EXIT_OK
        assert capsys.readouterr().out.count("(") > 0

    def test_gen_manifest(self, tmp_path, capsys):
        assert run(["gen", "-s", "samlls", "--count", "2", "--cuts", "1", "--max-nodes", "9",
                    "--steps", "6", "-o", str(tmp_path)]) == EXIT_OK
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["count"] == 2

    def test_bench_corpus(self, tmp_path, capsys):
        assert run(["gen", "-s", "samlls", "--count", "2", "--cuts", "1", "--max-nodes", "9",
                    "--steps", "6", "-o", str(tmp_path)]) == EXIT_OK
        capsys.readouterr()
        assert run(["bench", "--corpus", str(tmp_path)]) == EXIT_OK
        assert "system samlls: 2 proofs" in capsys.readouterr().out

    def test_bench_generated(self, capsys):
        assert run(["bench", "-s", "samlls", "--count", "2", "--cuts", "1", "--max-nodes", "9",
                    "--steps", "6", "--json"]) == EXIT_OK
        assert len(json.loads(capsys.readouterr().out)["rows"]) == 2
