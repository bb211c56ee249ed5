import json

import numpy as np
import pytest

from pairbundles.cli import main
from pairbundles.core import Mat2, PairAB, SymMat2


def run(capsys, argv, stdin=None, monkeypatch=None):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    if stdin is not None and monkeypatch is not None:
        import io
        import sys as _sys
        monkeypatch.setattr(_sys, "stdin", io.StringIO(stdin))
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code if isinstance(exc.code, int) else 1
    out = capsys.readouterr()
    return code, out.out, out.err


def pair_doc(A, B):
    return json.dumps(PairAB(Mat2(np.asarray(A, dtype=complex)),
                             SymMat2(*B)).to_json())


@pytest.fixture
def identity_pair(tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(pair_doc(np.eye(2), (1, 0, 3)))
    return str(p)


class TestClassify:
    def test_identity_diag(self, capsys, identity_pair):
        code, out, _ = run(capsys, ["classify", "--input", identity_pair])
        doc = json.loads(out)
        assert code == 0
        assert doc["label"] == "identity/diag_ad"
        assert doc["params"]["a"] == pytest.approx(1.0)
        assert doc["params"]["d"] == pytest.approx(3.0)

    def test_zero_pair_from_stdin(self, capsys, monkeypatch):
        code, out, _ = run(capsys, ["classify"],
                           stdin=pair_doc(np.zeros((2, 2)), (0, 0, 0)),
                           monkeypatch=monkeypatch)
        assert code == 0
        assert json.loads(out)["label"] == "zero/zero"

    def test_wrong_matrix_size_is_usage_error(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({
            "A": [[[1, 0], [0, 0], [0, 0]]] * 3,
            "B": {"a": [0, 0], "b": [0, 0], "d": [0, 0]},
        }))
        code, _, err = run(capsys, ["classify", "--input", str(p)])
        assert code == 1
        assert "2x2" in err

    def test_malformed_json_reports_position(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        code, _, err = run(capsys, ["classify", "--input", str(p)])
        assert code == 1
        assert "line 1" in err

    def test_reduce_includes_representative(self, capsys, identity_pair):
        code, out, _ = run(capsys, ["reduce", "--input", identity_pair])
        assert code == 0
        doc = json.loads(out)
        assert "representative" in doc
        assert doc["label"] == "identity/diag_ad"


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, ["frobnicate"])
        assert code == 1

    def test_no_subcommand(self, capsys):
        code, _, _ = run(capsys, [])
        assert code == 1

    def test_verify_zero_trials(self, capsys):
        code, _, err = run(capsys, ["verify", "dims", "--trials", "0"])
        assert code == 1
        assert "trials" in err

    def test_bad_label(self, capsys):
        code, _, _ = run(capsys, ["dim", "not/a-label"])
        assert code == 1


class TestDim:
    def test_matches_table(self, capsys):
        code, out, _ = run(capsys, ["dim", "one_theta/full_hermitian_like"])
        assert code == 0
        doc = json.loads(out)
        assert doc["dimension"] == 14 and doc["agrees"]

    def test_zero_cell(self, capsys):
        code, out, _ = run(capsys, ["dim", "zero/zero"])
        assert code == 0
        assert json.loads(out)["dimension"] == 0


class TestClosure:
    def test_path_reports_edges_and_warnings(self, capsys):
        code, out, _ = run(capsys,
                           ["closure", "path", "zero/zero",
                            "one_zero/zero"])
        assert code == 0
        doc = json.loads(out)
        assert doc["is_path"]
        assert doc["edges"]

    def test_non_path(self, capsys):
        code, out, _ = run(capsys,
                           ["closure", "path", "one_theta/zero",
                            "tau_form/zero"])
        assert code == 0
        assert not json.loads(out)["is_path"]

    def test_successors(self, capsys):
        code, out, _ = run(capsys, ["closure", "successors", "zero/zero"])
        assert code == 0
        doc = json.loads(out)
        assert "one_zero/zero" in doc["successors"]

    def test_export_psi2_json(self, capsys):
        code, out, _ = run(capsys, ["closure", "export", "psi2"])
        assert code == 0
        doc = json.loads(out)
        assert len(doc["nodes"]) == 3
        assert [e["src"] for e in doc["edges"]] == ["zero", "rank1"]

    def test_export_psi1_dot(self, capsys):
        code, out, _ = run(capsys,
                           ["closure", "export", "psi1", "--format", "dot"])
        assert code == 0
        assert out.startswith("digraph")
        # all eight nodes with their figure dimensions
        for frag in ("zero (dim 0)", "one_zero (dim 4)",
                     "identity (dim 5)", "one_plus_minus (dim 5)",
                     "nilpotent (dim 6)", "jordan_i (dim 7)",
                     "one_theta (dim 8)", "tau_form (dim 8)"):
            assert frag in out

    def test_export_psi_json_has_46_nodes(self, capsys):
        code, out, _ = run(capsys, ["closure", "export", "psi"])
        assert code == 0
        assert len(json.loads(out)["nodes"]) == 46


class TestWitness:
    def test_eval(self, capsys):
        code, out, _ = run(capsys,
                           ["witness", "eval", "one_zero/zero",
                            "tau_form/zero", "--s", "0.1"])
        assert code == 0
        doc = json.loads(out)
        assert doc["residual"] == pytest.approx(0.1 / 1.5)

    def test_verify(self, capsys):
        code, out, _ = run(capsys,
                           ["witness", "verify", "one_zero/zero",
                            "tau_form/zero"])
        assert code == 0
        assert json.loads(out)["status"] == "verified"

    def test_repair_typo_family(self, capsys):
        code, out, _ = run(capsys,
                           ["witness", "repair", "one_plus_minus/zero",
                            "jordan_i/zero"])
        assert code == 0
        doc = json.loads(out)
        assert doc["status"] == "repaired"
        assert doc["verify"]["status"] == "verified"

    def test_missing_edge(self, capsys):
        code, _, err = run(capsys,
                           ["witness", "verify", "one_theta/zero",
                            "tau_form/zero"])
        assert code == 1
        assert "no catalogued family" in err


class TestVerifySuites:
    def test_dims_suite_passes(self, capsys):
        code, out, _ = run(capsys, ["verify", "dims"])
        assert code == 0
        doc = json.loads(out)
        assert doc["pass"] and not doc["failed"]
        assert doc["counts"]["dims"] == 48  # 46 cells + 2 orbit dims

    def test_bounds_suite_csv(self, capsys):
        code, out, _ = run(capsys,
                           ["verify", "bounds", "--trials", "25",
                            "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "id,status,margin"
        assert len(lines) == 6  # detxe + four modes
        assert all(line.split(",")[1] == "pass" for line in lines[1:])

    def test_witness_suite(self, capsys):
        code, out, _ = run(capsys, ["verify", "witness"])
        assert code == 0
        doc = json.loads(out)
        assert doc["pass"]
        repaired = [c for c in doc["checks"]
                    if c.get("status") == "repaired"]
        assert len(repaired) == 2

    def test_output_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.csv"
        code, out, _ = run(capsys,
                           ["verify", "dims", "--format", "csv",
                            "--output", str(out_path)])
        assert code == 0
        assert out == ""
        assert out_path.read_text().startswith("id,status,margin")

    def test_bounds_deterministic(self, capsys):
        _, out1, _ = run(capsys, ["verify", "bounds", "--trials", "10",
                                  "--seed", "3"])
        _, out2, _ = run(capsys, ["verify", "bounds", "--trials", "10",
                                  "--seed", "3"])
        assert out1 == out2
        _, out3, _ = run(capsys, ["verify", "bounds", "--trials", "10",
                                  "--seed", "4"])
        assert out1 != out3


class TestDistAndMc:
    def test_dist_member_is_zero(self, capsys, identity_pair):
        code, out, _ = run(capsys,
                           ["dist", "identity/diag_ad", "--input",
                            identity_pair, "--budget", "2"])
        assert code == 0
        assert json.loads(out)["distance"] <= 1e-8

    def test_mc_zero_cell(self, capsys):
        code, out, _ = run(capsys,
                           ["mc", "zero/zero", "--trials", "40",
                            "--epsilon", "1e-3"])
        assert code == 0
        doc = json.loads(out)
        assert doc["violations"] == []

    def test_mc_epsilon_out_of_range(self, capsys):
        code, _, _ = run(capsys,
                         ["mc", "zero/zero", "--epsilon", "0.5"])
        assert code == 1
