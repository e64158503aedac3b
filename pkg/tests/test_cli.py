"""Tests for the command-line interface and its report schemas."""

import csv
import io
import json

import numpy as np
import pytest

from eprlab import cli
from eprlab.qstate import BellLabel, bell_state, density_from_pure


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestResolveState:
    def test_named_states(self):
        for name in ("psi-minus", "psi-plus", "phi-plus", "phi-minus", "mixed"):
            state, label = cli.resolve_state(name)
            assert label == name
            assert state.matrix.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_werner_forms(self):
        inline, _ = cli.resolve_state("werner:0.4")
        flagged, _ = cli.resolve_state("werner", w=0.4)
        assert np.allclose(inline.matrix, flagged.matrix, atol=1e-15)
        with pytest.raises(ValueError, match="parameter"):
            cli.resolve_state("werner")
        with pytest.raises(ValueError, match="once"):
            cli.resolve_state("werner:0.4", w=0.5)

    def test_phase_forms(self):
        inline, label = cli.resolve_state("phase:0.5")
        assert label == "phase:0.5"
        flagged, _ = cli.resolve_state("phase", phi=0.5)
        assert np.allclose(inline.matrix, flagged.matrix, atol=1e-15)

    def test_named_state_rejects_parameter(self):
        with pytest.raises(ValueError, match="no parameter"):
            cli.resolve_state("psi-minus:0.3")

    def test_missing_file(self):
        with pytest.raises(ValueError, match="cannot read"):
            cli.resolve_state("no-such-file.json")

    def test_matrix_file_roundtrip(self, tmp_path):
        rho = density_from_pure(bell_state(BellLabel.PHI_PLUS)).matrix
        payload = [[[float(v.real), float(v.imag)] for v in row] for row in rho]
        path = tmp_path / "state.json"
        path.write_text(json.dumps(payload))
        state, label = cli.resolve_state(str(path))
        assert label == f"file:{path}"
        assert np.allclose(state.matrix, rho, atol=1e-12)

    def test_matrix_file_hermiticity_gate(self, tmp_path):
        rho = density_from_pure(bell_state(BellLabel.PHI_PLUS)).matrix.copy()
        payload = [[[float(v.real), float(v.imag)] for v in row] for row in rho]
        payload[0][1][0] += 3e-6  # breaks symmetry with its transpose partner
        path = tmp_path / "state.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="Hermiticity"):
            cli.resolve_state(str(path))
        state, _ = cli.resolve_state(str(path), tolerance=1e-4)
        assert state.matrix.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_ensemble_file(self, tmp_path):
        payload = [
            {"weight": 0.5, "blochA": [0.0, 0.0, 1.0], "blochB": [0.0, 0.0, -1.0]},
            {"weight": 0.5, "blochA": [0.0, 0.0, -1.0], "blochB": [0.0, 0.0, 1.0]},
        ]
        path = tmp_path / "ensemble.json"
        path.write_text(json.dumps(payload))
        state, label = cli.resolve_state(str(path))
        assert label == f"ensemble:{path}"
        assert state.matrix[0, 0].real == pytest.approx(0.0, abs=1e-12)

    def test_ensemble_file_strict_keys(self, tmp_path):
        payload = [{"weight": 1.0, "blochA": [0, 0, 1], "bloch_b": [0, 0, 1]}]
        path = tmp_path / "ensemble.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="exactly the keys"):
            cli.resolve_state(str(path))


class TestWitnessCommand:
    def test_singlet_json(self, capsys):
        code, out, _ = run_cli(capsys, "witness", "--state", "psi-minus")
        assert code == 0
        doc = json.loads(out)
        assert doc["state"] == "psi-minus"
        assert doc["S"] == pytest.approx(-2.0 * np.sqrt(2.0), abs=1e-10)
        assert doc["ekertViolated"] is True
        assert doc["T"] == pytest.approx(-2.0, abs=1e-10)
        assert doc["bbmViolated"] is True
        assert doc["U2"] == pytest.approx(4.0, abs=1e-10)
        assert doc["ksViolated"] == {"caseI": False, "caseII": True, "caseIII": False}
        assert doc["fidelities"]["psiMinus"] == pytest.approx(1.0, abs=1e-10)
        assert doc["distillable"] is True
        assert doc["distillableBellState"] == "psiMinus"

    def test_werner_flag(self, capsys):
        code, out, _ = run_cli(capsys, "witness", "--state", "werner", "--w", "0.25")
        assert code == 0
        doc = json.loads(out)
        assert doc["distillable"] is False
        assert doc["distillableBellState"] is None

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "witness", "--state", "phi-plus", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 2
        header, values = rows
        record = dict(zip(header, values))
        assert float(record["T"]) == pytest.approx(2.0, abs=1e-10)
        assert record["fidelities.phiPlus"] == "1.0000000000000002" or float(
            record["fidelities.phiPlus"]
        ) == pytest.approx(1.0, abs=1e-10)

    def test_plain_format(self, capsys):
        code, out, _ = run_cli(capsys, "witness", "--state", "mixed", "--format", "plain")
        assert code == 0
        lines = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(lines["S"]) == pytest.approx(0.0, abs=1e-10)


class TestKsCommand:
    def test_enumeration_summary(self, capsys):
        code, out, _ = run_cli(capsys, "ks")
        assert code == 0
        doc = json.loads(out)
        assert doc["assignmentCount"] == 64
        assert doc["bound"] == 2.0
        assert doc["valueSets"] == {
            "caseI": [-2.0, 2.0], "caseII": [-2.0, 2.0], "caseIII": [-2.0, 2.0]
        }

    def test_with_state_and_assignments(self, capsys):
        code, out, _ = run_cli(capsys, "ks", "--state", "psi-plus", "--assignments")
        assert code == 0
        doc = json.loads(out)
        assert doc["values"]["caseI"] == pytest.approx(4.0, abs=1e-10)
        assert doc["violated"]["caseI"] is True
        assert len(doc["assignments"]) == 64
        first = doc["assignments"][0]
        assert first["products"]["zz"] == first["products"]["xx"] * first["products"]["yy"]


class TestFineCommand:
    def test_zero_quad(self, capsys):
        code, out, _ = run_cli(capsys, "fine", "0", "0", "0", "0")
        assert code == 0
        doc = json.loads(out)
        assert doc["feasible"] is True
        assert doc["weights"] == pytest.approx([1.0 / 16.0] * 16, abs=1e-9)
        assert doc["chshPasses"] is True

    def test_infeasible_quad(self, capsys):
        code, out, _ = run_cli(capsys, "fine", "1", "1", "1", "-1")
        assert code == 0
        doc = json.loads(out)
        assert doc["feasible"] is False
        assert doc["weights"] is None
        assert doc["chshMax"] == pytest.approx(4.0)

    def test_marginals_flag(self, capsys):
        code, out, _ = run_cli(
            capsys, "fine", "1", "1", "1", "1", "--marginals", "1", "1", "1", "1"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["feasible"] is True
        assert doc["weights"][0] == pytest.approx(1.0, abs=1e-9)

    def test_out_of_range_correlator(self, capsys):
        code, _, err = run_cli(capsys, "fine", "1.5", "0", "0", "0")
        assert code == 2
        assert "outside" in err


class TestBoundCommand:
    def test_bbm_bound(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "bbm-t")
        assert code == 0
        doc = json.loads(out)
        assert doc["supremum"] == pytest.approx(1.0, abs=1e-4)
        assert doc["gap"] >= -1e-6
        assert doc["evaluations"] <= 100_000


class TestQkdCommand:
    def test_bbm92_run(self, capsys):
        code, out, _ = run_cli(
            capsys, "qkd", "--protocol", "bbm92", "--rounds", "5000", "--seed", "8"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["aborted"] is False
        assert doc["qber"] == 0.0
        assert doc["siftedBits"] == len(doc["siftedKeyA"])
        assert doc["siftedKeyA"] == doc["siftedKeyB"]

    def test_eve_intercept(self, capsys):
        code, out, _ = run_cli(
            capsys, "qkd", "--protocol", "bbm92", "--rounds", "20000",
            "--eve", "intercept-xz", "--seed", "8",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["aborted"] is True
        assert doc["qber"] == pytest.approx(0.25, abs=0.03)

    def test_eve_substitute(self, capsys, tmp_path):
        payload = [{"weight": 1.0, "blochA": [0.0, 1.0, 0.0], "blochB": [0.0, -1.0, 0.0]}]
        path = tmp_path / "eve.json"
        path.write_text(json.dumps(payload))
        code, out, _ = run_cli(
            capsys, "qkd", "--protocol", "e91", "--rounds", "20000",
            "--eve", f"substitute:{path}", "--seed", "2",
        )
        assert code == 0
        assert json.loads(out)["aborted"] is True

    def test_bad_eve_spec(self, capsys):
        code, _, err = run_cli(
            capsys, "qkd", "--protocol", "e91", "--eve", "listen-quietly"
        )
        assert code == 2
        assert "eavesdropper" in err

    def test_custom_direction_eve(self, capsys):
        code, out, _ = run_cli(
            capsys, "qkd", "--protocol", "bbm92", "--rounds", "20000",
            "--eve", "intercept:0.7071067811865476,0,0.7071067811865476", "--seed", "4",
        )
        assert code == 0
        assert json.loads(out)["aborted"] is True


class TestFormatsAndCodes:
    def test_structured_report_refuses_csv(self, capsys):
        code, _, err = run_cli(capsys, "fine", "0", "0", "0", "0", "--format", "csv")
        assert code == 2
        assert "structured" in err

    def test_invalid_state_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "witness", "--state", "werner:1.5")
        assert code == 2
        assert "error" in err

    def test_internal_failure_exit_code(self, capsys, monkeypatch):
        def explode(args):
            raise RuntimeError("cross-check failed")

        monkeypatch.setattr(cli, "cmd_witness", explode)
        code, _, err = run_cli(capsys, "witness", "--state", "psi-minus")
        assert code == 3
        assert "consistency" in err

    def test_byte_identical_repeats(self, capsys):
        first = run_cli(
            capsys, "qkd", "--protocol", "e91", "--rounds", "3000", "--seed", "123"
        )
        second = run_cli(
            capsys, "qkd", "--protocol", "e91", "--rounds", "3000", "--seed", "123"
        )
        assert first == second
        assert first[0] == 0

    def test_witness_deterministic(self, capsys):
        a = run_cli(capsys, "witness", "--state", "phase:0.3")
        b = run_cli(capsys, "witness", "--state", "phase:0.3")
        assert a == b
