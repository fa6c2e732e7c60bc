"""Tests for the command-line interface, driven in process."""
from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest

from cqboxes.boxes import CCBox, CQBox, cq_box_distance, pr_box
from cqboxes.cli import main
from cqboxes.io import load_box, save_box
from cqboxes.quantum import DensityMatrix, PartyStructure, bell_state


def run(capsys, *argv: str) -> tuple[int, dict | None, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out else None
    return code, report, captured.err


def signalling_ccbox() -> CCBox:
    """Alice's marginal leaks Bob's input."""
    table = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(range(2), range(2)):
        table[x, y, y, 0] = 1.0
    return CCBox((2, 2), (2, 2), table)


def disordered_box() -> CQBox:
    structure = PartyStructure.qubits("AB")
    mixes = {
        (0, 0): (1.0, 0.0, 0.0, 0.0),
        (0, 1): (0.5, 0.5, 0.0, 0.0),
        (1, 0): (0.25, 0.25, 0.25, 0.25),
        (1, 1): (0.7, 0.1, 0.1, 0.1),
    }
    outputs = {}
    for key, weights in mixes.items():
        mat = sum(
            w * bell_state(i).density().matrix for i, w in enumerate(weights)
        )
        outputs[key] = DensityMatrix(mat, structure)
    return CQBox((2, 2), structure, outputs)


def assignment_doc(fn_a, fn_b, fn_c) -> dict:
    grid = lambda fn: [[[fn(x, y, z) for z in (0, 1)] for y in (0, 1)] for x in (0, 1)]
    return {"alpha": grid(fn_a), "beta": grid(fn_b), "gamma": grid(fn_c)}


class TestVerify:
    def test_cc_pass(self, capsys, tmp_path):
        path = tmp_path / "pr.json"
        save_box(pr_box(), path)
        code, report, err = run(capsys, "verify", str(path))
        assert code == 0
        assert report["kind"] == "cc"
        assert report["passed"] is True
        assert report["worst_violation"] <= 1e-9
        assert len(report["digest"]) == 16
        assert "elapsed" in err

    def test_cc_fail(self, capsys, tmp_path):
        path = tmp_path / "leak.json"
        save_box(signalling_ccbox(), path)
        code, report, _ = run(capsys, "verify", str(path))
        assert code == 1
        assert report["passed"] is False
        assert report["worst_violation"] == pytest.approx(1.0, abs=1e-12)
        assert report["witnesses"]
        first = report["witnesses"][0]
        assert first["subgroup"] == ["A"]
        assert first["violation"] == pytest.approx(1.0, abs=1e-12)

    def test_cq_pass(self, capsys, tmp_path):
        box_path = tmp_path / "phase.json"
        code, _, _ = run(
            capsys, "synth", "phase", "--m", "1", "--n", "3",
            "--out", str(box_path),
        )
        assert code == 0
        code, report, _ = run(capsys, "verify", str(box_path))
        assert code == 0
        assert report["kind"] == "cq"

    def test_kind_mismatch_is_usage_error(self, capsys, tmp_path):
        path = tmp_path / "pr.json"
        save_box(pr_box(), path)
        code, report, err = run(capsys, "verify", str(path), "--kind", "cq")
        assert code == 2
        assert report is None
        assert "kind" in err

    def test_missing_file_is_usage_error(self, capsys, tmp_path):
        code, report, err = run(capsys, "verify", str(tmp_path / "absent.json"))
        assert code == 2
        assert report is None
        assert "error" in err


class TestSynth:
    def test_bit_flip(self, capsys, tmp_path):
        out = tmp_path / "bitflip.json"
        code, report, _ = run(capsys, "synth", "bit-flip", "--out", str(out))
        assert code == 0
        assert report["passed"] is True
        assert report["target_distance"] <= 1e-12
        box = load_box(out)
        assert isinstance(box, CQBox)
        assert box.structure.dims == (2, 2)

    def test_irrational_phase_reports_bound(self, capsys):
        theta = str(1 / np.sqrt(2))
        code, report, _ = run(
            capsys, "synth", "irrational-phase", "--theta", theta, "--n", "40"
        )
        assert code == 0
        bound = report["certificate"]["error_bound"]
        assert 0 < bound < 1e-3
        assert report["distance_tolerance"] == pytest.approx(math.sqrt(bound), abs=1e-15)
        assert report["target_distance"] <= report["distance_tolerance"]

    def test_max_entangled_random_targets(self, capsys, tmp_path):
        out = tmp_path / "maxent.json"
        target_out = tmp_path / "maxent_target.json"
        code, report, _ = run(
            capsys, "synth", "max-entangled", "--n", "3", "--samples", "3",
            "--seed", "7", "--out", str(out), "--target-out", str(target_out),
        )
        assert code == 0
        assert report["target_distance"] <= 1e-12
        assert cq_box_distance(load_box(out), load_box(target_out)) <= 1e-12

    def test_max_entangled_from_file(self, capsys, tmp_path):
        target_path = tmp_path / "target.json"
        code, _, _ = run(
            capsys, "synth", "eight-output", "--target-out", str(target_path)
        )
        assert code == 0
        code, report, _ = run(
            capsys, "synth", "max-entangled", "--target", str(target_path),
            "--samples", "3",
        )
        assert code == 0
        assert report["target_distance"] <= 1e-12

    def test_max_entangled_rejects_product_targets(self, capsys, tmp_path):
        target_path = tmp_path / "product.json"
        code, _, _ = run(
            capsys, "synth", "phase", "--alpha", "0.8", "--beta", "0.6",
            "--target-out", str(target_path),
        )
        assert code == 0
        code, report, err = run(
            capsys, "synth", "max-entangled", "--target", str(target_path)
        )
        assert code == 2
        assert "maximally entangled" in err

    def test_eight_output_certificate(self, capsys):
        code, report, _ = run(capsys, "synth", "eight-output")
        assert code == 0
        pairings = report["certificate"]["pairings"]
        assert sorted(pairings) == ["0,0", "0,1", "0,2", "1,0", "1,1", "1,2"]
        assert pairings["0,0"] == list(range(8))
        assert sorted(pairings["1,1"]) == list(range(8))

    def test_nonmax_pure(self, capsys, tmp_path):
        out = tmp_path / "nonmax.json"
        code, report, _ = run(
            capsys, "synth", "nonmax-pure",
            "--weights", "0.6,0.3,0.1",
            "--phases", '{"1,1,1": "1/4", "1,0,2": "1/3"}',
            "--out", str(out),
        )
        assert code == 0
        assert report["passed"] is True
        assert report["target_distance"] <= 1e-12
        box = load_box(out)
        state = box.pure_output((1, 1))
        amp = state.amplitudes.reshape(3, 3)
        probs = np.abs(np.diag(amp)) ** 2
        assert probs == pytest.approx([0.6, 0.3, 0.1], abs=1e-9)

    def test_general_pure_from_target(self, capsys, tmp_path):
        target_path = tmp_path / "target.json"
        code, _, _ = run(
            capsys, "synth", "phase", "--m", "1", "--n", "4",
            "--alpha", "0.8", "--beta", "0.6", "--out", str(target_path),
        )
        assert code == 0
        out = tmp_path / "rebuilt.json"
        code, report, _ = run(
            capsys, "synth", "general-pure", "--target", str(target_path),
            "--samples", "3", "--out", str(out),
        )
        assert code == 0
        assert report["passed"] is True
        assert report["target_distance"] <= 1e-9
        assert cq_box_distance(load_box(out), load_box(target_path)) <= 1e-9

    def test_mixed_disordered_recombines(self, capsys, tmp_path):
        target_path = tmp_path / "mixed.json"
        save_box(disordered_box(), target_path)
        code, report, _ = run(
            capsys, "synth", "mixed-disordered", "--target", str(target_path),
            "--samples", "3",
        )
        assert code == 0
        assert report["passed"] is True
        assert report["target_distance"] <= 1e-9
        assert report["certificate"]["intervals"] <= 13
        weights = report["certificate"]["interval_weights"]
        assert sum(weights) == pytest.approx(1.0, abs=1e-12)

    def test_ghz_phase(self, capsys, tmp_path):
        out = tmp_path / "ghz.json"
        code, report, _ = run(
            capsys, "synth", "ghz-phase", "--m", "1", "--n", "2", "--out", str(out)
        )
        assert code == 0
        assert report["passed"] is True
        assert report["target_distance"] <= 1e-12
        box = load_box(out)
        assert box.structure.labels == ("A", "B", "C")
        flipped = box.pure_output((1, 1, 1)).amplitudes
        plain = box.pure_output((0, 1, 1)).amplitudes
        assert np.vdot(plain, flipped) == pytest.approx(0.0, abs=1e-9)

    def test_phase_denominator_one_is_parameter_error(self, capsys):
        code, report, err = run(capsys, "synth", "phase", "--n", "1")
        assert code == 2
        assert report is None
        assert "denominator" in err

    def test_target_required(self, capsys):
        code, report, err = run(capsys, "synth", "general-pure")
        assert code == 2
        assert report is None
        assert "--target" in err


class TestBound:
    def test_frontier_values(self, capsys):
        code, report, _ = run(capsys, "bound", "--n", "3")
        assert code == 0
        frontier = report["frontier"]
        assert [row["k"] for row in frontier] == [1, 2, 3]
        assert frontier[1]["cycle_length"] == 2
        expected = 2 * (0.8 * 0.6) ** 2 * (1 - np.cos(np.pi / 12))
        assert frontier[1]["delta"] == pytest.approx(expected, abs=1e-12)
        assert all(row["confirmed"] is True for row in frontier)
        assert all(
            row["optimum"] == pytest.approx(row["value"], abs=1e-6) for row in frontier
        )
        assert report["full_alphabet_exact"] is True
        assert frontier[2]["value"] >= 1 - 1e-9

    def test_budget_warning(self, capsys):
        code, report, _ = run(capsys, "bound", "--n", "2", "--budget", "0")
        assert code == 3
        assert report["budget_exceeded"] is True
        assert all(row["confirmed"] is None for row in report["frontier"])
        assert report["full_alphabet_exact"] is True

    def test_partial_budget_confirms_prefix(self, capsys):
        code, report, _ = run(
            capsys, "bound", "--n", "3", "--budget", "8", "--restarts", "8", "--kmax", "2"
        )
        assert code == 3
        assert report["frontier"][0]["confirmed"] is True
        assert report["frontier"][1]["confirmed"] is None

    def test_large_alphabet_refused(self, capsys):
        code, report, err = run(capsys, "bound", "--n", "5", "--kmax", "1")
        assert code == 2
        assert report is None
        assert "refused" in err

    def test_rejects_bad_denominator(self, capsys):
        code, report, err = run(capsys, "bound", "--n", "1", "--kmax", "1")
        assert code == 2
        assert report is None
        assert "error" in err


class TestWPhase:
    def test_theorem_small_grid(self, capsys):
        code, report, _ = run(
            capsys, "wphase", "--grid", "0,1.5707963267948966",
            "--random-samples", "5",
        )
        assert code == 0
        assert report["mode"] == "theorem"
        assert report["equivalence_holds"] is True
        assert report["local_cases"] == 64
        assert report["perturbed_cases"] == 108
        assert report["worst_violation_mismatch"] <= 1e-9

    def test_single_local_assignment(self, capsys, tmp_path):
        path = tmp_path / "local.json"
        doc = assignment_doc(
            lambda x, y, z: 0.9 * x,
            lambda x, y, z: -1.3 * y,
            lambda x, y, z: 2.1 * z,
        )
        path.write_text(json.dumps(doc))
        code, report, _ = run(capsys, "wphase", "--mode", "single", str(path))
        assert code == 0
        assert report["passed"] is True
        decomposition = report["decomposition"]
        assert decomposition is not None
        assert decomposition["a"][1] - decomposition["a"][0] == pytest.approx(0.9, abs=1e-9)
        assert decomposition["b"][1] - decomposition["b"][0] == pytest.approx(-1.3, abs=1e-9)
        assert decomposition["c"][1] - decomposition["c"][0] == pytest.approx(2.1, abs=1e-9)

    def test_single_interaction_fails_with_pair_witness(self, capsys, tmp_path):
        path = tmp_path / "xz.json"
        doc = assignment_doc(
            lambda x, y, z: 0.0,
            lambda x, y, z: 0.0,
            lambda x, y, z: math.pi * x * z,
        )
        path.write_text(json.dumps(doc))
        code, report, _ = run(capsys, "wphase", "--mode", "single", str(path))
        assert code == 1
        assert report["passed"] is False
        assert report["decomposition"] is None
        assert any(w["subgroup"] == ["B", "C"] for w in report["witnesses"])
        assert report["worst_violation"] == pytest.approx(2 / 3, abs=1e-9)

    def test_single_requires_assignment(self, capsys):
        code, report, err = run(capsys, "wphase", "--mode", "single")
        assert code == 2
        assert "assignment" in err

    def test_malformed_assignment(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"alpha": [[0.0]], "beta": [[0.0]]}))
        code, report, err = run(capsys, "wphase", "--mode", "single", str(path))
        assert code == 2
        assert "gamma" in err or "assignment" in err


class TestContract:
    def test_stdout_is_deterministic(self, capsys):
        argv = ["synth", "phase", "--m", "2", "--n", "5"]
        code_a = main(list(argv))
        out_a = capsys.readouterr().out
        code_b = main(list(argv))
        out_b = capsys.readouterr().out
        assert code_a == code_b == 0
        assert out_a == out_b

    def test_report_keys_sorted(self, capsys):
        code = main(["synth", "sign-flip"])
        out = capsys.readouterr().out
        assert code == 0
        assert out == json.dumps(json.loads(out), indent=2, sort_keys=True) + "\n"

    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_bad_flag_value_exits_2(self, capsys):
        assert main(["bound", "--n", "three", "--kmax", "1"]) == 2

    def test_threads_accepted_but_validated(self, capsys, tmp_path):
        path = tmp_path / "pr.json"
        save_box(pr_box(), path)
        assert main(["--threads", "4", "verify", str(path)]) == 0
        capsys.readouterr()
        assert main(["--threads", "0", "verify", str(path)]) == 2

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == 0
        assert "verify" in capsys.readouterr().out
