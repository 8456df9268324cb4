import json
from pathlib import Path

import numpy as np
import pytest

from privlp.cli import main
from privlp.io import (dump_instance, dumps_report, instance_from_dict, instance_to_dict,
                       load_instance, read_trace)
from privlp.lp import LpInstance, PublicRegion, SensitivityModel, canonicalize
from privlp.verification import regret_replay

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def run_cli(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--output", str(out)])
    return code, (out.read_bytes() if out.exists() else None)


class TestInstanceIo:
    def test_round_trip(self, tmp_path):
        inst = LpInstance([[1.0, 2.0]], [3.0], c=[1.0, 0.0], senses=["GE"],
                          region=PublicRegion.simplex(),
                          sensitivity=SensitivityModel("low_row", delta_inf=0.01))
        p = tmp_path / "i.json"
        dump_instance(inst, p)
        back = load_instance(p)
        np.testing.assert_array_equal(back.A, inst.A)
        assert back.senses == inst.senses and back.sensitivity.value == 0.01
        assert instance_to_dict(back) == instance_to_dict(inst)

    def test_missing_fields(self):
        with pytest.raises(ValueError):
            instance_from_dict({"A": [[1.0]], "b": [1.0]})

    def test_multi_model_rejected(self):
        with pytest.raises(ValueError):
            instance_from_dict({"A": [[1.0]], "b": [1.0], "sensitivity": [
                {"kind": "low_row", "delta_inf": 0.1}, {"kind": "low_column", "delta_1": 0.1}]})

    def test_declared_shape_checked(self):
        with pytest.raises(ValueError):
            instance_from_dict({"A": [[1.0]], "b": [1.0], "m": 2,
                                "sensitivity": {"kind": "high_constraint"}})

    def test_report_is_canonical(self):
        text = dumps_report({"b": np.float64(1.5), "a": np.arange(2)})
        assert text == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 1.5\n}\n'

    @pytest.mark.parametrize("name", ["low_scalar", "low_row", "low_column", "low_objective",
                                      "set_cover"])
    def test_shipped_instances_load(self, name):
        assert load_instance(INSTANCES / f"{name}.json").sensitivity is not None


class TestCli:
    def test_model_mismatch(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, "solve-row", "--instance", str(INSTANCES / "low_column.json"),
                          "--epsilon", "1", "--seed", "1")
        assert code == 2
        assert "low_column" in capsys.readouterr().err

    def test_odd_balanced_attack(self, tmp_path):
        code, _ = run_cli(tmp_path, "attack", "--gadget", "objective", "--n", "5",
                          "--epsilon", "1", "--seed", "1")
        assert code == 2

    def test_seed_required(self):
        with pytest.raises(SystemExit):
            main(["solve-scalar", "--instance", str(INSTANCES / "low_scalar.json"),
                  "--epsilon", "1"])

    @pytest.mark.parametrize("command,instance", [("solve-scalar", "low_scalar"),
                                                  ("solve-row", "low_row"),
                                                  ("solve-column", "low_column")])
    def test_low_sensitivity_report(self, tmp_path, command, instance):
        path = INSTANCES / f"{instance}.json"
        code, raw = run_cli(tmp_path, command, "--instance", str(path), "--epsilon", "2",
                            "--seed", "3")
        assert code == 0
        rep = json.loads(raw)
        # the slack report is reproducible from the instance and x alone
        lp, _ = canonicalize(load_instance(path))
        np.testing.assert_allclose(rep["slack_report"]["slack"],
                                   lp.A @ np.array(rep["solution"]["x"]) - lp.b, atol=1e-15)
        k = rep["derived"]["k"]
        eps_p = rep["derived"]["epsilon_prime"]
        assert k * 8 * np.log(1e6) * eps_p ** 2 == pytest.approx(4.0, rel=1e-12)

    def test_trials_mode(self, tmp_path):
        code, raw = run_cli(tmp_path, "solve-objective", "--instance",
                            str(INSTANCES / "low_objective.json"), "--epsilon", "1",
                            "--seed", "4", "--trials", "5")
        assert code == 0 and len(json.loads(raw)["trials"]["objective_gap"]) == 5

    def test_constraint_with_trace(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        code, raw = run_cli(tmp_path, "solve-constraint", "--instance",
                            str(INSTANCES / "set_cover.json"), "--epsilon", "5", "--alpha", "0.5",
                            "--density", "10", "--seed", "5", "--trace", str(trace))
        assert code == 0
        steps, final = read_trace(trace)
        assert len(steps) == json.loads(raw)["derived"]["T"] and final is not None
        assert regret_replay(trace)["passed"]

    def test_bound(self, tmp_path):
        code, raw = run_cli(tmp_path, "bound", "--kind", "reconstruction", "--epsilon", "0",
                            "--delta", "0", "--beta", "0")
        assert code == 0 and json.loads(raw)["c"] == 0.25
        code, raw = run_cli(tmp_path, "bound", "--kind", "row", "--epsilon", "1", "--d", "100",
                            "--m", "1000", "--sensitivity", "5e-4")
        assert json.loads(raw)["vacuous"]

    def test_verify_exit_code(self, tmp_path):
        code, raw = run_cli(tmp_path, "verify", "--suite", "projection")
        assert code == 0 and json.loads(raw)["passed"]
