import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import prob_rows
from penscore import io
from penscore.cli import main
from penscore.scoring import PredictionBatch


def _write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def files(tmp_path):
    q = _write(tmp_path / "q.csv", "p0,p1,p2\n0.33,0.34,0.33\n0.51,0.49,0\n")
    y = _write(tmp_path / "y.csv", "class\n1\n1\n")
    return tmp_path, q, y


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestIO:
    @settings(max_examples=50, deadline=None)
    @given(prob_rows())
    def test_round_trip(self, tmp_path_factory, data):
        rows, _ = data
        path = tmp_path_factory.mktemp("rt") / "q.csv"
        io.write_predictions(path, PredictionBatch(rows))
        back = io.read_predictions(path)
        np.testing.assert_array_equal(back.values, rows)

    def test_labels_both_formats(self, tmp_path):
        a = io.read_labels(_write(tmp_path / "a.csv", "y0,y1,y2\n0,1,0\n1,0,0\n"))
        b = io.read_labels(_write(tmp_path / "b.csv", "class\n1\n0\n"), c=3)
        np.testing.assert_array_equal(a.values, b.values)

    @pytest.mark.parametrize("text, line, column", [
        ("p0,p1,p2\n0.5,0.6\n", 2, None),
        ("p0,p1,p2\n0.2,0.3,0.5\n0.5,abc,0.5\n", 3, 2),
        ("q0,q1\n0.5,0.5\n", 1, None),
        ("p0,p1\n", 2, None),
    ])
    def test_parse_errors_carry_position(self, tmp_path, text, line, column):
        with pytest.raises(io.DataFormatError) as err:
            io.read_predictions(_write(tmp_path / "bad.csv", text))
        assert err.value.line == line and err.value.column == column
        assert f"line {line}" in str(err.value)

    def test_class_out_of_range(self, tmp_path):
        with pytest.raises(io.DataFormatError):
            io.read_labels(_write(tmp_path / "y.csv", "class\n3\n"), c=3)

    def test_json_schema_and_nan(self):
        payload = json.loads(io.dumps({"x": float("nan"), "a": np.arange(2)}))
        assert payload == {"schema_version": 1, "x": None, "a": [0, 1]}

    def test_json_dataclasses(self):
        from penscore.verification import ll_case_analysis
        payload = json.loads(io.dumps({"w": [ll_case_analysis(0.4, 0.0, 3)]}))
        assert payload["w"][0]["c"] == 3 and payload["w"][0]["expected"] == "equal"


class TestScoreCommand:
    def test_motivation_file(self, capsys, files):
        _, q, y = files
        code, out, _ = _run(capsys, ["score", "--predictions", q, "--labels", y,
                                     "--metrics", "pbs", "--per-sample"])
        rep = json.loads(out)
        assert code == 0 and rep["schema_version"] == 1
        r = rep["reports"][0]
        assert r["per_sample"] == pytest.approx([0.6534, 0.5202 + 2 / 3], abs=1e-12)
        assert r["mean"] == pytest.approx((0.6534 + 0.5202 + 2 / 3) / 2, abs=1e-12)
        assert r["mean"] == pytest.approx(0.92014, abs=1e-5)
        assert np.mean(r["per_sample"]) == pytest.approx(r["mean"], rel=1e-12)

    def test_identity_file(self, capsys, tmp_path):
        q = _write(tmp_path / "q.csv", "p0,p1,p2\n1,0,0\n0,1,0\n0,0,1\n")
        y = _write(tmp_path / "y.csv", "y0,y1,y2\n1,0,0\n0,1,0\n0,0,1\n")
        code, out, _ = _run(capsys, ["score", "--predictions", q, "--labels", y])
        means = {r["metric_name"]: r["mean"] for r in json.loads(out)["reports"]}
        assert code == 0
        assert means == {"bs": 0, "ll": 0, "pbs": 0, "pll": 0, "acc": 1, "f1": 1}

    def test_alg_form(self, capsys, files):
        _, q, y = files
        _, out, _ = _run(capsys, ["score", "--predictions", q, "--labels", y,
                                  "--metrics", "pbs,pll", "--alg-form"])
        reps = json.loads(out)["reports"]
        assert [r["metric_name"] for r in reps] == ["pbs_alg", "pll_alg"]
        assert reps[0]["mean"] == pytest.approx((0.6534 + 0.5202 + 2 / 3) / 6, abs=1e-12)

    def test_malformed_row(self, capsys, tmp_path, files):
        _, _, y = files
        q = _write(tmp_path / "bad.csv", "p0,p1,p2\n0.5,0.6\n")
        code, _, err = _run(capsys, ["score", "--predictions", q, "--labels", y])
        assert code == 3 and "line 2" in err

    def test_off_simplex_lists_rows(self, capsys, tmp_path, files):
        _, _, y = files
        rows = "\n".join(["0.5,0.6,0.1"] * 12)
        q = _write(tmp_path / "off.csv", "p0,p1,p2\n" + rows + "\n")
        y12 = _write(tmp_path / "y12.csv", "class\n" + "1\n" * 12)
        code, _, err = _run(capsys, ["score", "--predictions", q, "--labels", y12])
        assert code == 3 and "rows: 0, 1, 2, 3, 4, 5, 6, 7, 8, 9)" in err
        code, _, _ = _run(capsys, ["score", "--predictions", q, "--labels", y12, "--renormalize"])
        assert code == 0

    def test_missing_file_and_bad_metric(self, capsys, files):
        _, q, y = files
        assert _run(capsys, ["score", "--predictions", "/nonexistent.csv", "--labels", y])[0] == 4
        assert _run(capsys, ["score", "--predictions", q, "--labels", y, "--metrics", "mse"])[0] == 2


class TestOtherCommands:
    def test_verify_pbs_passes_and_bs_fails(self, capsys):
        code, out, _ = _run(capsys, ["verify", "superiority", "--metric", "pbs", "--trials", "20000", "--seed", "7"])
        assert code == 0 and json.loads(out)["checks"][0]["violations"] == 0
        code, out, _ = _run(capsys, ["verify", "superiority", "--metric", "bs", "--trials", "20000", "--seed", "7"])
        check = json.loads(out)["checks"][0]
        assert code == 1 and check["counterexample"]["correct_score"] >= check["counterexample"]["wrong_score"]

    def test_verify_bounds_and_cases(self, capsys):
        code, out, _ = _run(capsys, ["verify", "bounds", "--metric", "bs", "--c", "4"])
        assert code == 0 and json.loads(out)["checks"][0]["supremum"] == pytest.approx(0.75)
        assert _run(capsys, ["verify", "ll-cases"])[0] == 0
        code, out, _ = _run(capsys, ["verify", "propriety", "--trials", "5", "--p-samples", "50"])
        assert code == 0

    def test_unknown_suite_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["verify", "everything"])
        assert err.value.code == 2

    def test_montecarlo_outputs(self, capsys, tmp_path):
        code, out, _ = _run(capsys, ["montecarlo", "below", "--trials", "1", "--out-dir", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "montecarlo_below.csv").read_text().splitlines()
        assert lines[0] == "trial_index,cumulative_percentage" and len(lines) == 2
        summary = json.loads((tmp_path / "montecarlo_below.json").read_text())
        assert summary["trials"] == 1 and summary["generator"] == "normalized-absolute-gaussian"

    def test_montecarlo_above_c2_is_usage_error(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["montecarlo", "above", "--trials", "5", "--c-min", "2",
                                   "--out-dir", str(tmp_path)])
        assert code == 2

    def test_unwritable_output(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, _ = _run(capsys, ["montecarlo", "below", "--trials", "5",
                                   "--out-dir", str(blocker / "sub")])
        assert code == 4

    def test_train_rejects_zero_epochs(self, capsys, tmp_path):
        assert _run(capsys, ["train", "--epochs", "0", "--out-dir", str(tmp_path)])[0] == 2

    def test_hblock_rejects_small_h(self, capsys, tmp_path):
        assert _run(capsys, ["hblock", "--h", "3", "--out-dir", str(tmp_path)])[0] == 2

    def test_train_outputs(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["train", "--epochs", "5", "--length", "2000", "--seed", "1",
                                   "--out-dir", str(tmp_path)])
        assert code == 0
        header = (tmp_path / "trace.csv").read_text().splitlines()[0]
        assert header == "epoch,f1,bs,pbs,ll,pll"
        sel = json.loads((tmp_path / "selection.json").read_text())
        assert set(sel["selections"]) == {"f1", "bs", "pbs", "ll", "pll"}

    def test_env_overrides(self, tmp_path):
        env = {**os.environ, "PENSCORE_SEED": "11", "PENSCORE_OUT_DIR": str(tmp_path)}
        proc = subprocess.run([sys.executable, "-m", "penscore.cli", "montecarlo", "below",
                               "--trials", "50"], env=env, capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads((tmp_path / "montecarlo_below.json").read_text())["seed"] == 11
