"""CLI subcommands: outputs, exit codes, schema round-trips."""

import json

import pytest

from ctxchoice import MatrixEstimate
from ctxchoice.cli import main
from ctxchoice.fixtures import load_fixture


@pytest.fixture()
def table1_path(tmp_path):
    path = tmp_path / "table1.json"
    load_fixture("table1").save(path)
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_winner_and_table(self, capsys, table1_path):
        code, out, _ = run(
            capsys, ["analyze", "--matrix", table1_path, "--space", "H,R,F"]
        )
        assert code == 0
        assert "winner" in out and "H" in out

    def test_json_output_parses(self, capsys, table1_path):
        code, out, _ = run(
            capsys,
            ["analyze", "--matrix", table1_path, "--space", "H,R,F", "--format", "json"],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["winner"] == "H"
        assert doc["table"] == {"H": 20.0, "R": 10.0, "F": 7.0}

    def test_byte_identical_reruns(self, capsys, table1_path):
        _, first, _ = run(
            capsys,
            ["analyze", "--matrix", table1_path, "--space", "H,R,F", "--format", "json"],
        )
        _, second, _ = run(
            capsys,
            ["analyze", "--matrix", table1_path, "--space", "H,R,F", "--format", "json"],
        )
        assert first == second

    def test_missing_file_is_domain_error(self, capsys, tmp_path):
        code, _, err = run(
            capsys, ["analyze", "--matrix", str(tmp_path / "nope.json"), "--space", "H"]
        )
        assert code == 1
        assert "error" in err

    def test_unknown_flag_is_usage_error(self, table1_path):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--matrix", table1_path, "--bogus", "1"])
        assert exc.value.code == 2


class TestTipping:
    def test_festival_base(self, capsys, table1_path):
        code, out, _ = run(
            capsys,
            [
                "tipping", "--matrix", table1_path, "--current", "R", "--target", "H",
                "--pool", "F", "--validate-full", "--format", "json",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["base"] == [["F"]]
        assert doc["outcome_class"] == "REVERSAL_TO_PRIOR_ITEM"

    def test_unknown_item_is_domain_error(self, capsys, table1_path):
        code, _, err = run(
            capsys,
            ["tipping", "--matrix", table1_path, "--current", "R", "--target", "Z", "--pool", "F"],
        )
        assert code == 1
        assert "error" in err


class TestLearnAndDetect:
    def _write_log(self, tmp_path, rows, name="log.jsonl"):
        path = tmp_path / name
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return str(path)

    def test_learn_round_trips_estimate(self, capsys, tmp_path):
        log = self._write_log(
            tmp_path,
            [
                {"space": ["H", "R"], "chosen": "R", "at": "2026-01-01T00:00:00", "retracted": False},
                {"space": ["H", "R", "F"], "chosen": "H", "at": "2026-01-01T00:01:00", "retracted": False},
            ],
        )
        out_path = tmp_path / "estimate.json"
        code, out, _ = run(
            capsys,
            ["learn", "--log", log, "--catalog", "H,R,F", "--out", str(out_path), "--format", "json"],
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        estimate = MatrixEstimate.from_dict(doc)
        assert estimate.margin > 0
        assert doc == json.loads(out)

    def test_learn_empty_log_gives_default_prior(self, capsys, tmp_path):
        log = self._write_log(tmp_path, [])
        code, out, _ = run(
            capsys, ["learn", "--log", log, "--catalog", "A,B", "--format", "json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["margin"] == 100.0
        assert doc["entries"] == [[1.0, 0.0], [0.0, 1.0]]

    def test_learn_empty_log_without_catalog_fails(self, capsys, tmp_path):
        log = self._write_log(tmp_path, [])
        code, _, err = run(capsys, ["learn", "--log", log])
        assert code == 1
        assert "catalog" in err

    def test_detect_multi_user_suspects(self, capsys, tmp_path):
        logs = []
        for u in range(3):
            rows = [
                {"space": ["P", "Q"], "chosen": "P", "at": f"2026-01-01T00:00:{i:02d}"}
                for i in range(10)
            ]
            rows.append(
                {"space": ["P", "Q", "T"], "chosen": "Q", "at": "2026-01-01T00:01:00"}
            )
            logs += ["--log", self._write_log(tmp_path, rows, name=f"user{u}.jsonl")]
        code, out, _ = run(
            capsys, ["detect", *logs, "--catalog", "P,Q,T", "--format", "json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["flags"]) == 3
        assert doc["suspects"][0]["item"] == "T"
        assert set(doc) == {"flags", "regret_risk", "suspects"}


class TestAdapt:
    def test_plan_from_estimate_file(self, capsys, tmp_path, table1_path):
        estimate_path = tmp_path / "estimate.json"
        doc = json.loads(open(table1_path).read())
        doc["margin"] = 1.0
        estimate_path.write_text(json.dumps(doc))
        code, out, _ = run(
            capsys,
            [
                "adapt", "--estimate", str(estimate_path), "--pool", "H,R,F",
                "--k", "2", "--required", "R", "--protect", "R", "--format", "json",
            ],
        )
        assert code == 0
        plan = json.loads(out)
        assert plan["choice_set"] == ["H", "R"]
        assert plan["predicted_winner"] == "R"


class TestSimulate:
    def test_experiment_report(self, capsys, tmp_path):
        config = tmp_path / "exp.json"
        config.write_text(
            json.dumps({"n": 4, "seeds": [1, 2], "train_count": 30, "heldout_count": 3})
        )
        out_path = tmp_path / "report.json"
        code, out, _ = run(
            capsys,
            ["simulate", "--config", str(config), "--out", str(out_path), "--format", "json"],
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["aggregate"]["training_consistency"] == 1.0
        assert json.loads(out) == doc

    def test_table_output(self, capsys, tmp_path):
        config = tmp_path / "exp.json"
        config.write_text(json.dumps({"n": 3, "seeds": [1], "train_count": 10}))
        code, out, _ = run(capsys, ["simulate", "--config", str(config)])
        assert code == 0
        assert "train_cons" in out
