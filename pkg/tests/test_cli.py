import csv
import io
import json
import math

import pytest

from cclique.cli import main, parse_seeds
from cclique.harness import ExperimentConfig, config_from_record, run_one


def _records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.mark.parametrize("text, seeds", [("7", (7,)), ("0..3", (0, 1, 2, 3)), ("1,4,9", (1, 4, 9))])
def test_parse_seeds(text, seeds):
    assert parse_seeds(text) == seeds


def test_run_writes_records_and_aggregate(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["run", "--algo", "ruling3", "--n", "64", "--seeds", "0..2", "--out", str(out)]) == 0
    recs = _records(out)
    assert [r.get("seed") for r in recs[:3]] == [0, 1, 2]
    assert recs[-1]["aggregate"] and recs[-1]["runs"] == 3
    assert len({r["fingerprint"] for r in recs[:3]}) == 1


def test_run_mst_two_points_ratio_one(tmp_path):
    out = tmp_path / "m.jsonl"
    assert main(["run", "--algo", "mst", "--n", "2", "--out", str(out)]) == 0
    assert _records(out)[0]["ratio"] == 1.0


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["run", "--algo", "mfl-doubling", "--n", "10", "--seeds", "0..2"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_table_dedupes_and_reports_lazy_rounds(tmp_path, caplog):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--algo", "ruling3", "--n", "64,256,64", "--seeds", "0..1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [int(r["n"]) for r in rows] == [64, 256]
    for r in rows:
        n = int(r["n"])
        assert float(r["lazy_mean_rounds"]) == math.ceil(1 + math.log2(math.log2(math.log2(n))))
    assert "duplicate" in caplog.text


def test_sweep_empty_list(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["sweep", "--algo", "mst", "--seeds", "0", "--out", str(out)]) == 0
    assert out.read_text().strip().splitlines() == ["n,runs,mean_rounds,max_rounds,mean_messages,pass_rate"]


def test_verify_round_trip_and_tampering(tmp_path, capsys):
    out = tmp_path / "v.jsonl"
    main(["run", "--algo", "mis", "--n", "128", "--r", "0.1", "--seeds", "0..1", "--out", str(out)])
    assert main(["verify", str(out)]) == 0
    recs = _records(out)
    recs[0]["output"] = recs[0]["output"][1:]
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(json.dumps(r) for r in recs) + "\n")
    assert main(["verify", str(bad)]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_config_round_trip():
    cfg = ExperimentConfig("mst", 16, (3,))
    rec = run_one(cfg, 3)
    assert config_from_record(rec).fingerprint == cfg.fingerprint


def test_gen_emits_instance(tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "--algo", "ruling3", "--n", "5", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "gnp" and data["n"] == 5


def test_bad_constants_exit_two(capsys):
    assert main(["run", "--algo", "mst", "--n", "8", "--c1", "2", "--c2", "3"]) == 2
    assert "c2 > c1 + 2" in capsys.readouterr().err


def test_bad_arguments_exit_two():
    assert main(["run", "--algo", "bogus", "--n", "3"]) == 2


def test_capacity_errors_exit_three(capsys):
    assert main(["run", "--algo", "mis", "--n", "64", "--r", "1.0", "--rho", "6"]) == 3
    assert "capacity error" in capsys.readouterr().err
