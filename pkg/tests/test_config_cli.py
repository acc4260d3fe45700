import csv
import json

import pytest

from robustrag.cli import EXIT_ABSTAIN, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, run_command
from robustrag.config import ConfigError, SweepSpec, load_config, parse_override
from robustrag.inference import ABSTAIN_MESSAGE


def test_defaults():
    cfg = load_config()
    assert cfg.train.lam == 1.0 and cfg.train.tau == 1.0 and cfg.perturbation.k == 5
    assert cfg.infer.gamma == 0.0 and cfg.infer.c == 3


def test_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"train": {"tau": 2.0, "lambda": 0.5}, "infer": {"c": 2}}))
    cfg = load_config(p)
    assert cfg.train.tau == 2.0 and cfg.train.lam == 0.5 and cfg.infer.c == 2
    cfg = load_config(p, {"train.tau": "0.5"})
    assert cfg.train.tau == 0.5 and cfg.train.lam == 0.5


def test_validation_names_field(tmp_path):
    with pytest.raises(ConfigError, match="infer.gamma"):
        load_config(overrides={"infer.gamma": 1.5})
    with pytest.raises(ConfigError, match="train.nope"):
        load_config(overrides={"train.nope": 1})
    p = tmp_path / "bad.json"
    p.write_text('{"train": {\n  "tau": ,\n}}')
    with pytest.raises(ConfigError, match=r"bad.json:2:\d+"):
        load_config(p)
    with pytest.raises(ConfigError):
        parse_override("tau", "1")


def test_sweep_spec():
    spec = SweepSpec("m", [1, 10]).validate()
    assert not spec.retrains and spec.config_for(1).infer.c == 1
    assert SweepSpec("tau", [0.5]).retrains
    with pytest.raises(ConfigError):
        SweepSpec("lr", [0.1]).validate()
    with pytest.raises(ConfigError):
        SweepSpec("gamma", [2.0]).validate()


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    flags = ["--set", f"paths.index={d}/i", "--set", f"paths.perturbations={d}/p.jsonl",
             "--set", f"paths.dataset={d}/d.jsonl", "--set", f"paths.params={d}/c.json"]
    for cmd in ("ingest", "perturb", "distill", "train"):
        assert run_command(flags + [cmd]) == EXIT_OK, cmd
    return d, flags


def test_cli_infer_answers_and_abstains(trained, capsys):
    d, flags = trained
    capsys.readouterr()
    q = ["infer", "--query", "Who painted the Mona Lisa?", "--gold", "Leonardo da Vinci"]
    assert run_command(flags + q) == EXIT_OK
    assert capsys.readouterr().out.strip() == "Leonardo da Vinci"
    assert run_command(flags + q + ["--gamma", "1.0"]) == EXIT_ABSTAIN
    assert capsys.readouterr().out.strip() == ABSTAIN_MESSAGE
    assert run_command(flags + q + ["--json"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["status"] == "Answered" and len(rec["context_ids"]) <= 3


def test_cli_errors(tmp_path, capsys):
    assert run_command(["infer", "--query", "x", "--bogus"]) == EXIT_USAGE
    assert run_command([]) == EXIT_USAGE
    assert run_command(["--set", "infer.gamma=1.5", "ingest"]) == EXIT_USAGE
    assert "infer.gamma" in capsys.readouterr().err
    assert run_command(["infer", "--query", "x", "--index", str(tmp_path / "missing")]) == EXIT_RUNTIME
    assert "not found" in capsys.readouterr().err


def test_cli_perturb_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_command(["perturb", "--perturbations", str(a)]) == EXIT_OK
    assert run_command(["perturb", "--perturbations", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_cli_eval_writes_report(trained, tmp_path):
    d, flags = trained
    assert run_command(flags + ["eval", "--reports", str(tmp_path / "r")]) == EXIT_OK
    report = json.loads((tmp_path / "r" / "report" / "report.json").read_text())
    assert report["acc_biased"] > report["baseline"]["acc_biased"]


def test_cli_sweep_tau(tmp_path):
    out = tmp_path / "sweep"
    assert run_command(["sweep", "--param", "tau", "--values", "0.5,1.0,2.0", "--out", str(out)]) == EXIT_OK
    assert len(list(out.glob("tau=*/critic.json"))) == 3
    rows = list(csv.DictReader((out / "sweep_tau.csv").open()))
    assert [r["value"] for r in rows] == ["0.5", "1.0", "2.0"]
    assert run_command(["sweep", "--param", "tau", "--values", "a,b"]) == EXIT_USAGE


def test_cli_demo(tmp_path, capsys):
    assert run_command(["demo", "--out", str(tmp_path / "demo")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "critic" in out and "baseline" in out
    assert (tmp_path / "demo" / "report" / "risk_coverage.csv").exists()
