import csv
import json

from nafd_isac.cli import main

FAST = ["--set", "trials=5"]


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_evaluate_writes_point_and_manifest(tmp_path, capsys):
    code = main(["evaluate", "--out", str(tmp_path), *FAST])
    assert code == 0
    out = capsys.readouterr().out
    assert "f1=" in out and "wrote" in out

    rows = _read_csv(tmp_path / "point.csv")
    assert len(rows) == 1 and int(rows[0]["trials"]) == 5

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "evaluate"
    assert manifest["config"]["trials"] == 5
    assert len(manifest["config_sha256"]) == 64
    assert "point.csv" in manifest["outputs"]


def test_config_file_plus_overrides(tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({"trials": 4, "seed": 9}))
    out_dir = tmp_path / "out"
    code = main(["evaluate", "--config", str(cfg_path), "--set", "seed=10",
                 "--out", str(out_dir)])
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 4
    assert manifest["config"]["seed"] == 10


def test_seed_flag_changes_results(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evaluate", "--out", str(a), *FAST, "--seed", "1"]) == 0
    assert main(["evaluate", "--out", str(b), *FAST, "--seed", "2"]) == 0
    fa = _read_csv(a / "point.csv")[0]["f1"]
    fb = _read_csv(b / "point.csv")[0]["f1"]
    assert fa != fb
    # identical invocations are byte-identical
    a2 = tmp_path / "a2"
    assert main(["evaluate", "--out", str(a2), *FAST, "--seed", "1"]) == 0
    assert (a / "point.csv").read_bytes() == (a2 / "point.csv").read_bytes()


def test_unknown_config_key_fails_with_name(tmp_path, capsys):
    code = main(["evaluate", "--out", str(tmp_path), "--set", "fading.nope=1"])
    assert code == 2
    assert "fading.nope" in capsys.readouterr().err


def test_malformed_set_rejected(tmp_path, capsys):
    code = main(["evaluate", "--out", str(tmp_path), "--set", "trials"])
    assert code == 2
    assert "KEY=VALUE" in capsys.readouterr().err


def test_contour_command_small_grid(tmp_path):
    code = main(["contour", "--out", str(tmp_path),
                 "--set", "experiment.grid_cells=9"])
    assert code == 0
    assert len(_read_csv(tmp_path / "contour.csv")) == 81
    assert (tmp_path / "layout.csv").exists()


def test_sweep_command(tmp_path):
    code = main(["sweep", "--out", str(tmp_path), *FAST,
                 "--set", "experiment.antenna_counts=[4]",
                 "--set", "experiment.sweep_values=[0.2,0.5,0.8]"])
    assert code == 0
    rows = _read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 3
    assert {r["n_antennas"] for r in rows} == {"4"}


def test_compare_schemes_command(tmp_path):
    code = main(["compare-schemes", "--out", str(tmp_path), *FAST,
                 "--set", "experiment.sensing_symbols=[40,160]"])
    assert code == 0
    rows = _read_csv(tmp_path / "schemes.csv")
    assert len(rows) == 6


def test_pareto_command_with_optimizer_subset(tmp_path):
    code = main(["pareto", "--out", str(tmp_path), *FAST,
                 "--set", "nsga2.population=6",
                 "--set", "nsga2.generations=2",
                 "--optimizers", "nsga2"])
    assert code == 0
    rows = _read_csv(tmp_path / "pareto.csv")
    assert {r["source"] for r in rows} == {"front", "epa"}


def test_pareto_rejects_unknown_optimizer(tmp_path, capsys):
    code = main(["pareto", "--out", str(tmp_path), "--optimizers", "sgd"])
    assert code == 2
    assert "sgd" in capsys.readouterr().err


def test_dqn_command(tmp_path):
    code = main(["dqn", "--out", str(tmp_path), *FAST,
                 "--set", "dqn.episodes=2",
                 "--set", "dqn.steps_per_episode=10"])
    assert code == 0
    trace = _read_csv(tmp_path / "dqn_trace.csv")
    assert len(trace) == 2
    assert float(trace[1]["best_reward"]) >= float(trace[0]["best_reward"])
    assert (tmp_path / "dqn_best.csv").exists()


def test_threads_flag_validation(tmp_path, capsys):
    assert main(["evaluate", "--out", str(tmp_path), "--threads", "0"]) == 2
    assert "--threads" in capsys.readouterr().err
    assert main(["evaluate", "--out", str(tmp_path), *FAST,
                 "--threads", "1"]) == 0
