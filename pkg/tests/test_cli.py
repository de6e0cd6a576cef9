import json

import pytest

from soficlab import config, runner
from soficlab.cli import main
from soficlab.errors import ConfigError

SMALL = {
    "name": "small",
    "group": {"kind": "lattice", "rank": 1},
    "constructions": [
        {"action": "rotation", "label": "rotation"},
        {"action": "rotation", "label": "noisy", "perturb": {"rate": 0.01, "seed": 3}},
    ],
    "sizes": [100, 200],
    "seeds": {"labels": 1, "mc": 2, "align": 3},
    "mc_samples": 16,
    "pipelines": ["irs", "defect", "bernoulli", "relcheck", "align"],
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SMALL))
    return p


def test_describe(cfg_path, capsys):
    assert main(["describe", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "rotation" in out and "noisy" in out


def test_run_is_deterministic_across_threads(cfg_path, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code_a = main(["--threads", "1", "run", str(cfg_path), "-o", str(a)])
    code_b = main(["--threads", "4", "run", str(cfg_path), "-o", str(b)])
    assert code_a == code_b
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    report = json.loads((a / "report.json").read_text())
    assert report["schema"] == runner.SCHEMA
    assert report["checks"] and not report["errors"]
    assert code_a == (0 if report["passed"] else 1)
    assert list(a.glob("*.csv"))
    meta = json.loads((a / "run_meta.json").read_text())
    assert meta["threads"] == 1


def test_suite_subset(capsys):
    assert main(["suite", "1", "11"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)


def test_invalid_config_exit_code(tmp_path, capsys):
    bad = dict(SMALL, sizes=[200, 100])
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert main(["run", str(p)]) == 2
    assert "strictly increasing" in capsys.readouterr().err


@pytest.mark.parametrize("patch, fragment", [
    ({"window_radius": 1}, "twice label_radius"),
    ({"unknown_key": 1}, "unknown_key"),
    ({"pipelines": ["align"], "constructions": SMALL["constructions"][:1]}, "first two constructions"),
    ({"pipelines": ["irs"], "sizes": []}, "need constructions and sizes"),
])
def test_config_validation_messages(tmp_path, patch, fragment):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(dict(SMALL, **patch)))
    with pytest.raises(ConfigError, match=fragment):
        config.load_config(p)


def test_unreadable_config(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        config.load_config(p)


def test_stage_failure_is_captured(tmp_path):
    cfg = config.ExperimentConfig.model_validate(
        dict(SMALL, constructions=[{"action": "no_such_action"}], pipelines=["irs"]))
    report = runner.run(cfg, tmp_path / "out")
    assert report.errors and not report.passed
    assert (tmp_path / "out" / "report.json").exists()
