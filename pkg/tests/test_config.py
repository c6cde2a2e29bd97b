import json
from fractions import Fraction

import pytest

from app import build_parser
from src.config.manager import (
    CONFIG_DEFAULTS,
    RunConfig,
    SparseBoundConfigManager,
    check_config_name,
    get_available_configs,
    resolve_run_config,
)


def _write_profile(root, name, data):
    config_dir = root / "config"
    config_dir.mkdir(exist_ok=True)
    (config_dir / f"{name}.json").write_text(json.dumps(data), encoding="utf-8")


def test_defaults_without_profile(project_root):
    manager = SparseBoundConfigManager()
    assert manager.config_name == "default"
    assert manager.get("cap_box") == CONFIG_DEFAULTS["cap_box"]
    assert manager.get("t_schedule") == [6, 12, 24, 48]


def test_profile_overrides_and_unknown_keys(project_root, capsys):
    _write_profile(project_root, "desk", {"cap_box": 5000, "bogus": 1})
    manager = SparseBoundConfigManager("desk")
    assert manager.get("cap_box") == 5000
    assert "bogus" not in manager.config
    assert "unknown keys" in capsys.readouterr().err
    assert get_available_configs() == ["desk"]


def test_state_persists(project_root):
    manager = SparseBoundConfigManager()
    manager.set("last_matrix_path", "/tmp/a.txt")
    assert SparseBoundConfigManager().get("last_matrix_path") == "/tmp/a.txt"
    state = json.loads((project_root / "config" / "state.json").read_text(encoding="utf-8"))
    assert state["last_matrix_path"] == "/tmp/a.txt"


def test_profile_keys_are_not_written(project_root):
    manager = SparseBoundConfigManager()
    with pytest.raises(KeyError, match="profile key"):
        manager.set("cap_box", 10)
    assert not (project_root / "config" / "default.json").exists()


def test_check_config_name(project_root):
    assert check_config_name("default") == "default"
    _write_profile(project_root, "desk", {})
    assert check_config_name("desk") == "desk"
    with pytest.raises(ValueError, match="available: desk"):
        check_config_name("lab")


def test_flags_beat_profile(project_root):
    _write_profile(project_root, "default", {"cap_box": 5000, "seed": 3})
    args = build_parser().parse_args(["sweep", "m.txt", "--cap-box", "9", "--t-schedule", "2,4"])
    cfg = resolve_run_config(args, SparseBoundConfigManager())
    assert cfg.cap_box == 9
    assert cfg.seed == 3
    assert cfg.t_schedule == [2, 4]
    assert cfg.epsilon == Fraction(1, 100)
    assert cfg.caps()["box"] == 9


def test_threads_precedence(project_root, monkeypatch):
    parser = build_parser()
    monkeypatch.setenv("SPARSEBOUND_THREADS", "3")
    cfg = resolve_run_config(parser.parse_args(["sweep", "m.txt"]), SparseBoundConfigManager())
    assert cfg.threads == 3
    cfg = resolve_run_config(parser.parse_args(["sweep", "m.txt", "--threads", "2"]), SparseBoundConfigManager())
    assert cfg.threads == 2
    monkeypatch.setenv("SPARSEBOUND_THREADS", "many")
    with pytest.raises(ValueError, match="SPARSEBOUND_THREADS"):
        resolve_run_config(parser.parse_args(["sweep", "m.txt"]), SparseBoundConfigManager())


@pytest.mark.parametrize("changes", [
    {"cap_box": 0},
    {"mode": "iii"},
    {"t_schedule": [6, 3]},
    {"t_schedule": []},
    {"k_list": [-1]},
    {"epsilon": Fraction(3, 2)},
    {"sample_size": 0},
])
def test_validate_rejects(changes):
    with pytest.raises(ValueError):
        RunConfig(command="sweep", **changes).validate()


def test_as_dict_is_printable():
    d = RunConfig(command="solve").as_dict()
    assert d["epsilon"] == "1/100"
    assert d["command"] == "solve"
