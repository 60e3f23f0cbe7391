import pytest
from pydantic import ValidationError

from ovals.config import (
    build_config,
    config_hash,
    format_config,
    load_config,
    parse_config_text,
)
from ovals.errors import ConfigError

FOLIATION = """
# leaves to check
tag = foliation-check
a = 10, 6   # compact shrinkers
b = 0.5
"""


def test_parse_config_text():
    values = parse_config_text(FOLIATION)
    assert values == {"tag": "foliation-check", "a": ["10", "6"], "b": ["0.5"]}


@pytest.mark.parametrize(
    "text",
    [
        "tag foliation-check",
        "colour = red",
        "n = 3\nn = 4",
        "n =",
        "n = 3, 4",
        "2n = 3",
    ],
)
def test_parse_config_text_rejects(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_load_config_from_file(write_config):
    cfg = load_config(write_config(FOLIATION), tag="foliation-check")
    assert cfg.a == [10.0, 6.0]
    assert cfg.sym.n == 3 and cfg.sym.k == 2
    assert cfg.region_params().K == (0.0, 1.0)


def test_load_config_overrides(write_config):
    cfg = load_config(write_config(FOLIATION), tag="foliation-check", out="elsewhere", threads=None)
    assert cfg.out == "elsewhere"
    assert cfg.threads == 1


def test_load_config_tag_mismatch(write_config):
    with pytest.raises(ConfigError):
        load_config(write_config(FOLIATION), tag="soliton-atlas")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg", tag="soliton-atlas")


@pytest.mark.parametrize(
    "values",
    [
        {"tag": "neck-pinch"},
        {"tag": "soliton-atlas", "n": 3, "k": 3},
        {"tag": "soliton-atlas", "ell": -1.0},
        {"tag": "soliton-atlas", "m": 0},
        {"tag": "soliton-atlas", "K_min": 1.0, "K_max": 0.5},
        {"tag": "soliton-atlas", "seed": 4},
        {"tag": "width-ratio"},
        {"tag": "width-ratio", "a1": [0.3], "k": 3, "n": 4},
        {"tag": "width-ratio", "a1": [1.2]},
        {"tag": "width-ratio", "a1": [0.3], "refine_a1": 1.0},
        {"tag": "width-ratio", "a1": [0.3], "normalize_xtol": 0.0},
        {"tag": "ratio-solve"},
        {"tag": "foliation-check"},
        {"tag": "foliation-check", "b": [1.5]},
        {"tag": "foliation-check", "a": [-2.0]},
    ],
)
def test_build_config_rejects(values):
    with pytest.raises(ConfigError):
        build_config(values)


def test_config_is_frozen():
    cfg = build_config({"tag": "soliton-atlas"})
    with pytest.raises(ValidationError):
        cfg.n = 4


def test_hash_ignores_output_settings():
    base = build_config({"tag": "soliton-atlas"})
    moved = build_config({"tag": "soliton-atlas", "out": "other", "threads": 4})
    changed = build_config({"tag": "soliton-atlas", "s_max": 12.0})
    assert config_hash(base) == config_hash(moved)
    assert config_hash(base) != config_hash(changed)
    assert len(config_hash(base)) == 64


def test_format_config_parses_back():
    cfg = build_config({"tag": "width-ratio", "a1": [0.3, 0.25], "ell": 8.0})
    text = format_config(cfg)
    assert "theta" not in text
    assert "targets" not in text
    again = build_config(parse_config_text(text))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_policy_and_stop_rule():
    cfg = build_config({"tag": "radial-asymptotics", "c_cfl": 0.1, "stop_fraction": 0.01})
    assert cfg.policy().c_cfl == 0.1
    stop = cfg.stop_rule()
    assert stop.kind == "extinction"
    assert stop.stop_fraction == 0.01


def test_refinement_settings_parse_back():
    cfg = load_config(None, tag="width-ratio", a1=["0.5"], refine="false", refine_a1="0.4")
    assert cfg.refine is False
    assert cfg.refine_a1 == 0.4
    again = build_config(parse_config_text(format_config(cfg)))
    assert again == cfg
