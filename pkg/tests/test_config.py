import pytest

from hetpace.config import parse_config, render
from hetpace.errors import ConfigError

BASE = """
[run]
experiment = two_unit
seed = 12

[kinetics]
variant = three

[units]
gamma_P = 0.6
gamma_D = 1.11

[topology]
delta = 0.8

[integrator]
t_end = 100
"""


def test_parse_ok():
    cfg = parse_config(BASE)
    assert cfg.experiment == "two_unit" and cfg.seed == 12
    assert cfg.get("units", "gamma_P") == 0.6
    assert cfg.get("integrator", "t_end") == 100.0


def test_seed_mandatory():
    with pytest.raises(ConfigError) as ei:
        parse_config(BASE.replace("seed = 12", ""))
    assert ei.value.key == "run.seed"


def test_unknown_key_and_section():
    with pytest.raises(ConfigError) as ei:
        parse_config(BASE + "\nfoo = 1\n")
    assert ei.value.key == "integrator.foo"
    with pytest.raises(ConfigError) as ei:
        parse_config(BASE + "\n[extra]\nx = 1\n")
    assert ei.value.key == "extra"


def test_bad_values():
    with pytest.raises(ConfigError) as ei:
        parse_config(BASE.replace("delta = 0.8", "delta = fast"))
    assert ei.value.key == "topology.delta"
    with pytest.raises(ConfigError):
        parse_config(BASE.replace("seed = 12", "seed = -1"))
    with pytest.raises(ConfigError):
        parse_config(BASE.replace("two_unit", "three_unit"))


def test_missing_block():
    with pytest.raises(ConfigError) as ei:
        parse_config(BASE.replace("[topology]\ndelta = 0.8", ""))
    assert ei.value.key == "topology"


def test_render_roundtrip():
    cfg = parse_config(BASE)
    again = parse_config(render(cfg.sections))
    assert again.sections == cfg.sections
    assert cfg.with_value("run", "seed", 5).seed == 5
