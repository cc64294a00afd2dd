import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from stap_sim import config
from stap_sim.config import ConfigError, RunConfig, SweepSpec
from stap_sim.model import Scheme

BASE = {"units": "lambda", "scheme": "FPT", "sin_epsilon": 0.25, "t_f": 10.0}


def test_defaults_and_sin_epsilon():
    cfg = RunConfig.from_dict(BASE)
    assert cfg.spec.scheme is Scheme.FPT
    assert cfg.spec.epsilon == math.asin(0.25)
    assert cfg.open_system is False and cfg.steps == 2000 and cfg.samples == 1001


@pytest.mark.parametrize("doc,key", [
    ({**BASE, "colour": 1}, "colour"),
    ({**BASE, "protocol": {"kind": "STAP", "shape": 2}}, "shape"),
    ({**BASE, "gamma": -0.1}, "gamma"),
    ({**BASE, "units": "MHz"}, "units"),
    ({**BASE, "epsilon": 0.2}, "sin_epsilon"),
    ({**BASE, "scheme": "XYZ"}, "scheme"),
    ({**BASE, "steps": 0}, "steps"),
    ({**BASE, "t_f": "ten"}, "t_f"),
    ({**BASE, "upsilon": 0.1, "gamma": 0.1}, "upsilon"),
    ({"units": "lambda"}, "scheme"),
])
def test_rejections_name_the_key(doc, key):
    with pytest.raises(ConfigError, match=key):
        RunConfig.from_dict(doc)


def test_epsilon_zero_cites_divergence():
    doc = {k: v for k, v in BASE.items() if k != "sin_epsilon"}
    with pytest.raises(ConfigError, match="diverges"):
        RunConfig.from_dict({**doc, "epsilon": 0.0})


def test_upsilon_sets_all_rates():
    cfg = RunConfig.from_dict({**BASE, "upsilon": 0.05, "lam": 2.0})
    assert (cfg.spec.kappa_c, cfg.spec.kappa_f, cfg.spec.gamma) == (0.1, 0.1, 0.1)
    assert cfg.open_system


@settings(max_examples=40, deadline=None)
@given(scheme=st.sampled_from([s.value for s in Scheme]),
       t_f=st.floats(min_value=1, max_value=100),
       v=st.floats(min_value=0.1, max_value=3),
       sin_eps=st.floats(min_value=0.01, max_value=0.99),
       rates=st.tuples(*[st.floats(min_value=0, max_value=0.2)] * 3),
       kind=st.sampled_from(["STAP", "ADIABATIC_TRIG", "ADIABATIC_EXP"]))
def test_round_trip(scheme, t_f, v, sin_eps, rates, kind):
    doc = {"units": "lambda", "scheme": scheme, "t_f": t_f, "v": v, "sin_epsilon": sin_eps,
           "kappa_c": rates[0], "kappa_f": rates[1], "gamma": rates[2],
           "protocol": {"kind": kind, "amp": 0.8}}
    cfg = RunConfig.from_dict(doc)
    text = json.dumps(cfg.to_dict())
    again = RunConfig.from_dict(json.loads(text))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def sweep_doc(*axes, **extra):
    return {**BASE, "axes": list(axes), **extra}


def test_sweep_grid_is_row_major():
    sw = SweepSpec.from_dict(sweep_doc({"name": "v", "values": [0.5, 1.0]},
                                       {"name": "t_f", "start": 8, "stop": 10, "num": 3}))
    assert sw.cells() == [(0.5, 8.0), (0.5, 9.0), (0.5, 10.0), (1.0, 8.0), (1.0, 9.0), (1.0, 10.0)]
    assert sw.header() == ["v", "t_f", "final_fidelity"]


@pytest.mark.parametrize("axes,extra,match", [
    ([], {}, "one or two"),
    ([{"name": "t_f", "values": [10, 9]}], {}, "strictly increasing"),
    ([{"name": "t_f", "values": []}], {}, "empty"),
    ([{"name": "upsilon", "values": [0, 0.1]}, {"name": "gamma", "values": [0, 0.1]}], {},
     "upsilon"),
    ([{"name": "upsilon", "values": [0, 0.1]}], {"kappa_c": 0.1}, "upsilon"),
    ([{"name": "channel", "values": ["gamma"]}], {}, "together"),
    ([{"name": "scheme", "values": ["FPT", "NOPE"]}], {}, "NOPE"),
    ([{"name": "speed", "values": [1]}], {}, "speed"),
    ([{"name": "t_f", "values": [9, 10]}, {"name": "t_f", "values": [1, 2]}], {}, "distinct"),
    ([{"name": "t_f", "values": [9]}], {"observables": ["energy"]}, "energy"),
    ([{"name": "t_f", "values": [0, 1]}], {}, "t_f"),
])
def test_sweep_rejections(axes, extra, match):
    with pytest.raises(ConfigError, match=match):
        SweepSpec.from_dict(sweep_doc(*axes, **extra))


def test_channel_cells_isolate_one_rate():
    sw = SweepSpec.from_dict(sweep_doc({"name": "channel", "values": ["kappa_f"]},
                                       {"name": "rate", "values": [0.0, 0.05]}))
    cfg = config.cell_config(sw, ("kappa_f", 0.05))
    assert (cfg.spec.kappa_c, cfg.spec.kappa_f, cfg.spec.gamma) == (0.0, 0.05, 0.0)
    assert cfg.open_system


def test_protocol_axis():
    sw = SweepSpec.from_dict(sweep_doc({"name": "protocol", "values": ["STAP", "ADIABATIC_TRIG"]}))
    assert config.cell_config(sw, ("ADIABATIC_TRIG",)).protocol.kind.value == "ADIABATIC_TRIG"


@pytest.mark.parametrize("name", sorted(config.PRESETS))
def test_presets_expand_to_valid_configs(name):
    command, doc = config.preset(name)
    assert command in ("simulate", "sweep", "pulses")
    assert doc["units"] == "lambda"
    if command == "sweep":
        sw = SweepSpec.from_dict(doc)
        assert sw.cells()
    else:
        RunConfig.from_dict(doc)


def test_every_figure_has_a_preset():
    expected = {"fig2", *[f"fig3{c}" for c in "abcd"], *[f"fig4{c}" for c in "abcd"],
                *[f"fig5{c}" for c in "abcdef"], "fig6a", "fig6b", "fig7a", "fig7b",
                "fig8a", "fig8b"}
    assert set(config.PRESETS) == expected
    with pytest.raises(ConfigError):
        config.preset("fig9")


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        config.load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        config.load_json(bad)
