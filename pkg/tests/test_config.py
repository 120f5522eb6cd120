import pytest

from ocarydberg import config as cfgmod
from ocarydberg.errors import ConfigInvalid


def test_defaults_validate():
    cfg = cfgmod.default_config()
    assert cfg.n_samples == 2 ** 20
    assert cfg.suite.frequencies_hz == [7.0, 33.0, 66.0, 132.0]
    assert cfg.suite.dc_bias_mv == [590.0, 590.0, 580.0, 680.0]
    assert cfg.suite.rbw_hz == [1.0, 3.0, 3.0, 3.0]


def test_yaml_round_trip(tmp_path):
    cfg = cfgmod.apply_overrides(cfgmod.default_config(),
                                 ["noise.seed=42", "chopper.waveform=fundamental-cosine",
                                  "lockin.f_ref=2048"])
    p = tmp_path / "c.yaml"
    cfgmod.dump(cfg, p)
    again = cfgmod.load(p)
    assert again == cfg
    cfgmod.dump(again, tmp_path / "d.yaml")
    assert (tmp_path / "d.yaml").read_text() == p.read_text()


def test_partial_yaml_fills_defaults(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("scenario_name: demo\nnoise:\n  k: 2.0e-6\n")
    cfg = cfgmod.load(p)
    assert cfg.scenario_name == "demo" and cfg.noise.k == 2e-6
    assert cfg.chopper == cfgmod.ChopperSection()


@pytest.mark.parametrize("text, path", [
    ("noise:\n  kk: 1\n", "noise.kk"),
    ("noise:\n  k: abc\n", "noise.k"),
    ("noise: 3\n", "noise"),
    ("lockin:\n  lpf_order: 1.5\n", "lockin.lpf_order"),
    ("output:\n  save_traces: maybe\n", "output.save_traces"),
    ("mode: fast\n", "mode"),
    ("chopper:\n  f_chop: 50\n", "chopper.f_chop"),
    ("chopper:\n  f_chop: 9000\n", "chopper.f_chop"),
    ("acquisition:\n  duration: 60\n", "acquisition.duration"),
    ("analysis:\n  rbw: 0.1\n", "acquisition.duration"),
    ("field:\n  a_sig: 1.0\n", "field.a_sig"),
    ("lockin:\n  lpf_time_constant: 1.0e-5\n", "lockin.lpf_time_constant"),
    ("lockin:\n  f_ref: 1000\n", "lockin.f_ref"),
    ("suite:\n  rbw_hz: [1, 3]\n", "suite"),
])
def test_invalid_configs_name_the_field(tmp_path, text, path):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    with pytest.raises(ConfigInvalid) as exc:
        cfgmod.load(p)
    assert exc.value.path == path


def test_direct_mode_skips_chopper_checks():
    cfgmod.apply_overrides(cfgmod.default_config(), ["mode=direct", "chopper.f_chop=10"])


def test_override_errors():
    cfg = cfgmod.default_config()
    for bad in ("noise.seed", "nosuch.key=1", "noise.nosuch=1"):
        with pytest.raises(ConfigInvalid):
            cfgmod.apply_overrides(cfg, [bad])


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigInvalid):
        cfgmod.load(tmp_path / "missing.yaml")
    p = tmp_path / "x.yaml"
    p.write_text("noise: [unclosed\n")
    with pytest.raises(ConfigInvalid, match="YAML"):
        cfgmod.load(p)


def test_resolve_accepts_dict_path_and_object(tmp_path):
    cfg = cfgmod.default_config()
    assert cfgmod.resolve(cfg) is cfg
    assert cfgmod.resolve({"noise": {"seed": 3}}).noise.seed == 3
    cfgmod.dump(cfg, tmp_path / "c.yaml")
    assert cfgmod.resolve(tmp_path / "c.yaml") == cfg
