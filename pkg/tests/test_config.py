import pytest
import yaml

from baybfed.config import config_from_dict, parse_config, serialize_config
from baybfed.errors import ConfigError

from conftest import CONFIG_DIR


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDefaults:
    def test_minimal_file(self):
        cfg = parse_config(CONFIG_DIR / "minimal.yaml")
        assert (cfg.n_clients, cfg.rounds) == (10, 2)
        assert cfg.c0 == 5.0
        assert cfg.detector.mu0 == 0.0
        assert cfg.detector.sigma0 == 1.0
        assert cfg.detector.assignment_rule == "argmax_jd"
        assert cfg.filter.mode == "combined"
        assert cfg.defense == "baybfed"

    def test_s1_file(self):
        cfg = parse_config(CONFIG_DIR / "s1.yaml")
        assert cfg.n_malicious == 6
        assert cfg.attack.scale_factor == 10.0
        assert cfg.attack.trigger.trigger_coords == (0, 1)

    def test_ints_promoted_to_float(self):
        cfg = config_from_dict({"n_clients": 4, "rounds": 1, "c0": 3})
        assert isinstance(cfg.c0, float)


class TestValidation:
    def test_pmr_above_half(self, tmp_path):
        with pytest.raises(ConfigError, match="pmr"):
            parse_config(write(tmp_path, "n_clients: 10\nrounds: 2\npmr: 0.6\n"))

    def test_half_allowed(self):
        assert config_from_dict({"n_clients": 10, "rounds": 1, "pmr": 0.5}).n_malicious == 5

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="learning_rat"):
            config_from_dict({"n_clients": 10, "rounds": 1, "learning_rat": 0.1})

    def test_unknown_nested_key_has_dotted_path(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"n_clients": 10, "rounds": 1, "attack": {"trigger": {"colour": 1}}})
        assert info.value.path == "attack.trigger.colour"

    def test_nested_value_error_path(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"n_clients": 10, "rounds": 1, "detector": {"sigma0": -1}})
        assert info.value.path.startswith("detector")

    @pytest.mark.parametrize("raw, field", [
        ({"rounds": 1}, ""),
        ({"n_clients": "ten", "rounds": 1}, "n_clients"),
        ({"n_clients": 10, "rounds": 1, "defense": "krum"}, "defense"),
        ({"n_clients": 10, "rounds": 1, "filter": {"mode": "both"}}, "filter.mode"),
        ({"n_clients": 10, "rounds": 0}, "rounds"),
        ({"n_clients": 10, "rounds": 1, "attack": {"trigger": {"trigger_coords": [9]}}}, "attack.trigger"),
    ])
    def test_rejected(self, raw, field):
        with pytest.raises(ConfigError) as info:
            config_from_dict(raw)
        assert info.value.path.startswith(field)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_config(tmp_path / "absent.yaml")

    def test_malformed_yaml(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, "n_clients: [10\n"))

    def test_top_level_not_mapping(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, "- 1\n- 2\n"))


@pytest.mark.parametrize("name", ["minimal.yaml", "s1.yaml"])
def test_roundtrip(tmp_path, name):
    cfg = parse_config(CONFIG_DIR / name)
    text = serialize_config(cfg)
    assert parse_config(write(tmp_path, text)) == cfg
    assert yaml.safe_load(text)["n_clients"] == cfg.n_clients


def test_replace_revalidates():
    cfg = config_from_dict({"n_clients": 10, "rounds": 1})
    with pytest.raises(ConfigError):
        cfg.replace(pmr=0.9)
