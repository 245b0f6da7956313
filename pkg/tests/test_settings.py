import pytest

from shared.core.exceptions import ConfigError
from shared.core.settings import (SimSettings, dump_config, get_config,
                                  parse_overrides)
from shared.schemas.v1 import Policy


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("OPETRL_CONFIG", raising=False)


class TestOverrides:
    def test_dotted_and_nested_keys(self):
        parsed = parse_overrides(["system.p_max=1e-5", "run__seed = 4", "SYSTEM.deadline_c=12"])
        assert parsed == {"system": {"p_max": "1e-5", "deadline_c": "12"}, "run": {"seed": "4"}}

    @pytest.mark.parametrize("item", ["system.p_max", "p_max=1", "a.b.c=1", ".x=1"])
    def test_rejects_malformed(self, item):
        with pytest.raises(ConfigError):
            parse_overrides([item])


class TestGetConfig:
    def test_defaults(self):
        settings = get_config()
        assert settings.system.raw_bits_s == 20000
        assert settings.system.feature_bits == 24576
        assert settings.run.policy == Policy.OPETRL

    def test_file_and_overrides(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("# comment\nsystem__p_max = 1e-5\nrun__policy = greedy\n", encoding="utf-8")
        settings = get_config(str(path), ["system.deadline_c=12"])
        assert settings.system.p_max == 1e-5
        assert settings.system.deadline_c == 12
        assert settings.run.policy == Policy.GREEDY

    def test_override_beats_file(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("saa__k_samples = 10\n", encoding="utf-8")
        assert get_config(str(path), ["saa.k_samples=3"]).saa.k_samples == 3

    def test_local_file_is_picked_up(self, tmp_path):
        (tmp_path / "opetrl.conf").write_text("agent__hidden = 16\n", encoding="utf-8")
        assert get_config().agent.hidden == 16

    def test_environment_variable_path(self, tmp_path, monkeypatch):
        path = tmp_path / "from_env.conf"
        path.write_text("run__workers = 3\n", encoding="utf-8")
        monkeypatch.setenv("OPETRL_CONFIG", str(path))
        assert get_config().run.workers == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            get_config(str(tmp_path / "absent.conf"))

    @pytest.mark.parametrize(
        "override",
        [
            "system.p_max=-1",
            "system.unknown_field=1",
            "system.batt_init_e0=1.0",
            "run.horizon_slots=5",
            "agent.minibatch=5000",
        ],
    )
    def test_invalid_values(self, override):
        with pytest.raises(ConfigError):
            get_config(None, [override])


def test_dump_config_reloads(tmp_path):
    settings = SimSettings(system={"p_max": 2e-6, "channel_model": "deterministic"}, run={"seed": 9})
    path = tmp_path / "out" / "config.conf"
    dump_config(settings, path)
    assert "# run__checkpoint =" in path.read_text(encoding="utf-8")
    assert get_config(str(path)) == settings
