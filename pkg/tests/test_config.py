import pytest

from pulseline.config import ServiceConfig, load_config


class TestLoadConfig:
    def test_defaults_without_file(self):
        config = load_config(None)
        assert config.dsp.ppg_band_hz == (0.5, 2.5)
        assert config.router.prices_per_1k["o1"] == 0.015
        assert config.orchestrator.thresholds.spo2_low == 92.0

    def test_yaml_overrides_nested_fields(self, tmp_path):
        path = tmp_path / "service.yaml"
        path.write_text(
            "dsp:\n"
            "  dc_floor: 2000.0\n"
            "  ppg_band_hz: [0.4, 3.0]\n"
            "orchestrator:\n"
            "  thresholds:\n"
            "    hr_high: 140.0\n"
            "scheduler:\n"
            "  daily_summary_cron: '0 8 * * *'\n")
        config = load_config(path)
        assert config.dsp.dc_floor == 2000.0
        assert config.dsp.ppg_band_hz == (0.4, 3.0)
        assert config.orchestrator.thresholds.hr_high == 140.0
        assert config.scheduler.daily_summary_cron == "0 8 * * *"
        # untouched defaults survive
        assert config.dsp.counts_per_g == 256.0

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("dsp:\n  warp_speed: 9\n")
        with pytest.raises(KeyError):
            load_config(path)

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("- just\n- a list\n")
        with pytest.raises(ValueError):
            load_config(path)

    def test_live_model_env_resolution(self, monkeypatch):
        config = ServiceConfig()
        monkeypatch.setenv("PULSELINE_API_ENDPOINT", "https://env.example/v1")
        monkeypatch.setenv("PULSELINE_API_KEY", "sk-test")
        assert config.live_model.resolve_endpoint() == "https://env.example/v1"
        assert config.live_model.resolve_api_key() == "sk-test"
