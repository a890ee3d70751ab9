"""Tests for configuration loading and the run configuration."""

import os
import tempfile

import pytest

from src.cli import RunConfig
from src.config import DEFAULT_CONFIG_PATH, ConfigManager, builtin_defaults
from src.exceptions import ConfigError, ValidationError
from src.models import Algorithm, InitKind, PenaltyFamily


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep the test environment from leaking into config loading."""
    monkeypatch.delenv("COCO_THREADS", raising=False)
    monkeypatch.delenv("CCROBUST_LOG_LEVEL", raising=False)


def _write_config(text):
    with tempfile.NamedTemporaryFile(mode="w", suffix=".yaml", delete=False) as f:
        f.write(text)
        return f.name


class TestConfigManager:
    """Test layered configuration loading."""

    def test_defaults(self):
        """Test the shipped defaults are loaded."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        assert config.get("fit.algorithm") == "coco"
        assert config.get("fit.outer_tol") == 1e-6
        assert config.get("penalty.scad_a") == 3.7
        assert config.get("logging.level") == "WARNING"
        assert config.get("nothing.here", 5) == 5

    def test_yaml_matches_builtin_defaults(self):
        """Test the YAML file and the in-code fallback agree."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        assert config.config_data == builtin_defaults()

    def test_missing_default_file_falls_back(self):
        """Test built-in defaults are used when the default file is missing."""
        config = ConfigManager.load(default_path="/nonexistent/default.yaml")
        assert config.get("simulation.runs") == 100
        assert config.get("inner.max_halvings") == 20

    def test_user_file_overrides(self):
        """Test a user file overrides nested keys and keeps the rest."""
        path = _write_config("fit:\n  max_outer: 7\npenalty:\n  family: scad\n")
        try:
            config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH, user_path=path)
        finally:
            os.unlink(path)
        assert config.get("fit.max_outer") == 7
        assert config.get("fit.algorithm") == "coco"
        assert config.get("penalty.family") == "scad"

    def test_missing_user_file(self):
        """Test a missing user file is an error."""
        with pytest.raises(ConfigError, match="not found"):
            ConfigManager.load(default_path=DEFAULT_CONFIG_PATH, user_path="/nonexistent.yaml")

    def test_unknown_key_rejected(self):
        """Test the first unknown dotted key is named."""
        path = _write_config("fit:\n  max_outter: 7\n")
        try:
            with pytest.raises(ConfigError, match="Unknown configuration key: fit.max_outter"):
                ConfigManager.load(default_path=DEFAULT_CONFIG_PATH, user_path=path)
        finally:
            os.unlink(path)

    def test_run_section_allowed(self):
        """Test the run section passes key validation."""
        path = _write_config("run:\n  concave: ccave\n  sigma: 1.5\n")
        try:
            config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH, user_path=path)
        finally:
            os.unlink(path)
        assert config.section("run") == {"concave": "ccave", "sigma": 1.5}

    def test_non_mapping_rejected(self):
        """Test a top-level list is rejected."""
        path = _write_config("- a\n- b\n")
        try:
            with pytest.raises(ConfigError):
                ConfigManager.load(default_path=DEFAULT_CONFIG_PATH, user_path=path)
        finally:
            os.unlink(path)

    def test_env_overrides(self, monkeypatch):
        """Test CCROBUST_LOG_LEVEL and COCO_THREADS."""
        monkeypatch.setenv("CCROBUST_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("COCO_THREADS", "3")
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        assert config.get("logging.level") == "DEBUG"
        assert config.get("simulation.max_workers") == 3

    @pytest.mark.parametrize("value", ["zero", "0", "-2"])
    def test_invalid_thread_count(self, monkeypatch, value):
        """Test COCO_THREADS must be a positive integer."""
        monkeypatch.setenv("COCO_THREADS", value)
        with pytest.raises(ConfigError, match="COCO_THREADS"):
            ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)

    def test_cli_overrides_win(self, monkeypatch):
        """Test CLI overrides are applied after the environment."""
        monkeypatch.setenv("CCROBUST_LOG_LEVEL", "ERROR")
        config = ConfigManager.load(
            default_path=DEFAULT_CONFIG_PATH,
            cli_overrides={"logging": {"level": "DEBUG"}, "simulation": {"workers": 1}},
        )
        assert config.get("logging.level") == "DEBUG"
        assert config.get("simulation.workers") == 1

    def test_section_is_a_copy(self):
        """Test mutating a section does not change the manager."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        config.section("fit")["max_outer"] = 1
        assert config.get("fit.max_outer") == 200
        assert config.section("run") == {}


class TestTypedViews:
    """Test the typed settings built from configuration sections."""

    def test_fit_config(self):
        """Test FitConfig picks up the file values and overrides."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        fit_config = config.fit_config(algorithm="cocotv", trim_h=40, init=None)
        assert fit_config.algorithm is Algorithm.COCOTV
        assert fit_config.trim_h == 40
        assert fit_config.init is None
        assert fit_config.inner.glm_tol == 1e-6

    def test_fit_config_init(self):
        """Test string init values are coerced."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        assert config.fit_config(init="trimmedStart").init is InitKind.TRIMMED

    def test_fit_config_validation(self):
        """Test cocotv without h is rejected."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        with pytest.raises(ValidationError):
            config.fit_config(algorithm="cocotv")

    def test_penalty_spec(self):
        """Test PenaltySpec uses the section and drops None overrides."""
        config = ConfigManager.load(default_path=DEFAULT_CONFIG_PATH)
        spec = config.penalty_spec(0.3, family="scad", alpha=None)
        assert spec.family is PenaltyFamily.SCAD
        assert spec.lam == 0.3
        assert spec.alpha == 1.0
        assert spec.scad_a == 3.7

    def test_invalid_inner_setting(self):
        """Test a bad inner value surfaces as a configuration error."""
        config = ConfigManager.load(
            default_path=DEFAULT_CONFIG_PATH, cli_overrides={"inner": {"bogus": 1}}
        )
        with pytest.raises(ValidationError):
            config.inner_settings()


class TestRunConfig:
    """Test the per-invocation run configuration."""

    def test_lambda_key(self):
        """Test 'lambda' maps to lam in both directions."""
        run = RunConfig.from_dict({"command": "fit", "lambda": "0.25", "columns": ["a", "b"]})
        assert run.lam == 0.25
        assert run.columns == ("a", "b")
        data = run.to_dict()
        assert data["lambda"] == 0.25
        assert "lam" not in data
        assert data["columns"] == ["a", "b"]
        assert RunConfig.from_dict(data) == run

    def test_tune(self):
        """Test the 'tune' sentinel."""
        assert RunConfig(lam="tune").tuned
        assert not RunConfig(lam=0.0).tuned

    def test_invalid_values(self):
        """Test bad lambda, command, check and keys are rejected."""
        with pytest.raises(ConfigError):
            RunConfig(lam="lots")
        with pytest.raises(ConfigError):
            RunConfig(command="train")
        with pytest.raises(ConfigError):
            RunConfig(command="diagnose", check="roundness")
        with pytest.raises(ConfigError, match="Unknown run configuration key: sigm"):
            RunConfig.from_dict({"sigm": 1.0})
