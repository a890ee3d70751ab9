"""
Configuration manager for loading and managing application configuration.

This module handles loading configuration from YAML files and providing
access to configuration options throughout the application.
"""

import copy
import logging
import os
from typing import Any, Dict, Iterator, Optional, Tuple

import yaml

from src.exceptions import ConfigError
from src.models import FitConfig, InnerSettings, PenaltySpec

logger = logging.getLogger(__name__)

# Sections a user file may carry besides the defaults
EXTRA_SECTIONS = ("run",)


def _walk(data: Dict[str, Any], prefix: str = "") -> Iterator[Tuple[str, Any]]:
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        yield dotted, value
        if isinstance(value, dict):
            yield from _walk(value, f"{dotted}.")


class ConfigManager:
    """
    Manager for loading and accessing configuration.

    Configuration is loaded from multiple sources in this order:
    1. Default configuration (config/default_config.yaml)
    2. User-provided configuration file (YAML or JSON)
    3. Environment variables (CCROBUST_LOG_LEVEL, COCO_THREADS)
    4. CLI argument overrides
    """

    def __init__(self, default_config_path: str):
        """
        Initialize configuration manager.

        Args:
            default_config_path: Path to default configuration file
        """
        self.default_config_path = default_config_path
        self.config_data: Dict[str, Any] = {}

    @classmethod
    def load(
        cls,
        default_path: str = "config/default_config.yaml",
        user_path: Optional[str] = None,
        cli_overrides: Optional[Dict[str, Any]] = None,
    ) -> "ConfigManager":
        """
        Load configuration from multiple sources.

        Args:
            default_path: Path to default configuration
            user_path: Optional path to user configuration file
            cli_overrides: Optional dictionary of CLI argument overrides

        Returns:
            ConfigManager instance with loaded configuration

        Raises:
            ConfigError: If the user file is missing, unparsable or has unknown keys
        """
        manager = cls(default_path)
        manager._load_yaml(default_path)

        if user_path:
            if not os.path.exists(user_path):
                raise ConfigError(f"Configuration file not found: {user_path}")
            user_config = manager._load_yaml_file(user_path)
            manager.validate_keys(user_config)
            manager._merge_config(user_config)

        manager._apply_env_overrides()

        if cli_overrides:
            manager._merge_config(cli_overrides)

        return manager

    def _load_yaml(self, path: str) -> None:
        """
        Load the default YAML configuration file.

        Args:
            path: Path to YAML file
        """
        try:
            with open(path, encoding="utf-8") as f:
                self.config_data = yaml.safe_load(f) or {}
        except FileNotFoundError:
            logger.warning("Configuration file not found: %s; using built-in defaults", path)
            self.config_data = builtin_defaults()
        except yaml.YAMLError as e:
            raise ConfigError(f"Error parsing YAML configuration {path}: {e}") from e

    def _load_yaml_file(self, path: str) -> Dict[str, Any]:
        """
        Load YAML file and return as dictionary.

        Args:
            path: Path to YAML file

        Returns:
            Dictionary with configuration data
        """
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Error parsing configuration {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration {path} must be a mapping at the top level")
        return data

    def validate_keys(self, user_config: Dict[str, Any]) -> None:
        """
        Reject keys that do not exist in the defaults.

        Args:
            user_config: Parsed user configuration

        Raises:
            ConfigError: Naming the first unknown dotted key
        """
        for dotted, _ in _walk(user_config):
            top = dotted.split(".")[0]
            if top in EXTRA_SECTIONS:
                continue
            if self.get(dotted, _MISSING) is _MISSING:
                raise ConfigError(f"Unknown configuration key: {dotted}")

    def _merge_config(self, new_config: Dict[str, Any]) -> None:
        """
        Merge new configuration into existing configuration.

        Args:
            new_config: New configuration dictionary to merge
        """
        self._deep_merge(self.config_data, new_config)

    def _deep_merge(self, base: Dict, update: Dict) -> None:
        """
        Deep merge update dictionary into base dictionary.

        Args:
            base: Base dictionary to update
            update: Dictionary with updates
        """
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = copy.deepcopy(value)

    def _apply_env_overrides(self) -> None:
        """Apply environment variable overrides to configuration."""
        env_log_level = os.getenv("CCROBUST_LOG_LEVEL")
        if env_log_level:
            self.config_data.setdefault("logging", {})["level"] = env_log_level

        env_threads = os.getenv("COCO_THREADS")
        if env_threads:
            try:
                threads = int(env_threads)
            except ValueError:
                raise ConfigError(f"COCO_THREADS must be an integer, got {env_threads!r}") from None
            if threads < 1:
                raise ConfigError(f"COCO_THREADS must be >= 1, got {threads}")
            self.config_data.setdefault("simulation", {})["max_workers"] = threads

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by key.

        Supports dot notation for nested keys (e.g., "inner.glm_tol")

        Args:
            key: Configuration key (supports dot notation)
            default: Default value if key doesn't exist

        Returns:
            Configuration value or default
        """
        value = self.config_data
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def section(self, name: str) -> Dict[str, Any]:
        """Return a copy of a top-level section ({} when absent)."""
        return copy.deepcopy(self.config_data.get(name) or {})

    def inner_settings(self) -> InnerSettings:
        """
        Build the inner-solver settings from the `inner` section.

        Returns:
            InnerSettings instance
        """
        try:
            return InnerSettings.from_dict(self.section("inner"))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid inner settings: {e}") from e

    def fit_config(self, **overrides: Any) -> FitConfig:
        """
        Build a FitConfig from the `fit` and `inner` sections.

        Args:
            **overrides: Field values that take precedence over the file

        Returns:
            FitConfig instance
        """
        values = self.section("fit")
        values.update({k: v for k, v in overrides.items() if v is not None})
        values["inner"] = self.inner_settings()
        try:
            return FitConfig(**values)
        except TypeError as e:
            raise ConfigError(f"Invalid fit configuration: {e}") from e

    def penalty_spec(self, lam: float = 0.0, **overrides: Any) -> PenaltySpec:
        """
        Build a PenaltySpec from the `penalty` section.

        Args:
            lam: Penalty level
            **overrides: family, alpha or scad_a values that take precedence

        Returns:
            PenaltySpec instance
        """
        values = self.section("penalty")
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return PenaltySpec(lam=lam, **values)
        except TypeError as e:
            raise ConfigError(f"Invalid penalty configuration: {e}") from e

    def __repr__(self) -> str:
        """String representation."""
        return f"ConfigManager(loaded={len(self.config_data)} sections)"


class _Missing:
    def __repr__(self) -> str:
        return "<missing>"


_MISSING = _Missing()


def builtin_defaults() -> Dict[str, Any]:
    """Defaults used when the YAML file is not available (e.g. in an installed wheel)."""
    inner = InnerSettings()
    return {
        "fit": {
            "algorithm": "coco",
            "outer_tol": 1e-6,
            "max_outer": 200,
            "init": None,
            "standardize": None,
            "n_starts": 20,
            "n_keep": 5,
        },
        "inner": {name: getattr(inner, name) for name in inner.__dataclass_fields__},
        "penalty": {"family": "lasso", "alpha": 1.0, "scad_a": 3.7},
        "simulation": {
            "runs": 100,
            "n_lambda": 50,
            "lambda_min_ratio": 1e-4,
            "failure_rate_limit": 0.2,
            "workers": None,
            "max_workers": None,
            "trimmed_rmse_fraction": 0.1,
            "support_threshold": 1e-8,
            "progress": True,
        },
        "diagnostics": {
            "fd_step": 1e-5,
            "knot_margin": 1e-4,
            "fisher_grid_min": -10.0,
            "fisher_grid_max": 10.0,
            "fisher_grid_size": 20001,
            "curve_grid_min": -5.0,
            "curve_grid_max": 5.0,
            "curve_grid_size": 1001,
        },
        "output": {"float_format": "%.10g"},
        "logging": {
            "level": "WARNING",
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            "file": None,
        },
    }
