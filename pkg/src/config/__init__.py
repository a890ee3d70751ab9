"""Configuration package."""

from pathlib import Path

from src.config.config_manager import ConfigManager, builtin_defaults

DEFAULT_CONFIG_PATH = str(Path(__file__).resolve().parents[2] / "config" / "default_config.yaml")

__all__ = ["ConfigManager", "DEFAULT_CONFIG_PATH", "builtin_defaults"]
