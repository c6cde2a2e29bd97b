"""Configuration management for sparsebound."""

from src.config.manager import RunConfig, SparseBoundConfigManager, check_config_name, resolve_run_config

__all__ = ["RunConfig", "SparseBoundConfigManager", "check_config_name", "resolve_run_config"]
