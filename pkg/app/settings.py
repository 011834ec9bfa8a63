"""
Settings management for dimshape.
Resolves the default run document, worker count and output directory from
the JSON defaults file and the environment.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from . import strings
from .errors import ConfigError
from .models import RunConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join("data", "run_config.json")
DEFAULT_GRIDS_PATH = os.path.join("data", "disturbance_grids.json")
DEFAULT_OUT_DIR = "runs"
WORKERS_ENV = "DIMSHAPE_WORKERS"
OUT_ENV = "DIMSHAPE_OUT"


class Settings:
    """Centralized settings for a dimshape process."""

    def __init__(self, config_path: Optional[str] = None, grids_path: Optional[str] = None):
        """
        Args:
            config_path: JSON run document used as defaults
            grids_path: JSON file with per-environment calibration grids
        """
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.grids_path = grids_path or DEFAULT_GRIDS_PATH
        self.document = self._load_json(self.config_path)
        self.grids = self._load_json(self.grids_path)

    @staticmethod
    def _load_json(path: str) -> Dict[str, Any]:
        try:
            if os.path.exists(path):
                with open(path, "r", encoding="utf-8") as f:
                    return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(strings.LOG_SETTINGS_FALLBACK, path, e)
        return {}

    def run_config(self, overrides: Optional[Dict[str, Any]] = None, path: Optional[str] = None) -> RunConfig:
        """
        Validated run document: defaults file (or `path`) with `overrides`
        merged on top, one level deep for nested sections.
        """
        document = dict(self._load_json_strict(path) if path else self.document)
        for key, value in (overrides or {}).items():
            if isinstance(value, dict) and isinstance(document.get(key), dict):
                document[key] = {**document[key], **value}
            else:
                document[key] = value
        try:
            return RunConfig.model_validate(document)
        except ValidationError as e:
            raise ConfigError(strings.ERROR_CONFIG.format(e)) from e

    @staticmethod
    def _load_json_strict(path: str) -> Dict[str, Any]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(strings.ERROR_CONFIG.format(e)) from e
        if not isinstance(document, dict):
            raise ConfigError(strings.ERROR_CONFIG.format("top level is not an object"))
        return document

    def workers(self, flag: Optional[int] = None, config: Optional[RunConfig] = None) -> int:
        """--workers > DIMSHAPE_WORKERS > config > 1."""
        if flag is not None:
            return max(1, flag)
        env_value = os.getenv(WORKERS_ENV)
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError as e:
                raise ConfigError(strings.ERROR_CONFIG.format(f"{WORKERS_ENV}={env_value!r}")) from e
        if config is not None and config.workers is not None:
            return config.workers
        return 1

    def out_dir(self, flag: Optional[str] = None) -> Path:
        """--out > DIMSHAPE_OUT > runs/."""
        return Path(flag or os.getenv(OUT_ENV) or DEFAULT_OUT_DIR)

    def grid(self, env: str, kind: str) -> Dict[str, Any]:
        return self.grids.get(env, {}).get(kind, {})

    def __repr__(self) -> str:
        return f"Settings(config='{self.config_path}', grids='{self.grids_path}')"


# Global settings instance
_settings_instance = None


def get_settings() -> Settings:
    """Get global settings instance."""
    global _settings_instance
    if _settings_instance is None:
        _settings_instance = Settings()
    return _settings_instance


def reset_settings():
    """Reset global settings instance."""
    global _settings_instance
    _settings_instance = None
