"""
Tests for settings resolution and the run document.
"""

import json

import pytest

from app.errors import ConfigError
from app.models import ArsConfig, PostprocessorKind, RunConfig
from app.settings import Settings, get_settings, reset_settings


@pytest.fixture
def settings(tmp_path, monkeypatch):
    monkeypatch.delenv("DIMSHAPE_WORKERS", raising=False)
    monkeypatch.delenv("DIMSHAPE_OUT", raising=False)
    config = tmp_path / "run_config.json"
    config.write_text(json.dumps({"env": "hopper1d", "ars": {"epochs": 7}, "workers": 3}))
    grids = tmp_path / "grids.json"
    grids.write_text(json.dumps({"hopper1d": {"push": {"rate": 0.2, "values": [0.0, 5.0]}}}))
    return Settings(config_path=str(config), grids_path=str(grids))


def test_defaults_are_published_hyperparameters():
    """alpha .02, sigma .025, N 50, b 20, f 1.5, d0 1e-2, Tr 200"""
    config = RunConfig()
    assert (config.ars.alpha, config.ars.sigma) == (0.02, 0.025)
    assert (config.ars.n_directions, config.ars.top_directions) == (50, 20)
    assert (config.post.mesh.f, config.post.mesh.d0, config.post.transient) == (1.5, 1e-2, 200)


def test_unknown_keys_rejected():
    with pytest.raises(ValueError):
        RunConfig.model_validate({"env": "pendulum", "colour": "blue"})
    with pytest.raises(ValueError):
        ArsConfig(n_directions=4, top_directions=5)
    with pytest.raises(ValueError):
        RunConfig(env="halfcheetah")


def test_overrides_merge_one_level(settings):
    """Overrides replace single fields inside nested sections"""
    config = settings.run_config({"ars": {"rollout_length": 100}, "post": {"kind": "madogram"}})
    assert config.env == "hopper1d"
    assert config.ars.epochs == 7
    assert config.ars.rollout_length == 100
    assert config.post.kind == PostprocessorKind.MADOGRAM


def test_invalid_document_is_config_error(settings, tmp_path):
    with pytest.raises(ConfigError):
        settings.run_config({"ars": {"alpha": -1.0}})
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2")
    with pytest.raises(ConfigError):
        settings.run_config(path=str(broken))


def test_missing_defaults_file_falls_back(tmp_path):
    """An absent defaults file yields the built-in defaults"""
    settings = Settings(config_path=str(tmp_path / "none.json"), grids_path=str(tmp_path / "none.json"))
    assert settings.run_config().env == "pendulum"
    assert settings.grid("hopper1d", "push") == {}


def test_worker_precedence(settings, monkeypatch):
    """flag > DIMSHAPE_WORKERS > config > 1"""
    config = settings.run_config()
    assert settings.workers(None, config) == 3
    monkeypatch.setenv("DIMSHAPE_WORKERS", "5")
    assert settings.workers(None, config) == 5
    assert settings.workers(2, config) == 2
    monkeypatch.setenv("DIMSHAPE_WORKERS", "many")
    with pytest.raises(ConfigError):
        settings.workers(None, config)
    monkeypatch.delenv("DIMSHAPE_WORKERS")
    assert settings.workers() == 1


def test_out_dir_precedence(settings, monkeypatch):
    """flag > DIMSHAPE_OUT > runs"""
    assert str(settings.out_dir()) == "runs"
    monkeypatch.setenv("DIMSHAPE_OUT", "/tmp/elsewhere")
    assert str(settings.out_dir()) == "/tmp/elsewhere"
    assert str(settings.out_dir("mine")) == "mine"


def test_grid_lookup(settings):
    assert settings.grid("hopper1d", "push")["values"] == [0.0, 5.0]
    assert settings.grid("pendulum", "push") == {}


def test_global_instance_is_cached():
    reset_settings()
    assert get_settings() is get_settings()
    reset_settings()
