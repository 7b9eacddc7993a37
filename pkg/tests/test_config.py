# tests/test_config.py - Configuration Tests

import importlib
import os

import pytest

import config as config_module
from config import Config, DevelopmentConfig, ProductionConfig, TestingConfig


def reload_with(env):
    """Reload the config module with extra environment variables; returns the module"""
    saved = {key: os.environ.get(key) for key in env}
    os.environ.update(env)
    try:
        return importlib.reload(config_module)
    finally:
        for key, value in saved.items():
            if value is None:
                del os.environ[key]
            else:
                os.environ[key] = value


@pytest.fixture
def reloaded():
    """Restore the module after environment-driven reloads"""
    yield reload_with
    importlib.reload(config_module)


class TestConfiguration:
    """Test configuration classes"""

    def test_base_config(self):
        """Test base configuration"""
        assert Config.VERSION == '1.0.0'
        assert Config.L_MAX_CAP == 512
        assert Config.DENOMINATOR_CAP == 64
        assert Config.TAIL_TOL == pytest.approx(1e-12)
        assert Config.GRID_TAIL_TOL == pytest.approx(1e-20)
        assert Config.CSV_DIGITS == 17

    def test_default_grids(self):
        """Test figure-resolution grid defaults"""
        assert (Config.THETA_NODES, Config.PHI_NODES) == (181, 361)
        assert Config.TORUS_NODES == 256
        assert Config.AUTOCORR_SAMPLES == 4096

    def test_development_config(self):
        """Test development configuration"""
        assert DevelopmentConfig.DEBUG is True
        assert DevelopmentConfig.TESTING is False

    def test_production_config(self):
        """Test production configuration"""
        assert ProductionConfig.DEBUG is False
        assert ProductionConfig.TESTING is False
        if 'LOG_FORMAT' not in os.environ:
            assert ProductionConfig.LOG_FORMAT == 'json'

    def test_testing_config(self):
        """Test testing configuration"""
        assert TestingConfig.TESTING is True
        assert TestingConfig.LOG_LEVEL == 'WARNING'
        assert (TestingConfig.THETA_NODES, TestingConfig.PHI_NODES) == (37, 73)
        assert TestingConfig.TORUS_NODES == 64
        assert TestingConfig.L_MAX_CAP == Config.L_MAX_CAP

    def test_environment_variables(self, reloaded):
        """Test configuration from environment variables"""
        module = reloaded({'L_MAX_CAP': '128', 'TAIL_TOL': '1e-9', 'ROTOR_OUTPUT_DIR': '/tmp/rotor_runs',
                           'LOG_TO_STDOUT': 'false'})
        assert module.Config.L_MAX_CAP == 128
        assert module.Config.TAIL_TOL == pytest.approx(1e-9)
        assert module.Config.OUTPUT_DIR == '/tmp/rotor_runs'
        assert module.Config.LOG_TO_STDOUT is False
        assert module.TestingConfig.L_MAX_CAP == 128

    def test_config_selection(self, monkeypatch):
        """Test configuration selection based on environment"""
        monkeypatch.setenv('ROTOR_ENV', 'production')
        assert config_module.get_config() is config_module.ProductionConfig

        monkeypatch.setenv('ROTOR_ENV', 'testing')
        assert config_module.get_config() is config_module.TestingConfig

        monkeypatch.setenv('ROTOR_ENV', 'staging')
        assert config_module.get_config() is config_module.DevelopmentConfig

        monkeypatch.delenv('ROTOR_ENV')
        assert config_module.get_config() is config_module.DevelopmentConfig


class TestConfigurationValidation:
    """Test configuration validation"""

    def test_required_settings_present(self):
        """Test that required settings are present"""
        required_settings = [
            'VERSION', 'LOG_LEVEL', 'LOG_FORMAT', 'OUTPUT_DIR', 'TAIL_TOL', 'GRID_TAIL_TOL', 'L_MAX_CAP',
            'DENOMINATOR_CAP', 'CLONE_THRESHOLD', 'ROTATION_SWEEP',
        ]
        for config_class in (DevelopmentConfig, ProductionConfig, TestingConfig):
            for setting in required_settings:
                assert getattr(config_class, setting) is not None, setting

    def test_clone_settings(self):
        """Test clone classification defaults"""
        assert 0 < Config.CLONE_THRESHOLD < 1e-3
        assert Config.ROTATION_SWEEP >= 360

    def test_malformed_number_rejected(self, reloaded):
        """Test non-numeric overrides fail at import"""
        with pytest.raises(ValueError):
            reloaded({'L_MAX_CAP': 'many'})
