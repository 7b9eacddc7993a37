# config.py - Configuration settings for rotor wave-packet runs

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _flag(name, default):
    return os.environ.get(name, default).lower() == 'true'


class Config:
    """Base configuration class"""

    VERSION = '1.0.0'

    # Logging settings
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FORMAT = os.environ.get('LOG_FORMAT', 'text')
    LOG_TO_STDOUT = _flag('LOG_TO_STDOUT', 'True')
    LOG_FOLDER = os.environ.get('LOG_FOLDER', 'logs')

    # Output settings
    OUTPUT_DIR = os.environ.get('ROTOR_OUTPUT_DIR', 'output')
    CSV_DIGITS = int(os.environ.get('CSV_DIGITS', 17))

    # Truncation and numerics
    TAIL_TOL = float(os.environ.get('TAIL_TOL', 1e-12))
    # pointwise density and carpet grids
    GRID_TAIL_TOL = float(os.environ.get('GRID_TAIL_TOL', 1e-20))
    L_MAX_CAP = int(os.environ.get('L_MAX_CAP', 512))
    DENOMINATOR_CAP = int(os.environ.get('DENOMINATOR_CAP', 64))

    # Grid defaults
    THETA_NODES = int(os.environ.get('THETA_NODES', 181))
    PHI_NODES = int(os.environ.get('PHI_NODES', 361))
    TORUS_NODES = int(os.environ.get('TORUS_NODES', 256))
    TIME_NODES = int(os.environ.get('TIME_NODES', 512))
    AUTOCORR_SAMPLES = int(os.environ.get('AUTOCORR_SAMPLES', 4096))

    # Clone classification
    CLONE_THRESHOLD = float(os.environ.get('CLONE_THRESHOLD', 1e-6))
    ROTATION_SWEEP = int(os.environ.get('ROTATION_SWEEP', 1024))


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    TESTING = False

    # Structured logs for batch runs
    LOG_FORMAT = os.environ.get('LOG_FORMAT', 'json')


class TestingConfig(Config):
    """Testing configuration"""
    DEBUG = True
    TESTING = True

    LOG_LEVEL = 'WARNING'
    LOG_TO_STDOUT = True

    # Smaller grids keep the suite fast
    THETA_NODES = 37
    PHI_NODES = 73
    TORUS_NODES = 64
    TIME_NODES = 64
    AUTOCORR_SAMPLES = 256


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Get configuration based on environment"""
    env = os.environ.get('ROTOR_ENV', 'development')
    return config.get(env, config['default'])
