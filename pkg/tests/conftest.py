# tests/conftest.py - Test Configuration and Fixtures

import os

os.environ.setdefault('ROTOR_ENV', 'testing')

import numpy as np
import pytest
from click.testing import CliRunner

from config import TestingConfig
from models import ExponentialSpec, TopSpec
from services.run_service import RunService
from services.states import exponential_wp, janssen_top_state


@pytest.fixture(scope='session')
def circular_state():
    """Circular packet N=20, eta=1"""
    return exponential_wp(ExponentialSpec(20, 1.0))


@pytest.fixture(scope='session')
def elliptic_state():
    """Elliptic packet N=20, eta=0.5"""
    return exponential_wp(ExponentialSpec(20, 0.5))


@pytest.fixture(scope='session')
def linear_state():
    """Linear packet N=20, eta=0"""
    return exponential_wp(ExponentialSpec(20, 0.0))


@pytest.fixture(scope='session')
def top_state():
    """Symmetric-top packet r=4, lambda=pi/2"""
    return janssen_top_state(TopSpec(4.0, np.pi / 2))


@pytest.fixture
def service():
    """Run service on the testing configuration"""
    return RunService(TestingConfig)


@pytest.fixture
def runner():
    """A test runner for the Click commands."""
    return CliRunner()


@pytest.fixture
def output_dir(tmp_path):
    """Fresh output directory per test"""
    return str(tmp_path / 'out')


@pytest.fixture
def coefficient_error():
    """Max coefficient difference over the degrees both states keep"""
    def compare(a, b):
        l_max = max(a.l_max, b.l_max)
        rows = min(a.l_max, b.l_max) + 1
        diff = a.padded(l_max).coefficients[:rows] - b.padded(l_max).coefficients[:rows]
        return float(np.max(np.abs(diff)))
    return compare
