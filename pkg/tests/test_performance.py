# tests/test_performance.py - Performance Tests

import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
import pytest

from models import ExponentialSpec, RotorSpec
from services.observables import angular_momentum_report, autocorrelation, closed_form_moments, diatomic_spectrum
from services.revivals import clone_report, gauss_decompose
from services.states import exponential_wp
from services.toprotor import top_clone_check


class TestPerformance:
    """Test runtime of the main computations"""

    def test_expansion_performance(self):
        """Test building a large packet"""
        start_time = time.time()
        state = exponential_wp(ExponentialSpec(50, 0.5))
        build_time = time.time() - start_time

        assert state.norm() == pytest.approx(1.0, abs=1e-12)
        assert build_time < 5.0

    def test_moment_performance(self, elliptic_state):
        """Test ladder-operator moments against the closed form"""
        start_time = time.time()
        for _ in range(20):
            angular_momentum_report(elliptic_state)
        report_time = time.time() - start_time

        start_time = time.time()
        for _ in range(20):
            closed_form_moments(20, 0.5)
        closed_time = time.time() - start_time

        assert report_time < 2.0
        assert closed_time < 0.5

    def test_decomposition_performance(self):
        """Test Gauss decompositions for every reduced fraction up to 1/64"""
        start_time = time.time()
        count = 0
        for n in range(1, 65):
            for m in range(n):
                if math.gcd(m, n) == 1:
                    gauss_decompose(m, n)
                    count += 1
        decompose_time = time.time() - start_time

        assert count > 1000
        assert decompose_time < 5.0

    def test_autocorrelation_performance(self, circular_state):
        """Test a figure-resolution autocorrelation"""
        spectrum = diatomic_spectrum()
        times = np.linspace(0.0, spectrum.T_rev / 2, 4096)

        start_time = time.time()
        values = autocorrelation(circular_state, spectrum, times)
        autocorr_time = time.time() - start_time

        assert values.shape == (4096,)
        assert autocorr_time < 3.0

    def test_clone_report_performance(self, elliptic_state):
        """Test clone classification with the full rotation sweep"""
        start_time = time.time()
        report = clone_report(elliptic_state, 1, 6)
        clone_time = time.time() - start_time

        assert len(report.entries) == 3
        assert clone_time < 10.0

    def test_top_clone_performance(self, top_state):
        """Test the nine-wave top grid"""
        spec = RotorSpec(omega0=1.0, delta=0.5, rational_delta=(2, 1))

        start_time = time.time()
        report = top_clone_check(top_state, 1, 3, spec)
        top_time = time.time() - start_time

        assert report.wave_count == 9
        assert top_time < 5.0


class TestConcurrency:
    """Test read-only use of shared packets from several threads"""

    def test_concurrent_reports(self, elliptic_state):
        """Test concurrent clone reports agree"""

        def run_report(n):
            report = clone_report(elliptic_state, 1, n)
            return n, tuple((e.s, e.verdict) for e in report.entries)

        num_threads = 8
        denominators = [3, 4, 5, 6] * 2
        with ThreadPoolExecutor(max_workers=num_threads) as executor:
            futures = [executor.submit(run_report, n) for n in denominators]

            results = []
            for future in as_completed(futures):
                results.append(future.result())

        assert len(results) == num_threads
        by_n = {}
        for n, verdicts in results:
            by_n.setdefault(n, set()).add(verdicts)
        assert all(len(v) == 1 for v in by_n.values())

    def test_concurrent_service_runs(self, service, tmp_path):
        """Test concurrent runs into separate directories"""

        def run(index):
            target = str(tmp_path / f'run{index}')
            bundle, message, code = service.run_text('task=decompose\ntimes=1/3,1/4,2/5', output_dir=target)
            return code, (tmp_path / f'run{index}' / 'decompose_t2.csv').read_bytes()

        with ThreadPoolExecutor(max_workers=4) as executor:
            results = list(executor.map(run, range(4)))

        assert all(code == 0 for code, _ in results)
        assert len({content for _, content in results}) == 1
