#!/usr/bin/env python3
"""
Acceptance check script for the rotor wave-packet library
"""

import json
import logging
import math
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config import get_config  # noqa: E402
from models import BosonSpec, ExponentialSpec, RotorSpec, TopSpec  # noqa: E402
from services import observables, revivals, states, toprotor  # noqa: E402
from services.run_service import RunService  # noqa: E402
from utils.logging_config import setup_logging  # noqa: E402

logger = logging.getLogger(__name__)

PACKET_N = (1, 5, 20, 50)
PACKET_ETA = (0.0, 0.25, 0.5, 1.0, 2.0)
BOSON_THRESHOLD = 5e-3


class AcceptanceChecker:
    def __init__(self):
        self.checks = []
        self.results = {}

    def add_check(self, name, check_func, budget):
        """Add a check with its runtime budget in seconds"""
        self.checks.append((name, check_func, budget))

    def run_checks(self):
        """Run all checks"""
        all_passed = True

        for name, check_func, budget in self.checks:
            try:
                start_time = time.time()
                result = check_func()
                duration = time.time() - start_time
                in_budget = duration < budget

                self.results[name] = {
                    'status': 'passed' if result and in_budget else 'failed',
                    'duration': round(duration, 3),
                    'budget': budget,
                }

                if result and in_budget:
                    logger.info(f"PASS {name} ({duration:.3f}s)")
                else:
                    reason = 'over budget' if result else 'wrong result'
                    logger.error(f"FAIL {name} - {reason} ({duration:.3f}s of {budget}s)")
                    all_passed = False

            except Exception as e:
                self.results[name] = {'status': 'error', 'error': str(e)}
                logger.error(f"FAIL {name} - error: {e}")
                all_passed = False

        return all_passed

    def get_results(self):
        return self.results


def _packet(N, eta, tail_tol=1e-12):
    return states.exponential_wp(ExponentialSpec(N, eta), tail_tol)


def check_closed_form_moments():
    for N in PACKET_N:
        for eta in PACKET_ETA:
            report = observables.angular_momentum_report(_packet(N, eta))
            expected = observables.closed_form_moments(N, eta)
            for name in ('mean_Lz', 'mean_Lx2', 'mean_Ly2', 'mean_Lz2'):
                got, want = getattr(report, name), getattr(expected, name)
                if abs(got - want) > 1e-8 * abs(want) + 1e-10:
                    logger.error(f"N={N} eta={eta} {name}: {got} != {want}")
                    return False
    return True


def check_uncertainty():
    for N in PACKET_N:
        for eta in PACKET_ETA:
            if not observables.uncertainty_check(_packet(N, eta))['satisfied']:
                logger.error(f"N={N} eta={eta} is not intelligent")
                return False
    result = observables.uncertainty_check(states.quasi_intelligent_wp(10, 0.5, 0.5))
    return not result['satisfied'] and result['product'] - result['bound'] > 1e-3 * result['bound']


def check_density_closed_form():
    for eta in PACKET_ETA:
        grid = observables.density_grid(_packet(20, eta, get_config().GRID_TAIL_TOL))
        tt, pp = np.meshgrid(grid.theta_nodes, grid.phi_nodes, indexing='ij')
        if np.max(np.abs(grid.values - observables.closed_form_density(20, tt, pp))) >= 1e-8:
            logger.error(f"density mismatch at eta={eta}")
            return False
    return True


def check_gauss_sums():
    for n in range(1, 41):
        for m in range(n):
            if math.gcd(m, n) != 1:
                continue
            parts = revivals.gauss_decompose(m, n)
            case = revivals.expected_case(n)
            expected_q = n if case == 'a' else max(n // 2, 1)
            alive = parts.nonzero()
            if parts.q != expected_q or len(alive) != expected_q:
                return False
            if np.max(np.abs(np.abs(parts.a[alive]) - 1 / math.sqrt(parts.q))) > 1e-12:
                return False
    state = _packet(20, 0.5)
    for n in range(1, 13):
        for m in range(n):
            if math.gcd(m, n) != 1:
                continue
            rebuilt = revivals.recombine(revivals.fractional_waves(state, m, n))
            direct = revivals.evolve_rational(state, m, n)
            if np.max(np.abs(rebuilt.coefficients - direct.coefficients)) >= 1e-10:
                logger.error(f"reconstruction failed at {m}/{n}")
                return False
    return True


def check_cloning():
    circular = _packet(20, 1.0)
    for n in (3, 4, 5, 6, 7):
        if any(e.fidelity_best <= 1 - 1e-6 for e in revivals.clone_report(circular, 1, n).entries):
            return False
    rng = np.random.default_rng(11)
    general = states.general_wp(rng.normal(size=12) + 1j * rng.normal(size=12), 0.35)
    candidates = [_packet(20, eta) for eta in (0.0, 0.5, 1.0)] + [general]
    for state in candidates:
        for n in (3, 5, 6, 7, 9, 10):
            s0 = revivals.gauss_decompose(1, n).s0
            waves = {wave.s: wave for wave in revivals.fractional_waves(state, 1, n)}
            if np.max(np.abs(waves[s0].state.coefficients - state.coefficients)) >= 1e-12:
                return False
    return True


def check_half_revival():
    spectrum = observables.diatomic_spectrum()
    packets = [_packet(20, eta) for eta in (1.0, 0.5, 0.0)]
    packets.append(states.uniform_linear_wp(20))
    packets.append(states.boson_circular_state(BosonSpec(math.sqrt(39.0), Fraction(1, 2))))
    for state in packets:
        value = observables.autocorrelation(state, spectrum, [spectrum.T_rev / 2])[0]
        if abs(value - 1.0) >= 1e-12:
            return False
    return True


def check_boson_comparison():
    exponential = _packet(20, 1.0)
    boson = states.boson_circular_state(BosonSpec(math.sqrt(39.0), Fraction(1, 2)))
    size = max(exponential.l_max, boson.l_max) + 1
    left, right = np.zeros(size), np.zeros(size)
    left[:exponential.l_max + 1] = exponential.partial_wave_probabilities()
    right[:boson.l_max + 1] = boson.partial_wave_probabilities()
    difference = float(np.max(np.abs(left - right)))
    logger.info(f"boson comparison max |difference| = {difference:.3e}")
    return difference < BOSON_THRESHOLD


def check_janssen_moments():
    for r in (4.0, 8.0):
        for lam in (math.pi / 2, math.pi / 3):
            moments = toprotor.top_moments(states.janssen_top_state(TopSpec(r, lam)))
            if r == 8.0:
                if abs(moments.mean_Lz + r) > 1e-3 * r:
                    return False
                if abs(moments.mean_L2 - r * (r + 1.5)) > 1e-3 * r * (r + 1.5):
                    return False
                if abs(moments.mean_LZ + r * math.cos(lam)) > 1e-3 * r * abs(math.cos(lam)) + 1e-9:
                    return False
    moments = toprotor.top_moments(states.janssen_top_state(TopSpec(8.0, math.pi / 3)))
    expected = moments.mean_LZ ** 2 / (4 * math.cos(math.pi / 3) ** 2)
    return abs(moments.body_product - expected) <= 1e-6 * expected


def check_top_cloning():
    top = states.janssen_top_state(TopSpec(4.0, math.pi / 2))
    half = RotorSpec(1.0, 0.5, (2, 1))
    constants = toprotor.top_time_constants(top, half)
    full = toprotor.torus_autocorrelation(top, constants, math.pi / 2, [constants.T_rev_IK])[0]
    if abs(full - 1.0) >= 1e-10:
        return False
    report = toprotor.top_clone_check(top, 1, 3, half)
    alive = report.fidelities[np.abs(report.amplitudes) > 1e-9]
    if np.ptp(alive) >= 1e-6:
        return False
    irrational = RotorSpec(1.0, 1.0 / math.sqrt(3.0))
    constants = toprotor.top_time_constants(top, irrational)
    times = np.linspace(0.0, 3 * constants.T_rev_K, 4096)[1:]
    return toprotor.torus_autocorrelation(top, constants, math.pi / 2, times).max() <= 0.999


def check_determinism():
    service = RunService(get_config())
    text = 'task=carpet\nfamily=exponential\nN=5\neta=0.5\nn_time=64\nn_phi=90'
    with tempfile.TemporaryDirectory() as temp_dir:
        outputs = []
        for label in ('first', 'second'):
            target = os.path.join(temp_dir, label)
            _, _, code = service.run_text(text, output_dir=target)
            if code != 0:
                return False
            outputs.append(Path(target, 'carpet.csv').read_bytes())
    return outputs[0] == outputs[1]


def main():
    """Main acceptance check function"""
    setup_logging(get_config())
    checker = AcceptanceChecker()

    checker.add_check("Closed-form moments", check_closed_form_moments, 5)
    checker.add_check("Uncertainty equality", check_uncertainty, 5)
    checker.add_check("Density closed form", check_density_closed_form, 10)
    checker.add_check("Gauss-sum exactness", check_gauss_sums, 30)
    checker.add_check("Cloning", check_cloning, 30)
    checker.add_check("Half revival", check_half_revival, 5)
    checker.add_check("Boson comparison", check_boson_comparison, 5)
    checker.add_check("Janssen moments", check_janssen_moments, 10)
    checker.add_check("Top cloning", check_top_cloning, 60)
    checker.add_check("Determinism", check_determinism, 5)

    logger.info("Starting acceptance checks...")
    all_passed = checker.run_checks()

    results = checker.get_results()

    if os.getenv('OUTPUT_JSON', '').lower() == 'true':
        print(json.dumps(results, indent=2))

    passed_count = sum(1 for r in results.values() if r['status'] == 'passed')
    logger.info(f"Acceptance summary: {passed_count}/{len(results)} checks passed")

    sys.exit(0 if all_passed else 1)


if __name__ == "__main__":
    main()
