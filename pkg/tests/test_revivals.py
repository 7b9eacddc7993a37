# tests/test_revivals.py - Revival, Fractional Wave and Clone Tests

import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import trapezoid

from errors import DomainError
from models import CloneVerdict, ExponentialSpec
from services.observables import angular_momentum_report, density_grid
from services.revivals import (
    DEFAULT_T_REV, carpet, carpet_linear, clone_report, conjugate_function, count_ridges, evolve,
    evolve_rational, expected_case, fold_time, fractional_waves, gauss_decompose,
    pair_fractional_waves, recombine, reduce_time, reflect_phi, resolved_clone_count, spread_estimates,
    time_constants
)
from services.states import exponential_wp, general_wp, intelligent_harmonic


def coprime_pairs(n_max):
    return [(m, n) for n in range(1, n_max + 1) for m in range(n) if math.gcd(m, n) == 1]


class TestGaussDecomposition:
    """Test the split of quadratic phases into linear ones"""

    @pytest.mark.parametrize('m,n', coprime_pairs(40))
    def test_cases_and_moduli(self, m, n):
        """Test l, q and |a_s| = 1/sqrt(q) per case"""
        decomposition = gauss_decompose(m, n)
        case = expected_case(n)
        assert decomposition.l == (n // 2 if case == 'b' else n)
        assert decomposition.q == (n if case == 'a' else max(n // 2, 1))
        alive = decomposition.nonzero()
        assert len(alive) == decomposition.q
        np.testing.assert_allclose(np.abs(decomposition.a[alive]), 1 / math.sqrt(decomposition.q), atol=1e-12)
        assert decomposition.s0 == ((n - m) % n if case in ('a', 'c') else None)

    @pytest.mark.parametrize('m,n', [(1, 3), (2, 5), (1, 4), (3, 8), (1, 6), (5, 12), (7, 40)])
    def test_identity(self, m, n):
        """Test the quadratic phase is rebuilt for I up to 200"""
        decomposition = gauss_decompose(m, n)
        I = np.arange(201)
        quadratic = np.exp(-2j * math.pi * ((I * I * m) % n) / n)
        s = np.arange(decomposition.l)
        linear = np.exp(-2j * math.pi * np.outer(I, s) / decomposition.l) @ decomposition.a
        np.testing.assert_allclose(linear, quadratic, atol=1e-10)

    def test_times(self):
        """Test t_s = m/n + s/l as exact fractions"""
        decomposition = gauss_decompose(3, 8)
        assert decomposition.t == (Fraction(3, 8), Fraction(3, 8) + Fraction(1, 4),
                                   Fraction(3, 8) + Fraction(2, 4), Fraction(3, 8) + Fraction(3, 4))

    def test_invalid_times(self):
        """Test non-coprime and nonpositive denominators"""
        with pytest.raises(DomainError):
            gauss_decompose(2, 4)
        with pytest.raises(DomainError):
            gauss_decompose(1, 0)
        with pytest.raises(DomainError):
            gauss_decompose(0.5, 3)

    def test_fold_time(self):
        """Test times fold onto [0, 1/2)"""
        assert fold_time(2, 3) == (1, 6)
        assert fold_time(1, 2) == (0, 1)
        assert fold_time(1, 5) == (1, 5)

    def test_pairing(self):
        """Test t_s + t_s' is an integer"""
        decomposition = gauss_decompose(1, 3)
        pairs = pair_fractional_waves(decomposition)
        assert pairs == {0: 1, 1: 0, 2: 2}
        for s, partner in pairs.items():
            assert (decomposition.t[s] + decomposition.t[partner]).denominator == 1


class TestEvolution:
    """Test evolution under the diatomic spectrum"""

    def test_half_revival_restores_state(self, elliptic_state):
        """Test Psi(T_rev/2) = Psi(0)"""
        evolved = evolve(elliptic_state, DEFAULT_T_REV / 2)
        np.testing.assert_allclose(evolved.coefficients, elliptic_state.coefficients, atol=1e-12)

    def test_unitary(self, elliptic_state):
        """Test the norm is preserved at an arbitrary time"""
        assert evolve(elliptic_state, 0.1234).norm() == pytest.approx(1.0, abs=1e-13)

    def test_rational_matches_float(self, elliptic_state):
        """Test exact rational phases against float evolution"""
        exact = evolve_rational(elliptic_state, 2, 7)
        approx = evolve(elliptic_state, 2 * DEFAULT_T_REV / 7)
        np.testing.assert_allclose(exact.coefficients, approx.coefficients, atol=1e-10)

    def test_classical_period(self, circular_state):
        """Test the classical carpet repeats after a full revival time but not before"""
        phi = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
        times = [0.0, DEFAULT_T_REV / 2, DEFAULT_T_REV]
        rows = carpet(circular_state, math.pi / 2, times, phi, variant='classical')
        np.testing.assert_allclose(rows[0], rows[2], atol=1e-12)
        assert np.max(np.abs(rows[0] - rows[1])) > 1e-3

    def test_time_constants(self):
        """Test I_bar = l for a pure degree and T_cl = T_rev / (2l + 1)"""
        constants = time_constants(intelligent_harmonic(6, 0.4), omega0=2.0)
        assert constants.I_bar == pytest.approx(6.0)
        assert constants.T_rev == pytest.approx(math.pi)
        assert constants.T_cl == pytest.approx(math.pi / 13)

    def test_time_constants_need_positive_frequency(self, circular_state):
        """Test omega0 must be positive"""
        with pytest.raises(DomainError):
            time_constants(circular_state, omega0=0.0)

    def test_reduce_time(self, caplog):
        """Test floats are snapped to nearby fractions"""
        assert reduce_time(0.3) == Fraction(3, 10)
        assert reduce_time(Fraction(5, 7)) == Fraction(5, 7)
        with caplog.at_level(logging.WARNING):
            assert reduce_time(math.pi / 10, cap=8).denominator <= 8
        assert 'denominator cap' in caplog.text


class TestFractionalWaves:
    """Test the fractional-wave synthesis"""

    @pytest.mark.parametrize('m,n', coprime_pairs(12))
    def test_reconstruction(self, elliptic_state, m, n):
        """Test sum_s a_s Psi^s equals direct evolution"""
        rebuilt = recombine(fractional_waves(elliptic_state, m, n))
        direct = evolve_rational(elliptic_state, m, n)
        assert np.max(np.abs(rebuilt.coefficients - direct.coefficients)) < 1e-10

    @pytest.mark.parametrize('n', [3, 5, 6, 7, 9, 10, 11])
    @pytest.mark.parametrize('eta', [0.0, 0.5, 1.0])
    def test_identity_wave(self, n, eta):
        """Test the s0 wave reproduces the initial packet"""
        state = exponential_wp(ExponentialSpec(20, eta))
        s0 = gauss_decompose(1, n).s0
        waves = {wave.s: wave for wave in fractional_waves(state, 1, n)}
        assert s0 in waves
        np.testing.assert_allclose(waves[s0].state.coefficients, state.coefficients, atol=1e-12)

    def test_identity_wave_general_packet(self):
        """Test the s0 wave for a random superposition of intelligent harmonics"""
        rng = np.random.default_rng(11)
        state = general_wp(rng.normal(size=12) + 1j * rng.normal(size=12), 0.35)
        waves = {wave.s: wave for wave in fractional_waves(state, 2, 5)}
        np.testing.assert_allclose(waves[3].state.coefficients, state.coefficients, atol=1e-12)


class TestCloneReport:
    """Test clone and mutant classification"""

    @pytest.mark.parametrize('n', [3, 4, 5, 6, 7])
    def test_circular_waves_are_clones(self, circular_state, n):
        """Test every circular fractional wave is a rotated copy"""
        report = clone_report(circular_state, 1, n)
        assert report.entries
        for entry in report.entries:
            assert entry.fidelity_best > 1 - 1e-6
            assert entry.verdict in (CloneVerdict.CLONE, CloneVerdict.ROTATED_CLONE)

    def test_elliptic_sixth(self, elliptic_state):
        """Test one unrotated clone and two mutants at T_rev/6"""
        report = clone_report(elliptic_state, 1, 6)
        verdicts = report.verdicts()
        assert report.s0 == 5
        assert verdicts[5] is CloneVerdict.CLONE
        assert sorted(verdicts) == [1, 3, 5]
        assert verdicts[1] is CloneVerdict.MUTANT
        assert verdicts[3] is CloneVerdict.MUTANT

    def test_mirror_pairing(self, elliptic_state):
        """Test paired waves are conjugate mirror images"""
        mirror = exponential_wp(ExponentialSpec(20, -0.5))
        assert mirror.l_max == elliptic_state.l_max
        for candidate in (None, mirror):
            report = clone_report(elliptic_state, 1, 3, mirror=candidate)
            for entry in report.entries:
                assert entry.partner is not None
                assert entry.pairing_error < 1e-12

    def test_reflection(self, elliptic_state):
        """Test phi reflection is an involution and matches eta -> -eta"""
        mirror = exponential_wp(ExponentialSpec(20, -0.5))
        np.testing.assert_allclose(reflect_phi(elliptic_state.coefficients), mirror.coefficients, atol=1e-12)
        np.testing.assert_allclose(reflect_phi(reflect_phi(elliptic_state.coefficients)),
                                   elliptic_state.coefficients, atol=0)
        np.testing.assert_allclose(conjugate_function(elliptic_state.coefficients),
                                   mirror.coefficients, atol=1e-12)


class TestCarpets:
    """Test space-time density matrices"""

    def test_initial_row_matches_density(self, elliptic_state):
        """Test the t = 0 row is the equatorial density"""
        phi = np.linspace(0.0, 2 * math.pi, 91)
        row = carpet(elliptic_state, math.pi / 2, [0.0], phi)[0]
        grid = density_grid(elliptic_state, 3, 91)
        np.testing.assert_allclose(row, grid.values[1], atol=1e-12)

    def test_quantum_period(self, elliptic_state):
        """Test the carpet repeats after half a revival"""
        phi = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
        rows = carpet(elliptic_state, 1.2, [0.0, DEFAULT_T_REV / 2], phi)
        np.testing.assert_allclose(rows[0], rows[1], atol=1e-12)

    def test_linear_carpet_normalized(self, linear_state):
        """Test each theta prime row integrates to one"""
        theta_prime = np.linspace(0.0, math.pi, 2001)
        rows = carpet_linear(linear_state, [0.0, 0.37, 1.1], theta_prime)
        for variant_rows in (rows, carpet_linear(linear_state, [0.5], theta_prime, variant='classical')):
            for row in variant_rows:
                assert trapezoid(row, theta_prime) == pytest.approx(1.0, abs=1e-4)

    def test_unknown_variant(self, linear_state):
        """Test only quantum and classical carpets exist"""
        with pytest.raises(DomainError):
            carpet(linear_state, 1.0, [0.0], [0.0], variant='semiclassical')


class TestSpreading:
    """Test wave-packet spreading estimates"""

    def test_spread_estimates(self, circular_state, linear_state):
        """Test q_max and the ordering of spreading times"""
        circular = spread_estimates(20, angular_momentum_report(circular_state))
        linear = spread_estimates(20, angular_momentum_report(linear_state))
        assert circular.q_max == pytest.approx(28.2, abs=0.05)
        assert circular.lifetime(1) == pytest.approx(circular.tau_eta)
        assert circular.lifetime(4) == pytest.approx(circular.tau_eta / 4)
        assert circular.tau_eta < linear.tau_eta

    def test_count_ridges(self):
        """Test circular peak counting"""
        phi = np.linspace(0.0, 2 * math.pi, 360, endpoint=False)
        assert count_ridges(np.cos(3 * phi) ** 2) == 6
        assert count_ridges(np.exp(np.cos(phi))) == 1

    def test_resolved_clone_count(self, circular_state):
        """Test several fractional revivals are resolved on the equator"""
        largest, table = resolved_clone_count(circular_state, n_max=8)
        assert largest >= 5
        assert table[3] == (3, 3)
