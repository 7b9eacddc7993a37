# tests/test_states.py - State Builder Tests

import math
from fractions import Fraction

import numpy as np
import pytest

from errors import DomainError, TruncationError
from models import BosonSpec, ExponentialSpec, Frame, GaussianSeedSpec, TopSpec
from services.observables import angular_momentum_report, ladder_factors, uncertainty_check
from services.sphere import (
    frame_to_lab, gauss_legendre_grid, project, rotate_to_frame, synthesize_grid, synthesize_points
)
from services.states import (
    atkins_dobson_state, boson_circular_state, boson_moments, exponential_wp, gaussian_seed_wp,
    general_wp, intelligent_harmonic, janssen_top_state, linear_partial_waves, linear_wp,
    quasi_intelligent_wp, select_l_max, uniform_linear_wp
)


def annihilation_residual(state, eta, epsilon=0.0):
    """max |((1+i eps) Lx + i eta Ly) Psi| coefficientwise"""
    b = np.asarray(state.coefficients)
    l_max = state.l_max
    raised = np.zeros_like(b)
    lowered = np.zeros_like(b)
    # L+ b: component at M+1 receives c(I, M) b_IM
    raised[:, 1:] = (ladder_factors(l_max) * b)[:, :-1]
    # L- b: component at M-1 receives c(I, M-1) b_IM
    lowered[:, :-1] = (ladder_factors(l_max, shift=-1) * b)[:, 1:]
    a = 1 + 1j * epsilon
    result = 0.5 * (a + eta) * raised + 0.5 * (a - eta) * lowered
    return float(np.max(np.abs(result)))


class TestSphereQuadrature:
    """Test synthesis, projection and frame rotation"""

    def test_project_recovers_band_limited_coefficients(self):
        """Test projection of a synthesized band-limited function"""
        rng = np.random.default_rng(7)
        l_max = 12
        coefficients = rng.normal(size=(l_max + 1, 2 * l_max + 1)) + 1j * rng.normal(size=(l_max + 1, 2 * l_max + 1))
        for I in range(l_max + 1):
            coefficients[I, :l_max - I] = 0
            coefficients[I, l_max + I + 1:] = 0
        theta, phi, weights = gauss_legendre_grid(l_max + 1, 2 * l_max + 1)
        values = synthesize_grid(coefficients, l_max, theta, phi)
        np.testing.assert_allclose(project(values, l_max, theta, weights), coefficients, atol=1e-12)

    def test_points_match_grid(self):
        """Test scattered synthesis against the tensor grid"""
        state = intelligent_harmonic(4, 0.3)
        theta = np.array([0.2, 1.0, 2.5])
        phi = np.array([0.0, 3.0, 5.5])
        grid = synthesize_grid(state.coefficients, 4, theta, phi)
        points = synthesize_points(state.coefficients, 4, theta, phi)
        np.testing.assert_allclose(points, np.diag(grid), atol=1e-14)

    def test_frame_poles(self):
        """Test the polar axes of the rotated frames"""
        theta, phi = frame_to_lab(np.array(0.0), np.array(0.0), Frame.THETA_PRIME)
        assert float(theta) == pytest.approx(math.pi / 2)
        assert float(phi) == pytest.approx(0.0)
        theta, phi = frame_to_lab(np.array(0.0), np.array(0.0), Frame.THETA_DOUBLE_PRIME)
        assert float(theta) == pytest.approx(math.pi / 2)
        assert float(phi) == pytest.approx(math.pi / 2)

    def test_rotation_keeps_partial_waves(self, elliptic_state):
        """Test rotations leave per-I weights unchanged"""
        rotated = rotate_to_frame(elliptic_state.coefficients, elliptic_state.l_max, Frame.THETA_PRIME)
        np.testing.assert_allclose(np.sum(np.abs(rotated) ** 2, axis=1),
                                   elliptic_state.partial_wave_probabilities(), atol=1e-12)


class TestIntelligentHarmonic:
    """Test eigenstates of L^2 annihilated by Lx + i eta Ly"""

    @pytest.mark.parametrize('l,eta', [(1, 0.5), (3, 0.0), (6, 0.9), (5, -0.4), (4, 2.5)])
    def test_annihilated(self, l, eta):
        """Test the annihilation condition and normalization"""
        state = intelligent_harmonic(l, eta)
        assert state.norm() == pytest.approx(1.0, abs=1e-14)
        assert annihilation_residual(state, eta) < 1e-12

    def test_circular_limit(self):
        """Test eta = 1 is the pure m = l state"""
        state = intelligent_harmonic(3, 1.0)
        assert state.coefficient(3, 3) == 1.0
        assert state.coefficient(3, 1) == 0.0

    def test_opposite_limit(self):
        """Test eta = -1 puts (-1)^l on m = -l"""
        assert intelligent_harmonic(3, -1.0).coefficient(3, -3) == -1.0

    def test_scalar(self):
        """Test l = 0 is the constant state"""
        state = intelligent_harmonic(0, 0.3)
        assert state.l_max == 0
        assert state.coefficient(0, 0) == 1.0

    def test_invalid_degree(self):
        """Test a negative or fractional l is rejected"""
        with pytest.raises(DomainError):
            intelligent_harmonic(-1, 0.5)
        with pytest.raises(DomainError):
            intelligent_harmonic(1.5, 0.5)


class TestExponentialPacket:
    """Test the exponential wave packets"""

    @pytest.mark.parametrize('eta', [1.0, 0.5, 0.0, -0.25, 2.0])
    def test_normalized_and_annihilated(self, eta):
        """Test norm and the eta annihilation condition"""
        state = exponential_wp(ExponentialSpec(5, eta))
        assert state.norm() == pytest.approx(1.0, abs=1e-13)
        assert state.truncation_residual < 1e-12
        assert annihilation_residual(state, eta) < 1e-8 * max(1.0, abs(eta)) * 5

    def test_circular_only_stretched(self, circular_state):
        """Test eta = 1 populates M = I only"""
        off = circular_state.coefficients.copy()
        for I in range(circular_state.l_max + 1):
            off[I, I + circular_state.l_max] = 0
        assert np.max(np.abs(off)) == 0.0

    def test_linear_bessel_cross_check(self, linear_state, coefficient_error):
        """Test the series against the Bessel closed form at eta = 0"""
        assert coefficient_error(linear_state, linear_wp(20)) < 1e-10

    def test_linear_partial_waves(self, linear_state):
        """Test rotated-frame weights reproduce lab partial-wave probabilities"""
        weights = linear_partial_waves(20, linear_state.l_max) ** 2
        np.testing.assert_allclose(weights, linear_state.partial_wave_probabilities(), atol=1e-12)

    def test_quadrature_path_agrees(self, coefficient_error):
        """Test the quadrature projection against the series"""
        series = exponential_wp(ExponentialSpec(20, 0.5), tail_tol=1e-20)
        projected = gaussian_seed_wp(GaussianSeedSpec(20, 0.5, 0.0), tail_tol=1e-20)
        assert coefficient_error(series, projected) < 1e-8

    def test_cap_exceeded(self):
        """Test an unreachable tolerance raises TruncationError"""
        with pytest.raises(TruncationError) as excinfo:
            exponential_wp(ExponentialSpec(50, 1.0), l_max_cap=20)
        assert excinfo.value.l_max == 20

    def test_invalid_spec(self):
        """Test N must be positive"""
        with pytest.raises(DomainError):
            ExponentialSpec(0, 1.0)


class TestQuasiIntelligent:
    """Test oscillator-seeded packets with a momentum component"""

    def test_annihilated_by_shifted_operator(self):
        """Test (1 + i eps) Lx + i eta Ly annihilates the state"""
        state = quasi_intelligent_wp(5, 0.5, 0.5)
        assert state.norm() == pytest.approx(1.0, abs=1e-12)
        assert annihilation_residual(state, 0.5, 0.5) < 1e-8


class TestUniformPacket:
    """Test the uniform-density linear packet"""

    def test_ly_annihilates(self):
        """Test the packet is annihilated by L_y"""
        state = uniform_linear_wp(20)
        b =np.asarray(state.coefficients)
        raised = np.zeros_like(b)
        lowered = np.zeros_like(b)
        raised[:, 1:] = (ladder_factors(state.l_max) * b)[:, :-1]
        lowered[:, :-1] = (ladder_factors(state.l_max, shift=-1) * b)[:, 1:]
        assert np.max(np.abs(raised - lowered)) < 1e-10

    def test_small_argument_limit(self):
        """Test etaN -> 0 leaves the I = 0 state"""
        state = uniform_linear_wp(1e-8)
        assert state.l_max == 0

    def test_invalid(self):
        """Test etaN must be positive"""
        with pytest.raises(DomainError):
            uniform_linear_wp(0.0)


class TestBosonStates:
    """Test the boson representation of circular states"""

    def test_half_integer_truncation(self):
        """Test only integer j survive and the kept weight is reported"""
        state = boson_circular_state(BosonSpec(math.sqrt(39.0), Fraction(1, 2)))
        assert state.norm() == pytest.approx(1.0, abs=1e-14)
        assert 0.4 < state.renormalization < 0.6
        off = state.coefficients.copy()
        for I in range(state.l_max + 1):
            off[I, I + state.l_max] = 0
        assert np.max(np.abs(off)) == 0.0

    def test_untruncated_half_integer_rejected(self):
        """Test half-integer s needs integer truncation"""
        with pytest.raises(DomainError):
            boson_circular_state(BosonSpec(2.0, Fraction(1, 2), integer_truncated=False))

    def test_integer_spin_mean(self):
        """Test <j> = s k^(4s) for integer s"""
        state = boson_circular_state(BosonSpec(2.0, 1, integer_truncated=False))
        mean = float(np.sum(state.partial_wave_probabilities() * state.degrees))
        assert mean == pytest.approx(16.0, rel=1e-10)

    def test_ladder_moments_match_closed_form(self):
        """Test <Lz> = s k^(4s) from the expansion itself, stored at M = j"""
        state = boson_circular_state(BosonSpec(2.0, 1, integer_truncated=False))
        report = angular_momentum_report(state)
        expected = boson_moments(2.0, 1)
        assert report.mean_Lz == pytest.approx(16.0, rel=1e-8)
        assert report.mean_Lx2 == pytest.approx(expected.mean_Lx2, rel=1e-8)
        assert report.mean_Lz2 == pytest.approx(expected.mean_Lz2, rel=1e-8)
        assert abs(report.mean_Lx) < 1e-12
        assert uncertainty_check(state)['satisfied']

    def test_closed_form_moments(self):
        """Test the untruncated moments saturate the uncertainty relation"""
        report = boson_moments(math.sqrt(39.0), Fraction(1, 2))
        assert report.mean_Lz == pytest.approx(19.5)
        assert report.mean_Lx2 == pytest.approx(9.75)
        assert report.uncertainty_product == pytest.approx(report.lz_bound)

    def test_invalid_spin(self):
        """Test s must be integer or half-integer"""
        with pytest.raises(DomainError):
            BosonSpec(1.0, Fraction(1, 3))


class TestGeneralPacket:
    """Test superpositions of intelligent harmonics"""

    def test_reproduces_circular_packet(self, circular_state, coefficient_error):
        """Test per-l weights of the circular packet rebuild it"""
        weights = [circular_state.coefficient(I, I) for I in range(circular_state.l_max + 1)]
        assert coefficient_error(general_wp(weights, 1.0), circular_state) < 1e-12

    def test_zero_weights_rejected(self):
        """Test all-zero weights are a domain error"""
        with pytest.raises(DomainError):
            general_wp([0.0, 0.0], 0.5)


class TestTopStates:
    """Test symmetric-top packets"""

    def test_normalized(self, top_state):
        """Test norm and the integer-truncation weight"""
        assert top_state.norm() == pytest.approx(1.0, abs=1e-14)
        assert top_state.renormalization == pytest.approx(math.exp(-8.0) * math.cosh(8.0), rel=1e-10)

    @pytest.mark.parametrize('lam', [math.pi / 2, math.pi / 3, 0.0])
    def test_boson_mapping(self, lam):
        """Test the two-boson amplitudes reproduce the top state"""
        r = 4.0
        top = janssen_top_state(TopSpec(r, lam))
        boson = atkins_dobson_state(-math.sqrt(2 * r) * math.sin(lam / 2), math.sqrt(2 * r) * math.cos(lam / 2))
        assert top.l_max == boson.l_max
        np.testing.assert_allclose(top.coefficients, boson.coefficients, atol=1e-12)

    def test_invalid(self):
        """Test r must be positive and lambda inside [0, pi]"""
        with pytest.raises(DomainError):
            TopSpec(0.0, 1.0)
        with pytest.raises(DomainError):
            TopSpec(1.0, 4.0)


class TestTruncation:
    """Test tail-based l_max selection"""

    def test_smallest_passing_degree(self):
        """Test the first degree whose tail is below tolerance"""
        l_max, residual = select_l_max([0.5, 0.3, 0.2 - 1e-13, 1e-13], 1e-12, 10)
        assert l_max == 2
        assert residual == pytest.approx(1e-13)

    def test_cap(self):
        """Test the cap raises TruncationError with the residual"""
        with pytest.raises(TruncationError):
            select_l_max([0.25, 0.25, 0.25, 0.25], 1e-12, 1)
