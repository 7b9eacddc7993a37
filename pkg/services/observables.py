# services/observables.py - Angular momentum moments, densities and autocorrelation

import logging
import math

import numpy as np

from errors import DomainError
from models import AngularMomentumReport, Frame, GridDensity, Spectrum, TopExpansion
from services.sphere import gauss_legendre_grid, rotate_to_frame, synthesize_grid
from services.states import log_sinh

logger = logging.getLogger(__name__)

UNCERTAINTY_TOL = 1e-8


def ladder_factors(l_max, shift=0):
    """c[I, M + l_max] = sqrt(I(I+1) - M'(M'+1)) with M' = M + shift, zero outside |M'| <= I"""
    I = np.arange(l_max + 1)[:, None]
    M = np.arange(-l_max, l_max + 1)[None, :] + shift
    values = I * (I + 1) - M * (M + 1)
    valid = (np.abs(M) <= I) & (values > 0)
    return np.where(valid, np.sqrt(np.where(valid, values, 0)), 0.0)


def raising_expectations(coefficients, l_max):
    """<L+> and <L+^2> from expansion coefficients"""
    b = np.asarray(coefficients)
    c0 = ladder_factors(l_max)
    c1 = ladder_factors(l_max, shift=1)
    raised = c0 * b
    plus = np.sum(np.conj(b[:, 1:]) * raised[:, :-1])
    # L+ L+ |I M> = c(I, M+1) c(I, M) |I M+2>
    twice = c1[:, :-2] * raised[:, :-2]
    plus2 = np.sum(np.conj(b[:, 2:]) * twice)
    return complex(plus), complex(plus2)


def angular_momentum_report(state):
    """First and second moments of L from ladder-operator matrix elements"""
    b = state.coefficients
    prob = np.abs(b) ** 2
    I = state.degrees[:, None]
    M = state.orders[None, :]

    mean_lz = float(np.sum(prob * M))
    mean_lz2 = float(np.sum(prob * M * M))
    mean_l2 = float(np.sum(prob * I * (I + 1)))
    plus, plus2 = raising_expectations(b, state.l_max)

    transverse = mean_l2 - mean_lz2
    mean_lx2 = 0.5 * (plus2.real + transverse)
    mean_ly2 = 0.5 * (transverse - plus2.real)
    var_lx = max(mean_lx2 - plus.real ** 2, 0.0)
    var_ly = max(mean_ly2 - plus.imag ** 2, 0.0)
    return AngularMomentumReport(
        mean_Lx=plus.real, mean_Ly=plus.imag, mean_Lz=mean_lz,
        mean_Lx2=mean_lx2, mean_Ly2=mean_ly2, mean_Lz2=mean_lz2, mean_L2=mean_l2,
        var_Lx=var_lx, var_Ly=var_ly,
        uncertainty_product=var_lx * var_ly,
        lz_bound=0.25 * mean_lz * mean_lz,
    )


def uncertainty_check(state, tol=UNCERTAINTY_TOL):
    """Whether the state saturates var(Lx) var(Ly) >= <Lz>^2 / 4"""
    report = angular_momentum_report(state)
    product, bound = report.uncertainty_product, report.lz_bound
    return {
        'product': product,
        'bound': bound,
        'satisfied': abs(product - bound) <= tol * max(1.0, bound),
    }


def partial_wave_probabilities(state):
    return state.partial_wave_probabilities()


def closed_form_moments(N, eta):
    """Analytic moments of the exponential packet of parameters (N, eta)"""
    N, eta = float(N), float(eta)
    X = N / math.tanh(2.0 * N) - 0.5
    eta2 = eta * eta
    mean_lz = eta * X
    mean_lx2 = 0.5 * eta2 * X
    mean_ly2 = 0.5 * X
    mean_lz2 = mean_ly2 * (1.0 - 2.0 * eta2) + eta2 * N * N
    return AngularMomentumReport(
        mean_Lx=0.0, mean_Ly=0.0, mean_Lz=mean_lz,
        mean_Lx2=mean_lx2, mean_Ly2=mean_ly2, mean_Lz2=mean_lz2,
        mean_L2=mean_lx2 + mean_ly2 + mean_lz2,
        var_Lx=mean_lx2, var_Ly=mean_ly2,
        uncertainty_product=mean_lx2 * mean_ly2,
        lz_bound=0.25 * mean_lz * mean_lz,
    )


def closed_form_density(N, theta, phi):
    """(N / 2pi sinh 2N) exp(2N cos(theta')) with cos(theta') = sin(theta) cos(phi)"""
    N = float(N)
    cos_tp = np.sin(theta) * np.cos(phi)
    return np.exp(math.log(N / (2.0 * math.pi)) - log_sinh(2.0 * N) + 2.0 * N * cos_tp)


def density_grid(state, n_theta=181, n_phi=361, frame=Frame.LAB, sin_weighted=False, gauss=False):
    """
    |Psi|^2 on a (theta, phi) grid of the chosen frame.

    The default grid includes both poles and phi = 2pi for plotting; with
    ``gauss`` the theta nodes are Gauss-Legendre and phi is periodic so
    that ``integral()`` is exact for band-limited densities.
    """
    if n_theta < 2 or n_phi < 2:
        raise DomainError("grids need at least two nodes per axis")
    frame = Frame(frame)
    coefficients = rotate_to_frame(state.coefficients, state.l_max, frame)
    theta_weights = None
    if gauss:
        theta, phi, theta_weights = gauss_legendre_grid(n_theta, n_phi)
    else:
        theta = np.linspace(0.0, math.pi, n_theta)
        phi = np.linspace(0.0, 2.0 * math.pi, n_phi)
    values = np.abs(synthesize_grid(coefficients, state.l_max, theta, phi)) ** 2
    if sin_weighted:
        values = 2.0 * math.pi * np.sin(theta)[:, None] * values
    logger.debug(f"density_grid: {n_theta}x{n_phi} in frame {frame.value}, l_max={state.l_max}")
    return GridDensity(theta, phi, values, frame, sin_weighted, theta_weights)


def energy_fractions(times, energies, period):
    """frac(E t / period) for every (time, level) pair"""
    x = np.outer(np.asarray(times, dtype=float) / period, energies)
    return x - np.floor(x)


def autocorrelation(state, spectrum, times):
    """|<Psi(0)|Psi(t)>|^2 on a time grid"""
    times = np.asarray(times, dtype=float)
    if isinstance(state, TopExpansion):
        if not spectrum.is_top:
            raise DomainError("a top state needs a spectrum with T_rev_K")
        l_max = state.l_max
        I = np.repeat(np.arange(l_max + 1), 2 * l_max + 1)
        K = np.tile(np.arange(-l_max, l_max + 1), l_max + 1)
        weights = (np.abs(state.coefficients) ** 2).ravel()
        keep = weights > 0
        I, K, weights = I[keep], K[keep], weights[keep]
        phase = energy_fractions(times, I * (I + 1), spectrum.T_rev)
        if math.isfinite(spectrum.T_rev_K):
            phase = phase + energy_fractions(times, K * K, spectrum.T_rev_K)
    else:
        weights = state.partial_wave_probabilities()
        I = state.degrees
        phase = energy_fractions(times, I * (I + 1), spectrum.T_rev)
    amplitude = np.exp(-2j * math.pi * phase) @ weights
    return np.abs(amplitude) ** 2


def diatomic_spectrum(omega0=1.0):
    return Spectrum(T_rev=2.0 * math.pi / omega0)
