# services/toprotor.py - Symmetric top evolution and q x q' clones

"""
Symmetric-top packets with laboratory projection M = -I, evolving under

    E_IK = hbar omega0 [I(I+1) + delta K^2].

The density lives on the (alpha, gamma) Euler torus at fixed beta. With
delta = r/p rational both phases recur at T_IK = p T_rev_I and the
packet splits at rational fractions of T_IK into a grid of fractional
waves, one Gauss decomposition per Euler angle.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from errors import DomainError
from models import Frame, GridDensity, Spectrum, TopCloneReport, TopTimeConstants
from services.observables import energy_fractions, raising_expectations
from services.revivals import AMPLITUDE_FLOOR, gauss_decompose
from services.specfun import wigner_d_lowest_row

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopMoments:
    mean_Lz: float
    mean_L2: float
    mean_I: float
    mean_LX: float
    mean_LY: float
    mean_LZ: float
    var_LX: float
    var_LY: float
    var_LZ: float

    @property
    def body_product(self):
        return self.var_LX * self.var_LY

    def to_dict(self):
        data = dict(self.__dict__)
        data['body_product'] = self.body_product
        return data


def _grids(l_max):
    I = np.arange(l_max + 1)[:, None]
    K = np.arange(-l_max, l_max + 1)[None, :]
    return I, K


def top_moments(state):
    """Lab <Lz>, <L^2> and body-frame moments from K-ladder matrix elements"""
    C = state.coefficients
    prob = np.abs(C) ** 2
    I, K = _grids(state.l_max)
    mean_I = float(np.sum(prob * I))
    mean_L2 = float(np.sum(prob * I * (I + 1)))
    mean_LZ = float(np.sum(prob * K))
    mean_LZ2 = float(np.sum(prob * K * K))
    plus, plus2 = raising_expectations(C, state.l_max)
    transverse = mean_L2 - mean_LZ2
    mean_LX2 = 0.5 * (plus2.real + transverse)
    mean_LY2 = 0.5 * (transverse - plus2.real)
    return TopMoments(
        mean_Lz=-mean_I, mean_L2=mean_L2, mean_I=mean_I,
        mean_LX=plus.real, mean_LY=plus.imag, mean_LZ=mean_LZ,
        var_LX=mean_LX2 - plus.real ** 2, var_LY=mean_LY2 - plus.imag ** 2,
        var_LZ=mean_LZ2 - mean_LZ ** 2,
    )


def top_time_constants(state, spec):
    moments = top_moments(state)
    I_bar = abs(moments.mean_Lz)
    K_bar = moments.mean_LZ
    T_rev_I = 2.0 * math.pi / spec.omega0
    T_cl_I = T_rev_I / (2.0 * I_bar + 1.0)
    # signed: a negative delta runs the K phase backwards
    T_rev_K = T_rev_I / spec.delta if spec.delta != 0 else math.inf
    if spec.delta != 0 and abs(K_bar) >= 1e-9:
        T_cl_K = 2.0 * math.pi / (spec.omega0 * abs(spec.delta) * 2.0 * abs(K_bar))
    else:
        T_cl_K = math.inf
    T_rev_IK = None
    if spec.rational_delta is not None:
        p, _ = spec.rational_delta
        T_rev_IK = p * T_rev_I
    return TopTimeConstants(
        T_cl_I=T_cl_I, T_rev_I=T_rev_I, T_cl_K=T_cl_K, T_rev_K=T_rev_K,
        T_rev_IK=T_rev_IK, I_bar=I_bar, K_bar=K_bar,
    )


def top_spectrum(constants):
    return Spectrum(T_rev=constants.T_rev_I, T_rev_K=constants.T_rev_K)


def _rational_parts(spec):
    if spec is None or spec.rational_delta is None:
        raise DomainError("a rational delta (p, r) must be declared for exact top phases")
    return spec.rational_delta


def top_energy_phase(l_max, m, n, spec):
    """frac(E_IK t / 2 pi hbar) at t = (m/n) T_IK as an array [I, K + l_max], integer arithmetic"""
    p, r = _rational_parts(spec)
    I, K = _grids(l_max)
    numerator = (I * (I + 1) * p * m + K * K * r * m) % n
    return numerator / n


def _phase_fractions(state, t, constants, exact, spec):
    if exact is not None:
        return top_energy_phase(state.l_max, exact[0], exact[1], spec)
    I, K = _grids(state.l_max)
    frac = energy_fractions([t], (I * (I + 1)).ravel(), constants.T_rev_I)[0][:, None]
    if math.isfinite(constants.T_rev_K):
        frac = frac + energy_fractions([t], (K * K).ravel(), constants.T_rev_K)[0][None, :]
    return frac


def torus_amplitudes(state, beta, t=0.0, constants=None, exact=None, spec=None):
    """A_IK = C_IK d^I_{-I,K}(beta) exp(-i E_IK t / hbar)"""
    base = state.coefficients * wigner_d_lowest_row(state.l_max, beta)
    if constants is None and exact is None:
        return base
    return base * np.exp(-2j * math.pi * _phase_fractions(state, t, constants, exact, spec))


def torus_nodes(n):
    return 2.0 * math.pi * np.arange(n) / n


def synthesize_torus(amplitudes, alpha, gamma):
    """Psi(alpha, gamma) = sum_IK A_IK exp(i alpha I) exp(-i gamma K)"""
    l_max = amplitudes.shape[0] - 1
    E_alpha = np.exp(1j * np.outer(alpha, np.arange(l_max + 1)))
    E_gamma = np.exp(-1j * np.outer(np.arange(-l_max, l_max + 1), gamma))
    return E_alpha @ amplitudes @ E_gamma


def top_evolve(state, t, constants, beta=math.pi / 2, n_alpha=256, n_gamma=256, exact=None, spec=None):
    """
    Density over the (alpha, gamma) torus at fixed beta.

    ``exact=(m, n)`` evaluates at t = (m/n) T_IK with integer phase
    arithmetic and needs ``spec`` with a rational delta.
    """
    amplitudes = torus_amplitudes(state, beta, t, constants, exact, spec)
    weight = float(np.sum(np.abs(amplitudes) ** 2))
    if not weight > 0:
        raise DomainError(f"state has no weight at beta={beta}")
    alpha, gamma = torus_nodes(n_alpha), torus_nodes(n_gamma)
    values = np.abs(synthesize_torus(amplitudes, alpha, gamma)) ** 2 / (4.0 * math.pi ** 2 * weight)
    return GridDensity(alpha, gamma, values, Frame.EULER)


def torus_autocorrelation(state, constants, beta, times):
    """|<Psi(0)|Psi(t)>|^2 for the torus section at fixed beta"""
    weights = np.abs(torus_amplitudes(state, beta)) ** 2
    weights = weights / weights.sum()
    I, K = _grids(state.l_max)
    I = np.broadcast_to(I, weights.shape).ravel()
    K = np.broadcast_to(K, weights.shape).ravel()
    w = weights.ravel()
    keep = w > 0
    I, K, w = I[keep], K[keep], w[keep]
    phase = energy_fractions(times, I * (I + 1), constants.T_rev_I)
    if math.isfinite(constants.T_rev_K):
        phase = phase + energy_fractions(times, K * K, constants.T_rev_K)
    return np.abs(np.exp(-2j * math.pi * phase) @ w) ** 2


def _normalized_overlap(u, v):
    num = abs(np.vdot(u, v)) ** 2
    return float(num / (np.vdot(u, u).real * np.vdot(v, v).real))


def top_clone_check(state, m, n, spec, beta=math.pi / 2, n_alpha=64, n_gamma=64):
    """
    Fractional waves at t = (m/n) T_IK.

    The I(I+1) phase is split by one Gauss decomposition (shifts in alpha),
    the K^2 phase by another (shifts in gamma). Every wave is compared
    with the initial torus function translated by its shift, and their
    weighted sum with the directly evolved function.
    """
    p, r = _rational_parts(spec)
    if int(m) != m or int(n) != n or n < 1:
        raise DomainError(f"invalid time fraction {m}/{n}")
    x_alpha = Fraction(p * int(m), int(n)) % 1
    x_gamma = Fraction(r * int(m), int(n)) % 1
    alpha_parts = gauss_decompose(x_alpha.numerator, x_alpha.denominator)
    gamma_parts = gauss_decompose(x_gamma.numerator, x_gamma.denominator)

    base = torus_amplitudes(state, beta)
    l_max = state.l_max
    I, K = _grids(l_max)
    alpha, gamma = torus_nodes(n_alpha), torus_nodes(n_gamma)
    evolved = synthesize_torus(base * np.exp(-2j * math.pi * top_energy_phase(l_max, m, n, spec)), alpha, gamma)

    amplitudes = np.outer(alpha_parts.a, gamma_parts.a)
    fidelities = np.zeros(amplitudes.shape)
    shifts = []
    total = np.zeros_like(evolved)
    for s in alpha_parts.nonzero(AMPLITUDE_FLOOR):
        tau = alpha_parts.t[s]
        alpha_phase = np.exp(-2j * math.pi * ((I * tau.numerator) % tau.denominator) / tau.denominator)
        for s2 in gamma_parts.nonzero(AMPLITUDE_FLOOR):
            sigma = Fraction(s2, gamma_parts.l)
            gamma_phase = np.exp(-2j * math.pi * ((K * sigma.numerator) % sigma.denominator) / sigma.denominator)
            wave = synthesize_torus(base * alpha_phase * gamma_phase, alpha, gamma)
            d_alpha = 2.0 * math.pi * float(tau)
            d_gamma = 2.0 * math.pi * float(sigma)
            translated = synthesize_torus(base, alpha - d_alpha, gamma + d_gamma)
            fidelities[s, s2] = _normalized_overlap(translated, wave)
            shifts.append((s, s2, d_alpha % (2.0 * math.pi), (-d_gamma) % (2.0 * math.pi)))
            total += amplitudes[s, s2] * wave

    scale = float(np.max(np.abs(evolved)))
    error = float(np.max(np.abs(total - evolved))) / scale if scale > 0 else 0.0
    report = TopCloneReport(
        m=int(m), n=int(n), alpha=alpha_parts, gamma=gamma_parts, amplitudes=amplitudes,
        fidelities=fidelities, shifts=tuple(shifts), reconstruction_error=error,
    )
    logger.debug(f"top_clone_check {m}/{n}: {report.wave_count} waves, reconstruction error {error:.2e}")
    return report
