# services/revivals.py - Rotor evolution, fractional revivals and clones

"""
Evolution under the diatomic spectrum E_I = hbar omega0 I(I+1).

Times are handled in units of the revival time T_rev = 2 pi / omega0.
At a rational time (m/n) T_rev the quadratic phases are rewritten as a
finite sum of linear ones,

    exp(-2 pi i I^2 m/n) = sum_s a_s exp(-2 pi i I s/l),

which splits the packet into fractional waves that each move like a
classical rotor.
"""

import logging
import math
from fractions import Fraction

import numpy as np
from scipy import fft

from errors import DomainError
from models import (
    CloneEntry, CloneReport, CloneVerdict, FractionalDecomposition, FractionalWave, Frame,
    SpreadEstimates, TimeConstants
)
from services.observables import angular_momentum_report, energy_fractions
from services.specfun import legendre_rows
from services.sphere import rotate_to_frame

logger = logging.getLogger(__name__)

DEFAULT_T_REV = 2.0 * math.pi
CLONE_THRESHOLD = 1e-6
ROTATION_SWEEP = 1024
AMPLITUDE_FLOOR = 1e-9


def time_constants(state, omega0=1.0):
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    mean_l2 = angular_momentum_report(state).mean_L2
    I_bar = 0.5 * (math.sqrt(1.0 + 4.0 * mean_l2) - 1.0)
    T_rev = 2.0 * math.pi / omega0
    return TimeConstants(omega0=omega0, T_rev=T_rev, T_cl=T_rev / (2.0 * I_bar + 1.0), I_bar=I_bar)


def _apply_row_phases(state, fractions):
    """Multiply row I by exp(-2 pi i fractions[I])"""
    phases = np.exp(-2j * math.pi * np.asarray(fractions, dtype=float))
    return state.with_coefficients(state.coefficients * phases[:, None])


def evolve(state, t, T_rev=DEFAULT_T_REV):
    """b_IM -> b_IM exp(-2 pi i I(I+1) t / T_rev)"""
    I = state.degrees
    return _apply_row_phases(state, energy_fractions([t], I * (I + 1), T_rev)[0])


def evolve_rational(state, m, n):
    """Evolution to t = (m/n) T_rev with the phase fraction in integer arithmetic"""
    if n <= 0:
        raise DomainError(f"denominator must be positive, got {n}")
    I = state.degrees
    return _apply_row_phases(state, ((I * (I + 1) * m) % n) / n)


def _linear_phase_exact(state, t):
    t = Fraction(t)
    I = state.degrees
    return _apply_row_phases(state, ((I * t.numerator) % t.denominator) / t.denominator)


def reduce_time(x, cap=64):
    """Nearest fraction with denominator <= cap to a float fraction of T_rev"""
    if isinstance(x, Fraction):
        return x
    value = Fraction(x).limit_denominator(cap)
    if abs(float(value) - float(x)) > 1e-9:
        logger.warning(f"time {x} moved to {value} by the denominator cap {cap}")
    return value


def expected_case(n):
    if n % 2:
        return 'a'
    return 'b' if n % 4 == 0 else 'c'


def _check_rational(m, n):
    if int(m) != m or int(n) != n:
        raise DomainError(f"m and n must be integers, got {m}/{n}")
    m, n = int(m), int(n)
    if n < 1 or m < 0:
        raise DomainError(f"need m >= 0 and n >= 1, got {m}/{n}")
    if math.gcd(m, n) != 1:
        raise DomainError(f"m={m} and n={n} are not coprime")
    return m, n


def gauss_decompose(m, n):
    """
    Coefficients a_s of exp(-2 pi i I^2 m/n) = sum_s a_s exp(-2 pi i I s/l).

    l = n/2 when 4 divides n and n otherwise; a_s is the inverse DFT of
    one period of the quadratic phase.
    """
    m, n = _check_rational(m, n)
    l = n // 2 if n % 4 == 0 else n
    I = np.arange(l)
    quadratic = np.exp(-2j * math.pi * ((I * I * m) % n) / n)
    a = fft.ifft(quadratic)
    a[np.abs(a) < 1e-13] = 0.0
    q = int(np.count_nonzero(np.abs(a) > AMPLITUDE_FLOOR))
    s0 = (n - m) % n if expected_case(n) in ('a', 'c') else None
    t = tuple(Fraction(m, n) + Fraction(s, l) for s in range(l))
    return FractionalDecomposition(m=m, n=n, l=l, q=q, a=a, t=t, s0=s0)


def fold_time(m, n):
    """Map m/n into [0, 1/2) using the T_rev/2 period"""
    folded = Fraction(m, n) % Fraction(1, 2)
    return folded.numerator, folded.denominator


def fractional_waves(state, m, n):
    """Nonzero fractional waves at t = (m/n) T_rev"""
    decomposition = gauss_decompose(*fold_time(*_check_rational(m, n)))
    waves = []
    for s in decomposition.nonzero(AMPLITUDE_FLOOR):
        wave = _linear_phase_exact(state, decomposition.t[s])
        waves.append(FractionalWave(s=s, t=decomposition.t[s], a=complex(decomposition.a[s]), state=wave))
    return waves


def recombine(waves):
    """sum_s a_s Psi^s"""
    total = sum(w.a * np.asarray(w.state.coefficients) for w in waves)
    return waves[0].state.with_coefficients(total)


def pair_fractional_waves(decomposition):
    """s -> s' with t_s + t_s' = 0 (mod 1), restricted to nonzero waves"""
    l, m, n = decomposition.l, decomposition.m, decomposition.n
    shift = (2 * m * l) // n
    alive = set(decomposition.nonzero(AMPLITUDE_FLOOR))
    return {s: (-shift - s) % l for s in sorted(alive) if (-shift - s) % l in alive}


def reflect_phi(coefficients):
    """Coefficients of Psi(theta, -phi): c_IM = (-1)^M b_I,-M"""
    b = np.asarray(coefficients)
    l_max = b.shape[0] - 1
    signs = np.where(np.arange(-l_max, l_max + 1) % 2 == 1, -1.0, 1.0)
    return signs * b[:, ::-1]


def conjugate_function(coefficients):
    """Coefficients of conj(Psi): (-1)^M conj(b_I,-M)"""
    return reflect_phi(np.conj(coefficients))


def rotation_fidelities(state, t_s, angles):
    """|<Psi(0)| R_z(alpha) Psi^s>|^2 for each alpha"""
    prob = np.abs(state.coefficients) ** 2
    t_s = Fraction(t_s)
    I = state.degrees
    radial = np.exp(-2j * math.pi * ((I * t_s.numerator) % t_s.denominator) / t_s.denominator)
    per_M = radial @ prob
    overlaps = np.exp(1j * np.outer(angles, state.orders)) @ per_M
    return np.abs(overlaps) ** 2


def clone_report(state, m, n, mirror=None, threshold=CLONE_THRESHOLD, sweep=ROTATION_SWEEP):
    """
    Classify each fractional wave at (m/n) T_rev as clone, rotated clone or mutant.

    ``mirror`` is the state with eta -> -eta; by default the phi-reflected
    state, which is the same thing for every eta-parametrized family.
    """
    fm, fn = fold_time(*_check_rational(m, n))
    decomposition = gauss_decompose(fm, fn)
    pairs = pair_fractional_waves(decomposition)
    mirror_coefficients = (reflect_phi(state.coefficients) if mirror is None
                           else np.asarray(mirror.coefficients))
    mirror_state = state.with_coefficients(mirror_coefficients)
    sweep_angles = 2.0 * math.pi * np.arange(sweep) / sweep

    entries = []
    for s in decomposition.nonzero(AMPLITUDE_FLOOR):
        t_s = decomposition.t[s]
        rotation = 2.0 * math.pi * float(t_s % 1)
        candidates = np.concatenate([[0.0, rotation, -rotation], sweep_angles])
        fidelities = rotation_fidelities(state, t_s, candidates)
        best = int(np.argmax(fidelities))
        if fidelities[0] > 1.0 - threshold:
            verdict = CloneVerdict.CLONE
        elif fidelities[best] > 1.0 - threshold:
            verdict = CloneVerdict.ROTATED_CLONE
        else:
            verdict = CloneVerdict.MUTANT

        partner = pairs.get(s)
        pairing_error = None
        if partner is not None:
            wave = _linear_phase_exact(state, decomposition.t[partner]).coefficients
            mirrored = conjugate_function(_linear_phase_exact(mirror_state, t_s).coefficients)
            pairing_error = float(np.max(np.abs(wave - mirrored)))

        entries.append(CloneEntry(
            s=s, t=t_s, fidelity_unrotated=float(fidelities[0]),
            fidelity_best=float(fidelities[best]), best_angle=float(candidates[best] % (2.0 * math.pi)),
            verdict=verdict, partner=partner, pairing_error=pairing_error
        ))
        logger.debug(f"clone_report {fm}/{fn} s={s}: {verdict.value} F={fidelities[best]:.9f}")
    return CloneReport(m=fm, n=fn, q=decomposition.q, s0=decomposition.s0, entries=tuple(entries))


def _phase_matrix(times, degrees, T_rev, variant):
    energies = degrees * (degrees + 1) if variant == 'quantum' else degrees
    return np.exp(-2j * math.pi * energy_fractions(times, energies, T_rev))


def carpet(state, theta_fixed, times, phi, T_rev=DEFAULT_T_REV, variant='quantum'):
    """|Psi(theta_fixed, phi, t)|^2 as a (time, phi) matrix"""
    if variant not in ('quantum', 'classical'):
        raise DomainError(f"unknown carpet variant {variant}")
    l_max = state.l_max
    b = state.coefficients
    sections = np.zeros_like(b)
    for m, rows in legendre_rows(l_max, math.cos(theta_fixed), math.sin(theta_fixed)):
        sections[m:, m + l_max] = b[m:, m + l_max] * rows
        if m:
            sign = -1.0 if m % 2 else 1.0
            sections[m:, -m + l_max] = sign * b[m:, -m + l_max] * rows
    E = _phase_matrix(times, state.degrees, T_rev, variant)
    azimuthal = np.exp(1j * np.outer(state.orders, np.asarray(phi, dtype=float)))
    return np.abs(E @ sections @ azimuthal) ** 2


def carpet_linear(state, times, theta_prime, T_rev=DEFAULT_T_REV, variant='quantum'):
    """2 pi sin(theta') times the phi'-averaged density as a (time, theta') matrix"""
    if variant not in ('quantum', 'classical'):
        raise DomainError(f"unknown carpet variant {variant}")
    l_max = state.l_max
    rotated = rotate_to_frame(state.coefficients, l_max, Frame.THETA_PRIME)
    theta_prime = np.asarray(theta_prime, dtype=float)
    E = _phase_matrix(times, state.degrees, T_rev, variant)
    marginal = np.zeros((E.shape[0], len(theta_prime)))
    for m, rows in legendre_rows(l_max, np.cos(theta_prime), np.sin(theta_prime)):
        for M in ((m, -m) if m else (0,)):
            F = (E[:, m:] * rotated[m:, M + l_max]) @ rows
            marginal += np.abs(F) ** 2
    return 2.0 * math.pi * np.sin(theta_prime)[None, :] * marginal


def spread_estimates(N, report, omega0=1.0):
    delta2 = report.delta_L_eta2
    if not delta2 > 0:
        raise DomainError("spreading estimates need a positive transverse spread")
    delta = math.sqrt(delta2)
    return SpreadEstimates(
        tau_eta=(2.0 * math.pi / omega0) / delta,
        q_max=math.pi / math.atan(1.0 / (2.0 * math.sqrt(N))),
        delta_L_eta=delta,
        omega0=omega0,
    )


def count_ridges(values, floor=0.05):
    """Circular local maxima above floor * max"""
    values = np.asarray(values)
    peaks = (values > np.roll(values, 1)) & (values >= np.roll(values, -1)) & (values > floor * values.max())
    return int(np.count_nonzero(peaks))


def resolved_clone_count(state, n_max=12, n_phi=720):
    """
    Equatorial ridge counts at t = T_rev/n against the number of fractional waves.

    Returns the largest n such that every n' <= n shows as many ridges as
    it has fractional waves, together with the per-n (ridges, waves) table.
    """
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    table = {}
    largest = 0
    for n in range(1, n_max + 1):
        density = carpet(state, math.pi / 2, [DEFAULT_T_REV / n], phi)[0]
        table[n] = (count_ridges(density), gauss_decompose(*fold_time(1, n)).q)
        if largest == n - 1 and table[n][0] == table[n][1]:
            largest = n
    return largest, table
