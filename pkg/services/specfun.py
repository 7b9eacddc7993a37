# services/specfun.py - Special functions evaluated in log space

"""
Factorials, Clebsch-Gordan coefficients, spherical harmonics, spherical
Bessel functions and Wigner small-d elements.

Everything carrying factorials is accumulated as a log-magnitude with a
separate sign so that arguments such as (2N)^I / sqrt((2I+1)!) with
N = 50 and I ~ 100 stay finite. The Condon-Shortley phase is used
throughout.
"""

import logging
import math

import numpy as np
from scipy.special import gammaln

from errors import CapacityError, DomainError
from models import AngularPoint

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class LogFactorialTable:
    """values[n] = ln(n!) for 0 <= n <= n_max"""

    def __init__(self, n_max=4096):
        self.n_max = int(n_max)
        values = gammaln(np.arange(self.n_max + 1, dtype=float) + 1.0)
        values[0] = 0.0
        values.setflags(write=False)
        self.values = values

    def __call__(self, n):
        if n < 0:
            raise DomainError(f"factorial of negative integer {n}")
        if n > self.n_max:
            raise CapacityError(n, self.n_max)
        return float(self.values[n])

    def take(self, n):
        """Vectorized lookup; every entry must lie in the table"""
        n = np.asarray(n)
        if n.size and (n.min() < 0 or n.max() > self.n_max):
            bad = int(n.max()) if n.max() > self.n_max else int(n.min())
            if bad < 0:
                raise DomainError(f"factorial of negative integer {bad}")
            raise CapacityError(bad, self.n_max)
        return self.values[n]


LOG_FACTORIAL = LogFactorialTable()


def log_factorial(n):
    """ln(n!) from the shared table"""
    return LOG_FACTORIAL(int(n))


def _check_integer(*values):
    for v in values:
        if int(v) != v:
            raise DomainError(f"angular momentum arguments must be integers, got {v}")


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients
# ---------------------------------------------------------------------------

def _triangle(l1, l2, L):
    return abs(l1 - l2) <= L <= l1 + l2


def clebsch_gordan(l1, l2, m1, m2, L, M):
    """<l1 l2 m1 m2 | L M> by the Racah sum"""
    _check_integer(l1, l2, m1, m2, L, M)
    if min(l1, l2, L) < 0:
        raise DomainError("angular momenta must be nonnegative")
    if abs(m1) > l1 or abs(m2) > l2 or abs(M) > L:
        raise DomainError(f"projection out of range in <{l1} {l2} {m1} {m2}|{L} {M}>")
    if M != m1 + m2 or not _triangle(l1, l2, L):
        return 0.0

    lf = LOG_FACTORIAL
    if m1 == 0 and m2 == 0:
        return _cg_zero_projection(l1, l2, L)
    if m1 == l1:
        return _cg_stretched(l1, l2, m2, L)

    prefactor = 0.5 * (
        math.log(2 * L + 1) + lf(L + l1 - l2) + lf(L - l1 + l2) + lf(l1 + l2 - L)
        - lf(l1 + l2 + L + 1)
        + lf(L + M) + lf(L - M) + lf(l1 - m1) + lf(l1 + m1) + lf(l2 - m2) + lf(l2 + m2)
    )
    k_min = max(0, l2 - L - m1, l1 - L + m2)
    k_max = min(l1 + l2 - L, l1 - m1, l2 + m2)
    logs, signs = [], []
    for k in range(k_min, k_max + 1):
        logs.append(-(lf(k) + lf(l1 + l2 - L - k) + lf(l1 - m1 - k) + lf(l2 + m2 - k)
                      + lf(L - l2 + m1 + k) + lf(L - l1 - m2 + k)))
        signs.append(-1.0 if k % 2 else 1.0)
    if not logs:
        return 0.0
    logs = np.array(logs)
    peak = logs.max()
    total = float(np.sum(np.array(signs) * np.exp(logs - peak)))
    return total * math.exp(prefactor + peak)


def _cg_zero_projection(l1, l2, L):
    J = l1 + l2 + L
    if J % 2:
        return 0.0
    g = J // 2
    lf = LOG_FACTORIAL
    value = (0.5 * math.log(2 * L + 1)
             + 0.5 * (lf(l1 + l2 - L) + lf(l1 - l2 + L) + lf(-l1 + l2 + L) - lf(J + 1))
             + lf(g) - lf(g - l1) - lf(g - l2) - lf(g - L))
    sign = -1.0 if (g - L) % 2 else 1.0
    return sign * math.exp(value)


def _cg_stretched(j1, j2, m2, J):
    lf = LOG_FACTORIAL
    M = j1 + m2
    value = (0.5 * (math.log(2 * J + 1) + lf(J + j1 - j2) + lf(J - j1 + j2) + lf(j1 + j2 - J)
                    - lf(j1 + j2 + J + 1))
             + 0.5 * (lf(J + M) + lf(J - M) + lf(2 * j1) + lf(j2 - m2) + lf(j2 + m2))
             - (lf(j1 + j2 - J) + lf(j2 + m2) + lf(J - j2 + j1) + lf(J - M)))
    return math.exp(value)


def log_cg_zero_projection(l1, l2, L):
    """Vectorized ln|<l1 l2 0 0|L 0>| and sign; requires l1 + l2 + L even and the triangle rule"""
    lf = LOG_FACTORIAL.take
    l1, l2, L = np.broadcast_arrays(np.asarray(l1), np.asarray(l2), np.asarray(L))
    J = l1 + l2 + L
    g = J // 2
    logmag = (0.5 * np.log(2 * L + 1)
              + 0.5 * (lf(l1 + l2 - L) + lf(l1 - l2 + L) + lf(-l1 + l2 + L) - lf(J + 1))
              + lf(g) - lf(g - l1) - lf(g - l2) - lf(g - L))
    sign = np.where((g - L) % 2 == 1, -1.0, 1.0)
    return logmag, sign


def log_cg_stretched(j1, j2, m2, J):
    """Vectorized ln<j1 j2 j1 m2|J j1+m2>; the coefficient is positive"""
    lf = LOG_FACTORIAL.take
    j1, j2, m2, J = np.broadcast_arrays(*(np.asarray(a) for a in (j1, j2, m2, J)))
    M = j1 + m2
    return (0.5 * (np.log(2 * J + 1) + lf(J + j1 - j2) + lf(J - j1 + j2) + lf(j1 + j2 - J)
                   - lf(j1 + j2 + J + 1))
            + 0.5 * (lf(J + M) + lf(J - M) + lf(2 * j1) + lf(j2 - m2) + lf(j2 + m2))
            - (lf(j1 + j2 - J) + lf(j2 + m2) + lf(J - j2 + j1) + lf(J - M)))


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def legendre_rows(l_max, cos_theta, sin_theta=None, m_values=None):
    """
    Yield (m, rows) with rows[l - m] = normalized P_lm(cos theta) for m <= l <= l_max.

    The normalization makes Y_lm = rows[l - m] * exp(i m phi) orthonormal on
    the sphere and includes the Condon-Shortley phase. Only m >= 0 is
    produced; P_{l,-m} = (-1)^m P_lm.
    """
    x = np.asarray(cos_theta, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None)) if sin_theta is None else np.asarray(sin_theta, dtype=float)
    wanted = set(range(l_max + 1)) if m_values is None else {int(m) for m in m_values}
    diag = np.full(x.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(l_max + 1):
        if m > 0:
            diag = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * diag
        if m > max(wanted):
            break
        if m not in wanted:
            continue
        rows = np.empty((l_max - m + 1,) + x.shape)
        rows[0] = diag
        if l_max > m:
            rows[1] = math.sqrt(2 * m + 3) * x * diag
        for l in range(m + 2, l_max + 1):
            a_l = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            a_prev = math.sqrt((4.0 * (l - 1) ** 2 - 1.0) / ((l - 1) ** 2 - m * m))
            rows[l - m] = a_l * (x * rows[l - m - 1] - rows[l - m - 2] / a_prev)
        yield m, rows


def ylm(l, m, point):
    """Spherical harmonic Y_lm at an AngularPoint"""
    _check_integer(l, m)
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid (l, m) = ({l}, {m})")
    if not isinstance(point, AngularPoint):
        point = AngularPoint(*point)
    mu = abs(m)
    _, rows = next(legendre_rows(l, math.cos(point.theta), math.sin(point.theta), m_values=[mu]))
    value = float(rows[l - mu]) * complex(math.cos(mu * point.phi), math.sin(mu * point.phi))
    if m < 0:
        value = (-1) ** mu * value.conjugate()
    return value


# ---------------------------------------------------------------------------
# Spherical Bessel functions
# ---------------------------------------------------------------------------

def _log_sinh_over_x(x):
    return x + math.log(-math.expm1(-2.0 * x)) - LN2 - math.log(x)


def log_mod_sph_bessel_i(l_max, x):
    """ln i_l(x) for l = 0..l_max, i_l(x) = sqrt(pi/2x) I_{l+1/2}(x), via backward continued fraction"""
    if not x > 0:
        raise DomainError(f"modified spherical Bessel function needs x > 0, got {x}")
    start = l_max + int(x) + 60
    ratio = 0.0
    log_ratios = np.zeros(l_max + 1)
    for l in range(start, 0, -1):
        ratio = 1.0 / ((2 * l + 1) / x + ratio)
        if l <= l_max:
            log_ratios[l] = math.log(ratio)
    return _log_sinh_over_x(x) + np.cumsum(log_ratios)


def mod_sph_bessel_i(l, x):
    """Modified spherical Bessel i_l(x) as (log-magnitude, sign)"""
    _check_integer(l)
    if l < 0:
        raise DomainError(f"order must be nonnegative, got {l}")
    return float(log_mod_sph_bessel_i(int(l), float(x))[int(l)]), 1.0


def sph_bessel_j_array(l_max, x):
    """j_l(x) for l = 0..l_max by Miller's downward recurrence"""
    x = float(x)
    out = np.zeros(l_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    ax = abs(x)
    start = l_max + int(ax) + 40 + int(math.sqrt(40.0 * (l_max + ax)))
    upper, current = 0.0, 1e-300
    for l in range(start, 0, -1):
        lower = (2 * l + 1) / ax * current - upper
        upper, current = current, lower
        if l - 1 <= l_max:
            out[l - 1] = current
        if abs(current) > 1e250:
            upper *= 1e-250
            current *= 1e-250
            out *= 1e-250
    j0 = math.sin(ax) / ax
    j1 = math.sin(ax) / ax ** 2 - math.cos(ax) / ax
    if abs(j0) >= abs(j1):
        out *= j0 / out[0]
    else:
        out *= j1 / out[1]
    if x < 0:
        out *= np.where(np.arange(l_max + 1) % 2 == 1, -1.0, 1.0)
    return out


def sph_bessel_j(l, x):
    """Spherical Bessel j_l(x)"""
    _check_integer(l)
    if l < 0:
        raise DomainError(f"order must be nonnegative, got {l}")
    return float(sph_bessel_j_array(max(int(l), 1), x)[int(l)])


# ---------------------------------------------------------------------------
# Wigner small-d
# ---------------------------------------------------------------------------

def wigner_small_d(l, m1, m2, beta):
    """d^l_{m1 m2}(beta) by the explicit Wigner sum"""
    _check_integer(l, m1, m2)
    if abs(m1) > l or abs(m2) > l:
        raise DomainError(f"invalid projections ({m1}, {m2}) for l={l}")
    lf = LOG_FACTORIAL
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    prefactor = 0.5 * (lf(l + m1) + lf(l - m1) + lf(l + m2) + lf(l - m2))
    total = 0.0
    for k in range(max(0, m2 - m1), min(l + m2, l - m1) + 1):
        cos_power = 2 * l + m2 - m1 - 2 * k
        sin_power = m1 - m2 + 2 * k
        base = (c ** cos_power) * (s ** sin_power)
        if base == 0.0:
            continue
        log_denominator = lf(l + m2 - k) + lf(k) + lf(m1 - m2 + k) + lf(l - m1 - k)
        sign = -1.0 if (m1 - m2 + k) % 2 else 1.0
        total += sign * base * math.exp(prefactor - log_denominator)
    return total


def wigner_d_lowest_row(l_max, beta):
    """d^I_{-I,K}(beta) as an array [I, K + l_max]; all entries are nonnegative"""
    out = np.zeros((l_max + 1, 2 * l_max + 1))
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    log_c = math.log(c) if c > 0 else -math.inf
    log_s = math.log(s) if s > 0 else -math.inf
    lf = LOG_FACTORIAL.take
    for I in range(l_max + 1):
        K = np.arange(-I, I + 1)
        with np.errstate(invalid='ignore'):
            log_c_term = np.where(I - K == 0, 0.0, (I - K) * log_c)
            log_s_term = np.where(I + K == 0, 0.0, (I + K) * log_s)
        logs = 0.5 * (lf(2 * I) - lf(I + K) - lf(I - K)) + log_c_term + log_s_term
        out[I, K + l_max] = np.exp(logs)
    return out
