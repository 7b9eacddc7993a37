# services/states.py - Coherent state builders

"""
Builders for every coherent-state family on the sphere and for the
symmetric top. Each builder truncates at the smallest l_max whose
neglected partial-wave weight is below ``tail_tol`` and renormalizes.
"""

import logging
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np

from errors import DomainError, QuadratureError, TruncationError
from models import (
    AngularMomentumReport, ExponentialSpec, GaussianSeedSpec, SphericalExpansion,
    StateFamily, TopExpansion
)
from services.specfun import (
    LOG_FACTORIAL, legendre_rows, log_cg_stretched, log_cg_zero_projection,
    log_mod_sph_bessel_i, sph_bessel_j_array
)
from services.sphere import gauss_legendre_grid, project

logger = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_L_MAX_CAP = 512

# terms below e^-46 (~1e-20) cannot move a coefficient
LOG_NEGLIGIBLE = -46.0


def log_sinh(x):
    """ln sinh(x) for x > 0 without overflow"""
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def select_l_max(weights, tail_tol, l_max_cap, label='state'):
    """Smallest l with sum_{I>l} weights[I] / total < tail_tol"""
    weights = np.asarray(weights, dtype=float)
    total = float(weights.sum())
    if not total > 0:
        raise DomainError(f"{label}: zero norm")
    tails = np.concatenate([np.cumsum(weights[::-1])[::-1][1:], [0.0]]) / total
    below = np.nonzero(tails < tail_tol)[0]
    if below.size == 0 or below[0] > l_max_cap:
        residual = float(tails[min(l_max_cap, len(tails) - 1)])
        raise TruncationError(
            f"{label}: tail tolerance {tail_tol:g} not reached below l_max cap {l_max_cap}",
            l_max=l_max_cap, residual=residual
        )
    l_max = int(below[0])
    return l_max, float(tails[l_max])


def _normalized(coefficients):
    norm = math.sqrt(float(np.sum(np.abs(coefficients) ** 2)))
    if not norm > 0:
        raise DomainError("state has zero norm")
    return coefficients / norm


def _log_power(base, exponents):
    exponents = np.asarray(exponents)
    if base == 0.0:
        return np.where(exponents == 0, 0.0, -np.inf)
    return exponents * math.log(base)


def conj_axis_harmonics(l_max, theta, phi):
    """conj(Y_lM(theta, phi)) as an array [l, M + l_max]"""
    out = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    x, s = math.cos(theta), math.sin(theta)
    for m, rows in legendre_rows(l_max, x, s):
        phase = complex(math.cos(m * phi), -math.sin(m * phi))
        out[m:, m + l_max] = rows * phase
        if m:
            sign = -1.0 if m % 2 else 1.0
            out[m:, -m + l_max] = sign * rows * phase.conjugate()
    return out


# ---------------------------------------------------------------------------
# Intelligent spin states
# ---------------------------------------------------------------------------

def intelligent_harmonic(l, eta):
    """Normalized eigenstate of L^2 annihilated by Lx + i eta Ly"""
    if int(l) != l or l < 0:
        raise DomainError(f"l must be a nonnegative integer, got {l}")
    l = int(l)
    coefficients = np.zeros((l + 1, 2 * l + 1), dtype=complex)
    if l == 0:
        coefficients[0, 0] = 1.0
        return SphericalExpansion(0, coefficients, StateFamily.INTELLIGENT.value)

    up, down = 1.0 + eta, 1.0 - eta
    if down == 0.0:
        coefficients[l, 2 * l] = 1.0
        return SphericalExpansion(l, coefficients, StateFamily.INTELLIGENT.value)
    if up == 0.0:
        coefficients[l, 0] = -1.0 if l % 2 else 1.0
        return SphericalExpansion(l, coefficients, StateFamily.INTELLIGENT.value)

    # C_m ~ (-1)^b (1+eta)^a (1-eta)^b sqrt(C(2a,a) C(2b,b)), a=(l+m)/2, b=(l-m)/2
    m = np.arange(-l, l + 1, 2)
    a = (l + m) // 2
    b = (l - m) // 2
    lf = LOG_FACTORIAL.take
    logs = (a * math.log(abs(up)) + b * math.log(abs(down))
            + 0.5 * (lf(2 * a) - 2 * lf(a) + lf(2 * b) - 2 * lf(b)))
    signs = np.where(b % 2 == 1, -1.0, 1.0)
    if up < 0:
        signs = signs * np.where(a % 2 == 1, -1.0, 1.0)
    if down < 0:
        signs = signs * np.where(b % 2 == 1, -1.0, 1.0)
    values = signs * np.exp(logs - logs.max())
    coefficients[l, m + l] = values / np.linalg.norm(values)
    return SphericalExpansion(l, coefficients, StateFamily.INTELLIGENT.value)


def general_wp(weights, eta):
    """Superposition sum_l lambda_l |Y^l_eta> normalized"""
    weights = np.asarray(weights, dtype=complex)
    if weights.ndim != 1 or weights.size == 0:
        raise DomainError("weights must be a nonempty 1-d array")
    if not np.all(np.isfinite(weights)):
        raise DomainError("weights must be finite")
    if not np.any(weights != 0):
        raise DomainError("all-zero weights")
    l_max = int(np.nonzero(weights)[0].max())
    coefficients = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    for l in range(l_max + 1):
        if weights[l] == 0:
            continue
        row = intelligent_harmonic(l, eta).coefficients[l]
        coefficients[l, l_max - l:l_max + l + 1] = weights[l] * row
    return SphericalExpansion(l_max, _normalized(coefficients), StateFamily.GENERAL.value)


# ---------------------------------------------------------------------------
# Exponential packets
# ---------------------------------------------------------------------------

def exponential_wp(spec, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """
    Partial-wave expansion of sqrt(N / 2pi sinh 2N) exp(N sin(theta)[cos(phi) + i eta sin(phi)]).

    For |eta| <= 1 the coefficients come from the double power series in
    sin(theta) e^{+-i phi} coupled by Clebsch-Gordan coefficients. Beyond
    that range the series terms grow like e^{N |eta|} while the result stays
    of order one, so the packet is projected by quadrature instead.
    """
    if not isinstance(spec, ExponentialSpec):
        spec = ExponentialSpec(*spec)
    N, eta = float(spec.N), float(spec.eta)
    if abs(eta) > 1.0:
        logger.debug(f"exponential_wp: |eta|={abs(eta)} > 1, using quadrature projection")
        state = gaussian_seed_wp(GaussianSeedSpec(N, eta, 0.0), tail_tol=tail_tol, l_max_cap=l_max_cap)
        return replace(state, family=StateFamily.EXPONENTIAL.value)

    grid = l_max_cap + 64
    degrees = np.arange(grid + 1)
    half_lf = 0.5 * LOG_FACTORIAL.take(2 * degrees)
    log_prefactor = 0.5 * (math.log(2.0 * N) - log_sinh(2.0 * N))
    row = _log_power(N * (1.0 + eta), degrees) - half_lf
    col = _log_power(N * (1.0 - eta), degrees) - half_lf
    log_terms = log_prefactor + row[:, None] + col[None, :]
    keep = log_terms > LOG_NEGLIGIBLE
    if keep[-1, :].any() or keep[:, -1].any():
        raise TruncationError(
            f"exponential_wp: series for N={N} does not fit below l_max cap {l_max_cap}",
            l_max=l_max_cap
        )
    l, lp = np.nonzero(keep)

    # each pair (l, l') feeds I = |l - l'|, |l - l'| + 2, ..., l + l'
    counts = np.minimum(l, lp) + 1
    pair = np.repeat(np.arange(len(l)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    step = np.arange(int(counts.sum())) - starts
    L1, L2 = l[pair], lp[pair]
    M = L1 - L2
    I = np.abs(M) + 2 * step

    log_cg0, sign_cg0 = log_cg_zero_projection(L1, L2, I)
    log_cg1 = log_cg_stretched(L1, L2, -L2, I)
    logs = log_terms[L1, L2] + log_cg0 + log_cg1 - 0.5 * np.log(2 * I + 1)
    signs = sign_cg0 * np.where(L1 % 2 == 1, -1.0, 1.0)

    reach = int(I.max())
    full = np.zeros((reach + 1, 2 * reach + 1))
    np.add.at(full, (I, M + reach), signs * np.exp(logs))

    l_max, residual = select_l_max(np.sum(full ** 2, axis=1), tail_tol, l_max_cap, 'exponential_wp')
    coefficients = full[:l_max + 1, reach - l_max:reach + l_max + 1].astype(complex)
    logger.debug(f"exponential_wp N={N} eta={eta}: l_max={l_max}, tail={residual:.3e}, pairs={len(l)}")
    return SphericalExpansion(l_max, _normalized(coefficients), StateFamily.EXPONENTIAL.value, residual)


def linear_partial_waves(N, l_max):
    """Weights sqrt(2N/sinh 2N) sqrt(2I+1) i_I(N) of the eta = 0 packet on Y^I_0(theta')"""
    log_i = log_mod_sph_bessel_i(l_max, float(N))
    degrees = np.arange(l_max + 1)
    return np.exp(0.5 * (math.log(2.0 * N) - log_sinh(2.0 * N))
                  + 0.5 * np.log(2 * degrees + 1) + log_i)


def linear_wp(N, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """eta = 0 packet from the Bessel closed form, expressed in the lab frame"""
    if not N > 0:
        raise DomainError(f"N must be positive, got {N}")
    weights = linear_partial_waves(N, l_max_cap) ** 2
    l_max, residual = select_l_max(weights, tail_tol, l_max_cap, 'linear_wp')
    log_i = log_mod_sph_bessel_i(l_max, float(N))
    radial = np.exp(0.5 * (math.log(N) - math.log(2.0 * math.pi) - log_sinh(2.0 * N)) + log_i)
    coefficients = 4.0 * math.pi * radial[:, None] * conj_axis_harmonics(l_max, math.pi / 2, 0.0)
    return SphericalExpansion(l_max, _normalized(coefficients), StateFamily.EXPONENTIAL.value, residual)


def uniform_linear_wp(etaN, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """exp(i etaN sin(theta) sin(phi)) / sqrt(4 pi), uniform density and L_y = 0"""
    x = float(etaN)
    if not x > 0:
        raise DomainError(f"etaN must be positive, got {etaN}")
    j = sph_bessel_j_array(l_max_cap, x)
    degrees = np.arange(l_max_cap + 1)
    l_max, residual = select_l_max((2 * degrees + 1) * j ** 2, tail_tol, l_max_cap, 'uniform_linear_wp')
    powers = np.array([1j ** (l % 4) for l in range(l_max + 1)])
    radial = math.sqrt(4.0 * math.pi) * powers * j[:l_max + 1]
    coefficients = radial[:, None] * conj_axis_harmonics(l_max, math.pi / 2, math.pi / 2)
    return SphericalExpansion(l_max, _normalized(coefficients), StateFamily.UNIFORM.value, residual)


def gaussian_seed_wp(spec, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP, initial_l_max=None):
    """
    Quadrature projection of sqrt(N / 2pi sinh 2N) exp(N sin(theta)[(1+i eps) cos(phi) + i eta sin(phi)]).

    The band limit is doubled until the last eighth of the bands carries
    less than tail_tol of the weight.
    """
    if not isinstance(spec, GaussianSeedSpec):
        spec = GaussianSeedSpec(*spec)
    N, eta, eps = float(spec.N), float(spec.eta), float(spec.epsilon)
    log_norm = 0.5 * (math.log(N) - math.log(2.0 * math.pi) - log_sinh(2.0 * N))
    band = initial_l_max or int(N * (1.0 + max(abs(eta), abs(eps))) + 8.0 * math.sqrt(N) + 16)
    band = min(band, l_max_cap)

    while True:
        theta, phi, weights = gauss_legendre_grid(2 * band, 4 * band)
        st = np.sin(theta)[:, None]
        cp, sp = np.cos(phi)[None, :], np.sin(phi)[None, :]
        values = np.exp(log_norm + N * st * cp + 1j * N * st * (eps * cp + eta * sp))
        coefficients = project(values, band, theta, weights)
        partial = np.sum(np.abs(coefficients) ** 2, axis=1)
        tails = np.concatenate([np.cumsum(partial[::-1])[::-1][1:], [0.0]])
        below = np.nonzero(tails < tail_tol)[0]
        margin = max(8, band // 8)
        if below.size and (below[0] <= band - margin or band >= l_max_cap):
            break
        if band >= l_max_cap:
            raise TruncationError(
                f"gaussian_seed_wp: tail tolerance {tail_tol:g} not reached below l_max cap {l_max_cap}",
                l_max=l_max_cap, residual=float(tails[-2]) if len(tails) > 1 else None
            )
        band = min(2 * band, l_max_cap)

    defect = abs(float(partial.sum()) - 1.0)
    if defect > max(tail_tol, 1e-9):
        raise QuadratureError(f"gaussian_seed_wp: norm defect {defect:.3e} after projection", defect)
    l_max = int(below[0])
    residual = float(tails[l_max])
    trimmed = coefficients[:l_max + 1, band - l_max:band + l_max + 1]
    logger.debug(f"gaussian_seed_wp N={N} eta={eta} eps={eps}: band={band}, l_max={l_max}")
    return SphericalExpansion(l_max, _normalized(trimmed), StateFamily.GAUSSIAN.value, residual)


def quasi_intelligent_wp(N, eta, epsilon, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    return gaussian_seed_wp(GaussianSeedSpec(N, eta, epsilon), tail_tol=tail_tol, l_max_cap=l_max_cap)


# ---------------------------------------------------------------------------
# Boson representation
# ---------------------------------------------------------------------------

def boson_circular_state(spec, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """
    |k s> = sum_p w_p |j = p s, m = j> with |w_p|^2 Poisson of mean k^(4s).

    Integer truncation keeps only integer j and renormalizes; the kept
    fraction is reported as ``renormalization``.
    """
    s = Fraction(spec.s)
    if not spec.integer_truncated and s.denominator != 1:
        raise DomainError("untruncated boson states with half-integer s have half-integer j")
    mean = float(spec.k) ** (4 * float(s))
    p_top = int(l_max_cap / s)
    p = np.arange(p_top + 1)
    log_w = p * math.log(mean) - LOG_FACTORIAL.take(p) - mean
    kept = (p * s.numerator) % s.denominator == 0
    j = (p * s.numerator) // s.denominator

    weights = np.where(kept, np.exp(log_w), 0.0)
    per_j = np.zeros(int(j[-1]) + 1)
    np.add.at(per_j, j[kept], weights[kept])
    per_j = per_j[:l_max_cap + 1]
    l_max, residual = select_l_max(per_j, tail_tol, l_max_cap, 'boson_circular_state')

    coefficients = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    degrees = np.arange(l_max + 1)
    coefficients[degrees, degrees + l_max] = np.sqrt(per_j[:l_max + 1])
    renormalization = float(per_j[:l_max + 1].sum())
    logger.debug(f"boson_circular_state k={spec.k} s={s}: l_max={l_max}, kept={renormalization:.6f}")
    return SphericalExpansion(l_max, _normalized(coefficients), StateFamily.BOSON.value,
                              residual, renormalization)


def boson_moments(k, s):
    """Moments of the untruncated |k s> state; valid for half-integer s"""
    s = float(Fraction(s))
    mean = float(k) ** (4 * s)
    mean_lz = s * mean
    mean_lz2 = s * s * (mean + mean * mean)
    transverse = 0.5 * mean_lz
    return AngularMomentumReport(
        mean_Lx=0.0, mean_Ly=0.0, mean_Lz=mean_lz,
        mean_Lx2=transverse, mean_Ly2=transverse, mean_Lz2=mean_lz2,
        mean_L2=mean_lz2 + mean_lz,
        var_Lx=transverse, var_Ly=transverse,
        uncertainty_product=transverse * transverse,
        lz_bound=0.25 * mean_lz * mean_lz,
    )


# ---------------------------------------------------------------------------
# Symmetric top
# ---------------------------------------------------------------------------

def _top_from_bosons(log_plus, sign_plus, log_minus, sign_minus, R, tail_tol, l_max_cap, label):
    # per-I weight e^-R R^(2I) / (2I)! does not depend on how R is split
    degrees = np.arange(l_max_cap + 1)
    log_per_I = 2 * degrees * (math.log(R) if R > 0 else -np.inf) - LOG_FACTORIAL.take(2 * degrees) - R
    log_per_I[0] = -R
    per_I = np.exp(log_per_I)
    l_max, residual = select_l_max(per_I, tail_tol, l_max_cap, label)

    coefficients = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    lf = LOG_FACTORIAL.take
    for I in range(l_max + 1):
        K = np.arange(-I, I + 1)
        with np.errstate(invalid='ignore'):
            lp = np.where(I + K == 0, 0.0, (I + K) * log_plus)
            lm = np.where(I - K == 0, 0.0, (I - K) * log_minus)
        logs = -0.5 * R + lp + lm - 0.5 * (lf(I + K) + lf(I - K))
        signs = np.ones(K.shape)
        if sign_plus < 0:
            signs *= np.where((I + K) % 2 == 1, -1.0, 1.0)
        if sign_minus < 0:
            signs *= np.where((I - K) % 2 == 1, -1.0, 1.0)
        coefficients[I, K + l_max] = signs * np.exp(logs)
    renormalization = float(per_I[:l_max + 1].sum())
    return TopExpansion(l_max, _normalized(coefficients), residual, renormalization)


def _log_abs(value):
    return math.log(abs(value)) if value != 0 else -np.inf


def janssen_top_state(spec, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """
    C_IK = e^-r (-1)^(I+K) (2r)^I sin(lam/2)^(I+K) cos(lam/2)^(I-K) / sqrt((I+K)! (I-K)!)

    restricted to integer I and K and renormalized; ``renormalization`` is
    the weight the integer restriction keeps.
    """
    r, lam = float(spec.r), float(spec.lam)
    sin_half, cos_half = math.sin(lam / 2.0), math.cos(lam / 2.0)
    base = math.sqrt(2.0 * r)
    state = _top_from_bosons(
        _log_abs(base * sin_half), -1.0, _log_abs(base * cos_half), 1.0,
        2.0 * r, tail_tol, l_max_cap, 'janssen_top_state'
    )
    logger.debug(f"janssen_top_state r={r} lambda={lam}: l_max={state.l_max}, "
                 f"kept={state.renormalization:.6f}")
    return state


def atkins_dobson_state(alpha_plus, alpha_minus, tail_tol=DEFAULT_TAIL_TOL, l_max_cap=DEFAULT_L_MAX_CAP):
    """Integer-truncated spin-1/2 boson state with n+ = I + K and n- = I - K quanta"""
    R = float(alpha_plus) ** 2 + float(alpha_minus) ** 2
    if not R > 0:
        raise DomainError("at least one boson amplitude must be nonzero")
    return _top_from_bosons(
        _log_abs(alpha_plus), math.copysign(1.0, alpha_plus),
        _log_abs(alpha_minus), math.copysign(1.0, alpha_minus),
        R, tail_tol, l_max_cap, 'atkins_dobson_state'
    )
