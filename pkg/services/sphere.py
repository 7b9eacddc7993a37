# services/sphere.py - Synthesis and quadrature on the sphere

import logging
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft

from models import Frame
from services.specfun import legendre_rows

logger = logging.getLogger(__name__)


def gauss_legendre_grid(n_theta, n_phi):
    """Gauss-Legendre nodes in cos(theta) times uniform phi; weights integrate dOmega"""
    x, w = leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return theta, phi, w * (2.0 * math.pi / n_phi)


def synthesize_grid(coefficients, l_max, theta, phi):
    """Psi on the tensor grid theta x phi from b[I, M + l_max]"""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x, s = np.cos(theta), np.sin(theta)
    out = np.zeros((len(theta), len(phi)), dtype=complex)
    for m, rows in legendre_rows(l_max, x, s):
        pos = coefficients[m:, m + l_max] @ rows
        out += np.outer(pos, np.exp(1j * m * phi))
        if m:
            sign = -1.0 if m % 2 else 1.0
            neg = coefficients[m:, -m + l_max] @ rows
            out += sign * np.outer(neg, np.exp(-1j * m * phi))
    return out


def synthesize_points(coefficients, l_max, theta, phi):
    """Psi at scattered points (arrays of equal shape)"""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x, s = np.cos(theta).ravel(), np.sin(theta).ravel()
    flat_phi = phi.ravel()
    out = np.zeros(x.shape, dtype=complex)
    for m, rows in legendre_rows(l_max, x, s):
        pos = coefficients[m:, m + l_max] @ rows
        out += pos * np.exp(1j * m * flat_phi)
        if m:
            sign = -1.0 if m % 2 else 1.0
            out += sign * (coefficients[m:, -m + l_max] @ rows) * np.exp(-1j * m * flat_phi)
    return out.reshape(theta.shape)


def project(values, l_max, theta, weights):
    """
    Coefficients up to l_max of a function sampled on a Gauss-Legendre grid.

    values has shape (n_theta, n_phi) on the grid of gauss_legendre_grid;
    weights are the combined dOmega weights per theta row.
    """
    n_phi = values.shape[1]
    # phi integral: sum_k f e^{-i m phi_k}
    spectrum = fft.fft(values, axis=1)
    coefficients = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    x, s = np.cos(theta), np.sin(theta)
    for m, rows in legendre_rows(l_max, x, s):
        weighted = rows * weights
        coefficients[m:, m + l_max] = weighted @ spectrum[:, m % n_phi]
        if m:
            sign = -1.0 if m % 2 else 1.0
            coefficients[m:, -m + l_max] = sign * (weighted @ spectrum[:, (-m) % n_phi])
    return coefficients


def frame_to_lab(theta_f, phi_f, frame):
    """Lab (theta, phi) of points given in a rotated frame"""
    st, ct = np.sin(theta_f), np.cos(theta_f)
    sp, cp = np.sin(phi_f), np.cos(phi_f)
    if frame is Frame.THETA_PRIME:
        nx, ny, nz = ct, st * cp, st * sp
    elif frame is Frame.THETA_DOUBLE_PRIME:
        ny, nz, nx = ct, st * cp, st * sp
    else:
        return np.asarray(theta_f, dtype=float), np.mod(phi_f, 2.0 * math.pi)
    theta = np.arccos(np.clip(nz, -1.0, 1.0))
    phi = np.mod(np.arctan2(ny, nx), 2.0 * math.pi)
    return theta, phi


def rotate_to_frame(coefficients, l_max, frame):
    """Expansion coefficients of the same function in the polar frame `frame`"""
    if frame is Frame.LAB:
        return np.array(coefficients, dtype=complex)
    # band-limited input: this grid integrates exactly
    theta_f, phi_f, weights = gauss_legendre_grid(l_max + 2, 2 * l_max + 2)
    tt, pp = np.meshgrid(theta_f, phi_f, indexing='ij')
    theta, phi = frame_to_lab(tt, pp, frame)
    values = synthesize_points(coefficients, l_max, theta, phi)
    return project(values, l_max, theta_f, weights)
