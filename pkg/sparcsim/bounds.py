"""Coherent sphere-packing lower bound for SIMO fading with MRC.

A code of M codewords on the sphere in R^n (n = 2N) gives each codeword at
most a cone whose cap covers 1/M of the surface. With perfect CSI and
maximum-ratio combining the per-real-dimension SNR is alpha * P with
alpha ~ Gamma(D, 1), and the probability of leaving the cone is a
noncentral t CDF. The bound averages that CDF over alpha.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from sparcsim.channel import ebn0_to_sigma_v
from sparcsim.errors import NumericalGuardError

QUAD_TOL = 1e-6
MAX_QUAD_POINTS = 1024


@dataclass(frozen=True)
class SpbConfig:
    """N complex dims, M codewords, per-real-dimension SNR P, D antennas."""

    N: int
    M: int
    P: float
    D: int
    quad_points: int = 64

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.M < 2:
            raise ValueError(f"M must be at least 2, got {self.M}")
        if not self.P > 0:
            raise ValueError(f"P must be positive, got {self.P}")
        if self.D < 1:
            raise ValueError(f"D must be at least 1, got {self.D}")
        if self.quad_points < 32:
            raise ValueError(f"quad_points must be at least 32, got {self.quad_points}")


def noncentral_t_cdf(x, delta, nu):
    if nu <= 0:
        raise ValueError(f"Degrees of freedom must be positive, got {nu}")
    if np.all(np.asarray(delta) == 0):
        return stats.t.cdf(x, nu)
    return stats.nct.cdf(x, nu, delta)


def cap_fraction(theta, n):
    """Share of the unit sphere in R^n within angle theta of a pole (theta <= pi/2)."""
    return 0.5 * special.betainc((n - 1) / 2.0, 0.5, np.sin(theta) ** 2)


def cone_half_angle(n, M):
    """theta such that a cap of half-angle theta holds 1/M of the sphere in R^n."""
    if n < 2:
        raise ValueError(f"Real dimension must be at least 2, got {n}")
    if M < 2:
        raise ValueError(f"M must be at least 2, got {M}")
    target = 1.0 / M
    if target == 0.5:
        return np.pi / 2
    return optimize.bisect(lambda t: cap_fraction(t, n) - target, 0.0, np.pi / 2, xtol=1e-12, maxiter=200)


def gamma_quadrature(points, D):
    """Gauss-Laguerre nodes and weights for E[f(alpha)], alpha ~ Gamma(D, 1)."""
    nodes, weights = special.roots_genlaguerre(points, D - 1)
    return nodes, weights / special.gamma(D)


def _spb_at(points, cfg, threshold):
    nodes, weights = gamma_quadrature(points, cfg.D)
    delta = np.sqrt(2 * cfg.N * nodes * cfg.P)
    return float(np.sum(weights * noncentral_t_cdf(threshold, delta, 2 * cfg.N - 1)))


def coherent_spb(cfg):
    """Gamma-averaged sphere-packing bound; refines the quadrature until stable."""
    theta = cone_half_angle(2 * cfg.N, cfg.M)
    threshold = np.sqrt(2 * cfg.N - 1) / np.tan(theta)

    points = cfg.quad_points
    previous = _spb_at(points, cfg, threshold)
    while points < MAX_QUAD_POINTS:
        points *= 2
        current = _spb_at(points, cfg, threshold)
        if abs(current - previous) < QUAD_TOL:
            return float(np.clip(current, 0.0, 1.0))
        previous = current
    raise NumericalGuardError(
        f"Sphere-packing quadrature did not settle below {QUAD_TOL} by {MAX_QUAD_POINTS} points"
    )


def spb_power(ebn0_db, N, N_b, K, sigma_h_sq):
    """Per-real-dimension SNR sigma_h^2 E_s / (N sigma_v^2) with E_s = K."""
    sigma_v_sq = ebn0_to_sigma_v(ebn0_db, N_b, K)
    return sigma_h_sq * K / (N * sigma_v_sq)


def spb_curve(N, N_b, K, D, ebn0_grid, sigma_h_sq=None, quad_points=64):
    """[(ebn0_db, pe_lower_bound), ...] on the simulation's Eb/N0 axis."""
    sigma_h_sq = 1.0 / D if sigma_h_sq is None else sigma_h_sq
    out = []
    for ebn0 in ebn0_grid:
        cfg = SpbConfig(N, 2**N_b, spb_power(ebn0, N, N_b, K, sigma_h_sq), D, quad_points)
        out.append((float(ebn0), coherent_spb(cfg)))
    return out
