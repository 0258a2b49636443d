"""Non-coherent SIMO flat fading: y_i = h_i s + v_i for antennas i = 1..D."""

from dataclasses import dataclass

import numpy as np

from sparcsim.codec import Codeword


def complex_normal(rng, shape, var):
    """CN(0, var) entries: two real normals scaled by sqrt(var/2)."""
    scale = np.sqrt(var / 2.0)
    real = rng.standard_normal(shape)
    imag = rng.standard_normal(shape)
    return scale * (real + 1j * imag)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h: np.ndarray
    sigma_h_sq: float

    @property
    def n_antennas(self):
        return self.h.shape[0]


@dataclass(frozen=True, eq=False)
class Observation:
    """Y is N x D; column i is what antenna i received."""

    Y: np.ndarray
    sigma_v_sq: float

    @property
    def n_rows(self):
        return self.Y.shape[0]

    @property
    def n_antennas(self):
        return self.Y.shape[1]

    def rotated(self, phases):
        """Apply an independent unit phase e^{j phi_i} to every antenna."""
        phases = np.asarray(phases, dtype=float)
        return Observation(self.Y * np.exp(1j * phases)[None, :], self.sigma_v_sq)


def sample_channel(D, sigma_h_sq, rng):
    if D < 1:
        raise ValueError(f"Antenna count D must be at least 1, got {D}")
    if sigma_h_sq < 0:
        raise ValueError(f"sigma_h_sq must be non-negative, got {sigma_h_sq}")
    return ChannelRealization(complex_normal(rng, D, sigma_h_sq), float(sigma_h_sq))


def transmit(s, channel, sigma_v_sq, rng):
    """Y = s h^T + V with V i.i.d. CN(0, sigma_v_sq)."""
    if sigma_v_sq < 0:
        raise ValueError(f"sigma_v_sq must be non-negative, got {sigma_v_sq}")
    s = s.s if isinstance(s, Codeword) else np.asarray(s, dtype=np.complex128)
    if not np.all(np.isfinite(s)):
        raise ValueError("Codeword has non-finite entries")
    shape = (s.shape[0], channel.n_antennas)
    noise = complex_normal(rng, shape, sigma_v_sq)
    return Observation(np.outer(s, channel.h) + noise, float(sigma_v_sq))


def ebn0_to_sigma_v(ebn0_db, N_b, E_s):
    """sigma_v^2 = N_0 = (E_s / N_b) 10^(-EbN0/10)."""
    if N_b <= 0:
        raise ValueError(f"N_b must be positive, got {N_b}")
    return (E_s / N_b) * 10.0 ** (-ebn0_db / 10.0)
