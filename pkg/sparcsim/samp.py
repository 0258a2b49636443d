"""SPARC approximate message passing (SAMP) for the non-coherent SIMO model.

The unknown G = x h^T (L x D, one nonzero row per section) is estimated by

    Z^t     = Y - A G^t + Z^{t-1} F^{t-1}
    B^t     = G^t + A^H Z^t
    G^{t+1} = eta(B^t; tau_t^2)

starting from G^0 = 0, where eta is the section-wise MMSE denoiser and
F^{t-1} = (L/N) <<J>> is the averaged denoiser Jacobian evaluated at
B^{t-1}. tau_t^2 comes from an offline state-evolution schedule or from
the online estimate |Z^t|^2 / (N D).

Everything here works on the used columns only (the first sum(L_k) columns).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from sparcsim.channel import Observation, complex_normal
from sparcsim.codec import SupportSet, to_codeword
from sparcsim.decoders.base import DecodeResult, DecoderConfig
from sparcsim.decoders.ml import ml_metric
from sparcsim.errors import NumericalGuardError

SCHEDULE_MODES = ("offline", "online")
TAU_FLOOR = 1e-30
DIVERGENCE_FACTOR = 10.0
_MC_CHUNK_ENTRIES = 2**20


@dataclass(frozen=True)
class SeSchedule:
    """How tau_t^2 is chosen at each iteration, and when to stop."""

    mode: str = "offline"
    taus: tuple = ()
    t_max: int = 25
    rel_tol: float = 1e-3
    early_stop: bool = True

    def __post_init__(self):
        if self.mode not in SCHEDULE_MODES:
            raise ValueError(f"Unknown SE mode: {self.mode}. Available: {list(SCHEDULE_MODES)}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be at least 1, got {self.t_max}")
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))

    def tau_at(self, t, tau_online):
        if self.mode == "online":
            return tau_online
        if not self.taus:
            raise ValueError("Offline schedule has no tau values; build it with se_offline()")
        return self.taus[min(t, len(self.taus) - 1)]

    @property
    def converged(self):
        """Whether the offline sequence ended at a fixed point."""
        if len(self.taus) < 2:
            return False
        return relative_change(self.taus[-2], self.taus[-1]) < self.rel_tol


@dataclass(frozen=True, eq=False)
class AmpState:
    """One SAMP iteration.

    G_hat is the estimate produced by this iteration (G^{t+1}); onsager is
    the D x D factor F^t that the next iteration multiplies Z^t by.
    """

    G_hat: np.ndarray
    Z: np.ndarray
    B: np.ndarray
    tau_sq: float
    onsager: np.ndarray
    t: int
    tau_online: float


def relative_change(previous, current):
    if previous == 0:
        return 0.0 if current == 0 else np.inf
    return abs(current - previous) / previous


def _check_rows(B, dictionary):
    if B.shape[-2] != dictionary.plan.n_used:
        raise ValueError(f"Expected {dictionary.plan.n_used} rows, got {B.shape[-2]}")


def _gains(tau_sq, sigma_h_sq):
    if tau_sq <= 0:
        raise ValueError(f"tau_sq must be positive, got {tau_sq}")
    shrink = sigma_h_sq / (tau_sq + sigma_h_sq)
    sharpness = sigma_h_sq / (tau_sq * (tau_sq + sigma_h_sq))
    return shrink, sharpness


def section_weights(B, tau_sq, dictionary, sigma_h_sq):
    """Posterior probability that each row is the active one in its section.

    B may carry leading batch axes: (..., L, D).
    """
    _check_rows(B, dictionary)
    _, sharpness = _gains(tau_sq, sigma_h_sq)
    logits = sharpness * np.sum(np.abs(B) ** 2, axis=-1)
    w = np.empty_like(logits)
    for q in dictionary.sections:
        w[..., q.start:q.stop] = softmax(logits[..., q.start:q.stop], axis=-1)
    return w


def mmse_denoise(B, tau_sq, dictionary, sigma_h_sq):
    """eta(B): w_k * sigma_h^2/(tau^2 + sigma_h^2) * B_k for every row k."""
    shrink, _ = _gains(tau_sq, sigma_h_sq)
    w = section_weights(B, tau_sq, dictionary, sigma_h_sq)
    return shrink * w[..., None] * B


def row_jacobian(B, row, tau_sq, dictionary, sigma_h_sq):
    """D x D Jacobian of eta at one row: J[j, i] = d eta_i / d B_j.

    Holomorphic Wirtinger derivative (conj(B) held fixed), so a small row
    perturbation moves the output by db @ J.
    """
    shrink, sharpness = _gains(tau_sq, sigma_h_sq)
    w = section_weights(B, tau_sq, dictionary, sigma_h_sq)[row]
    b = B[row]
    D = b.shape[0]
    return shrink * w * np.eye(D) + shrink * sharpness * w * (1.0 - w) * np.outer(b.conj(), b)


def mean_jacobian(B, tau_sq, dictionary, sigma_h_sq):
    """Average of row_jacobian over all L rows, without forming each one."""
    shrink, sharpness = _gains(tau_sq, sigma_h_sq)
    w = section_weights(B, tau_sq, dictionary, sigma_h_sq)
    L, D = B.shape
    spread = B.conj().T @ (B * (w * (1.0 - w))[:, None])
    return shrink * w.mean() * np.eye(D) + shrink * sharpness * spread / L


def onsager_factor(B_prev, tau_prev_sq, dictionary, sigma_h_sq):
    L = dictionary.plan.n_used
    return (L / dictionary.n_rows) * mean_jacobian(B_prev, tau_prev_sq, dictionary, sigma_h_sq)


def onsager_term(Z_prev, B_prev, tau_prev_sq, dictionary, sigma_h_sq, factor=None):
    """(L/N) Z^{t-1} <<J>>; zero at t = 0 (Z_prev None).

    factor, when given, is the already computed onsager_factor for B_prev.
    """
    if Z_prev is None:
        D = 1 if B_prev is None else B_prev.shape[-1]
        return np.zeros((dictionary.n_rows, D), dtype=np.complex128)
    if factor is None:
        factor = onsager_factor(B_prev, tau_prev_sq, dictionary, sigma_h_sq)
    return Z_prev @ factor


def se_online(Z):
    Z = np.asarray(Z)
    return float(np.vdot(Z, Z).real / Z.size)


def section_argmax(G_hat, dictionary):
    """Per section, the row of G_hat with the largest norm (lowest index on ties)."""
    power = np.sum(np.abs(G_hat) ** 2, axis=1)
    return SupportSet(tuple(q.start + int(np.argmax(power[q.start:q.stop])) for q in dictionary.sections))


def samp_iterations(Y, dictionary, sigma_h_sq, schedule):
    """Yield an AmpState per iteration until t_max or the tau fixed point."""
    Y = Y.Y if isinstance(Y, Observation) else np.asarray(Y, dtype=np.complex128)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != dictionary.n_rows:
        raise ValueError(f"Observation has {Y.shape[0]} rows, dictionary has {dictionary.n_rows}")

    A = dictionary.used
    AH = A.conj().T
    D = Y.shape[1]
    G = np.zeros((A.shape[1], D), dtype=np.complex128)
    Z_prev = B_prev = factor = tau_prev = None
    tau_start = None

    for t in range(schedule.t_max):
        Z = Y - A @ G + onsager_term(Z_prev, B_prev, tau_prev, dictionary, sigma_h_sq, factor=factor)
        B = G + AH @ Z

        tau_online = se_online(Z)
        if tau_start is None:
            tau_start = tau_online
        elif tau_online > DIVERGENCE_FACTOR * tau_start:
            raise NumericalGuardError(
                f"SAMP diverged at t={t}: residual power {tau_online:.4g} vs initial {tau_start:.4g}"
            )

        tau = max(schedule.tau_at(t, tau_online), TAU_FLOOR)
        G = mmse_denoise(B, tau, dictionary, sigma_h_sq)
        factor = onsager_factor(B, tau, dictionary, sigma_h_sq)
        yield AmpState(G, Z, B, tau, factor, t, tau_online)

        if schedule.early_stop and tau_prev is not None and relative_change(tau_prev, tau) < schedule.rel_tol:
            return
        Z_prev, B_prev, tau_prev = Z, B, tau


def samp_decode(Y, dictionary, sigma_h_sq, sigma_v_sq, schedule):
    state = None
    for state in samp_iterations(Y, dictionary, sigma_h_sq, schedule):
        pass
    support = section_argmax(state.G_hat, dictionary)
    cfg = DecoderConfig(sigma_h_sq, sigma_v_sq, theorem1_mode=sigma_v_sq == 0)
    metric = ml_metric(Y, to_codeword(support, dictionary), cfg)
    return DecodeResult(support, metric, 0, state.t + 1)


def draw_signal(n, dictionary, n_antennas, sigma_h_sq, rng):
    """n independent G = x h^T draws, shape (n, L, D)."""
    idx = np.stack(
        [q.start + rng.integers(0, len(q), size=n) for q in dictionary.sections], axis=1
    )
    h = complex_normal(rng, (n, n_antennas), sigma_h_sq)
    G = np.zeros((n, dictionary.plan.n_used, n_antennas), dtype=np.complex128)
    G[np.arange(n)[:, None], idx] = h[:, None, :]
    return G


def _denoising_error(tau_sq, dictionary, n_antennas, sigma_h_sq, n_mc, rng):
    """Monte Carlo E|eta(G + tau W) - G|^2."""
    L = dictionary.plan.n_used
    chunk = max(1, _MC_CHUNK_ENTRIES // (L * n_antennas))
    total = 0.0
    done = 0
    while done < n_mc:
        n = min(chunk, n_mc - done)
        G = draw_signal(n, dictionary, n_antennas, sigma_h_sq, rng)
        W = complex_normal(rng, G.shape, 1.0)
        est = mmse_denoise(G + np.sqrt(tau_sq) * W, tau_sq, dictionary, sigma_h_sq)
        total += float(np.sum(np.abs(est - G) ** 2))
        done += n
    return total / n_mc


def se_offline(dictionary, sigma_h_sq, sigma_v_sq, n_antennas, rng, n_mc=2000, t_max=25, rel_tol=1e-3):
    """Precompute tau_0^2, tau_1^2, ... by Monte Carlo state evolution.

    tau_0^2 = sigma_v^2 + E|G|^2/(ND) and
    tau_{t+1}^2 = sigma_v^2 + E|eta_t(G + tau_t W) - G|^2/(ND),
    stopping at t_max values or once the relative change drops below rel_tol.
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be at least 1, got {n_mc}")
    N = dictionary.n_rows
    K = dictionary.n_sections
    scale = N * n_antennas

    h = complex_normal(rng, (n_mc, n_antennas), sigma_h_sq)
    signal_energy = K * float(np.mean(np.sum(np.abs(h) ** 2, axis=1)))
    taus = [sigma_v_sq + signal_energy / scale]

    while len(taus) < t_max:
        tau = max(taus[-1], TAU_FLOOR)
        err = _denoising_error(tau, dictionary, n_antennas, sigma_h_sq, n_mc, rng)
        taus.append(sigma_v_sq + err / scale)
        if relative_change(taus[-2], taus[-1]) < rel_tol:
            break
    return SeSchedule("offline", tuple(taus), t_max, rel_tol)
