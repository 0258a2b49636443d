"""Block-OMP and modified Block-OMP successive-cancellation baselines.

Both pick, section by section, the unused column best correlated with the
residual. BOMP fits one least-squares coefficient per detected column;
MBOMP fits a single gain per antenna to the running sum of detected
columns, matching the one-gain-per-antenna flat fading model.
"""

import numpy as np

from sparcsim.decoders.base import Decoder, section_mask, support_from
from sparcsim.decoders.ml import best_of_paths


def mbomp_residual(Y, s):
    """Project every antenna onto s: h_i = <y_i, s>/|s|^2, r_i = y_i - h_i s."""
    s_sq = float(np.vdot(s, s).real)
    if s_sq == 0.0:
        return np.zeros(Y.shape[1], dtype=np.complex128), Y.copy()
    h_hat = (s.conj() @ Y) / s_sq
    return h_hat, Y - np.outer(s, h_hat)


def bomp_residual(Y, A_S):
    """Least-squares coefficients over the detected columns and the residual."""
    H, *_ = np.linalg.lstsq(A_S, Y, rcond=None)
    return H, Y - A_S @ H


def _complete(Y, dictionary, first, residual_of):
    A = dictionary.used
    chosen = [first]
    while len(chosen) < dictionary.n_sections:
        R = residual_of(Y, A, chosen)
        energy = np.sum(np.abs(A.conj().T @ R) ** 2, axis=1)
        energy = np.where(section_mask(dictionary, chosen), energy, -np.inf)
        chosen.append(int(np.argmax(energy)))
    return support_from(chosen, dictionary)


def _mbomp_step(Y, A, chosen):
    return mbomp_residual(Y, A[:, chosen].sum(axis=1))[1]


def _bomp_step(Y, A, chosen):
    return bomp_residual(Y, A[:, chosen])[1]


def complete_mbomp(Y, dictionary, cfg, C, first):
    return _complete(Y, dictionary, first, _mbomp_step)


def complete_bomp(Y, dictionary, cfg, C, first):
    return _complete(Y, dictionary, first, _bomp_step)


def mbomp(Y, dictionary, cfg):
    return best_of_paths(Y, dictionary, cfg, complete_mbomp)


def bomp(Y, dictionary, cfg):
    return best_of_paths(Y, dictionary, cfg, complete_bomp)


class MbompDecoder(Decoder):
    name = "mbomp"

    def decode(self, Y, dictionary, cfg, context=None):
        return mbomp(Y, dictionary, cfg)


class BompDecoder(Decoder):
    name = "bomp"

    def decode(self, Y, dictionary, cfg, context=None):
        return bomp(Y, dictionary, cfg)
