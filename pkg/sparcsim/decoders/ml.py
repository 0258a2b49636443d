"""Non-coherent ML metric, exhaustive ML search and best-of-P path selection."""

import itertools

import numpy as np

from sparcsim.codec import Codeword, SupportSet, to_codeword
from sparcsim.decoders.base import DecodeResult, Decoder, as_matrix, correlations, top_candidates
from sparcsim.errors import NumericalGuardError

ML_SEARCH_LIMIT = 10**6


def weighted_metric(energy, norm_sq, n_antennas, sigma_h_sq, sigma_v_sq, theorem1_mode=False):
    """beta * energy - D * gamma, elementwise over candidate codewords.

    beta = (sh/sv)/(sv + sh*|s|^2), gamma = log(sh*|s|^2/sv + 1).
    """
    if theorem1_mode:
        return energy
    if sigma_v_sq <= 0:
        raise ValueError("ML metric is undefined for sigma_v_sq <= 0")
    beta = (sigma_h_sq / sigma_v_sq) / (sigma_v_sq + sigma_h_sq * norm_sq)
    gamma = np.log1p(sigma_h_sq * norm_sq / sigma_v_sq)
    return beta * energy - n_antennas * gamma


def ml_metric(Y, s, cfg):
    Y = as_matrix(Y)
    s = s.s if isinstance(s, Codeword) else np.asarray(s, dtype=np.complex128)
    corr = s.conj() @ Y
    energy = float(np.sum(np.abs(corr) ** 2))
    norm_sq = float(np.vdot(s, s).real)
    return float(
        weighted_metric(energy, norm_sq, Y.shape[1], cfg.sigma_h_sq, cfg.sigma_v_sq, cfg.theorem1_mode)
    )


def ml_bruteforce(Y, dictionary, cfg):
    """Exhaustive argmax of ml_metric; ties go to the lexicographically smallest support."""
    cfg.check_sections(dictionary)
    Y = as_matrix(Y)
    space = int(np.prod([float(s) for s in dictionary.plan.sizes]))
    if space > ML_SEARCH_LIMIT:
        raise NumericalGuardError(
            f"ML search over {space} codewords exceeds the limit of {ML_SEARCH_LIMIT}"
        )

    A = dictionary.matrix
    *head, last = dictionary.sections
    tail = A[:, last.start:last.stop]
    tail_corr = tail.conj().T @ Y
    D = Y.shape[1]

    best_metric = -np.inf
    best = None
    for prefix in itertools.product(*head):
        partial = A[:, list(prefix)].sum(axis=1) if prefix else np.zeros(A.shape[0], dtype=np.complex128)
        energy = np.sum(np.abs(partial.conj() @ Y + tail_corr) ** 2, axis=1)
        norm_sq = np.sum(np.abs(partial[:, None] + tail) ** 2, axis=0)
        metric = weighted_metric(energy, norm_sq, D, cfg.sigma_h_sq, cfg.sigma_v_sq, cfg.theorem1_mode)
        j = int(np.argmax(metric))
        if metric[j] > best_metric:
            best_metric = float(metric[j])
            best = (*prefix, last.start + j)

    return DecodeResult(SupportSet(best), best_metric)


def best_of_paths(Y, dictionary, cfg, complete_path):
    """Seed P greedy runs from the top-P single-column energies q(m).

    complete_path(Y, dictionary, cfg, C, first) must return a full
    SupportSet that starts from column ``first``. The winner maximizes the
    full ML metric; ties go to the lower path index.
    """
    cfg.check_sections(dictionary)
    Y = as_matrix(Y)
    C = correlations(Y, dictionary)
    q = np.sum(np.abs(C) ** 2, axis=1)

    best = None
    for path_id, first in enumerate(top_candidates(q, cfg.paths)):
        support = complete_path(Y, dictionary, cfg, C, int(first))
        metric = ml_metric(Y, to_codeword(support, dictionary), cfg)
        if best is None or metric > best.metric:
            best = DecodeResult(support, metric, path_id)
    return best


class MlDecoder(Decoder):
    """Exhaustive ML; only for tiny codebooks."""

    name = "ml"

    def decode(self, Y, dictionary, cfg, context=None):
        return ml_bruteforce(Y, dictionary, cfg)

    def describe(self, cfg):
        return self.name
