"""Maximum-likelihood matching pursuit.

Each iteration adds the column that maximizes the non-coherent ML metric of
the partial codeword built so far, with the not-yet-detected sections
folded into an effective noise variance
sigma_v^2 + sigma_h^2 (K - k) / N. Detected columns are combined, never
cancelled.
"""

import numpy as np

from sparcsim.codec import to_codeword
from sparcsim.decoders.base import (
    DecodeResult,
    Decoder,
    as_matrix,
    correlations,
    section_mask,
    support_from,
)
from sparcsim.decoders.ml import best_of_paths, ml_metric, weighted_metric


def effective_noise(cfg, n_rows, K, k):
    return cfg.sigma_v_sq + cfg.sigma_h_sq / n_rows * (K - k)


def complete_mlmp(Y, dictionary, cfg, C, first=None):
    """Run MLMP iterations until every section holds one column.

    C is the correlation matrix A^H Y over used columns. When ``first`` is
    given it is taken as the iteration-1 pick.
    """
    A = dictionary.used
    N, D = Y.shape
    K = dictionary.n_sections

    partial_corr = np.zeros(D, dtype=np.complex128)
    cross = np.zeros(A.shape[1], dtype=np.complex128)
    partial_sq = 0.0
    chosen = []

    while len(chosen) < K:
        k = len(chosen) + 1
        if k == 1 and first is not None:
            m = first
        elif k == 1:
            # Every candidate has |a_m| = 1 here, so the metric ranks as q(m).
            m = int(np.argmax(np.sum(np.abs(C) ** 2, axis=1)))
        else:
            energy = np.sum(np.abs(partial_corr[None, :] + C) ** 2, axis=1)
            norm_sq = partial_sq + 1.0 + 2.0 * cross.real
            metric = weighted_metric(
                energy, norm_sq, D, cfg.sigma_h_sq, effective_noise(cfg, N, K, k), cfg.theorem1_mode
            )
            metric = np.where(section_mask(dictionary, chosen), metric, -np.inf)
            m = int(np.argmax(metric))

        partial_sq += 1.0 + 2.0 * cross[m].real
        partial_corr += C[m]
        cross += A.conj().T @ A[:, m]
        chosen.append(m)

    return support_from(chosen, dictionary)


def mlmp(Y, dictionary, cfg):
    cfg.check_sections(dictionary)
    Y = as_matrix(Y)
    support = complete_mlmp(Y, dictionary, cfg, correlations(Y, dictionary))
    return DecodeResult(support, ml_metric(Y, to_codeword(support, dictionary), cfg))


def pmlmp(Y, dictionary, cfg):
    """Parallel MLMP: cfg.paths runs, each forced to a different first column."""
    return best_of_paths(Y, dictionary, cfg, complete_mlmp)


class MlmpDecoder(Decoder):
    name = "mlmp"

    def decode(self, Y, dictionary, cfg, context=None):
        return pmlmp(Y, dictionary, cfg)
