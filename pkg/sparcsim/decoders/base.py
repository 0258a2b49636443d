from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from sparcsim.channel import Observation
from sparcsim.codec import SupportSet


@dataclass(frozen=True)
class DecoderConfig:
    """Per-point decoding parameters.

    theorem1_mode replaces the ML weighting with beta=1, gamma=0, which is
    the only mode that accepts a noiseless channel (sigma_v_sq = 0).
    """

    sigma_h_sq: float
    sigma_v_sq: float
    K: int = None
    paths: int = 1
    theorem1_mode: bool = False

    def __post_init__(self):
        if self.sigma_h_sq < 0:
            raise ValueError(f"sigma_h_sq must be non-negative, got {self.sigma_h_sq}")
        if self.sigma_v_sq < 0:
            raise ValueError(f"sigma_v_sq must be non-negative, got {self.sigma_v_sq}")
        if self.sigma_v_sq == 0 and not self.theorem1_mode:
            raise ValueError("sigma_v_sq = 0 leaves the ML metric undefined; use theorem1_mode")
        if self.paths < 1:
            raise ValueError(f"paths must be at least 1, got {self.paths}")

    def check_sections(self, dictionary):
        if self.K is not None and self.K != dictionary.n_sections:
            raise ValueError(f"Config expects K={self.K} but the dictionary has {dictionary.n_sections} sections")


@dataclass(frozen=True)
class DecodeResult:
    support: SupportSet
    metric: float
    path_id: int = 0
    iterations: int = None


def as_matrix(Y):
    """Accept an Observation or a bare N x D array."""
    if isinstance(Y, Observation):
        return Y.Y
    Y = np.asarray(Y, dtype=np.complex128)
    return Y[:, None] if Y.ndim == 1 else Y


def correlations(Y, dictionary):
    """C[m, i] = <y_i, a_m> over the used columns."""
    return dictionary.used.conj().T @ Y


def top_candidates(q, P):
    """Indices of the P largest entries of q; equal values keep index order."""
    if P > q.shape[0]:
        raise ValueError(f"paths P={P} exceeds the {q.shape[0]} usable columns")
    return np.argsort(-q, kind="stable")[:P]


def section_mask(dictionary, chosen):
    """True for columns whose section has not been decided yet."""
    taken = np.zeros(dictionary.n_sections, dtype=bool)
    taken[[int(dictionary.section_of[m]) for m in chosen]] = True
    return ~taken[dictionary.section_of]


def support_from(chosen, dictionary):
    """Order a set of picks (one per section) into a SupportSet."""
    by_section = sorted(chosen, key=lambda m: dictionary.section_of[m])
    return SupportSet(tuple(by_section)).validate(dictionary)


class Decoder(ABC):
    """Base interface for support decoders.

    The harness calls prepare() once per Eb/N0 point and hands its return
    value back to every decode() at that point as ``context``.
    """

    name = ""

    @abstractmethod
    def decode(self, Y, dictionary, cfg, context=None):
        """Return a DecodeResult for one observation."""
        pass

    def prepare(self, dictionary, cfg, n_antennas, rng):
        """Optional per-point precomputation (e.g. an offline schedule)."""
        return None

    def describe(self, cfg):
        return self.name if cfg.paths == 1 else f"{self.name}-p{cfg.paths}"
