"""Bits <-> support set <-> codeword.

Section k consumes the next log2(L_k) message bits, big-endian, as the
0-based offset of the chosen column inside Q_k. Nonzero entries of x are
fixed at 1; no modulation symbols.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SupportSet:
    """One column index per section, in section order."""

    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def __len__(self):
        return len(self.indices)

    def validate(self, dictionary):
        if len(self.indices) != dictionary.n_sections:
            raise ValueError(
                f"Support has {len(self.indices)} indices for {dictionary.n_sections} sections"
            )
        for k, (m, q) in enumerate(zip(self.indices, dictionary.sections)):
            if m not in q:
                raise ValueError(f"Index {m} is outside section {k} ({q.start}..{q.stop - 1})")
        return self


@dataclass(frozen=True, eq=False)
class Codeword:
    s: np.ndarray

    @property
    def energy(self):
        return float(np.vdot(self.s, self.s).real)


def _as_bits(bits):
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("Message bits must be 0 or 1")
    return arr


def encode(bits, dictionary):
    plan = dictionary.plan
    bits = _as_bits(bits)
    if bits.size != plan.total_bits:
        raise ValueError(f"Expected {plan.total_bits} bits, got {bits.size}")
    indices = []
    pos = 0
    for q, width in zip(dictionary.sections, plan.bits_per_section):
        offset = 0
        for b in bits[pos:pos + width]:
            offset = (offset << 1) | int(b)
        pos += width
        indices.append(q.start + offset)
    return SupportSet(tuple(indices))


def decode_support(support, dictionary):
    """Inverse of encode: the message bits a valid support carries."""
    support.validate(dictionary)
    out = []
    for m, q, width in zip(support.indices, dictionary.sections, dictionary.plan.bits_per_section):
        offset = m - q.start
        out.extend((offset >> (width - 1 - i)) & 1 for i in range(width))
    return np.array(out, dtype=np.uint8)


def to_codeword(support, dictionary):
    """s = sum of the selected columns (= A x with x the 0/1 indicator)."""
    return Codeword(dictionary.matrix[:, list(support.indices)].sum(axis=1))


def indicator(support, dictionary):
    x = np.zeros(dictionary.n_cols)
    x[list(support.indices)] = 1.0
    return x


def code_rate(plan, N, complex_dict=True):
    """Bits per real channel use: N_b/(2N) for complex dictionaries, N_b/N for real ones."""
    n_bits = plan if isinstance(plan, int) else plan.total_bits
    return n_bits / (2 * N) if complex_dict else n_bits / N


def random_message(plan, rng):
    return rng.integers(0, 2, size=plan.total_bits, dtype=np.uint8)


def section_errors(decoded, sent):
    return sum(a != b for a, b in zip(decoded.indices, sent.indices))


def bits_to_hex(bits):
    bits = _as_bits(bits)
    if not bits.size:
        return ""
    return format(int("".join(str(b) for b in bits), 2), f"0{(bits.size + 3) // 4}x")
