"""SPARC dictionaries: MUB construction, mutual coherence and section plans.

A dictionary is an N x L complex matrix with unit-norm columns. Its columns
are split into K contiguous sections starting at column 0; section k holds
L_k = 2^b_k columns and carries b_k bits. Columns past the last section are
never used.

Interchange file layout (one record per line, whitespace separated):

    N L K [mub]
    L_1 ... L_K
    re(a_1[0]) im(a_1[0]) ... re(a_1[N-1]) im(a_1[N-1])
    ...                                   (one line per column, L lines)

Floats are written with 17 significant digits, so save -> load -> save is
byte-identical. The optional ``mub`` token declares the matrix as a
mutually-unbiased-basis dictionary; its coherence is re-checked on load.
"""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from sparcsim.errors import DictionaryFormatError

NORM_TOL = 1e-10
_GRAM_BLOCK = 512


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def _is_prime(n):
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class SectionPlan:
    """Power-of-two section sizes. Bits are consumed section by section."""

    sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes:
            raise ValueError("A section plan needs at least one section")
        bad = [s for s in self.sizes if not _is_power_of_two(s)]
        if bad:
            raise ValueError(f"Section sizes must be powers of two, got {bad}")

    @property
    def n_sections(self):
        return len(self.sizes)

    @property
    def bits_per_section(self):
        return tuple(s.bit_length() - 1 for s in self.sizes)

    @property
    def total_bits(self):
        return sum(self.bits_per_section)

    @property
    def n_used(self):
        return sum(self.sizes)

    def ranges(self):
        """Column index ranges Q_k, contiguous from column 0."""
        out = []
        start = 0
        for size in self.sizes:
            out.append(range(start, start + size))
            start += size
        return tuple(out)


def partition_sections(L, K):
    """Split L columns into K power-of-two sections with the most total bits.

    Starts every section at the largest power of two not above L // K, then
    keeps doubling the smallest section (lowest index on ties) while the
    doubled size still fits in the leftover columns.
    """
    L = int(L)
    K = int(K)
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if K > L:
        raise ValueError(f"Cannot split {L} columns into {K} sections")

    base = 1 << ((L // K).bit_length() - 1)
    sizes = [base] * K
    residual = L - K * base
    while True:
        k = min(range(K), key=lambda i: (sizes[i], i))
        if sizes[k] > residual:
            break
        residual -= sizes[k]
        sizes[k] *= 2
    return SectionPlan(tuple(sorted(sizes, reverse=True)))


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Immutable N x L dictionary with a section plan.

    ``matrix`` columns are the codeword atoms a_m. ``is_mub`` marks matrices
    whose off-basis coherence must equal 1/sqrt(N).
    """

    matrix: np.ndarray
    plan: SectionPlan
    is_mub: bool = False
    known_coherence: float = field(default=None, compare=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        self.validate()

    @property
    def n_rows(self):
        return self.matrix.shape[0]

    @property
    def n_cols(self):
        return self.matrix.shape[1]

    @property
    def sections(self):
        return self.plan.ranges()

    @property
    def n_sections(self):
        return self.plan.n_sections

    @property
    def used(self):
        """The N x sum(L_k) block of columns that sections cover."""
        return self.matrix[:, : self.plan.n_used]

    @cached_property
    def section_of(self):
        """sec(j): section index of every used column."""
        return np.repeat(np.arange(self.n_sections), self.plan.sizes)

    @cached_property
    def coherence(self):
        if self.known_coherence is not None:
            return float(self.known_coherence)
        return mutual_coherence(self.matrix)

    def with_sections(self, plan):
        if not isinstance(plan, SectionPlan):
            plan = SectionPlan(tuple(plan))
        return Dictionary(self.matrix, plan, self.is_mub, self.known_coherence)

    def validate(self):
        if self.matrix.ndim != 2 or self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(f"Dictionary matrix must be 2-D and non-empty, got {self.matrix.shape}")
        norms = np.linalg.norm(self.matrix, axis=0)
        off = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if off.size:
            raise ValueError(f"Columns {off[:5].tolist()} are not unit norm")
        if self.plan.n_used > self.n_cols:
            raise ValueError(
                f"Sections cover {self.plan.n_used} columns but the dictionary has {self.n_cols}"
            )


def build_mub_prime(p, n_sections=1):
    """p mutually unbiased bases of C^p, the computational basis left out.

    Column (t, j) sits at index t*p + j and has entries
    exp(2*pi*i*(t*k^2 + j*k)/p)/sqrt(p), k = 0..p-1.
    """
    p = int(p)
    if p % 2 == 0 or not _is_prime(p):
        raise ValueError(f"MUB construction needs an odd prime, got {p}")
    k = np.arange(p)
    t = np.arange(p)
    j = np.arange(p)
    phase = (t[None, :, None] * (k * k)[:, None, None] + j[None, None, :] * k[:, None, None]) % p
    matrix = np.exp(2j * np.pi * phase.reshape(p, p * p) / p) / np.sqrt(p)
    plan = partition_sections(p * p, n_sections)
    return Dictionary(matrix, plan, is_mub=True, known_coherence=1.0 / np.sqrt(p))


def random_gaussian(n_rows, n_cols, rng, n_sections=1):
    """i.i.d. CN(0, 1/N) dictionary with columns scaled to unit norm."""
    scale = np.sqrt(0.5 / n_rows)
    raw = scale * (rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols)))
    matrix = raw / np.linalg.norm(raw, axis=0)
    return Dictionary(matrix, partition_sections(n_cols, n_sections))


def mutual_coherence(dictionary):
    """max_{i != j} |<a_i, a_j>| / (||a_i|| ||a_j||), Gram computed in blocks."""
    matrix = dictionary.matrix if isinstance(dictionary, Dictionary) else np.asarray(dictionary)
    if matrix.shape[1] < 2:
        raise ValueError("Mutual coherence needs at least two columns")
    unit = matrix / np.linalg.norm(matrix, axis=0)
    worst = 0.0
    for start in range(0, unit.shape[1], _GRAM_BLOCK):
        stop = min(start + _GRAM_BLOCK, unit.shape[1])
        gram = np.abs(unit[:, start:stop].conj().T @ unit)
        gram[np.arange(stop - start), np.arange(start, stop)] = 0.0
        worst = max(worst, float(gram.max()))
    return worst


def save_dictionary(dictionary, path):
    path = Path(path)
    header = f"{dictionary.n_rows} {dictionary.n_cols} {dictionary.n_sections}"
    if dictionary.is_mub:
        header += " mub"
    interleaved = np.empty((dictionary.n_cols, 2 * dictionary.n_rows))
    interleaved[:, 0::2] = dictionary.matrix.real.T
    interleaved[:, 1::2] = dictionary.matrix.imag.T
    lines = [header, " ".join(str(s) for s in dictionary.plan.sizes)]
    lines.extend(" ".join(format(x, ".17g") for x in row) for row in interleaved)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_dictionary(path):
    """Read an interchange file and re-validate every invariant."""
    path = Path(path)
    try:
        lines = [line for line in path.read_text().splitlines() if line.strip()]
    except OSError as e:
        raise DictionaryFormatError(f"Cannot read {path}: {e}")
    if len(lines) < 2:
        raise DictionaryFormatError(f"{path}: missing header or section line")

    head = lines[0].split()
    if len(head) not in (3, 4) or (len(head) == 4 and head[3] != "mub"):
        raise DictionaryFormatError(f"{path}: header must be 'N L K [mub]', got {lines[0]!r}")
    try:
        n_rows, n_cols, n_sections = (int(x) for x in head[:3])
        sizes = tuple(int(x) for x in lines[1].split())
    except ValueError:
        raise DictionaryFormatError(f"{path}: header and section sizes must be integers")
    is_mub = len(head) == 4

    if len(sizes) != n_sections:
        raise DictionaryFormatError(f"{path}: header declares {n_sections} sections, found {len(sizes)}")
    if len(lines) - 2 != n_cols:
        raise DictionaryFormatError(f"{path}: header declares {n_cols} columns, found {len(lines) - 2}")
    try:
        values = np.loadtxt(lines[2:], ndmin=2)
    except ValueError as e:
        raise DictionaryFormatError(f"{path}: bad column data: {e}")
    if values.shape != (n_cols, 2 * n_rows):
        raise DictionaryFormatError(
            f"{path}: expected {n_cols} columns of {2 * n_rows} floats, got {values.shape}"
        )
    matrix = (values[:, 0::2] + 1j * values[:, 1::2]).T

    try:
        dictionary = Dictionary(matrix, SectionPlan(sizes), is_mub=is_mub)
    except ValueError as e:
        raise DictionaryFormatError(f"{path}: {e}")
    if is_mub:
        target = 1.0 / np.sqrt(n_rows)
        if abs(dictionary.coherence - target) > NORM_TOL:
            raise DictionaryFormatError(
                f"{path}: declared MUB but coherence is {dictionary.coherence:.6g}, expected {target:.6g}"
            )
    return dictionary
