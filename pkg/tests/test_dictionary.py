import functools

import numpy as np
import pytest

from sparcsim.dictionary import (
    Dictionary,
    SectionPlan,
    build_mub_prime,
    load_dictionary,
    mutual_coherence,
    partition_sections,
    random_gaussian,
    save_dictionary,
)
from sparcsim.errors import DictionaryFormatError


@pytest.mark.parametrize(
    "L, K, sizes, bits",
    [
        (4096, 4, (1024,) * 4, 40),
        (4096, 8, (512,) * 8, 72),
        (448, 7, (64,) * 7, 42),
    ],
)
def test_partition_reproduces_reference_plans(L, K, sizes, bits):
    plan = partition_sections(L, K)
    assert plan.sizes == sizes
    assert plan.total_bits == bits


def test_partition_spends_residual_columns_on_the_smallest_sections():
    plan = partition_sections(10, 3)
    assert plan.sizes == (4, 4, 2)
    assert plan.total_bits == 5
    assert plan.n_used == 10


def test_partition_leaves_unusable_columns_unused():
    plan = partition_sections(49, 2)
    assert plan.sizes == (32, 16)
    assert plan.n_used == 48


def test_partition_rejects_impossible_splits():
    with pytest.raises(ValueError, match="Cannot split"):
        partition_sections(3, 4)
    with pytest.raises(ValueError, match="at least 1"):
        partition_sections(16, 0)


def test_section_plan_requires_powers_of_two():
    with pytest.raises(ValueError, match="powers of two"):
        SectionPlan((8, 6))


def test_section_ranges_are_contiguous_from_zero():
    plan = SectionPlan((4, 2))
    assert plan.ranges() == (range(0, 4), range(4, 6))
    assert plan.bits_per_section == (2, 1)


def test_mub_columns_are_unit_norm_with_expected_coherence():
    for p in (5, 7, 13):
        d = build_mub_prime(p)
        assert d.matrix.shape == (p, p * p)
        assert np.allclose(np.linalg.norm(d.matrix, axis=0), 1.0)
        assert mutual_coherence(d.matrix) == pytest.approx(1 / np.sqrt(p), abs=1e-12)
        assert d.is_mub


def test_mub_column_index_layout():
    p = 7
    d = build_mub_prime(p)
    t, j = 2, 3
    k = np.arange(p)
    expected = np.exp(2j * np.pi * (t * k * k + j * k) / p) / np.sqrt(p)
    assert np.allclose(d.matrix[:, t * p + j], expected)


def test_mub_within_one_basis_is_orthonormal():
    p = 5
    d = build_mub_prime(p)
    basis = d.matrix[:, 3 * p:4 * p]
    assert np.allclose(basis.conj().T @ basis, np.eye(p))


@pytest.mark.parametrize("p", [2, 4, 9, 1])
def test_mub_rejects_non_odd_primes(p):
    with pytest.raises(ValueError, match="odd prime"):
        build_mub_prime(p)


def test_dictionary_rejects_plans_wider_than_the_matrix():
    d = build_mub_prime(5)
    with pytest.raises(ValueError, match="Sections cover"):
        d.with_sections((32,))


def test_dictionary_rejects_non_unit_columns():
    matrix = np.ones((4, 4), dtype=complex)
    with pytest.raises(ValueError, match="unit norm"):
        Dictionary(matrix, SectionPlan((4,)))


def test_section_of_and_used_block():
    d = build_mub_prime(5).with_sections((4, 2))
    assert d.section_of.tolist() == [0, 0, 0, 0, 1, 1]
    assert d.used.shape == (5, 6)
    assert d.n_sections == 2


def test_random_gaussian_is_normalized():
    d = random_gaussian(8, 64, np.random.default_rng(1), n_sections=2)
    assert np.allclose(np.linalg.norm(d.matrix, axis=0), 1.0)
    assert d.plan.sizes == (32, 32)
    assert not d.is_mub


def test_save_load_save_is_byte_identical(tmp_path):
    d = build_mub_prime(5, n_sections=2)
    first = save_dictionary(d, tmp_path / "a.txt")
    loaded = load_dictionary(first)
    second = save_dictionary(loaded, tmp_path / "b.txt")

    assert first.read_text() == second.read_text()
    assert loaded.is_mub
    assert loaded.plan == d.plan
    assert np.array_equal(loaded.matrix, d.matrix)


def test_load_rejects_wrong_column_count(tmp_path):
    path = save_dictionary(build_mub_prime(5), tmp_path / "d.txt")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DictionaryFormatError, match="declares 25 columns"):
        load_dictionary(path)


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("5 25\n16\n")
    with pytest.raises(DictionaryFormatError, match="header"):
        load_dictionary(path)


def test_load_rejects_false_mub_claim(tmp_path):
    d = random_gaussian(5, 25, np.random.default_rng(0))
    path = save_dictionary(d, tmp_path / "d.txt")
    lines = path.read_text().splitlines()
    lines[0] += " mub"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DictionaryFormatError, match="declared MUB"):
        load_dictionary(path)


def test_load_rejects_non_unit_columns(tmp_path):
    path = save_dictionary(build_mub_prime(5), tmp_path / "d.txt")
    lines = path.read_text().splitlines()
    lines[2] = " ".join("1" for _ in range(10))
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DictionaryFormatError, match="unit norm"):
        load_dictionary(path)


@functools.lru_cache(maxsize=None)
def _best_bits(K, budget):
    """Most bits from K power-of-two sections within budget columns (exhaustive)."""
    if K == 0:
        return 0
    options = [
        e + _best_bits(K - 1, budget - 2**e)
        for e in range(budget.bit_length())
        if budget - 2**e >= K - 1
    ]
    return max(options) if options else -1


@pytest.mark.parametrize("L", list(range(1, 140)) + [448, 1000, 4096])
def test_partition_matches_exhaustive_search(L):
    for K in range(1, min(L, 6) + 1):
        plan = partition_sections(L, K)
        assert plan.n_sections == K
        assert plan.n_used <= L
        assert plan.total_bits == _best_bits(K, L)
        assert list(plan.sizes) == sorted(plan.sizes, reverse=True)
