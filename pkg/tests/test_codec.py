import numpy as np
import pytest

from sparcsim.codec import (
    SupportSet,
    bits_to_hex,
    code_rate,
    decode_support,
    encode,
    indicator,
    random_message,
    section_errors,
    to_codeword,
)
from sparcsim.dictionary import build_mub_prime


@pytest.fixture
def dictionary():
    return build_mub_prime(5).with_sections((8, 4))


def test_encode_reads_bits_big_endian_per_section(dictionary):
    support = encode("10101", dictionary)
    assert support.indices == (5, 9)


def test_decode_support_inverts_encode(dictionary):
    bits = np.array([0, 1, 1, 1, 0], dtype=np.uint8)
    assert decode_support(encode(bits, dictionary), dictionary).tolist() == bits.tolist()


def test_encode_rejects_wrong_length_and_non_binary(dictionary):
    with pytest.raises(ValueError, match="Expected 5 bits"):
        encode("1010", dictionary)
    with pytest.raises(ValueError, match="0 or 1"):
        encode([0, 1, 2, 0, 1], dictionary)


def test_support_validation(dictionary):
    with pytest.raises(ValueError, match="1 indices for 2 sections"):
        SupportSet((5,)).validate(dictionary)
    with pytest.raises(ValueError, match="outside section 1"):
        SupportSet((5, 3)).validate(dictionary)


def test_codeword_is_the_sum_of_selected_columns(dictionary):
    support = SupportSet((2, 10))
    s = to_codeword(support, dictionary).s
    assert np.allclose(s, dictionary.matrix[:, 2] + dictionary.matrix[:, 10])
    assert to_codeword(SupportSet((2,)), dictionary).energy == pytest.approx(1.0)


def test_indicator_marks_one_column_per_section(dictionary):
    x = indicator(SupportSet((2, 10)), dictionary)
    assert x.shape == (25,)
    assert np.flatnonzero(x).tolist() == [2, 10]
    assert np.allclose(dictionary.matrix @ x, to_codeword(SupportSet((2, 10)), dictionary).s)


def test_code_rate_counts_real_channel_uses():
    assert code_rate(40, 128) == pytest.approx(40 / 256)
    assert code_rate(40, 128, complex_dict=False) == pytest.approx(40 / 128)


def test_random_message_matches_plan(dictionary):
    bits = random_message(dictionary.plan, np.random.default_rng(0))
    assert bits.dtype == np.uint8
    assert bits.size == 5


def test_section_errors_counts_mismatched_sections():
    assert section_errors(SupportSet((1, 9, 20)), SupportSet((1, 8, 21))) == 2
    assert section_errors(SupportSet((1, 9)), SupportSet((1, 9))) == 0


def test_bits_to_hex():
    assert bits_to_hex("10101") == "15"
    assert bits_to_hex("00000001") == "01"
    assert bits_to_hex([]) == ""


def test_encode_is_a_bijection_onto_supports(dictionary):
    n_bits = dictionary.plan.total_bits
    supports = set()
    for value in range(2**n_bits):
        bits = [(value >> (n_bits - 1 - i)) & 1 for i in range(n_bits)]
        support = encode(bits, dictionary)
        support.validate(dictionary)
        assert decode_support(support, dictionary).tolist() == bits
        supports.add(support.indices)
    assert len(supports) == 8 * 4


def test_mean_codeword_energy_follows_the_section_means():
    d = build_mub_prime(7, 2)
    (first, second) = d.sections
    A = d.matrix
    energies = [
        float(np.vdot(A[:, i] + A[:, j], A[:, i] + A[:, j]).real)
        for i in range(first.start, first.stop)
        for j in range(second.start, second.stop)
    ]
    means = [A[:, q.start:q.stop].mean(axis=1) for q in d.sections]
    expected = 2 + np.linalg.norm(sum(means)) ** 2 - sum(np.linalg.norm(m) ** 2 for m in means)
    assert np.mean(energies) == pytest.approx(expected)

    rng = np.random.default_rng(4)
    sampled = [to_codeword(encode(random_message(d.plan, rng), d), d).energy for _ in range(3000)]
    assert np.mean(sampled) == pytest.approx(expected, rel=0.05)


def test_random_messages_round_trip_on_a_large_plan():
    d = build_mub_prime(61, 4)
    rng = np.random.default_rng(21)
    seen = set()
    for _ in range(1000):
        bits = random_message(d.plan, rng)
        support = encode(bits, d)
        assert np.array_equal(decode_support(support, d), bits)
        seen.add((bits_to_hex(bits), support.indices))
    assert len({h for h, _ in seen}) == len({s for _, s in seen})
