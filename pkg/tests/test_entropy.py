from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebzip.entropy import (
    MAX_CODE_LENGTH,
    CodeLengthTable,
    build_code,
    decode,
    encode,
)

from _reference import (
    brute_force_optimal_cost,
    code_strings,
    reference_decode,
    reference_huffman_cost,
)


def total_bits(table: CodeLengthTable, counts) -> int:
    return int(sum(int(table.lengths[s]) * int(c) for s, c in enumerate(counts)))


histograms = st.lists(st.integers(0, 1_000_000), min_size=1, max_size=64).filter(
    lambda v: any(v)
)


class TestBuildCode:
    def test_three_symbol_example(self):
        table = build_code([2, 1, 1])
        assert table.lengths.tolist() == [1, 2, 2]
        # expected length (1*2 + 2*1 + 2*1) / 4 = 1.5 bits/symbol
        assert total_bits(table, [2, 1, 1]) == 6

    def test_three_symbol_canonical_words(self):
        table = build_code([2, 1, 1])
        assert table.code_words.tolist() == [0b0, 0b10, 0b11]

    def test_accepts_mapping(self):
        table = build_code({0: 2, 1: 1, 2: 1})
        assert table.lengths.tolist() == [1, 2, 2]

    def test_single_symbol_gets_one_bit(self):
        table = build_code([0, 5, 0])
        assert table.lengths.tolist() == [0, 1, 0]

    def test_uniform_four_symbols(self):
        table = build_code([1, 1, 1, 1])
        assert table.lengths.tolist() == [2, 2, 2, 2]
        assert table.code_words.tolist() == [0, 1, 2, 3]

    def test_deterministic_tie_break(self):
        # five equal counts force one three-deep pair; construction order
        # pins which symbols it is
        table = build_code([2, 2, 2, 2, 2])
        assert table.lengths.tolist() == [3, 3, 2, 2, 2]

    def test_rebuild_is_identical(self):
        counts = [5, 0, 3, 3, 1, 9]
        a = build_code(counts)
        b = build_code(counts)
        assert np.array_equal(a.lengths, b.lengths)
        assert np.array_equal(a.code_words, b.code_words)

    @pytest.mark.parametrize("bad", [[], [0, 0], [-1, 2]])
    def test_rejects_bad_histograms(self, bad):
        with pytest.raises(ValueError):
            build_code(bad)

    @settings(max_examples=200, deadline=None)
    @given(histograms)
    def test_cost_matches_list_merge_reference(self, counts):
        table = build_code(counts)
        assert total_bits(table, counts) == reference_huffman_cost(counts)

    def test_cost_matches_brute_force_small(self):
        # every histogram over three symbols with counts up to 6
        for a in range(7):
            for b in range(7):
                for c in range(7):
                    counts = [a, b, c]
                    if sum(1 for v in counts if v) < 2:
                        continue
                    table = build_code(counts)
                    assert total_bits(table, counts) == brute_force_optimal_cost(
                        counts
                    )

    @settings(max_examples=200, deadline=None)
    @given(histograms)
    def test_kraft_equality(self, counts):
        table = build_code(counts)
        used = [int(v) for v in table.lengths if v > 0]
        kraft = sum(Fraction(1, 2**v) for v in used)
        if len(used) >= 2:
            assert kraft == 1
        else:
            assert kraft == Fraction(1, 2)

    @settings(max_examples=100, deadline=None)
    @given(histograms)
    def test_prefix_free(self, counts):
        table = build_code(counts)
        words = sorted(code_strings(table.lengths, table.code_words).values())
        for first, second in zip(words, words[1:]):
            assert not second.startswith(first)

    @settings(max_examples=100, deadline=None)
    @given(histograms)
    def test_within_one_bit_of_entropy(self, counts):
        table = build_code(counts)
        total = sum(counts)
        entropy = -sum(
            (c / total) * np.log2(c / total) for c in counts if c > 0
        )
        mean_length = total_bits(table, counts) / total
        assert mean_length <= entropy + 1 + 1e-9


class TestCodeLengthTable:
    def test_rejects_overlong_codes(self):
        lengths = np.zeros(4, np.uint8)
        lengths[0] = MAX_CODE_LENGTH + 1
        with pytest.raises(ValueError):
            CodeLengthTable(lengths)

    def test_rejects_kraft_violation(self):
        with pytest.raises(ValueError):
            CodeLengthTable(np.array([1, 1, 1], np.uint8))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            CodeLengthTable(np.zeros(4, np.uint8))

    def test_incomplete_table_allowed(self):
        # single-symbol tables leave half the code space unused
        table = CodeLengthTable(np.array([0, 1], np.uint8))
        assert table.code_words.tolist() == [0, 0]


class TestEncodeDecode:
    def test_four_bit_example(self):
        table = build_code([2, 1, 1])
        data, bit_length = encode([0, 0, 1], table)
        assert bit_length == 4
        assert data == b"\x20"  # 0,0,10 packed MSB-first then padded

    def test_empty_stream(self):
        table = build_code([2, 1, 1])
        assert encode([], table) == (b"", 0)
        assert decode(b"", table, 0).tolist() == []

    def test_roundtrip_simple(self):
        table = build_code([3, 2, 1, 1])
        symbols = [0, 1, 2, 3, 0, 0, 1, 2]
        data, bit_length = encode(symbols, table)
        assert decode(data, table, len(symbols)).tolist() == symbols

    def test_single_symbol_roundtrip(self):
        table = build_code([0, 7])
        data, bit_length = encode([1] * 7, table)
        assert bit_length == 7
        assert data == b"\x00"
        assert decode(data, table, 7).tolist() == [1] * 7

    def test_bit_length_is_sum_of_code_lengths(self):
        counts = [5, 3, 2, 1, 1]
        table = build_code(counts)
        rng = np.random.default_rng(0)
        symbols = rng.integers(0, 5, 200)
        _, bit_length = encode(symbols, table)
        assert bit_length == int(table.lengths[symbols].sum())

    def test_matches_string_reference_decoder(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            alphabet = int(rng.integers(2, 40))
            symbols = rng.integers(0, alphabet, 500)
            counts = np.bincount(symbols, minlength=alphabet)
            table = build_code(counts)
            data, bit_length = encode(symbols, table)
            codes = code_strings(table.lengths, table.code_words)
            expected = reference_decode(data, bit_length, codes, len(symbols))
            assert decode(data, table, len(symbols)).tolist() == expected
            assert expected == symbols.tolist()

    @settings(max_examples=100, deadline=None)
    @given(
        symbols=st.lists(st.integers(0, 30), min_size=1, max_size=400),
    )
    def test_roundtrip_property(self, symbols):
        counts = np.bincount(symbols, minlength=31)
        table = build_code(counts)
        data, bit_length = encode(symbols, table)
        assert len(data) == (bit_length + 7) // 8
        assert decode(data, table, len(symbols)).tolist() == symbols

    def test_large_alphabet_roundtrip(self):
        rng = np.random.default_rng(2)
        alphabet = 65535
        symbols = rng.zipf(1.3, 30_000).clip(max=alphabet) - 1
        table = build_code(np.bincount(symbols, minlength=alphabet))
        data, bit_length = encode(symbols, table)
        assert decode(data, table, len(symbols)).tolist() == symbols.tolist()

    def test_rejects_symbol_without_code(self):
        table = build_code([2, 0, 1])
        with pytest.raises(ValueError):
            encode([0, 1], table)

    def test_rejects_symbol_out_of_alphabet(self):
        table = build_code([2, 1])
        with pytest.raises(ValueError):
            encode([0, 5], table)
        with pytest.raises(ValueError):
            encode([-1], table)

    def test_decode_exhaustion(self):
        table = build_code([2, 1, 1])
        data, _ = encode([0, 1, 2], table)
        with pytest.raises(ValueError, match="exhausted"):
            decode(data, table, 50)

    def test_decode_invalid_prefix(self):
        # single-symbol table: a set bit matches no codeword at any depth
        table = build_code([0, 9])
        with pytest.raises(ValueError, match="invalid"):
            decode(b"\xff", table, 2)

    def test_decode_negative_count(self):
        table = build_code([1, 1])
        with pytest.raises(ValueError):
            decode(b"", table, -1)
