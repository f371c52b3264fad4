from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fredkit.ngram_index import (MAGIC, SEPARATOR_ID, IndexFormatError,
                                 NGramIndex, _build_suffix_array, build_index,
                                 load_index, save_index)
from fredkit.tokenizers import SubwordVocab

from conftest import write_lines, write_vocab


def naive_count(tokens: list[int], gram: list[int]) -> int:
    n = len(gram)
    return sum(1 for i in range(len(tokens) - n + 1) if tokens[i:i + n] == gram)


def make_index(tokens: list[int]) -> NGramIndex:
    arr = np.asarray(tokens, dtype=np.uint32)
    return NGramIndex(arr, _build_suffix_array(arr), vocab_fingerprint=0)


@pytest.fixture
def ab_vocab(tmp_path):
    # pieces: id 0 = unk, 1 = word-initial a, 2 = word-initial b
    path = write_vocab(tmp_path / "ab.vocab", ["<unk>", "▁a", "▁b"], unk_id=0)
    return SubwordVocab.load(path)


class TestSuffixArray:
    def test_hand_sorted_example(self):
        # suffixes of [1,2,1,2]: [1,2] < [1,2,1,2] < [2] < [2,1,2]
        sa = _build_suffix_array(np.array([1, 2, 1, 2], dtype=np.uint32))
        assert sa.tolist() == [2, 0, 3, 1]

    def test_all_equal_tokens(self):
        # shorter suffixes of a constant stream sort first
        sa = _build_suffix_array(np.array([7, 7, 7], dtype=np.uint32))
        assert sa.tolist() == [2, 1, 0]

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=40))
    @settings(max_examples=200)
    def test_matches_sorted_suffixes(self, tokens):
        sa = _build_suffix_array(np.asarray(tokens, dtype=np.uint32))
        expected = sorted(range(len(tokens)), key=lambda i: tokens[i:])
        assert sa.tolist() == expected


class TestBuild:
    def test_tokens_and_counts_from_text(self, tmp_path, ab_vocab):
        doc = write_lines(tmp_path / "doc.txt", ["a b a b"])
        index = build_index([doc], ab_vocab)
        assert index.tokens.tolist() == [1, 2, 1, 2]
        assert index.suffix_array.tolist() == [2, 0, 3, 1]

    def test_separator_between_documents(self, tmp_path, ab_vocab):
        doc = write_lines(tmp_path / "doc.txt", ["a a", "b b"])
        index = build_index([doc], ab_vocab)
        assert index.tokens.tolist() == [1, 1, SEPARATOR_ID, 2, 2]
        assert index.tokens.tolist().count(SEPARATOR_ID) == 1

    def test_gram_cannot_span_documents(self, tmp_path, ab_vocab):
        doc = write_lines(tmp_path / "doc.txt", ["a a", "b b"])
        index = build_index([doc], ab_vocab)
        assert index.count([1, 2]) == 0
        assert index.count([1, 1]) == 1
        assert index.count([2, 2]) == 1

    def test_empty_file_list(self, ab_vocab):
        with pytest.raises(ValueError, match="no input documents"):
            build_index([], ab_vocab)

    def test_blank_only_files(self, tmp_path, ab_vocab):
        doc = tmp_path / "blank.txt"
        doc.write_text("\n  \n", encoding="utf-8")
        with pytest.raises(ValueError, match="no input documents"):
            build_index([doc], ab_vocab)

    def test_missing_file(self, tmp_path, ab_vocab):
        with pytest.raises(FileNotFoundError):
            build_index([tmp_path / "nope.txt"], ab_vocab)

    def test_fingerprint_recorded(self, tmp_path, ab_vocab):
        doc = write_lines(tmp_path / "doc.txt", ["a b"])
        index = build_index([doc], ab_vocab)
        assert index.vocab_fingerprint == ab_vocab.fingerprint()


class TestCount:
    def test_two_occurrences(self):
        index = make_index([1, 2, 3, 4, 1, 2, 3, 4])
        assert index.count([1, 2, 3, 4]) == 2

    def test_longer_than_stream(self):
        index = make_index([1, 2, 3])
        assert index.count([1, 2, 3, 4]) == 0

    def test_overlapping_occurrences(self):
        index = make_index([7, 7, 7])
        assert index.count([7, 7]) == 2

    def test_absent_gram(self):
        index = make_index([1, 2, 3])
        assert index.count([9]) == 0

    def test_empty_gram_rejected(self):
        index = make_index([1, 2, 3])
        with pytest.raises(ValueError, match="non-empty"):
            index.count([])

    def test_separator_in_gram_rejected(self):
        index = make_index([1, 2, 3])
        with pytest.raises(ValueError, match="separator"):
            index.count([1, SEPARATOR_ID])

    def test_randomized_against_naive_scan(self):
        rng = random.Random(4)
        for _ in range(50):
            length = rng.randint(1, 400)
            vocab_size = rng.randint(2, 12)
            tokens = [rng.randrange(vocab_size) for _ in range(length)]
            index = make_index(tokens)
            for _ in range(20):
                k = rng.randint(1, 6)
                if rng.random() < 0.6 and length >= k:
                    start = rng.randrange(length - k + 1)
                    gram = tokens[start:start + k]
                else:
                    gram = [rng.randrange(vocab_size) for _ in range(k)]
                assert index.count(gram) == naive_count(tokens, gram)

    def test_prefix_monotonicity(self):
        rng = random.Random(5)
        tokens = [rng.randrange(4) for _ in range(300)]
        index = make_index(tokens)
        for _ in range(100):
            k = rng.randint(1, 4)
            gram = [rng.randrange(4) for _ in range(k)]
            for t in range(4):
                assert index.count(gram + [t]) <= index.count(gram)

    def test_sum_rule(self):
        rng = random.Random(6)
        tokens = [rng.randrange(4) for _ in range(300)]
        index = make_index(tokens)
        for _ in range(60):
            k = rng.randint(1, 3)
            gram = [rng.randrange(4) for _ in range(k)]
            total = sum(index.count(gram + [t]) for t in range(4))
            assert total <= index.count(gram)


class TestPersistence:
    def test_round_trip_preserves_counts(self, tmp_path):
        index = make_index([1, 2, 3, 4, 1, 2, 3, 4])
        path = tmp_path / "idx.bin"
        save_index(index, path)
        loaded = load_index(path)
        for n in range(1, 5):
            for start in range(8 - n + 1):
                gram = [1, 2, 3, 4, 1, 2, 3, 4][start:start + n]
                assert loaded.count(gram) == index.count(gram)

    def test_round_trip_is_bit_exact(self, tmp_path):
        index = make_index([5, 1, 5, 2, 5])
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_index(index, a)
        save_index(load_index(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_build_is_deterministic(self, tmp_path, ab_vocab):
        doc = write_lines(tmp_path / "doc.txt", ["a b a", "b a b"])
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_index(build_index([doc], ab_vocab), a)
        save_index(build_index([doc], ab_vocab), b)
        assert a.read_bytes() == b.read_bytes()

    def test_magic_bytes(self, tmp_path):
        path = tmp_path / "idx.bin"
        save_index(make_index([1, 2]), path)
        assert path.read_bytes()[:8] == MAGIC

    def test_corrupted_magic(self, tmp_path):
        path = tmp_path / "idx.bin"
        save_index(make_index([1, 2]), path)
        data = bytearray(path.read_bytes())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(IndexFormatError, match="not an index file"):
            load_index(path)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "idx.bin"
        save_index(make_index([1, 2, 3]), path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(IndexFormatError, match="truncated"):
            load_index(path)

    def test_fingerprint_mismatch_warns_but_answers(self, tmp_path, ab_vocab, caplog):
        doc = write_lines(tmp_path / "doc.txt", ["a b"])
        index = build_index([doc], ab_vocab)
        other = SubwordVocab(["<unk>", "▁x"], unk_id=0)
        with caplog.at_level("WARNING"):
            assert index.check_vocab(other) is False
        assert "fingerprint mismatch" in caplog.text
        assert index.count([1]) == 1
