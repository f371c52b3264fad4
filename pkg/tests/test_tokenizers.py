from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fredkit.tokenizers import (SubwordVocab, TokenizerSpec, VocabError,
                                count_chars, encode_ids, graphemes, tokenize)

from conftest import write_vocab


class TestWs13a:
    def test_punctuation_spacing(self):
        spec = TokenizerSpec("ws13a")
        assert tokenize(spec, "Hello, world!") == ["Hello", ",", "world", "!"]

    def test_decimal_numbers_stay_joined(self):
        spec = TokenizerSpec("ws13a")
        assert tokenize(spec, "pi is 3.14") == ["pi", "is", "3.14"]
        assert tokenize(spec, "1,000 items") == ["1,000", "items"]

    def test_digit_dash_splits(self):
        spec = TokenizerSpec("ws13a")
        assert tokenize(spec, "2020-21 season") == ["2020", "-", "21", "season"]

    def test_entity_unescaping(self):
        spec = TokenizerSpec("ws13a")
        assert tokenize(spec, "a &amp; b") == ["a", "&", "b"]

    def test_whitespace_collapse(self):
        spec = TokenizerSpec("ws13a")
        assert tokenize(spec, "  a\t b  ") == ["a", "b"]


class TestChar:
    def test_basic(self):
        assert tokenize(TokenizerSpec("char"), "abc") == ["a", "b", "c"]

    def test_whitespace_dropped(self):
        assert tokenize(TokenizerSpec("char"), "a b") == ["a", "b"]

    def test_combining_mark_is_one_token(self):
        # e + COMBINING ACUTE ACCENT is a single grapheme cluster
        assert tokenize(TokenizerSpec("char"), "éa") == ["é", "a"]

    @given(st.text(min_size=1, max_size=40))
    def test_token_count_equals_grapheme_count(self, text):
        tokens = tokenize(TokenizerSpec("char"), text)
        stripped = "".join(text.split())
        assert len(tokens) == len(graphemes(stripped))


class TestHanMixed:
    def test_mixed_sentence(self):
        spec = TokenizerSpec("han_mixed")
        assert tokenize(spec, "我喜欢 NLP") == ["我", "喜", "欢", "NLP"]

    def test_latin_runs_stay_joined(self):
        spec = TokenizerSpec("han_mixed")
        assert tokenize(spec, "hello world") == ["hello", "world"]

    def test_ideograph_between_latin(self):
        spec = TokenizerSpec("han_mixed")
        assert tokenize(spec, "ab中cd") == ["ab", "中", "cd"]

    def test_extension_a_splits(self):
        spec = TokenizerSpec("han_mixed")
        assert tokenize(spec, "㐀㐁") == ["㐀", "㐁"]


class TestSubword:
    @pytest.fixture
    def spec_vocab(self, tmp_path):
        path = write_vocab(tmp_path / "tiny.vocab", ["▁a", "b", "<unk>"], unk_id=2)
        return SubwordVocab.load(path)

    def test_longest_match(self, spec_vocab):
        assert encode_ids(spec_vocab, "ab") == [0, 1]

    def test_all_unknown(self, spec_vocab):
        assert encode_ids(spec_vocab, "zz") == [2, 2]

    def test_single_match(self, spec_vocab):
        assert encode_ids(spec_vocab, "a") == [0]

    def test_tokenize_returns_piece_strings(self, spec_vocab):
        spec = TokenizerSpec("subword", spec_vocab)
        assert tokenize(spec, "ab zz") == ["▁a", "b", "<unk>", "<unk>"]

    def test_unmatched_marker_is_skipped(self, spec_vocab):
        # "b" never appears word-initially in the vocab, so the marker is
        # dropped and the bare piece matches.
        assert encode_ids(spec_vocab, "b") == [1]

    def test_unknown_consumes_one_grapheme(self, spec_vocab):
        assert encode_ids(spec_vocab, "éé") == [2, 2]

    def test_greedy_prefers_longest(self, tmp_path):
        path = write_vocab(tmp_path / "v.vocab",
                           ["▁ab", "▁a", "b", "c", "<unk>"], unk_id=4)
        vocab = SubwordVocab.load(path)
        assert encode_ids(vocab, "abc") == [0, 3]

    def test_reconstruction_without_unknowns(self, letters_vocab):
        text = "abc de fghij a"
        spec = TokenizerSpec("subword", letters_vocab)
        pieces = tokenize(spec, text)
        rebuilt = "".join(pieces).replace(letters_vocab.word_boundary_marker, "")
        assert rebuilt == "".join(text.split())

    @given(st.lists(st.text(alphabet="abcdefghij", min_size=1, max_size=8),
                    min_size=1, max_size=6))
    def test_reconstruction_property(self, words):
        pieces = ["<unk>"] + [f"▁{c}" for c in "abcdefghij"] + list("abcdefghij")
        vocab = SubwordVocab(pieces, unk_id=0)
        text = " ".join(words)
        tokens = tokenize(TokenizerSpec("subword", vocab), text)
        rebuilt = "".join(tokens).replace("▁", "")
        assert rebuilt == "".join(text.split())


class TestVocabLoading:
    def test_header_sets_unk(self, tmp_path):
        path = write_vocab(tmp_path / "v.vocab", ["x", "y"], unk_id=1)
        vocab = SubwordVocab.load(path)
        assert vocab.unk_id == 1
        assert vocab.pieces == ("x", "y")

    def test_default_unk_is_zero(self, tmp_path):
        path = tmp_path / "v.vocab"
        path.write_text("x\ny\n", encoding="utf-8")
        assert SubwordVocab.load(path).unk_id == 0

    def test_tab_scores_ignored(self, tmp_path):
        path = tmp_path / "v.vocab"
        path.write_text("x\t-1.5\ny\t0.0\n", encoding="utf-8")
        assert SubwordVocab.load(path).pieces == ("x", "y")

    def test_duplicate_piece_rejected(self, tmp_path):
        path = tmp_path / "v.vocab"
        path.write_text("x\nx\n", encoding="utf-8")
        with pytest.raises(VocabError, match="duplicate"):
            SubwordVocab.load(path)

    def test_empty_vocab_rejected(self, tmp_path):
        path = tmp_path / "v.vocab"
        path.write_text("", encoding="utf-8")
        with pytest.raises(VocabError, match="empty"):
            SubwordVocab.load(path)

    def test_unk_out_of_range(self, tmp_path):
        path = tmp_path / "v.vocab"
        path.write_text("#unk=5\nx\n", encoding="utf-8")
        with pytest.raises(VocabError, match="out of range"):
            SubwordVocab.load(path)

    def test_fingerprint_stable_and_content_sensitive(self, tmp_path):
        a = SubwordVocab(["x", "y"])
        b = SubwordVocab(["x", "y"])
        c = SubwordVocab(["x", "z"])
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != c.fingerprint()


class TestCountChars:
    def test_latin_chars(self):
        assert count_chars("latin_chars", "the cat") == 6

    def test_split_units(self):
        assert count_chars("split_units", "DINGIR MEŠ") == 2

    def test_latin_chars_spaced(self):
        assert count_chars("latin_chars", "a b c") == 3

    def test_unknown_policy(self):
        with pytest.raises(ValueError, match="unknown char policy"):
            count_chars("bytes", "abc")

    @given(st.text(min_size=1, max_size=60))
    def test_split_units_matches_split(self, text):
        assert count_chars("split_units", text) == len(text.split())


class TestTokenizerSpec:
    def test_subword_requires_vocab(self):
        with pytest.raises(ValueError, match="requires a vocabulary"):
            TokenizerSpec("subword")

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown tokenizer scheme"):
            TokenizerSpec("bpe")

    def test_deterministic(self):
        spec = TokenizerSpec("ws13a")
        text = "Some text, with 3.14 and 2020-21!"
        assert tokenize(spec, text) == tokenize(spec, text)
