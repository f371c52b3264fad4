"""Tokenization schemes and character-counting policies.

Four schemes are supported:

* ``ws13a``   -- WMT-style punctuation-normalizing whitespace tokenization
  (the "13a" rules used for BLEU).
* ``char``    -- one token per extended grapheme cluster, whitespace dropped.
* ``han_mixed`` -- each CJK ideograph becomes its own token while runs of
  non-CJK characters stay joined (the usual policy for mixed Chinese text).
* ``subword`` -- greedy longest-match segmentation against a user-supplied
  subword vocabulary with SentencePiece-style word-boundary markers.

Character counts come in two policies: ``latin_chars`` counts non-whitespace
grapheme clusters, ``split_units`` counts whitespace-separated units.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

import regex as _regex

SCHEMES = ("ws13a", "char", "han_mixed", "subword")
CHAR_POLICIES = ("latin_chars", "split_units")

#: Default word-boundary marker (U+2581 LOWER ONE EIGHTH BLOCK).
WORD_BOUNDARY_MARKER = "▁"

_GRAPHEME_RE = _regex.compile(r"\X")


class VocabError(ValueError):
    """Raised for malformed subword vocabulary files."""


def graphemes(text: str) -> list[str]:
    """Split ``text`` into extended grapheme clusters."""
    return _GRAPHEME_RE.findall(text)


class SubwordVocab:
    """An ordered subword piece list with ids 0..len-1.

    Ids are contiguous from 0 in piece order; ``unk_id`` must name one of
    them.  The maximum 32-bit id value is reserved for the document
    separator of the n-gram index and may never be a piece id.
    """

    def __init__(self, pieces: list[str], unk_id: int = 0,
                 word_boundary_marker: str = WORD_BOUNDARY_MARKER) -> None:
        if not pieces:
            raise VocabError("vocabulary is empty")
        if len(pieces) >= 0xFFFF_FFFF:
            raise VocabError("vocabulary too large: the maximum 32-bit id is reserved")
        self.pieces: tuple[str, ...] = tuple(pieces)
        self.piece_ids: dict[str, int] = {}
        for i, piece in enumerate(self.pieces):
            if not piece:
                raise VocabError(f"empty piece at id {i}")
            if piece in self.piece_ids:
                raise VocabError(f"duplicate piece {piece!r} (ids {self.piece_ids[piece]} and {i})")
            self.piece_ids[piece] = i
        if not 0 <= unk_id < len(self.pieces):
            raise VocabError(f"unk id {unk_id} out of range for {len(self.pieces)} pieces")
        self.unk_id = unk_id
        self.word_boundary_marker = word_boundary_marker
        self._max_piece_len = max(len(p) for p in self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __repr__(self) -> str:
        return f"SubwordVocab({len(self.pieces)} pieces, unk_id={self.unk_id})"

    @classmethod
    def load(cls, path: str | Path) -> "SubwordVocab":
        """Load a vocabulary file: one piece per line, optional tab-separated
        score (ignored).  A header line ``#unk=<id>`` may set the unknown-piece
        id (default 0); piece ids follow file order starting at 0."""
        path = Path(path)
        pieces: list[str] = []
        unk_id = 0
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n").rstrip("\r")
                if line.startswith("#unk="):
                    try:
                        unk_id = int(line[5:])
                    except ValueError:
                        raise VocabError(f"{path}: bad header {line!r}") from None
                    continue
                if not line:
                    continue
                pieces.append(line.split("\t", 1)[0])
        try:
            return cls(pieces, unk_id=unk_id)
        except VocabError as exc:
            raise VocabError(f"{path}: {exc}") from None

    def fingerprint(self) -> int:
        """Deterministic 64-bit digest of the vocabulary content."""
        h = hashlib.sha256()
        h.update(f"unk={self.unk_id};marker={self.word_boundary_marker};"
                 f"n={len(self.pieces)};".encode("utf-8"))
        for piece in self.pieces:
            h.update(piece.encode("utf-8"))
            h.update(b"\x00")
        return int.from_bytes(h.digest()[:8], "little")

    def segment(self, text: str) -> list[int]:
        """Greedy longest-match segmentation, returning piece ids.

        Each whitespace-separated word is prefixed with the boundary marker
        before matching.  When nothing matches at a word start the marker is
        skipped; when nothing matches elsewhere the next grapheme cluster is
        consumed as one unknown piece.
        """
        ids: list[int] = []
        marker = self.word_boundary_marker
        for word in text.split():
            marked = marker + word
            pos = 0
            while pos < len(marked):
                limit = min(self._max_piece_len, len(marked) - pos)
                match_id = None
                for end in range(pos + limit, pos, -1):
                    match_id = self.piece_ids.get(marked[pos:end])
                    if match_id is not None:
                        pos = end
                        break
                if match_id is not None:
                    ids.append(match_id)
                elif pos == 0:
                    # The virtual marker itself is not unknown text; retry
                    # matching from the first real character.
                    pos = len(marker)
                else:
                    ids.append(self.unk_id)
                    pos += len(_GRAPHEME_RE.match(marked, pos).group())
        return ids


@dataclass(frozen=True)
class TokenizerSpec:
    """A tokenization scheme plus, for ``subword``, its vocabulary."""

    scheme: str = "ws13a"
    vocab: SubwordVocab | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown tokenizer scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "subword" and self.vocab is None:
            raise ValueError("subword scheme requires a vocabulary")


# 13a normalization, equivalent to the mteval-v13a / WMT rules: selected
# punctuation gets surrounding spaces, then the line is split on whitespace.
_RE_13A_SPECIALS = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_RE_NONDIGIT_PUNCT = re.compile(r"([^0-9])([\.,])")
_RE_PUNCT_NONDIGIT = re.compile(r"([\.,])([^0-9])")
_RE_DIGIT_DASH = re.compile(r"([0-9])(-)")


def normalize_13a(line: str) -> str:
    """Apply the 13a rules, returning a single-spaced token string."""
    line = line.replace("<skipped>", "")
    line = line.replace("-\n", "").replace("\n", " ")
    if "&" in line:
        line = (line.replace("&quot;", '"').replace("&amp;", "&")
                    .replace("&lt;", "<").replace("&gt;", ">"))
    line = f" {line} "
    line = _RE_13A_SPECIALS.sub(r" \1 ", line)
    line = _RE_NONDIGIT_PUNCT.sub(r"\1 \2 ", line)
    line = _RE_PUNCT_NONDIGIT.sub(r" \1 \2", line)
    line = _RE_DIGIT_DASH.sub(r"\1 \2 ", line)
    return " ".join(line.split())


# CJK Unified Ideographs plus Extension A.
def _is_cjk_ideograph(ch: str) -> bool:
    cp = ord(ch)
    return 0x4E00 <= cp <= 0x9FFF or 0x3400 <= cp <= 0x4DBF


def _tokenize_han_mixed(text: str) -> list[str]:
    tokens: list[str] = []
    run: list[str] = []
    for ch in text:
        if ch.isspace():
            if run:
                tokens.append("".join(run))
                run = []
        elif _is_cjk_ideograph(ch):
            if run:
                tokens.append("".join(run))
                run = []
            tokens.append(ch)
        else:
            run.append(ch)
    if run:
        tokens.append("".join(run))
    return tokens


def tokenize(spec: TokenizerSpec, text: str) -> list[str]:
    """Tokenize ``text`` under ``spec``, returning a list of token strings."""
    if spec.scheme == "ws13a":
        norm = normalize_13a(text)
        return norm.split() if norm else []
    if spec.scheme == "char":
        return [g for g in graphemes(text) if not g.isspace()]
    if spec.scheme == "han_mixed":
        return _tokenize_han_mixed(text)
    assert spec.vocab is not None
    return [spec.vocab.pieces[i] for i in spec.vocab.segment(text)]


def encode_ids(vocab: SubwordVocab, text: str) -> list[int]:
    """Segment ``text`` exactly like :func:`tokenize` with a subword spec,
    but return piece ids (unknown pieces map to ``vocab.unk_id``)."""
    return vocab.segment(text)


def count_chars(policy: str, text: str) -> int:
    """Count "characters" under the given policy.

    ``latin_chars`` counts non-whitespace grapheme clusters; ``split_units``
    counts maximal whitespace-separated units.
    """
    if policy == "latin_chars":
        return sum(1 for g in graphemes(text) if not g.isspace())
    if policy == "split_units":
        return len(text.split())
    raise ValueError(f"unknown char policy {policy!r}; expected one of {CHAR_POLICIES}")
