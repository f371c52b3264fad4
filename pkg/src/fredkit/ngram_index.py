"""On-disk n-gram count index over a tokenized corpus.

The index is a suffix array over a flat stream of 32-bit token ids.  A
reserved separator id (the maximum 32-bit value) sits between documents so
that no query gram can span a document boundary.  Counting a gram is two
binary searches over the suffix array; occurrences may overlap.

File format (little-endian): 8-byte magic ``FREDNGX1``, u64 stream length,
u64 vocabulary fingerprint, the token array as u32, the suffix array as u64.
Builds are deterministic: the same inputs produce identical bytes.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .tokenizers import SubwordVocab

log = logging.getLogger(__name__)

MAGIC = b"FREDNGX1"

#: Document separator: the maximum 32-bit id, reserved at vocabulary load.
SEPARATOR_ID = 0xFFFF_FFFF

#: Token positions are stored as u64.
MAX_STREAM_LENGTH = 2**64 - 1


class IndexFormatError(ValueError):
    """Raised for unreadable or corrupt index files."""


def _build_suffix_array(tokens: np.ndarray) -> np.ndarray:
    """Sort all suffixes of ``tokens`` by prefix doubling (O(L log^2 L) worst
    case with vectorized sorts; terminates early once all ranks are distinct)."""
    length = len(tokens)
    if length == 0:
        return np.empty(0, dtype=np.uint64)
    if length == 1:
        return np.zeros(1, dtype=np.uint64)

    # Initial ranks: dense ranks of the single tokens.
    order = np.argsort(tokens, kind="stable")
    sorted_tokens = tokens[order]
    rank = np.empty(length, dtype=np.int64)
    rank[order] = np.cumsum(np.concatenate(
        ([0], (sorted_tokens[1:] != sorted_tokens[:-1]).astype(np.int64))))

    step = 1
    positions = np.arange(length, dtype=np.int64)
    while True:
        # Secondary key: rank of the suffix ``step`` positions later, -1 past
        # the end (shorter suffixes sort first on equal prefixes).
        second = np.full(length, -1, dtype=np.int64)
        second[:length - step] = rank[step:]
        order = np.lexsort((second, rank))
        changed = np.concatenate(
            ([0], ((rank[order[1:]] != rank[order[:-1]]) |
                   (second[order[1:]] != second[order[:-1]])).astype(np.int64)))
        new_rank = np.empty(length, dtype=np.int64)
        new_rank[order] = np.cumsum(changed)
        rank = new_rank
        if rank[order[-1]] == length - 1:
            break
        step *= 2
        if step >= length:
            break
    del positions
    return order.astype(np.uint64)


@dataclass
class NGramIndex:
    """Immutable suffix-array count index; safe for concurrent queries."""

    tokens: np.ndarray          # u32 token stream (with document separators)
    suffix_array: np.ndarray    # u64 permutation of positions
    vocab_fingerprint: int

    def __post_init__(self) -> None:
        self.tokens = np.ascontiguousarray(self.tokens, dtype=np.uint32)
        self.suffix_array = np.ascontiguousarray(self.suffix_array, dtype=np.uint64)
        if len(self.tokens) != len(self.suffix_array):
            raise IndexFormatError("token stream and suffix array lengths differ")

    def __len__(self) -> int:
        return len(self.tokens)

    def check_vocab(self, vocab: SubwordVocab) -> bool:
        """Warn (without failing) when queries use a different vocabulary
        than the one the index was built with."""
        if vocab.fingerprint() != self.vocab_fingerprint:
            log.warning("vocabulary fingerprint mismatch: index was built with a "
                        "different vocabulary; counts may be meaningless")
            return False
        return True

    def _compare_suffix(self, pos: int, gram: np.ndarray) -> int:
        """Compare suffix at ``pos`` against ``gram`` over the gram's length.
        Returns -1/0/+1; a suffix that is a proper prefix of the gram is
        smaller."""
        tokens = self.tokens
        window = tokens[pos:pos + len(gram)]
        k = len(window)
        head = gram[:k]
        mismatch = np.nonzero(window != head)[0]
        if mismatch.size:
            i = mismatch[0]
            return -1 if window[i] < head[i] else 1
        return -1 if k < len(gram) else 0

    def count(self, gram: Sequence[int]) -> int:
        """Occurrences of ``gram`` as a contiguous subsequence of the stream
        (overlaps included; 0 for absent grams)."""
        gram = np.asarray(list(gram), dtype=np.int64)
        if gram.size == 0:
            raise ValueError("gram must be non-empty")
        if np.any(gram == SEPARATOR_ID) or np.any(gram < 0) or np.any(gram > SEPARATOR_ID):
            raise ValueError("gram contains the reserved separator id or an out-of-range id")
        gram = gram.astype(np.uint32)
        sa = self.suffix_array
        length = len(sa)
        # Lower bound: first suffix >= gram.
        lo, hi = 0, length
        while lo < hi:
            mid = (lo + hi) // 2
            if self._compare_suffix(int(sa[mid]), gram) < 0:
                lo = mid + 1
            else:
                hi = mid
        first = lo
        # Upper bound: first suffix whose gram-length prefix exceeds gram.
        hi = length
        while lo < hi:
            mid = (lo + hi) // 2
            if self._compare_suffix(int(sa[mid]), gram) <= 0:
                lo = mid + 1
            else:
                hi = mid
        return lo - first

    def count_many(self, grams: Iterable[Sequence[int]]) -> list[int]:
        return [self.count(g) for g in grams]


def build_index(corpus_files: Sequence[str | Path], vocab: SubwordVocab) -> NGramIndex:
    """Tokenize every line of every file with ``vocab`` and build the index.

    Each non-blank line is one document; a separator id is placed between
    consecutive documents so grams never span documents.
    """
    docs: list[list[int]] = []
    for path in corpus_files:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"corpus file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                ids = vocab.segment(line)
                if ids:
                    docs.append(ids)
    if not docs:
        raise ValueError("no input documents")

    total = sum(len(d) for d in docs) + len(docs) - 1
    if total > MAX_STREAM_LENGTH:
        raise ValueError(f"token stream of {total} ids exceeds the address "
                         f"width limit of {MAX_STREAM_LENGTH}")
    stream = np.empty(total, dtype=np.uint32)
    offset = 0
    for i, doc in enumerate(docs):
        if i:
            stream[offset] = SEPARATOR_ID
            offset += 1
        stream[offset:offset + len(doc)] = doc
        offset += len(doc)
    assert offset == total

    suffix_array = _build_suffix_array(stream)
    return NGramIndex(stream, suffix_array, vocab.fingerprint())


def save_index(index: NGramIndex, path: str | Path) -> None:
    """Write the index in the binary format described in the module docstring."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", len(index.tokens), index.vocab_fingerprint))
        fh.write(index.tokens.astype("<u4").tobytes())
        fh.write(index.suffix_array.astype("<u8").tobytes())


def load_index(path: str | Path) -> NGramIndex:
    """Read an index written by :func:`save_index`."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise IndexFormatError(f"{path}: not an index file (bad magic)")
        header = fh.read(16)
        if len(header) != 16:
            raise IndexFormatError(f"{path}: truncated header")
        length, fingerprint = struct.unpack("<QQ", header)
        tok_bytes = fh.read(4 * length)
        sa_bytes = fh.read(8 * length)
        if len(tok_bytes) != 4 * length or len(sa_bytes) != 8 * length:
            raise IndexFormatError(f"{path}: truncated file")
        if fh.read(1):
            raise IndexFormatError(f"{path}: trailing bytes after index data")
    tokens = np.frombuffer(tok_bytes, dtype="<u4").astype(np.uint32)
    suffix_array = np.frombuffer(sa_bytes, dtype="<u8").astype(np.uint64)
    index = NGramIndex(tokens, suffix_array, fingerprint)
    sa = index.suffix_array
    if length and (len(np.unique(sa)) != length or int(sa.max()) != length - 1):
        raise IndexFormatError(f"{path}: suffix array is not a permutation")
    return index
