"""Sentence-level similarity functions: BLEU, chrF and chrF++.

All three return scores in [0, 100] and follow the de facto standard
sentence-level semantics:

* BLEU uses clipped n-gram precisions up to order 4, exponential smoothing
  of zero precisions (the k-th zero precision becomes ``1 / (2^k * total)``),
  an effective order capped at the longest order with any hypothesis n-grams,
  the brevity penalty ``min(1, exp(1 - ref_len/hyp_len))``, and returns 0
  outright when no n-gram of any order matches.
* chrF is the macro-average over character n-gram orders 1..6 of the
  per-order F-beta (beta=2) on whitespace-stripped text; orders with empty
  statistics are excluded from the average.
* chrF++ additionally averages word n-gram orders 1..2, where words are
  whitespace tokens with one leading or trailing ASCII punctuation
  character split off.

Scoring is split into a profile step (:func:`profile`) and a pairwise step
(:func:`score_profiles`) so that corpus-level loops can reuse per-sentence
n-gram statistics.
"""

from __future__ import annotations

import logging
import math
import string
from collections import Counter
from dataclasses import dataclass, field

from .tokenizers import TokenizerSpec, normalize_13a, tokenize

log = logging.getLogger(__name__)

KINDS = ("bleu", "chrf", "chrfpp")

_PUNCTS = frozenset(string.punctuation)


@dataclass(frozen=True)
class SimilarityFn:
    """Configuration of a base similarity metric ``f``."""

    kind: str
    tokenizer: TokenizerSpec = field(default_factory=TokenizerSpec)
    max_ngram: int = 4
    char_order: int = 6
    word_order: int = 0
    beta: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown similarity kind {self.kind!r}; expected one of {KINDS}")
        if self.max_ngram < 1 or self.char_order < 1 or self.word_order < 0:
            raise ValueError("n-gram orders must be positive")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")

    @classmethod
    def for_kind(cls, kind: str, tokenizer: TokenizerSpec | None = None) -> "SimilarityFn":
        """Build the standard configuration for ``bleu``, ``chrf`` or ``chrfpp``."""
        if kind == "bleu":
            return cls(kind="bleu", tokenizer=tokenizer or TokenizerSpec("ws13a"))
        if kind == "chrf":
            return cls(kind="chrf", word_order=0)
        if kind == "chrfpp":
            return cls(kind="chrfpp", word_order=2)
        raise ValueError(f"unknown similarity kind {kind!r}; expected one of {KINDS}")


@dataclass
class SentenceProfile:
    """Precomputed n-gram statistics of one sentence for one metric."""

    grams: tuple[dict, ...]   # one n-gram count dict per order
    totals: tuple[int, ...]   # total n-grams per order
    length: int               # tokens (bleu) or characters (chrf)


def ngram_profile(tokens: list, n: int) -> Counter:
    """All contiguous ``n``-grams of ``tokens`` with multiplicities."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _gram_dicts(items, max_order: int) -> tuple[tuple[dict, ...], tuple[int, ...]]:
    grams = []
    totals = []
    k = len(items)
    for n in range(1, max_order + 1):
        total = k - n + 1
        if total <= 0:
            grams.append({})
            totals.append(0)
            continue
        d: dict = {}
        if n == 1:
            for tok in items:
                d[tok] = d.get(tok, 0) + 1
        else:
            for i in range(total):
                g = tuple(items[i:i + n])
                d[g] = d.get(g, 0) + 1
        grams.append(d)
        totals.append(total)
    return tuple(grams), tuple(totals)


def _char_gram_dicts(s: str, max_order: int) -> tuple[tuple[dict, ...], tuple[int, ...]]:
    grams = []
    totals = []
    k = len(s)
    for n in range(1, max_order + 1):
        total = k - n + 1
        if total <= 0:
            grams.append({})
            totals.append(0)
            continue
        d: dict = {}
        for i in range(total):
            g = s[i:i + n]
            d[g] = d.get(g, 0) + 1
        grams.append(d)
        totals.append(total)
    return tuple(grams), tuple(totals)


def _split_punctuation(text: str) -> list[str]:
    """Whitespace tokens with one leading/trailing punctuation split off."""
    words: list[str] = []
    for w in text.split():
        if len(w) == 1:
            words.append(w)
        elif w[-1] in _PUNCTS:
            words.append(w[:-1])
            words.append(w[-1])
        elif w[0] in _PUNCTS:
            words.append(w[0])
            words.append(w[1:])
        else:
            words.append(w)
    return words


def profile(fn: SimilarityFn, text: str) -> SentenceProfile:
    """Compute the per-sentence statistics that :func:`score_profiles` consumes."""
    if fn.kind == "bleu":
        tokens = tokenize(fn.tokenizer, text)
        grams, totals = _gram_dicts(tokens, fn.max_ngram)
        return SentenceProfile(grams, totals, len(tokens))
    chars = "".join(text.split())
    grams, totals = _char_gram_dicts(chars, fn.char_order)
    if fn.word_order > 0:
        wgrams, wtotals = _gram_dicts(_split_punctuation(text), fn.word_order)
        grams += wgrams
        totals += wtotals
    return SentenceProfile(grams, totals, len(chars))


def _clipped_matches(a: dict, b: dict) -> int:
    if len(a) > len(b):
        a, b = b, a
    get = b.get
    total = 0
    for g, c in a.items():
        other = get(g)
        if other:
            total += c if c < other else other
    return total


def _bleu_from_profiles(fn: SimilarityFn, hyp: SentenceProfile, ref: SentenceProfile) -> float:
    hyp_len = hyp.length
    ref_len = ref.length
    if hyp_len == 0 or ref_len == 0:
        log.warning("empty input after tokenization; scoring 0")
        return 0.0
    correct = [_clipped_matches(hyp.grams[n], ref.grams[n]) for n in range(fn.max_ngram)]
    if not any(correct):
        return 0.0
    log_sum = 0.0
    effective_order = 0
    smooth = 1.0
    for n in range(fn.max_ngram):
        total = hyp.totals[n]
        if total == 0:
            break
        effective_order = n + 1
        if correct[n]:
            precision = 100.0 * correct[n] / total
        else:
            smooth *= 2.0
            precision = 100.0 / (smooth * total)
        log_sum += math.log(precision)
    if hyp_len < ref_len:
        brevity_penalty = math.exp(1.0 - ref_len / hyp_len)
    else:
        brevity_penalty = 1.0
    # exp(log(...)) can overshoot 100 by ~1e-14; keep the contract [0, 100]
    return min(100.0, brevity_penalty * math.exp(log_sum / effective_order))


def _chrf_from_profiles(fn: SimilarityFn, hyp: SentenceProfile, ref: SentenceProfile) -> float:
    if hyp.length == 0 or ref.length == 0:
        log.warning("empty input after tokenization; scoring 0")
        return 0.0
    factor = fn.beta * fn.beta
    score = 0.0
    effective_orders = 0
    for n in range(len(hyp.grams)):
        n_hyp = hyp.totals[n]
        n_ref = ref.totals[n]
        if n_hyp > 0 and n_ref > 0:
            match = _clipped_matches(hyp.grams[n], ref.grams[n])
            precision = match / n_hyp
            recall = match / n_ref
            denom = factor * precision + recall
            if denom > 0:
                score += (1.0 + factor) * precision * recall / denom
            effective_orders += 1
    if effective_orders == 0:
        return 0.0
    return min(100.0, 100.0 * score / effective_orders)


def score_profiles(fn: SimilarityFn, hyp: SentenceProfile, ref: SentenceProfile) -> float:
    """Score a precomputed hypothesis/reference profile pair."""
    if fn.kind == "bleu":
        return _bleu_from_profiles(fn, hyp, ref)
    return _chrf_from_profiles(fn, hyp, ref)


def score(fn: SimilarityFn, hyp: str, ref: str) -> float:
    """Score a hypothesis/reference sentence pair with ``fn``."""
    return score_profiles(fn, profile(fn, hyp), profile(fn, ref))


def sentence_bleu(fn: SimilarityFn, hyp: str, ref: str) -> float:
    """Sentence BLEU of ``hyp`` against ``ref`` under ``fn.tokenizer``."""
    if fn.kind != "bleu":
        raise ValueError(f"sentence_bleu requires a bleu SimilarityFn, got {fn.kind!r}")
    return score(fn, hyp, ref)


def chrf(fn: SimilarityFn, hyp: str, ref: str) -> float:
    """chrF (``word_order == 0``) or chrF++ (``word_order > 0``) score."""
    if fn.kind not in ("chrf", "chrfpp"):
        raise ValueError(f"chrf requires a chrf/chrfpp SimilarityFn, got {fn.kind!r}")
    return score(fn, hyp, ref)


__all__ = [
    "KINDS",
    "SimilarityFn",
    "SentenceProfile",
    "ngram_profile",
    "normalize_13a",
    "profile",
    "score",
    "score_profiles",
    "sentence_bleu",
    "chrf",
]
