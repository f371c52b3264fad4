"""The four corpus difficulty metrics: F, R, E and D.

* ``fertility`` (F): token count over character count, computed per side on
  the test split as a ratio of sums (micro-average); the larger side is
  reported together with which side it was.
* ``retrieval_proxy`` (R): for each test item, find the training item whose
  source is most similar (ties broken by smallest train index) and average
  the target-side similarity against it.
* ``corpus_diversity`` (D): mean pairwise similarity between every test
  target and every train target.
* ``exposure`` (E): mean occurrence count, in an indexed pre-training
  corpus, of the unique token n-grams of the test sentences.

R and D precompute per-sentence n-gram profiles once and parallelize the
test-item loop across worker processes; partial results are reassembled in
test order, so values are bit-identical for any worker count.  The literal
double-loop implementations (``*_bruteforce``) stay in-tree as oracles for
property tests.
"""

from __future__ import annotations

import logging
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .corpus import ManifestEntry, ParallelCorpus
from .ngram_index import NGramIndex
from .simfn import SimilarityFn, profile, score, score_profiles
from .tokenizers import SubwordVocab, TokenizerSpec, count_chars, tokenize

log = logging.getLogger(__name__)

#: Environment variable with the default worker count (0 = auto).
THREADS_ENV_VAR = "FREDKIT_THREADS"

# Below this many pairwise scorings the fork/IPC overhead dominates.
_PARALLEL_THRESHOLD = 250_000


def resolve_workers(workers: int | None = None) -> int:
    """Resolve a worker count: explicit value, else the environment
    variable, else one worker per CPU."""
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV_VAR, "0") or 0)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


_WORKER_CTX: dict = {}


def _run_chunk(bounds: tuple[int, int]) -> list:
    fn = _WORKER_CTX["fn"]
    return [fn(i) for i in range(bounds[0], bounds[1])]


def _indexed_map(fn: Callable[[int], object], n_items: int, workers: int,
                 cost_per_item: int = 1) -> list:
    """Map ``fn`` over ``range(n_items)`` preserving order, forking worker
    processes when the job is big enough to pay for them."""
    if (workers <= 1 or n_items < 2 or cost_per_item * n_items < _PARALLEL_THRESHOLD
            or "fork" not in multiprocessing.get_all_start_methods()):
        return [fn(i) for i in range(n_items)]
    workers = min(workers, n_items)
    chunk = max(1, -(-n_items // (workers * 4)))
    bounds = [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]
    ctx = multiprocessing.get_context("fork")
    _WORKER_CTX["fn"] = fn
    try:
        with ctx.Pool(workers) as pool:
            parts = pool.map(_run_chunk, bounds)
    finally:
        _WORKER_CTX.clear()
    return [item for part in parts for item in part]


@dataclass
class FredScores:
    """One language pair's metric record (one report row)."""

    pair_id: str
    f_score: float
    side_used: str                      # which side produced the larger F
    r_score: dict[str, float]           # similarity kind -> score
    d_score: dict[str, float]           # similarity kind -> score
    e_score: float | None               # None when no index was supplied
    n_used: int | None                  # |unique n-grams| behind e_score
    n_train: int
    n_token_mean: float                 # mean tokens per test source sentence
    notes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.f_score <= 0:
            raise ValueError("f_score must be positive")
        if self.e_score is not None and self.e_score < 0:
            raise ValueError("e_score must be non-negative")
        for scores in (self.r_score, self.d_score):
            for kind, value in scores.items():
                if not 0.0 <= value <= 100.0:
                    raise ValueError(f"{kind} score {value} outside [0, 100]")


def fertility(corpus: ParallelCorpus, tokenizer: TokenizerSpec,
              src_char_policy: str = "latin_chars",
              tgt_char_policy: str = "latin_chars",
              tgt_tokenizer: TokenizerSpec | None = None) -> tuple[float, str]:
    """Token/character ratio on the test split, per side, returning the
    larger ratio and which side it came from.

    Both sides use ``tokenizer`` unless ``tgt_tokenizer`` is given.  The
    ratio is a ratio of sums over all test sentences, not a mean of
    per-sentence ratios.
    """
    tgt_tokenizer = tgt_tokenizer or tokenizer
    sides = {}
    for side, tok, policy in (("source", tokenizer, src_char_policy),
                              ("target", tgt_tokenizer, tgt_char_policy)):
        idx = 0 if side == "source" else 1
        n_tokens = 0
        n_chars = 0
        for pair in corpus.test:
            text = pair[idx]
            n_tokens += len(tokenize(tok, text))
            n_chars += count_chars(policy, text)
        if n_chars == 0:
            raise ValueError(f"{corpus.pair_id}: zero total character count on {side} side")
        sides[side] = n_tokens / n_chars
    side_used = "source" if sides["source"] >= sides["target"] else "target"
    return sides[side_used], side_used


@dataclass
class RetrievalMatch:
    """Per-test-item diagnostics: which training item won and the scores."""

    test_index: int
    train_index: int
    source_sim: float
    target_sim: float


def retrieval_proxy(corpus: ParallelCorpus, fn: SimilarityFn,
                    source_fn: SimilarityFn | None = None,
                    workers: int | None = None,
                    return_matches: bool = False):
    """Retrieval proxy R: mean target similarity of the best source match.

    ``fn`` scores target sides; ``source_fn`` (default ``fn``) scores source
    sides, so the two sides may use different tokenizers.  Returns the score,
    or ``(score, matches)`` when ``return_matches`` is set.
    """
    source_fn = source_fn or fn
    train_src = [profile(source_fn, x) for x, _ in corpus.train]
    train_tgt = [profile(fn, y) for _, y in corpus.train]
    test_src = [profile(source_fn, x) for x, _ in corpus.test]
    test_tgt = [profile(fn, y) for _, y in corpus.test]

    def best_match(i: int) -> tuple[int, float, float]:
        hyp = test_src[i]
        best_j = 0
        best_sim = -1.0
        for j, ref in enumerate(train_src):
            sim = score_profiles(source_fn, hyp, ref)
            if sim > best_sim:
                best_sim = sim
                best_j = j
        target_sim = score_profiles(fn, test_tgt[i], train_tgt[best_j])
        return best_j, best_sim, target_sim

    results = _indexed_map(best_match, corpus.n_test,
                           resolve_workers(workers), cost_per_item=corpus.n_train)
    total = 0.0
    matches = []
    for i, (j, src_sim, tgt_sim) in enumerate(results):
        total += tgt_sim
        matches.append(RetrievalMatch(i, j, src_sim, tgt_sim))
    r = total / corpus.n_test
    if return_matches:
        return r, matches
    return r


def corpus_diversity(corpus: ParallelCorpus, fn: SimilarityFn,
                     workers: int | None = None) -> float:
    """Corpus diversity D: mean pairwise test-target x train-target similarity."""
    train_tgt = [profile(fn, y) for _, y in corpus.train]
    test_tgt = [profile(fn, y) for _, y in corpus.test]

    def row_sum(i: int) -> float:
        hyp = test_tgt[i]
        acc = 0.0
        for ref in train_tgt:
            acc += score_profiles(fn, hyp, ref)
        return acc

    sums = _indexed_map(row_sum, corpus.n_test,
                        resolve_workers(workers), cost_per_item=corpus.n_train)
    return sum(sums) / (corpus.n_test * corpus.n_train)


def retrieval_proxy_bruteforce(corpus: ParallelCorpus, fn: SimilarityFn,
                               source_fn: SimilarityFn | None = None) -> float:
    """Literal double-loop R, kept as the oracle for the optimized path."""
    source_fn = source_fn or fn
    total = 0.0
    for x_i, y_i in corpus.test:
        best_j = 0
        best_sim = -1.0
        for j, (x_j, _) in enumerate(corpus.train):
            sim = score(source_fn, x_i, x_j)
            if sim > best_sim:
                best_sim = sim
                best_j = j
        total += score(fn, y_i, corpus.train[best_j][1])
    return total / corpus.n_test


def corpus_diversity_bruteforce(corpus: ParallelCorpus, fn: SimilarityFn) -> float:
    """Literal double-loop D, kept as the oracle for the optimized path."""
    total = 0.0
    for _, y_i in corpus.test:
        for _, y_j in corpus.train:
            total += score(fn, y_i, y_j)
    return total / (corpus.n_test * corpus.n_train)


def exposure(test_targets: Sequence[str], index: NGramIndex, vocab: SubwordVocab,
             n: int = 4) -> tuple[float, int]:
    """Pre-training exposure E: mean index count of the unique token
    ``n``-grams over all test sentences (deduplicated corpus-wide).

    Returns ``(e_score, number_of_unique_ngrams)``; when every sentence is
    shorter than ``n`` tokens, E is 0 with a warning.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    index.check_vocab(vocab)
    unique: set[tuple[int, ...]] = set()
    for sentence in test_targets:
        ids = vocab.segment(sentence)
        for i in range(len(ids) - n + 1):
            unique.add(tuple(ids[i:i + n]))
    if not unique:
        log.warning("no test sentence has %d tokens; exposure reported as 0", n)
        return 0.0, 0
    grams = sorted(unique)
    total = sum(index.count(g) for g in grams)
    return total / len(grams), len(grams)


def score_pair(entry: ManifestEntry,
               kinds: Sequence[str] = ("bleu", "chrf", "chrfpp"),
               index: NGramIndex | None = None,
               exposure_n: int = 4,
               workers: int | None = None) -> FredScores:
    """Compute all metrics for one manifest entry (one report row).

    E is filled only when ``index`` is supplied and the entry names a
    subword vocabulary; otherwise it is left as ``None``.
    """
    corpus = entry.load_corpus()
    vocab = SubwordVocab.load(entry.subword_vocab_path) if entry.subword_vocab_path else None

    src_spec = TokenizerSpec(entry.tokenizer_policy_src,
                             vocab if entry.tokenizer_policy_src == "subword" else None)
    tgt_spec = TokenizerSpec(entry.tokenizer_policy_tgt,
                             vocab if entry.tokenizer_policy_tgt == "subword" else None)

    # F follows the pre-trained tokenizer when a vocabulary is supplied,
    # matching how token fertility is defined; otherwise the per-side
    # policies are used.
    if vocab is not None:
        f_spec_src = f_spec_tgt = TokenizerSpec("subword", vocab)
    else:
        f_spec_src, f_spec_tgt = src_spec, tgt_spec
    f_score, side_used = fertility(corpus, f_spec_src,
                                   src_char_policy=entry.char_policy_src,
                                   tgt_char_policy=entry.char_policy_tgt,
                                   tgt_tokenizer=f_spec_tgt)

    r_scores: dict[str, float] = {}
    d_scores: dict[str, float] = {}
    for kind in kinds:
        tgt_fn = SimilarityFn.for_kind(kind, tokenizer=tgt_spec)
        src_fn = SimilarityFn.for_kind(kind, tokenizer=src_spec)
        r_scores[kind] = retrieval_proxy(corpus, tgt_fn, source_fn=src_fn, workers=workers)
        d_scores[kind] = corpus_diversity(corpus, tgt_fn, workers=workers)

    e_score = None
    n_used = None
    notes = {
        "fertility_aggregation": "ratio-of-sums",
        "char_policy_source": entry.char_policy_src,
        "char_policy_target": entry.char_policy_tgt,
        "tokenizer_source": entry.tokenizer_policy_src,
        "tokenizer_target": entry.tokenizer_policy_tgt,
    }
    if index is not None and vocab is not None:
        side = 0 if entry.exposure_side == "source" else 1
        sentences = [pair[side] for pair in corpus.test]
        e_score, n_used = exposure(sentences, index, vocab, n=exposure_n)
        notes["exposure_side"] = entry.exposure_side
        notes["exposure_n"] = str(exposure_n)
    elif index is not None:
        notes["exposure_skipped"] = "entry has no subword vocabulary"

    src_token_counts = [len(tokenize(src_spec, x)) for x, _ in corpus.test]
    return FredScores(
        pair_id=entry.pair_id,
        f_score=f_score,
        side_used=side_used,
        r_score=r_scores,
        d_score=d_scores,
        e_score=e_score,
        n_used=n_used,
        n_train=corpus.n_train,
        n_token_mean=sum(src_token_counts) / len(src_token_counts),
        notes=notes,
    )
