"""fredkit: dataset-intrinsic difficulty metrics for MT benchmarks.

Computes four corpus-level indices for a parallel train/test benchmark:

* **F** (fertility ratio): subword tokens per character; near 1 means the
  tokenizer fragments the language to character level.
* **R** (retrieval proxy): target similarity achieved by copying the
  training target whose source is most similar to each test source; a
  memorization ceiling.
* **E** (pre-training exposure): mean occurrence count of the test set's
  unique 4-grams in a pre-training corpus, served by a suffix-array index.
* **D** (corpus diversity): mean pairwise train/test target similarity.

Plus supporting similarity functions (sentence BLEU, chrF, chrF++), an
on-disk n-gram count index, a univariate correlation analyzer, and outlier
reporting against embedded high-resource reference baselines.
"""

from .analysis import (FeatureMatrix, ReferenceBand, flag_outliers,
                       rank_features, scatter_data, univariate_r2)
from .corpus import DatasetManifest, ManifestEntry, ParallelCorpus, load_manifest, load_parallel_corpus
from .fred import (FredScores, corpus_diversity, corpus_diversity_bruteforce,
                   exposure, fertility, retrieval_proxy, retrieval_proxy_bruteforce,
                   score_pair)
from .ngram_index import NGramIndex, build_index, load_index, save_index
from .simfn import SimilarityFn, chrf, ngram_profile, score, sentence_bleu
from .tokenizers import SubwordVocab, TokenizerSpec, count_chars, encode_ids, tokenize

__version__ = "0.1.0"

__all__ = [
    "DatasetManifest",
    "FeatureMatrix",
    "FredScores",
    "ManifestEntry",
    "NGramIndex",
    "ParallelCorpus",
    "ReferenceBand",
    "SimilarityFn",
    "SubwordVocab",
    "TokenizerSpec",
    "build_index",
    "chrf",
    "corpus_diversity",
    "corpus_diversity_bruteforce",
    "count_chars",
    "encode_ids",
    "exposure",
    "fertility",
    "flag_outliers",
    "load_index",
    "load_manifest",
    "load_parallel_corpus",
    "ngram_profile",
    "rank_features",
    "retrieval_proxy",
    "retrieval_proxy_bruteforce",
    "save_index",
    "scatter_data",
    "score",
    "score_pair",
    "sentence_bleu",
    "tokenize",
    "univariate_r2",
]
