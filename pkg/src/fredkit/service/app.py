"""FastAPI service wrapping the core package.

The service holds one long-lived n-gram index (loaded at startup or via
``POST /index/load``) and serves count/exposure queries plus similarity and
corpus scoring for inline payloads.  All handlers are read-only with
respect to the loaded state except ``/index/load``.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import analysis as ana
from ..corpus import CorpusError, ParallelCorpus
from ..fred import corpus_diversity, exposure, fertility, retrieval_proxy
from ..ngram_index import IndexFormatError, NGramIndex, load_index
from ..simfn import KINDS, SimilarityFn, score
from ..tokenizers import SCHEMES, SubwordVocab, TokenizerSpec, VocabError
from . import schemas


class ServiceState:
    """Mutable service state: the loaded index and its vocabulary."""

    def __init__(self) -> None:
        self.index: NGramIndex | None = None
        self.vocab: SubwordVocab | None = None

    def load(self, index_path: str | Path, vocab_path: str | Path) -> bool:
        self.vocab = SubwordVocab.load(vocab_path)
        self.index = load_index(index_path)
        return self.index.check_vocab(self.vocab)

    def require_index(self) -> tuple[NGramIndex, SubwordVocab]:
        if self.index is None or self.vocab is None:
            raise HTTPException(status_code=409,
                                detail="no index loaded; POST /index/load first")
        return self.index, self.vocab


def _tokenizer_spec(name: str, vocab: SubwordVocab | None) -> TokenizerSpec:
    if name not in SCHEMES:
        raise HTTPException(status_code=422, detail=f"unknown tokenizer {name!r}")
    if name == "subword":
        if vocab is None:
            raise HTTPException(status_code=409,
                                detail="subword tokenizer requires a loaded vocabulary")
        return TokenizerSpec("subword", vocab)
    return TokenizerSpec(name)


def create_app(index_path: str | Path | None = None,
               vocab_path: str | Path | None = None) -> FastAPI:
    """Build the application, optionally preloading an index."""
    app = FastAPI(title="fredkit", description="Corpus difficulty metrics service")
    state = ServiceState()
    if index_path is not None:
        if vocab_path is None:
            raise ValueError("an index path requires a vocabulary path")
        state.load(index_path, vocab_path)
    app.state.fredkit = state

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(
            status="ok",
            index_loaded=state.index is not None,
            index_tokens=len(state.index) if state.index is not None else None,
            vocab_pieces=len(state.vocab) if state.vocab is not None else None,
        )

    @app.post("/similarity", response_model=schemas.SimilarityResponse)
    def similarity(request: schemas.SimilarityRequest) -> schemas.SimilarityResponse:
        if request.kind not in KINDS:
            raise HTTPException(status_code=422,
                                detail=f"unknown similarity kind {request.kind!r}")
        fn = SimilarityFn.for_kind(request.kind,
                                   tokenizer=_tokenizer_spec(request.tokenizer, state.vocab))
        return schemas.SimilarityResponse(kind=request.kind,
                                          score=score(fn, request.hyp, request.ref))

    @app.post("/index/load", response_model=schemas.IndexLoadResponse)
    def index_load(request: schemas.IndexLoadRequest) -> schemas.IndexLoadResponse:
        try:
            match = state.load(request.index_path, request.vocab_path)
        except (OSError, IndexFormatError, VocabError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        assert state.index is not None and state.vocab is not None
        return schemas.IndexLoadResponse(index_tokens=len(state.index),
                                         vocab_pieces=len(state.vocab),
                                         fingerprint_match=match)

    @app.post("/index/count", response_model=schemas.CountResponse)
    def index_count(request: schemas.CountRequest) -> schemas.CountResponse:
        index, vocab = state.require_index()
        ids = vocab.segment(request.text)
        if len(ids) < request.n:
            raise HTTPException(status_code=422,
                                detail=f"query has only {len(ids)} tokens; "
                                       f"need at least {request.n}")
        grams = []
        for i in range(len(ids) - request.n + 1):
            gram = ids[i:i + request.n]
            grams.append(schemas.GramCount(
                gram=" ".join(vocab.pieces[t] for t in gram),
                ids=list(gram),
                count=index.count(gram),
            ))
        return schemas.CountResponse(grams=grams)

    @app.post("/exposure", response_model=schemas.ExposureResponse)
    def exposure_endpoint(request: schemas.ExposureRequest) -> schemas.ExposureResponse:
        index, vocab = state.require_index()
        e_score, n_used = exposure(request.sentences, index, vocab, n=request.n)
        return schemas.ExposureResponse(e_score=e_score, unique_ngrams=n_used)

    @app.post("/score", response_model=schemas.ScoreCorpusResponse)
    def score_corpus(request: schemas.ScoreCorpusRequest) -> schemas.ScoreCorpusResponse:
        for kind in request.kinds:
            if kind not in KINDS:
                raise HTTPException(status_code=422,
                                    detail=f"unknown similarity kind {kind!r}")
        try:
            corpus = ParallelCorpus(
                pair_id=request.pair_id, src_lang="", tgt_lang="",
                train=tuple(zip(request.train_src, request.train_tgt)),
                test=tuple(zip(request.test_src, request.test_tgt)),
            )
        except CorpusError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        src_spec = _tokenizer_spec(request.tokenizer_src, state.vocab)
        tgt_spec = _tokenizer_spec(request.tokenizer_tgt, state.vocab)
        f_score, f_side = fertility(corpus, src_spec,
                                    src_char_policy=request.char_policy_src,
                                    tgt_char_policy=request.char_policy_tgt,
                                    tgt_tokenizer=tgt_spec)
        r_scores = {}
        d_scores = {}
        for kind in request.kinds:
            tgt_fn = SimilarityFn.for_kind(kind, tokenizer=tgt_spec)
            src_fn = SimilarityFn.for_kind(kind, tokenizer=src_spec)
            r_scores[kind] = retrieval_proxy(corpus, tgt_fn, source_fn=src_fn)
            d_scores[kind] = corpus_diversity(corpus, tgt_fn)
        e_score = None
        n_used = None
        if request.with_exposure:
            index, vocab = state.require_index()
            side = 0 if request.exposure_side == "source" else 1
            sentences = [pair[side] for pair in corpus.test]
            e_score, n_used = exposure(sentences, index, vocab, n=request.exposure_n)
        from ..tokenizers import tokenize

        token_counts = [len(tokenize(src_spec, x)) for x, _ in corpus.test]
        return schemas.ScoreCorpusResponse(
            pair_id=request.pair_id,
            f_score=f_score,
            f_side=f_side,
            r_score=r_scores,
            d_score=d_scores,
            e_score=e_score,
            e_unique_ngrams=n_used,
            n_train=corpus.n_train,
            n_token_mean=sum(token_counts) / len(token_counts),
        )

    @app.post("/analyze/rank", response_model=schemas.RankResponse)
    def analyze_rank(request: schemas.RankRequest) -> schemas.RankResponse:
        try:
            matrix = ana.FeatureMatrix(pair_ids=request.pair_ids,
                                       columns=request.columns,
                                       target=request.reported)
            ranking = ana.rank_features(matrix)
        except ana.AnalysisError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return schemas.RankResponse(ranking=[
            schemas.RankedFeature(feature=name, r2=r2, strength=label)
            for name, r2, label in ranking
        ])

    @app.post("/analyze/outliers", response_model=schemas.OutlierResponse)
    def analyze_outliers(request: schemas.OutlierRequest) -> schemas.OutlierResponse:
        band = ana.ReferenceBand()
        try:
            flags = ana.flag_outliers(request.n_train, request.reported,
                                      r_score=request.r_score, f_score=request.f_score,
                                      band=band, k=request.k, metric=request.metric)
            mean, std = band.interpolate(request.n_train, metric=request.metric)
        except ana.AnalysisError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return schemas.OutlierResponse(flags=flags, band_mean=mean, band_std=std)

    return app
