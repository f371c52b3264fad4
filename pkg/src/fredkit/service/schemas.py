"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    index_loaded: bool
    index_tokens: int | None = None
    vocab_pieces: int | None = None


class SimilarityRequest(BaseModel):
    kind: str = "bleu"
    hyp: str = Field(..., min_length=1)
    ref: str = Field(..., min_length=1)
    tokenizer: str = "ws13a"


class SimilarityResponse(BaseModel):
    kind: str
    score: float


class IndexLoadRequest(BaseModel):
    index_path: str
    vocab_path: str


class IndexLoadResponse(BaseModel):
    index_tokens: int
    vocab_pieces: int
    fingerprint_match: bool


class GramCount(BaseModel):
    gram: str
    ids: list[int]
    count: int


class CountRequest(BaseModel):
    text: str = Field(..., min_length=1)
    n: int = Field(4, ge=1)


class CountResponse(BaseModel):
    grams: list[GramCount]


class ExposureRequest(BaseModel):
    sentences: list[str] = Field(..., min_length=1)
    n: int = Field(4, ge=1)


class ExposureResponse(BaseModel):
    e_score: float
    unique_ngrams: int


class ScoreCorpusRequest(BaseModel):
    """A parallel corpus sent inline for scoring."""

    pair_id: str = "inline"
    train_src: list[str] = Field(..., min_length=1)
    train_tgt: list[str] = Field(..., min_length=1)
    test_src: list[str] = Field(..., min_length=1)
    test_tgt: list[str] = Field(..., min_length=1)
    kinds: list[str] = ["bleu", "chrf", "chrfpp"]
    tokenizer_src: str = "ws13a"
    tokenizer_tgt: str = "ws13a"
    char_policy_src: str = "latin_chars"
    char_policy_tgt: str = "latin_chars"
    exposure_side: str = "target"
    with_exposure: bool = False
    exposure_n: int = Field(4, ge=1)

    @model_validator(mode="after")
    def _aligned(self) -> "ScoreCorpusRequest":
        if len(self.train_src) != len(self.train_tgt):
            raise ValueError(f"misaligned train bitext: {len(self.train_src)} source lines, "
                             f"{len(self.train_tgt)} target lines")
        if len(self.test_src) != len(self.test_tgt):
            raise ValueError(f"misaligned test bitext: {len(self.test_src)} source lines, "
                             f"{len(self.test_tgt)} target lines")
        return self


class ScoreCorpusResponse(BaseModel):
    pair_id: str
    f_score: float
    f_side: str
    r_score: dict[str, float]
    d_score: dict[str, float]
    e_score: float | None = None
    e_unique_ngrams: int | None = None
    n_train: int
    n_token_mean: float


class RankRequest(BaseModel):
    pair_ids: list[str]
    columns: dict[str, list[float | None]]
    reported: list[float]


class RankedFeature(BaseModel):
    feature: str
    r2: float
    strength: str


class RankResponse(BaseModel):
    ranking: list[RankedFeature]


class OutlierRequest(BaseModel):
    n_train: int = Field(..., gt=0)
    reported: float
    r_score: float | None = None
    f_score: float | None = None
    k: float = 1.0
    metric: str = "bleu"


class OutlierResponse(BaseModel):
    flags: list[str]
    band_mean: float
    band_std: float
