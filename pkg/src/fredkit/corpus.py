"""Parallel corpus loading and the dataset manifest that drives a scoring run.

Bitext files are UTF-8, one segment per line (LF or CRLF).  Tab characters
are allowed inside a segment.  Empty lines are errors rather than skipped,
because silently dropping lines desynchronizes the two sides of a bitext.
Input text is taken as-is (no Unicode normalization) unless a manifest
entry requests NFC, so that character counts match the user's files.

Manifests are TOML files with one ``[[entry]]`` table per language pair;
see :class:`ManifestEntry` for the recognized keys.
"""

from __future__ import annotations

import math
import sys
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .tokenizers import CHAR_POLICIES, SCHEMES

DIRECTIONS = ("into-high", "into-low")
EXPOSURE_SIDES = ("source", "target")


class CorpusError(ValueError):
    """Raised for unreadable or malformed bitext files."""


class ManifestError(ValueError):
    """Raised for malformed dataset manifests."""


@dataclass(frozen=True)
class ParallelCorpus:
    """An immutable train/test bitext for one language pair."""

    pair_id: str
    src_lang: str
    tgt_lang: str
    train: tuple[tuple[str, str], ...]
    test: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.train or not self.test:
            raise CorpusError(f"{self.pair_id or 'corpus'}: train and test must be non-empty")

    @property
    def n_train(self) -> int:
        return len(self.train)

    @property
    def n_test(self) -> int:
        return len(self.test)


def _read_side(path: str | Path) -> list[str]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = data[:exc.start].count(b"\n") + 1
        raise CorpusError(f"{path}: invalid UTF-8 at line {line_no}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    cleaned = []
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        if line == "":
            raise CorpusError(f"{path}: empty line at line {i}")
        cleaned.append(line)
    if not cleaned:
        raise CorpusError(f"{path}: file has no lines")
    return cleaned


def _read_split(src_path: str | Path, tgt_path: str | Path, nfc: bool) -> tuple[tuple[str, str], ...]:
    src = _read_side(src_path)
    tgt = _read_side(tgt_path)
    if len(src) != len(tgt):
        raise CorpusError(f"misaligned bitext: {src_path} has {len(src)} lines, "
                          f"{tgt_path} has {len(tgt)} lines")
    if nfc:
        src = [unicodedata.normalize("NFC", s) for s in src]
        tgt = [unicodedata.normalize("NFC", s) for s in tgt]
    return tuple(zip(src, tgt))


def load_parallel_corpus(src_train: str | Path, tgt_train: str | Path,
                         src_test: str | Path, tgt_test: str | Path,
                         pair_id: str = "", src_lang: str = "", tgt_lang: str = "",
                         nfc: bool = False) -> ParallelCorpus:
    """Load four line-aligned files into a :class:`ParallelCorpus`.

    Line order is preserved (argmax tie-breaking depends on it).
    """
    return ParallelCorpus(
        pair_id=pair_id,
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        train=_read_split(src_train, tgt_train, nfc),
        test=_read_split(src_test, tgt_test, nfc),
    )


def write_parallel_corpus(corpus: ParallelCorpus,
                          src_train: str | Path, tgt_train: str | Path,
                          src_test: str | Path, tgt_test: str | Path) -> None:
    """Write the corpus back to four line-aligned files (round-trips exactly)."""
    for path, lines in (
        (src_train, [s for s, _ in corpus.train]),
        (tgt_train, [t for _, t in corpus.train]),
        (src_test, [s for s, _ in corpus.test]),
        (tgt_test, [t for _, t in corpus.test]),
    ):
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass
class ManifestEntry:
    """One language pair of a scoring run.

    TOML keys: ``pair_id``, ``src_train_path``, ``tgt_train_path``,
    ``src_test_path``, ``tgt_test_path``, ``direction``,
    ``tokenizer_policy_src``, ``tokenizer_policy_tgt``; optional
    ``char_policy_src``/``char_policy_tgt`` (default ``latin_chars``),
    ``subword_vocab_path``, ``exposure_side`` (default ``target``),
    ``nfc`` (default false) and an ``external_scores`` table of numbers.
    """

    pair_id: str
    src_train_path: Path
    tgt_train_path: Path
    src_test_path: Path
    tgt_test_path: Path
    direction: str = "into-high"
    tokenizer_policy_src: str = "ws13a"
    tokenizer_policy_tgt: str = "ws13a"
    char_policy_src: str = "latin_chars"
    char_policy_tgt: str = "latin_chars"
    subword_vocab_path: Path | None = None
    exposure_side: str = "target"
    nfc: bool = False
    external_scores: dict[str, float] = field(default_factory=dict)

    @property
    def src_lang(self) -> str:
        return self.pair_id.split("-", 1)[0] if "-" in self.pair_id else ""

    @property
    def tgt_lang(self) -> str:
        return self.pair_id.split("-", 1)[1] if "-" in self.pair_id else ""

    def load_corpus(self) -> ParallelCorpus:
        return load_parallel_corpus(
            self.src_train_path, self.tgt_train_path,
            self.src_test_path, self.tgt_test_path,
            pair_id=self.pair_id, src_lang=self.src_lang, tgt_lang=self.tgt_lang,
            nfc=self.nfc)


@dataclass
class DatasetManifest:
    """A validated list of manifest entries with unique pair ids."""

    entries: list[ManifestEntry]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


_PATH_KEYS = ("src_train_path", "tgt_train_path", "src_test_path", "tgt_test_path")


def _parse_entry(raw: dict, base: Path, position: int) -> ManifestEntry:
    if "pair_id" not in raw:
        raise ManifestError(f"entry #{position}: missing pair_id")
    pair_id = str(raw["pair_id"])

    def fail(msg: str) -> ManifestError:
        return ManifestError(f"entry {pair_id!r}: {msg}")

    paths = {}
    for key in _PATH_KEYS:
        if key not in raw:
            raise fail(f"missing {key}")
        paths[key] = (base / str(raw[key])).resolve()
        if not paths[key].is_file():
            raise fail(f"{key} does not exist: {paths[key]}")

    direction = str(raw.get("direction", "into-high"))
    if direction not in DIRECTIONS:
        raise fail(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")

    policies = {}
    for key in ("tokenizer_policy_src", "tokenizer_policy_tgt"):
        policies[key] = str(raw.get(key, "ws13a"))
        if policies[key] not in SCHEMES:
            raise fail(f"unknown tokenizer policy {policies[key]!r}; expected one of {SCHEMES}")
    char_policies = {}
    for key in ("char_policy_src", "char_policy_tgt"):
        char_policies[key] = str(raw.get(key, "latin_chars"))
        if char_policies[key] not in CHAR_POLICIES:
            raise fail(f"unknown char policy {char_policies[key]!r}; expected one of {CHAR_POLICIES}")

    vocab_path = None
    if "subword_vocab_path" in raw:
        vocab_path = (base / str(raw["subword_vocab_path"])).resolve()
        if not vocab_path.is_file():
            raise fail(f"subword_vocab_path does not exist: {vocab_path}")
    if vocab_path is None and "subword" in policies.values():
        raise fail("tokenizer policy 'subword' requires subword_vocab_path")

    exposure_side = str(raw.get("exposure_side", "target"))
    if exposure_side not in EXPOSURE_SIDES:
        raise fail(f"unknown exposure_side {exposure_side!r}; expected one of {EXPOSURE_SIDES}")

    external_scores: dict[str, float] = {}
    for name, value in dict(raw.get("external_scores", {})).items():
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise fail(f"external score {name!r} is not a number") from None
        if not math.isfinite(value):
            raise fail(f"external score {name!r} is not finite")
        external_scores[str(name)] = value

    return ManifestEntry(
        pair_id=pair_id,
        direction=direction,
        tokenizer_policy_src=policies["tokenizer_policy_src"],
        tokenizer_policy_tgt=policies["tokenizer_policy_tgt"],
        char_policy_src=char_policies["char_policy_src"],
        char_policy_tgt=char_policies["char_policy_tgt"],
        subword_vocab_path=vocab_path,
        exposure_side=exposure_side,
        nfc=bool(raw.get("nfc", False)),
        external_scores=external_scores,
        **paths,
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a TOML manifest; relative paths resolve against
    the manifest's directory."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = _toml.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    except _toml.TOMLDecodeError as exc:
        raise ManifestError(f"{path}: invalid TOML: {exc}") from None

    raw_entries = doc.get("entry", [])
    if not isinstance(raw_entries, list) or not raw_entries:
        raise ManifestError(f"{path}: manifest has no [[entry]] tables")

    base = path.resolve().parent
    entries = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_entries, start=1):
        entry = _parse_entry(raw, base, i)
        if entry.pair_id in seen:
            raise ManifestError(f"duplicate pair_id {entry.pair_id!r}")
        seen.add(entry.pair_id)
        entries.append(entry)
    return DatasetManifest(entries)
