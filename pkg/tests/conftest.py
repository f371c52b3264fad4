from __future__ import annotations

from pathlib import Path

import pytest

from fredkit.tokenizers import SubwordVocab

DATA_DIR = Path(__file__).parent / "data"


def write_lines(path: Path, lines: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def write_bitext(root: Path, name: str, train: list[tuple[str, str]],
                 test: list[tuple[str, str]]) -> dict[str, Path]:
    """Write four line-aligned files under ``root`` and return their paths."""
    paths = {
        "src_train": write_lines(root / f"{name}.train.src", [s for s, _ in train]),
        "tgt_train": write_lines(root / f"{name}.train.tgt", [t for _, t in train]),
        "src_test": write_lines(root / f"{name}.test.src", [s for s, _ in test]),
        "tgt_test": write_lines(root / f"{name}.test.tgt", [t for _, t in test]),
    }
    return paths


def write_vocab(path: Path, pieces: list[str], unk_id: int = 0) -> Path:
    lines = [f"#unk={unk_id}"] + pieces
    return write_lines(path, lines)


@pytest.fixture
def letters_vocab(tmp_path: Path) -> SubwordVocab:
    """Word-marker pieces for a..j plus bare letters and an unk piece."""
    pieces = ["<unk>"] + [f"▁{c}" for c in "abcdefghij"] + list("abcdefghij")
    path = write_vocab(tmp_path / "letters.vocab", pieces, unk_id=0)
    return SubwordVocab.load(path)
