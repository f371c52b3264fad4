"""Report emission for scoring runs: TSV, JSON and Markdown.

All writers are byte-deterministic for fixed inputs: row order follows the
manifest, numbers are formatted with fixed rules (two decimals for scores;
scientific notation for exposure values below 0.01), and no timestamps or
environment details are embedded.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .fred import FredScores

FORMATS = ("tsv", "json", "markdown")


def fmt_score(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def fmt_exposure(value: float | None) -> str:
    if value is None:
        return ""
    if value != 0.0 and abs(value) < 0.01:
        return f"{value:.2e}"
    return f"{value:.2f}"


def _kind_columns(kinds: Sequence[str]) -> list[str]:
    cols = []
    for kind in kinds:
        cols.append(f"d_{kind}")
        cols.append(f"r_{kind}")
    return cols


def _external_columns(rows: list[tuple[FredScores, dict[str, float]]]) -> list[str]:
    names: list[str] = []
    for _, external in rows:
        for name in external:
            if name not in names:
                names.append(name)
    return names


def _row_cells(scores: FredScores, external: dict[str, float],
               kinds: Sequence[str], external_names: Sequence[str]) -> list[str]:
    cells = [
        scores.pair_id,
        str(scores.n_train),
        fmt_score(scores.n_token_mean),
        fmt_score(scores.f_score),
        scores.side_used,
        fmt_exposure(scores.e_score),
    ]
    for kind in kinds:
        cells.append(fmt_score(scores.d_score.get(kind)))
        cells.append(fmt_score(scores.r_score.get(kind)))
    for name in external_names:
        value = external.get(name)
        cells.append(fmt_score(value))
    return cells


def _header(kinds: Sequence[str], external_names: Sequence[str]) -> list[str]:
    return (["pair_id", "n_train", "n_token", "f_score", "f_side", "e_score"]
            + _kind_columns(kinds) + list(external_names))


def write_scores_tsv(path: Path, rows: list[tuple[FredScores, dict[str, float]]],
                     kinds: Sequence[str]) -> None:
    external_names = _external_columns(rows)
    lines = ["\t".join(_header(kinds, external_names))]
    footnotes = []
    for scores, external in rows:
        lines.append("\t".join(_row_cells(scores, external, kinds, external_names)))
        if scores.e_score is None:
            footnotes.append(f"# {scores.pair_id}: e_score not computed (no index or vocabulary)")
    lines.extend(footnotes)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_features_tsv(path: Path, rows: list[tuple[FredScores, dict[str, float]]],
                       primary_kind: str) -> None:
    """Full-precision feature matrix ready for the analyze command; the
    canonical r/d columns carry the primary similarity kind."""
    external_names = _external_columns(rows)
    header = ["pair_id", "n_train", "n_token", "f_score", "r_score", "d_score", "e_score"]
    header += [n for n in external_names if n != "reported"]
    header += ["reported"]
    lines = ["\t".join(header)]
    for scores, external in rows:
        if "reported" not in external:
            continue
        cells = [
            scores.pair_id,
            str(scores.n_train),
            repr(scores.n_token_mean),
            repr(scores.f_score),
            repr(scores.r_score[primary_kind]),
            repr(scores.d_score[primary_kind]),
            "" if scores.e_score is None else repr(scores.e_score),
        ]
        for name in external_names:
            if name == "reported":
                continue
            value = external.get(name)
            cells.append("" if value is None else repr(value))
        cells.append(repr(external["reported"]))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_scores_json(path: Path, rows: list[tuple[FredScores, dict[str, float]]],
                      kinds: Sequence[str], failures: dict[str, str]) -> None:
    doc = {
        "kinds": list(kinds),
        "rows": [
            {
                "pair_id": s.pair_id,
                "n_train": s.n_train,
                "n_token_mean": s.n_token_mean,
                "f_score": s.f_score,
                "f_side": s.side_used,
                "r_score": s.r_score,
                "d_score": s.d_score,
                "e_score": s.e_score,
                "e_unique_ngrams": s.n_used,
                "external_scores": external,
                "notes": s.notes,
            }
            for s, external in rows
        ],
        "failures": failures,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def write_scores_markdown(path: Path, rows: list[tuple[FredScores, dict[str, float]]],
                          kinds: Sequence[str]) -> None:
    external_names = _external_columns(rows)
    header = _header(kinds, external_names)
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(" --- " for _ in header) + "|"]
    footnotes = []
    for scores, external in rows:
        cells = _row_cells(scores, external, kinds, external_names)
        lines.append("| " + " | ".join(cell or "--" for cell in cells) + " |")
        if scores.e_score is None:
            footnotes.append(f"- `{scores.pair_id}`: e_score not computed "
                             "(no index or vocabulary supplied)")
    if footnotes:
        lines.append("")
        lines.extend(footnotes)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
