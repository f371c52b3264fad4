"""Command-line front end.

Subcommands: ``index build``, ``index count``, ``score``, ``analyze`` and
``serve``.  Exit codes are a stable contract: 0 on success, 1 when some
manifest entries failed (partial result), 2 for usage or input errors.

The default worker count comes from ``FREDKIT_THREADS`` (0 = one worker per
CPU); results are identical for every worker count.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import analysis as ana
from . import reports
from .corpus import CorpusError, ManifestError, load_manifest
from .fred import THREADS_ENV_VAR, exposure, score_pair
from .ngram_index import IndexFormatError, build_index, load_index, save_index
from .simfn import KINDS
from .tokenizers import SubwordVocab, VocabError


@dataclass
class RunConfig:
    """Options of a scoring run, mirrored by the ``score`` command's flags."""

    manifest_path: Path
    output_dir: Path
    threads: int = 0                      # 0 = auto
    kinds: tuple[str, ...] = ("bleu", "chrf", "chrfpp")
    exposure_n: int = 4
    outlier_k: float = 1.0
    formats: tuple[str, ...] = ("tsv", "json", "markdown")
    index_path: Path | None = None

    def __post_init__(self) -> None:
        if self.threads < 0:
            raise ValueError("threads must be >= 0")
        if self.exposure_n < 1:
            raise ValueError("exposure n must be >= 1")
        if not self.formats:
            raise ValueError("at least one report format is required")
        for fmt in self.formats:
            if fmt not in reports.FORMATS:
                raise ValueError(f"unknown report format {fmt!r}; expected one of {reports.FORMATS}")
        for kind in self.kinds:
            if kind not in KINDS:
                raise ValueError(f"unknown similarity kind {kind!r}; expected one of {KINDS}")
        if not self.kinds:
            raise ValueError("at least one similarity kind is required")


_INPUT_ERRORS = (CorpusError, ManifestError, IndexFormatError, VocabError,
                 ana.AnalysisError, ValueError, OSError)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _split_csv(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


@click.group()
@click.version_option(package_name="fredkit")
def main() -> None:
    """Corpus difficulty metrics for machine translation benchmarks."""


@main.group()
def index() -> None:
    """Build and query the n-gram count index."""


@index.command("build")
@click.argument("corpus_files", nargs=-1, required=True,
                type=click.Path(path_type=Path))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(path_type=Path),
              help="Subword vocabulary file used for gram separation.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path),
              help="Output index file.")
def index_build(corpus_files: tuple[Path, ...], vocab_path: Path, out_path: Path) -> None:
    """Tokenize CORPUS_FILES and write a suffix-array count index."""
    if not vocab_path.is_file():
        _fail(f"vocab not found: {vocab_path}")
    try:
        vocab = SubwordVocab.load(vocab_path)
        idx = build_index(corpus_files, vocab)
        save_index(idx, out_path)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"indexed {len(idx)} tokens -> {out_path}")


@index.command("count")
@click.option("--index", "index_path", required=True, type=click.Path(path_type=Path))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(path_type=Path))
@click.option("--n", "n", default=4, show_default=True, help="n-gram size.")
@click.option("--server", "server_url", default=None,
              help="Query a running fredkit service instead of loading the index locally.")
@click.argument("text")
def index_count(index_path: Path, vocab_path: Path, n: int, server_url: str | None,
                text: str) -> None:
    """Print the index count of every token N-gram of TEXT (gram TAB count)."""
    if not text.strip():
        _fail("empty query")
    if server_url is not None:
        import httpx

        try:
            response = httpx.post(f"{server_url.rstrip('/')}/index/count",
                                  json={"text": text, "n": n}, timeout=60.0)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            _fail(f"server request failed: {exc}")
        for gram in response.json()["grams"]:
            click.echo(f"{gram['gram']}\t{gram['count']}")
        return
    try:
        vocab = SubwordVocab.load(vocab_path)
        idx = load_index(index_path)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    idx.check_vocab(vocab)
    ids = vocab.segment(text)
    if len(ids) < n:
        _fail(f"query has only {len(ids)} tokens; need at least {n}")
    for i in range(len(ids) - n + 1):
        gram = ids[i:i + n]
        label = " ".join(vocab.pieces[t] for t in gram)
        click.echo(f"{label}\t{idx.count(gram)}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "output_dir", required=True, type=click.Path(path_type=Path))
@click.option("--kinds", default="bleu,chrf,chrfpp", show_default=True,
              help="Comma-separated similarity kinds.")
@click.option("--threads", default=0, show_default=True, envvar=THREADS_ENV_VAR,
              help="Worker count (0 = auto).")
@click.option("--exposure-n", default=4, show_default=True, help="n-gram size for exposure.")
@click.option("--formats", default="tsv,json,markdown", show_default=True,
              help="Comma-separated report formats.")
@click.option("--index", "index_path", default=None, type=click.Path(path_type=Path),
              help="n-gram index for exposure scores.")
def score(manifest_path: Path, output_dir: Path, kinds: str, threads: int,
          exposure_n: int, formats: str, index_path: Path | None) -> None:
    """Score every manifest entry and write reports to the output directory."""
    try:
        config = RunConfig(
            manifest_path=manifest_path,
            output_dir=output_dir,
            threads=threads,
            kinds=_split_csv(kinds),
            exposure_n=exposure_n,
            formats=_split_csv(formats),
            index_path=index_path,
        )
        manifest = load_manifest(config.manifest_path)
        idx = load_index(config.index_path) if config.index_path else None
    except _INPUT_ERRORS as exc:
        _fail(str(exc))

    config.output_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failures: dict[str, str] = {}
    for entry in manifest:
        try:
            scores = score_pair(entry, kinds=config.kinds, index=idx,
                                exposure_n=config.exposure_n,
                                workers=config.threads or None)
        except _INPUT_ERRORS as exc:
            failures[entry.pair_id] = str(exc)
            click.echo(f"warning: skipped {entry.pair_id}: {exc}", err=True)
            continue
        rows.append((scores, entry.external_scores))

    if "tsv" in config.formats:
        reports.write_scores_tsv(config.output_dir / "scores.tsv", rows, config.kinds)
        reports.write_features_tsv(config.output_dir / "features.tsv", rows, config.kinds[0])
    if "json" in config.formats:
        reports.write_scores_json(config.output_dir / "scores.json", rows,
                                  config.kinds, failures)
    if "markdown" in config.formats:
        reports.write_scores_markdown(config.output_dir / "scores.md", rows, config.kinds)

    click.echo(f"scored {len(rows)}/{len(manifest)} entries -> {config.output_dir}")
    if failures:
        sys.exit(1)


@main.command()
@click.option("--matrix", "matrix_path", required=True, type=click.Path(path_type=Path),
              help="Feature matrix TSV (e.g. features.tsv from the score command).")
@click.option("--out", "output_dir", required=True, type=click.Path(path_type=Path))
@click.option("--k", "outlier_k", default=1.0, show_default=True,
              help="Band width multiplier for OVER/UNDER flags.")
@click.option("--metric", default="bleu", show_default=True,
              type=click.Choice(["bleu", "chrf"]), help="Reference band metric.")
@click.option("--band", "band_path", default=None, type=click.Path(path_type=Path),
              help="JSON band file overriding the embedded baselines.")
@click.option("--exclude", default="", help="Comma-separated pair_ids to drop from scatters.")
def analyze(matrix_path: Path, output_dir: Path, outlier_k: float, metric: str,
            band_path: Path | None, exclude: str) -> None:
    """Correlation analysis, outlier flags and plot-ready scatter files."""
    try:
        matrix = ana.FeatureMatrix.from_tsv(matrix_path)
        band = ana.ReferenceBand.from_json(band_path) if band_path else ana.ReferenceBand()
        ranked = ana.rank_features(matrix)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))

    output_dir.mkdir(parents=True, exist_ok=True)
    excludes = list(_split_csv(exclude))

    r2_lines = ["feature\tr2\tstrength"]
    r2_lines += [f"{name}\t{r2:.4f}\t{label}" for name, r2, label in ranked]
    (output_dir / "r2_table.tsv").write_text("\n".join(r2_lines) + "\n", encoding="utf-8")

    outlier_lines = ["pair_id\tn_train\treported\tflags"]
    outlier_rows = {}
    for i, pair_id in enumerate(matrix.pair_ids):
        n_train = matrix.columns.get("n_train", [None] * len(matrix))[i]
        if n_train is None:
            continue
        r_value = matrix.columns.get("r_score", [None] * len(matrix))[i]
        f_value = matrix.columns.get("f_score", [None] * len(matrix))[i]
        flags = ana.flag_outliers(int(n_train), matrix.target[i], r_score=r_value,
                                  f_score=f_value, band=band, k=outlier_k, metric=metric)
        outlier_rows[pair_id] = flags
        outlier_lines.append(f"{pair_id}\t{int(n_train)}\t{matrix.target[i]:.2f}\t"
                             + (",".join(flags) if flags else "-"))
    (output_dir / "outliers.tsv").write_text("\n".join(outlier_lines) + "\n", encoding="utf-8")

    summary: dict = {
        "r2": [{"feature": n, "r2": v, "strength": s} for n, v, s in ranked],
        "outlier_k": outlier_k,
        "band_metric": metric,
        "outliers": outlier_rows,
        "scatters": {},
    }

    def write_scatter(name: str, x: str, y: str) -> None:
        try:
            result = ana.scatter_data(matrix, x, y, exclude=excludes)
        except ana.AnalysisError:
            return
        with open(output_dir / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pair_id", x, y])
            writer.writerows(result.points)
        summary["scatters"][name] = {
            "x": x, "y": y,
            "pearson_r": result.pearson_r,
            "points": len(result.points),
            "excluded": result.excluded,
        }

    write_scatter("scatter_size_vs_reported", "n_train", "reported")
    if "pbsmt" in matrix.columns and "r_score" in matrix.columns:
        write_scatter("scatter_pbsmt_vs_r", "pbsmt", "r_score")

    (output_dir / "band.json").write_text(
        json.dumps(band.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (output_dir / "analysis.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"analysis written -> {output_dir}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--index", "index_path", default=None, type=click.Path(path_type=Path))
@click.option("--vocab", "vocab_path", default=None, type=click.Path(path_type=Path))
def serve(host: str, port: int, index_path: Path | None, vocab_path: Path | None) -> None:
    """Run the HTTP service (long-lived index, multi-client scoring)."""
    import uvicorn

    from .service.app import create_app

    try:
        app = create_app(index_path=index_path, vocab_path=vocab_path)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
