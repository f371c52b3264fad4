"""Univariate correlation analysis and outlier flagging.

The feature matrix holds one row per language pair with the metric columns
(``n_train``, ``n_token``, ``f_score``, ``r_score``, ``d_score``,
``e_score``, plus any external columns such as ``pbsmt``) and a required
``reported`` target column.  Missing feature cells are allowed and excluded
pairwise.

Outliers are flagged against an embedded reference band: the mean and
standard deviation of five high-resource baselines trained at capped sizes
(1k/10k/100k/1M sentences), interpolated log-linearly in training size.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class AnalysisError(ValueError):
    """Raised for unusable feature matrices or analysis inputs."""


# Strength labels for ranked features, by R-squared threshold.
STRENGTH_LABELS = (
    (0.5, "Strongest"),
    (0.3, "Moderate"),
    (0.2, "Low-Moderate"),
    (0.1, "Low"),
    (0.01, "Negligible"),
)

#: Mean retrieval-proxy BLEU of the high-resource baselines at 10k sentences.
BASELINE_R_BLEU = 3.24

#: Fertility at or above this value flags a tokenization failure.
HIGH_F_THRESHOLD = 0.9


@dataclass(frozen=True)
class ReferenceBand:
    """Mean/std BLEU and chrF of capped high-resource baselines by size."""

    sizes: tuple[int, ...] = (1_000, 10_000, 100_000, 1_000_000)
    bleu_mean: tuple[float, ...] = (4.91, 10.65, 16.46, 20.12)
    bleu_std: tuple[float, ...] = (2.25, 4.93, 7.50, 10.19)
    chrf_mean: tuple[float, ...] = (23.65, 34.73, 43.36, 49.01)
    chrf_std: tuple[float, ...] = (5.50, 5.00, 4.54, 4.11)

    def __post_init__(self) -> None:
        n = len(self.sizes)
        if any(len(seq) != n for seq in (self.bleu_mean, self.bleu_std,
                                         self.chrf_mean, self.chrf_std)):
            raise AnalysisError("band arrays must all have the same length")
        if list(self.sizes) != sorted(set(self.sizes)) or n < 2:
            raise AnalysisError("band sizes must be strictly increasing, with at least two anchors")
        if any(s < 0 for s in self.bleu_std + self.chrf_std):
            raise AnalysisError("band standard deviations must be non-negative")

    @classmethod
    def from_json(cls, path: str | Path) -> "ReferenceBand":
        """Load a user-supplied band of the same shape as the embedded one."""
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            return cls(
                sizes=tuple(int(s) for s in doc["sizes"]),
                bleu_mean=tuple(float(v) for v in doc["bleu"]["mean"]),
                bleu_std=tuple(float(v) for v in doc["bleu"]["std"]),
                chrf_mean=tuple(float(v) for v in doc["chrf"]["mean"]),
                chrf_std=tuple(float(v) for v in doc["chrf"]["std"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AnalysisError(f"{path}: malformed band file: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "bleu": {"mean": list(self.bleu_mean), "std": list(self.bleu_std)},
            "chrf": {"mean": list(self.chrf_mean), "std": list(self.chrf_std)},
        }

    def interpolate(self, n_train: int, metric: str = "bleu") -> tuple[float, float]:
        """Band (mean, std) at ``n_train``, log-linear between anchor sizes;
        values outside the anchor range clamp to the nearest anchor with a
        warning."""
        if n_train <= 0:
            raise AnalysisError("n_train must be positive")
        if metric == "bleu":
            means, stds = self.bleu_mean, self.bleu_std
        elif metric == "chrf":
            means, stds = self.chrf_mean, self.chrf_std
        else:
            raise AnalysisError(f"unknown band metric {metric!r}; expected 'bleu' or 'chrf'")
        sizes = self.sizes
        if n_train <= sizes[0]:
            if n_train < sizes[0]:
                log.warning("n_train=%d below the smallest band anchor %d; clamping",
                            n_train, sizes[0])
            return means[0], stds[0]
        if n_train >= sizes[-1]:
            if n_train > sizes[-1]:
                log.warning("n_train=%d above the largest band anchor %d; clamping",
                            n_train, sizes[-1])
            return means[-1], stds[-1]
        hi = next(i for i, s in enumerate(sizes) if s >= n_train)
        lo = hi - 1
        t = ((math.log(n_train) - math.log(sizes[lo]))
             / (math.log(sizes[hi]) - math.log(sizes[lo])))
        mean = means[lo] + t * (means[hi] - means[lo])
        std = stds[lo] + t * (stds[hi] - stds[lo])
        return mean, std


FEATURE_COLUMNS = ("n_train", "n_token", "f_score", "r_score", "d_score", "e_score")
TARGET_COLUMN = "reported"


@dataclass
class FeatureMatrix:
    """Per-language-pair features plus the reported-score target."""

    pair_ids: list[str]
    columns: dict[str, list[float | None]]
    target: list[float]

    def __post_init__(self) -> None:
        n = len(self.pair_ids)
        if len(self.target) != n:
            raise AnalysisError("target length does not match row count")
        for name, values in self.columns.items():
            if len(values) != n:
                raise AnalysisError(f"column {name!r} length does not match row count")
        for i, value in enumerate(self.target):
            if value is None or not math.isfinite(value):
                raise AnalysisError(f"row {self.pair_ids[i]!r}: missing or non-finite target")

    def __len__(self) -> int:
        return len(self.pair_ids)

    @property
    def feature_names(self) -> list[str]:
        return list(self.columns)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "FeatureMatrix":
        """Read a TSV with a header row; empty cells are missing values.
        Requires a ``pair_id`` column and a ``reported`` target column."""
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise AnalysisError(f"{path}: empty matrix file")
        header = lines[0].split("\t")
        if "pair_id" not in header or TARGET_COLUMN not in header:
            raise AnalysisError(f"{path}: header must contain 'pair_id' and '{TARGET_COLUMN}' "
                                f"columns, got {header}")
        id_col = header.index("pair_id")
        target_col = header.index(TARGET_COLUMN)
        feature_cols = [(i, name) for i, name in enumerate(header)
                        if i not in (id_col, target_col)]
        pair_ids: list[str] = []
        target: list[float] = []
        columns: dict[str, list[float | None]] = {name: [] for _, name in feature_cols}
        for row_no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != len(header):
                raise AnalysisError(f"{path}:{row_no}: expected {len(header)} columns, "
                                    f"got {len(cells)}")
            pair_ids.append(cells[id_col])
            try:
                target.append(float(cells[target_col]))
            except ValueError:
                raise AnalysisError(f"{path}:{row_no}: bad target value "
                                    f"{cells[target_col]!r}") from None
            for i, name in feature_cols:
                cell = cells[i].strip()
                if not cell:
                    columns[name].append(None)
                    continue
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    raise AnalysisError(f"{path}:{row_no}: bad value {cell!r} "
                                        f"in column {name!r}") from None
        if not pair_ids:
            raise AnalysisError(f"{path}: matrix has no rows")
        return cls(pair_ids, columns, target)

    def to_tsv(self, path: str | Path) -> None:
        names = self.feature_names
        out = ["\t".join(["pair_id"] + names + [TARGET_COLUMN])]
        for i, pair_id in enumerate(self.pair_ids):
            cells = [pair_id]
            for name in names:
                value = self.columns[name][i]
                cells.append("" if value is None else repr(float(value)))
            cells.append(repr(float(self.target[i])))
            out.append("\t".join(cells))
        Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")

    def usable_rows(self, feature: str) -> tuple[np.ndarray, np.ndarray]:
        if feature not in self.columns:
            raise AnalysisError(f"unknown feature column {feature!r}")
        pairs = []
        for value, target in zip(self.columns[feature], self.target):
            if value is not None and math.isfinite(value):
                pairs.append((value, target))
        # canonical order makes the floating-point result independent of
        # the row order of the matrix
        pairs.sort()
        xs = np.asarray([p[0] for p in pairs], dtype=float)
        ys = np.asarray([p[1] for p in pairs], dtype=float)
        return xs, ys


def univariate_r2(matrix: FeatureMatrix, feature: str) -> float:
    """Coefficient of determination of OLS (with intercept) of the target
    on one feature.  A constant feature scores 0 by definition."""
    x, y = matrix.usable_rows(feature)
    if len(x) < 3:
        raise AnalysisError(f"feature {feature!r} has only {len(x)} usable rows; need at least 3")
    if np.ptp(x) == 0.0:
        return 0.0
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coef
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 0.0
    return max(0.0, min(1.0, 1.0 - ss_res / ss_tot))


def strength_label(r2: float) -> str:
    for threshold, label in STRENGTH_LABELS:
        if r2 >= threshold:
            return label
    return "None"


def rank_features(matrix: FeatureMatrix,
                  features: list[str] | None = None) -> list[tuple[str, float, str]]:
    """Features sorted by descending univariate R-squared, with strength
    labels.  ``features`` defaults to every feature column."""
    names = features if features is not None else matrix.feature_names
    ranked = [(name, univariate_r2(matrix, name)) for name in names]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return [(name, r2, strength_label(r2)) for name, r2 in ranked]


def flag_outliers(n_train: int, reported: float,
                  r_score: float | None = None,
                  f_score: float | None = None,
                  band: ReferenceBand | None = None,
                  k: float = 1.0,
                  metric: str = "bleu",
                  r_ref_mult: float = 2.0,
                  r_baseline: float = BASELINE_R_BLEU) -> list[str]:
    """Flags for one language pair against the reference band.

    ``OVER``/``UNDER`` when the reported score leaves the band's
    ``mean +/- k*std`` at the row's training size; ``HIGH_R`` when the
    retrieval proxy exceeds ``r_ref_mult`` times the baseline average;
    ``HIGH_F`` when fertility reaches the tokenization-failure threshold.
    """
    band = band or ReferenceBand()
    mean, std = band.interpolate(n_train, metric=metric)
    flags = []
    if reported > mean + k * std:
        flags.append("OVER")
    elif reported < mean - k * std:
        flags.append("UNDER")
    if r_score is not None and r_score > r_ref_mult * r_baseline:
        flags.append("HIGH_R")
    if f_score is not None and f_score >= HIGH_F_THRESHOLD:
        flags.append("HIGH_F")
    return flags


@dataclass
class ScatterResult:
    """Plot-ready points with their Pearson correlation (None when undefined)."""

    points: list[tuple[str, float, float]]
    pearson_r: float | None
    excluded: list[str] = field(default_factory=list)


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    return float((xc @ yc) / math.sqrt((xc @ xc) * (yc @ yc)))


def scatter_data(matrix: FeatureMatrix, x: str, y: str,
                 exclude: list[str] | None = None) -> ScatterResult:
    """Paired (x, y) points for plotting, Pearson r alongside.

    ``reported`` may be used as either axis.  Pairs in ``exclude`` are
    dropped before the correlation (and listed in the result).
    """
    exclude_set = set(exclude or [])

    def column(name: str) -> list[float | None]:
        if name == TARGET_COLUMN:
            return list(matrix.target)
        if name not in matrix.columns:
            raise AnalysisError(f"unknown column {name!r}")
        return matrix.columns[name]

    xs_all = column(x)
    ys_all = column(y)
    points = []
    excluded = []
    for pair_id, xv, yv in zip(matrix.pair_ids, xs_all, ys_all):
        if xv is None or yv is None:
            continue
        if pair_id in exclude_set:
            excluded.append(pair_id)
            continue
        points.append((pair_id, float(xv), float(yv)))
    if len(points) < 2:
        raise AnalysisError(f"scatter of {x!r} vs {y!r} has only {len(points)} usable rows; "
                            "need at least 2")
    r = pearson(np.array([p[1] for p in points]), np.array([p[2] for p in points]))
    return ScatterResult(points=points, pearson_r=r, excluded=excluded)
