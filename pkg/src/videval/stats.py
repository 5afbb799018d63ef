"""Rank correlation, inter-annotator agreement, and baseline statistics.

Degenerate inputs (constant vectors, zero expected disagreement) raise
DegenerateInput rather than returning 0: zero is a meaningful correlation
and must stay distinguishable from "undefined".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from videval.errors import DegenerateInput, NonIntegerScore, SchemaError
from videval.model import ASPECTS, PreferencePair, RatingLabel, Verdict, VideoRecord

CATEGORIES = tuple(l.value for l in RatingLabel)


@dataclass(frozen=True)
class LabelMatrix:
    """Items x raters grid of 1-4 labels; None marks a missing rating."""

    rows: tuple[tuple[int | None, ...], ...]

    def __post_init__(self):
        if len(self.rows) < 1:
            raise SchemaError("label matrix needs at least one item")
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise SchemaError("all items must have the same number of rater slots")
        if widths.pop() < 2:
            raise SchemaError("label matrix needs at least two raters")
        for row in self.rows:
            for v in row:
                if v is not None and v not in CATEGORIES:
                    raise SchemaError(f"label {v!r} outside categories {CATEGORIES}")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int | None]]) -> "LabelMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n_items(self) -> int:
        return len(self.rows)

    @property
    def n_raters(self) -> int:
        return len(self.rows[0])

    def present(self, item: int) -> list[int]:
        return [v for v in self.rows[item] if v is not None]

    @property
    def complete(self) -> bool:
        return all(v is not None for row in self.rows for v in row)


def _avg_ranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); ties get the mean of the positions they span."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("spearman_rho needs two equal-length 1-D sequences")
    if len(xs) < 2:
        raise ValueError("spearman_rho needs at least two observations")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise DegenerateInput("spearman_rho is undefined for a constant vector")
    rx = _avg_ranks(xs)
    ry = _avg_ranks(ys)
    if np.array_equal(rx, ry):
        return 1.0  # identical rankings: exactly 1 by definition
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    rho = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return max(-1.0, min(1.0, rho))


def fleiss_kappa(m: LabelMatrix) -> float:
    """Fleiss' kappa over a complete items x raters matrix.

    Per-item agreement P_i = (sum_c n_ic^2 - n) / (n (n - 1)); expected
    agreement is the sum of squared pooled category proportions.
    """
    if not m.complete:
        raise ValueError("fleiss_kappa requires a complete matrix (no missing ratings)")
    n = m.n_raters
    counts = np.zeros((m.n_items, len(CATEGORIES)), dtype=np.float64)
    for i, row in enumerate(m.rows):
        for v in row:
            counts[i, CATEGORIES.index(v)] += 1
    p_item = (np.sum(counts * counts, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_item))
    p_cat = counts.sum(axis=0) / counts.sum()
    pe = float(np.sum(p_cat * p_cat))
    if pe == 1.0:
        raise DegenerateInput("fleiss_kappa undefined: all ratings fall in one category")
    return (p_bar - pe) / (1.0 - pe)


def _ordinal_distance(c: int, k: int, marginals: Mapping[int, float]) -> float:
    if c > k:
        c, k = k, c
    span = sum(marginals.get(g, 0.0) for g in range(c, k + 1))
    return (span - (marginals.get(c, 0.0) + marginals.get(k, 0.0)) / 2.0) ** 2


def _kripp_distance_fn(level: str, marginals: Mapping[int, float]):
    if level == "nominal":
        return lambda c, k: 0.0 if c == k else 1.0
    if level == "interval":
        return lambda c, k: float((c - k) ** 2)
    if level == "ordinal":
        return lambda c, k: _ordinal_distance(c, k, marginals)
    raise ValueError(f"unknown level {level!r}; expected nominal, ordinal, or interval")


def kripp_alpha(m: LabelMatrix, level: str = "ordinal") -> float:
    """Krippendorff's alpha via the coincidence-matrix formulation.

    Items with fewer than two present ratings contribute nothing.  The
    distance between categories depends on the measurement level: nominal
    (0/1), interval (squared difference), or ordinal (squared
    cumulative-margin distance).
    """
    units = [m.present(i) for i in range(m.n_items)]
    units = [u for u in units if len(u) >= 2]
    if not units or sum(len(u) for u in units) < 2:
        raise DegenerateInput("kripp_alpha needs at least one item with two or more ratings")

    cats = CATEGORIES
    idx = {c: i for i, c in enumerate(cats)}
    o = np.zeros((len(cats), len(cats)), dtype=np.float64)
    for u in units:
        counts = np.zeros(len(cats), dtype=np.float64)
        for v in u:
            counts[idx[v]] += 1
        mu = len(u)
        o += (np.outer(counts, counts) - np.diag(counts)) / (mu - 1)
    marginal_vec = o.sum(axis=1)
    n = float(marginal_vec.sum())
    marginals = {c: float(marginal_vec[idx[c]]) for c in cats}

    dist = _kripp_distance_fn(level, marginals)
    d_o = sum(
        o[idx[c], idx[k]] * dist(c, k) for c in cats for k in cats
    ) / n
    d_e = sum(
        marginals[c] * marginals[k] * dist(c, k) for c in cats for k in cats
    ) / (n * (n - 1.0))
    if d_e == 0.0:
        raise DegenerateInput("kripp_alpha undefined: zero expected disagreement")
    return 1.0 - d_o / d_e


def match_ratio(m: LabelMatrix) -> float:
    """Mean over items of the fraction of rater pairs that match exactly."""
    item_scores = []
    for i in range(m.n_items):
        values = m.present(i)
        r = len(values)
        if r < 2:
            raise DegenerateInput(f"item {i} has fewer than two ratings")
        pairs = r * (r - 1) // 2
        matches = 0
        for a in range(r):
            for b in range(a + 1, r):
                if values[a] == values[b]:
                    matches += 1
        item_scores.append(matches / pairs)
    return sum(item_scores) / len(item_scores)


def predict_verdict(left_score: float, right_score: float, tie_margin: float) -> Verdict:
    diff = left_score - right_score
    if diff > tie_margin:
        return Verdict.LEFT
    if diff < -tie_margin:
        return Verdict.RIGHT
    return Verdict.TIE


def pairwise_accuracy(
    scored_pairs: Sequence[tuple[PreferencePair, float, float]],
    tie_margin: float = 0.0,
) -> float:
    """Percentage of pairs whose predicted verdict matches the human one.

    The side whose predicted score exceeds the other's by more than
    ``tie_margin`` wins; differences within the margin predict a tie.
    """
    if not scored_pairs:
        raise ValueError("pairwise_accuracy needs at least one pair")
    if tie_margin < 0:
        raise ValueError("tie_margin must be >= 0")
    correct = sum(
        1
        for pair, left, right in scored_pairs
        if predict_verdict(left, right, tie_margin) == pair.verdict
    )
    return 100.0 * correct / len(scored_pairs)


def rating_distribution(records: Sequence[VideoRecord]) -> dict[str, dict[int, int]]:
    """Per-aspect histogram of integer labels over a labeled dataset."""
    hist = {aspect: {c: 0 for c in CATEGORIES} for aspect in ASPECTS}
    for rec in records:
        if rec.scores is None:
            raise SchemaError(f"record {rec.id!r} has no scores")
        for aspect, value in rec.scores.as_dict().items():
            if not float(value).is_integer():
                raise NonIntegerScore(f"record {rec.id!r} aspect {aspect!r} has non-integer score {value}")
            hist[aspect][int(value)] += 1
    return hist


def aspect_correlation_matrix(
    records: Sequence[VideoRecord], method: str = "spearman"
) -> np.ndarray:
    """5x5 rank-correlation matrix between aspect columns.

    Unit diagonal; entries touching a constant column are NaN (undefined).
    """
    if method != "spearman":
        raise ValueError(f"unsupported method {method!r}")
    if len(records) < 2:
        raise ValueError("need at least two records")
    columns = {}
    for aspect in ASPECTS:
        col = []
        for rec in records:
            if rec.scores is None:
                raise SchemaError(f"record {rec.id!r} has no scores")
            col.append(rec.scores.get(aspect))
        columns[aspect] = col
    out = np.eye(len(ASPECTS))
    for i, ai in enumerate(ASPECTS):
        for j in range(i + 1, len(ASPECTS)):
            try:
                rho = spearman_rho(columns[ai], columns[ASPECTS[j]])
            except DegenerateInput:
                rho = math.nan
            out[i, j] = out[j, i] = rho
    return out


@dataclass(frozen=True)
class BaselineEstimate:
    mean: float
    stderr: float
    trials: int


def random_baseline(
    reference,
    statistic: str,
    seed: int,
    trials: int,
    tie_margin: float = 0.0,
):
    """Seeded random-guessing baseline for a statistic.

    statistic="spearman": ``reference`` is a mapping aspect -> label column;
    each trial draws uniform labels from {1,2,3,4} per item and correlates
    them against the reference column.  Degenerate draws are skipped.

    statistic="pairwise_accuracy": ``reference`` is a sequence of Verdicts;
    each trial predicts uniformly among the three verdicts.

    Returns per-aspect (or overall) BaselineEstimate values; fully
    deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if statistic == "spearman":
        results: dict[str, BaselineEstimate] = {}
        for aspect, column in reference.items():
            column = list(column)
            samples = []
            for _ in range(trials):
                draw = rng.integers(CATEGORIES[0], CATEGORIES[-1] + 1, size=len(column))
                try:
                    samples.append(spearman_rho(draw, column))
                except DegenerateInput:
                    continue
            if not samples:
                raise DegenerateInput(f"no non-degenerate trials for aspect {aspect!r}")
            arr = np.asarray(samples)
            stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.inf
            results[aspect] = BaselineEstimate(float(arr.mean()), stderr, len(arr))
        return results
    if statistic == "pairwise_accuracy":
        verdicts = list(reference)
        options = (Verdict.LEFT, Verdict.RIGHT, Verdict.TIE)
        samples = []
        for _ in range(trials):
            draws = rng.integers(0, len(options), size=len(verdicts))
            correct = sum(1 for v, d in zip(verdicts, draws) if options[d] == v)
            samples.append(100.0 * correct / len(verdicts))
        arr = np.asarray(samples)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.inf
        return BaselineEstimate(float(arr.mean()), stderr, len(arr))
    raise ValueError(f"unknown statistic {statistic!r}")
