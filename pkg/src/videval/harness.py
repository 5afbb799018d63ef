"""Benchmark harness: dataset loaders, the evaluation runners, best-of-K
selection, and leaderboard generation.

Runners score every video through a backend, then reduce predictions
against human references with the stats module.  Records whose scorer
output cannot be parsed are excluded and counted, never imputed.
"""

from __future__ import annotations

import csv
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from videval import stats
from videval.errors import (
    AllParsesFailed,
    DegenerateInput,
    DuplicateId,
    EmptyModelGroup,
    OutOfRangeRating,
    ParseError,
    SchemaError,
    TooFewPrompts,
    UnresolvedId,
)
from videval.model import (
    ASPECTS,
    FrameSequence,
    PreferencePair,
    VideoRecord,
    parse_jsonl,
)
from videval.scorer import (
    EchoBackend,
    FeatureCompositeBackend,
    RemoteServiceBackend,
    ScoreCache,
    ScorerBackend,
    StubScorerBackend,
    average_aspects,
    score_video,
)

#: Aspects kept in EvalCrafter-style runs (no dynamic degree, no factual consistency).
EVALCRAFTER_ASPECTS = ("vq", "tc", "tva")

FrameSource = Callable[[VideoRecord], FrameSequence]


@dataclass(frozen=True)
class BenchmarkResult:
    """One table row: per-aspect statistic values plus bookkeeping counts."""

    benchmark: str
    method: str
    kind: str  # "correlation" | "preference"
    values: Mapping[str, float | None]
    counts: Mapping[str, int]
    fingerprint: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        c = self.counts
        required = {"total", "evaluated", "parse_failures", "skipped"}
        if set(c) != required:
            raise SchemaError(f"counts must have keys {sorted(required)}")
        if c["evaluated"] + c["parse_failures"] + c["skipped"] != c["total"]:
            raise SchemaError(f"inconsistent counts: {dict(c)}")

    def average(self) -> float | None:
        defined = [v for v in self.values.values() if v is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)

    def to_json_obj(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "method": self.method,
            "kind": self.kind,
            "values": {k: v for k, v in self.values.items()},
            "average": self.average(),
            "counts": dict(self.counts),
            "fingerprint": dict(self.fingerprint),
        }


# --- loaders -----------------------------------------------------------------

def load_records_jsonl(path: str, require_scores: bool = False) -> list[VideoRecord]:
    """Load a JSON Lines dataset; ids must be unique."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    records: list[VideoRecord] = []
    seen: set[str] = set()
    for lineno, obj in parse_jsonl(text):
        try:
            rec = VideoRecord.from_json_obj(obj)
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
        if rec.id in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate id {rec.id!r}")
        if require_scores and rec.scores is None:
            raise SchemaError(f"{path}:{lineno}: record {rec.id!r} has no scores")
        seen.add(rec.id)
        records.append(rec)
    return records


def load_labeled_dataset(path: str) -> list[VideoRecord]:
    """Load a dataset where every record carries human aspect scores."""
    return load_records_jsonl(path, require_scores=True)


def load_pairs_jsonl(path: str) -> list[PreferencePair]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    pairs = []
    for lineno, obj in parse_jsonl(text):
        try:
            pairs.append(PreferencePair.from_json_obj(obj))
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    return pairs


def normalize_evalcrafter(r1: int, r2: int, r3: int) -> float:
    """Map three 1-5 ratings onto [0, 1]: ((r1+r2+r3)/3 - 1) / 4."""
    for r in (r1, r2, r3):
        if not (isinstance(r, int) and 1 <= r <= 5):
            raise OutOfRangeRating(f"rating {r!r} outside [1, 5]")
    return ((r1 + r2 + r3) / 3.0 - 1.0) / 4.0


def load_evalcrafter_csv(path: str) -> dict[str, dict[str, float]]:
    """Load EvalCrafter-style ratings: columns video_id, aspect, r1, r2, r3.

    Returns {video_id: {aspect: normalized score in [0, 1]}}.
    """
    out: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"video_id", "aspect", "r1", "r2", "r3"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            aspect = row["aspect"].strip()
            if aspect not in ASPECTS:
                raise SchemaError(f"{path}:{lineno}: unknown aspect {aspect!r}")
            try:
                ratings = [int(row[k]) for k in ("r1", "r2", "r3")]
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: non-integer rating") from exc
            video = out.setdefault(row["video_id"].strip(), {})
            if aspect in video:
                raise SchemaError(f"{path}:{lineno}: duplicate rating for ({row['video_id']}, {aspect})")
            video[aspect] = normalize_evalcrafter(*ratings)
    return out


# --- scoring loop ------------------------------------------------------------

def score_records(
    records: Sequence[VideoRecord],
    backend: ScorerBackend,
    frame_source: FrameSource | None = None,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
    aspects: Sequence[str] | None = None,
) -> tuple[dict[str, dict[str, float]], int]:
    """Score all records; returns ({id: {aspect: score}}, parse-failure count).

    With an aspect subset, only those aspects are requested from the backend
    (feature composites then skip unmapped aspects entirely); full-aspect
    runs go through score_video and the cache.  ParseError marks a record
    failed and excluded; provider errors abort the run.  With max_workers >
    1, distinct records are scored concurrently; a frame source that
    declares ``thread_safe = False`` has its calls serialized.
    """
    if backend.needs_frames and frame_source is None:
        raise SchemaError(f"backend kind {backend.kind!r} needs a frame source")
    wanted = tuple(aspects) if aspects is not None else ASPECTS
    full = set(wanted) == set(ASPECTS)
    decode_lock = (
        threading.Lock()
        if frame_source is not None and not getattr(frame_source, "thread_safe", True)
        else None
    )

    def decode(record: VideoRecord) -> FrameSequence:
        if decode_lock is None:
            return frame_source(record)
        with decode_lock:
            return frame_source(record)

    def one(record: VideoRecord) -> dict[str, float] | None:
        frames = decode(record) if backend.needs_frames else None
        try:
            if full:
                return score_video(record, frames, backend, cache=cache).as_dict()
            return backend.score_aspects(record, frames, wanted)
        except ParseError:
            return None

    results: dict[str, dict[str, float]] = {}
    failures = 0
    if max_workers <= 1:
        outputs = [one(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outputs = list(pool.map(one, records))
    for record, scores in zip(records, outputs):
        if scores is None:
            failures += 1
        else:
            results[record.id] = scores
    return results, failures


# --- runners -------------------------------------------------------------------

def run_correlation_eval(
    dataset: Sequence[VideoRecord],
    backend: ScorerBackend,
    aspects: Sequence[str] | None = None,
    reference: Mapping[str, Mapping[str, float]] | None = None,
    frame_source: FrameSource | None = None,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
    benchmark: str = "correlation",
    fingerprint: Mapping[str, object] | None = None,
) -> BenchmarkResult:
    """Per-aspect Spearman correlation between backend and human scores.

    ``reference`` overrides the records' own scores (used for externally
    rated benchmarks); records without a reference entry are skipped and
    counted.  Degenerate aspects are reported as None, never as 0.
    """
    if not dataset:
        raise SchemaError("dataset is empty")
    aspects = tuple(aspects) if aspects is not None else ASPECTS
    unknown = set(aspects) - set(ASPECTS)
    if unknown:
        raise SchemaError(f"unknown aspects {sorted(unknown)}")

    def human(rec: VideoRecord, aspect: str) -> float | None:
        if reference is not None:
            return reference.get(rec.id, {}).get(aspect)
        return None if rec.scores is None else rec.scores.get(aspect)

    usable = [r for r in dataset if all(human(r, a) is not None for a in aspects)]
    skipped = len(dataset) - len(usable)
    predicted, failures = score_records(
        usable, backend, frame_source, cache, max_workers, aspects=aspects
    )
    scored = [r for r in usable if r.id in predicted]
    if not scored:
        raise AllParsesFailed("no record produced a usable score")

    values: dict[str, float | None] = {}
    for aspect in aspects:
        pred_col = [predicted[r.id][aspect] for r in scored]
        human_col = [human(r, aspect) for r in scored]
        try:
            values[aspect] = stats.spearman_rho(pred_col, human_col)
        except (DegenerateInput, ValueError):
            values[aspect] = None
    counts = {
        "total": len(dataset),
        "evaluated": len(scored),
        "parse_failures": failures,
        "skipped": skipped,
    }
    return BenchmarkResult(benchmark, backend.kind, "correlation", values, counts,
                           dict(fingerprint or {}))


def run_preference_eval(
    pairs: Sequence[PreferencePair],
    dataset: Sequence[VideoRecord],
    backend: ScorerBackend,
    tie_margin: float = 0.0,
    frame_source: FrameSource | None = None,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
    benchmark: str = "preference",
    fingerprint: Mapping[str, object] | None = None,
) -> BenchmarkResult:
    """Pairwise preference accuracy with the averaged-aspect score rule.

    Every video referenced by a pair is scored once; the side with the
    higher five-aspect average wins (within ``tie_margin``, a tie).  Pairs
    tagged with an aspect are additionally reported per aspect group.
    """
    if not pairs:
        raise SchemaError("no preference pairs")
    by_id = {r.id: r for r in dataset}
    needed_ids: list[str] = []
    for pair in pairs:
        for vid in (pair.left, pair.right):
            if vid not in by_id:
                raise UnresolvedId(f"pair references unknown video id {vid!r}")
            if vid not in needed_ids:
                needed_ids.append(vid)

    needed = [by_id[i] for i in needed_ids]
    predicted, failures = score_records(needed, backend, frame_source, cache, max_workers)
    if not predicted:
        raise AllParsesFailed("no video produced a usable score")
    averages = {vid: sum(scores.values()) / len(scores) for vid, scores in predicted.items()}

    scored_pairs: list[tuple[PreferencePair, float, float]] = []
    skipped = 0
    for pair in pairs:
        if pair.left in averages and pair.right in averages:
            scored_pairs.append((pair, averages[pair.left], averages[pair.right]))
        else:
            skipped += 1
    if not scored_pairs:
        raise AllParsesFailed("every pair lost a side to parse failures")

    values: dict[str, float | None] = {}
    groups = sorted({p.aspect for p, _, _ in scored_pairs if p.aspect is not None})
    for group in groups:
        subset = [sp for sp in scored_pairs if sp[0].aspect == group]
        values[group] = stats.pairwise_accuracy(subset, tie_margin)
    values["overall"] = stats.pairwise_accuracy(scored_pairs, tie_margin)
    counts = {
        "total": len(pairs),
        "evaluated": len(scored_pairs),
        "parse_failures": failures,
        "skipped": skipped,
    }
    fp = {"tie_margin": tie_margin, **(fingerprint or {})}
    return BenchmarkResult(benchmark, backend.kind, "preference", values, counts, fp)


def random_baseline_result(
    dataset: Sequence[VideoRecord],
    seed: int,
    trials: int,
    aspects: Sequence[str] | None = None,
    benchmark: str = "correlation",
) -> BenchmarkResult:
    """The seeded uniform-guessing row for a correlation table."""
    aspects = tuple(aspects) if aspects is not None else ASPECTS
    reference = {
        a: [r.scores.get(a) for r in dataset if r.scores is not None] for a in aspects
    }
    estimates = stats.random_baseline(reference, "spearman", seed=seed, trials=trials)
    values = {a: estimates[a].mean for a in aspects}
    counts = {"total": len(dataset), "evaluated": len(dataset), "parse_failures": 0, "skipped": 0}
    return BenchmarkResult(benchmark, "random", "correlation", values, counts,
                           {"seed": seed, "trials": trials})


def random_preference_result(
    pairs: Sequence[PreferencePair],
    seed: int,
    trials: int,
    benchmark: str = "preference",
) -> BenchmarkResult:
    """The seeded uniform-verdict row for a preference table."""
    if not pairs:
        raise SchemaError("no preference pairs")
    values: dict[str, float | None] = {}
    for group in sorted({p.aspect for p in pairs if p.aspect is not None}):
        subset = [p.verdict for p in pairs if p.aspect == group]
        values[group] = stats.random_baseline(subset, "pairwise_accuracy", seed=seed, trials=trials).mean
    values["overall"] = stats.random_baseline(
        [p.verdict for p in pairs], "pairwise_accuracy", seed=seed, trials=trials
    ).mean
    counts = {"total": len(pairs), "evaluated": len(pairs), "parse_failures": 0, "skipped": 0}
    return BenchmarkResult(benchmark, "random", "preference", values, counts,
                           {"seed": seed, "trials": trials})


# --- prompt subsampling / best-of-K / leaderboard --------------------------------

def subsample_prompts(
    dataset: Sequence[VideoRecord], n: int, seed: int
) -> list[VideoRecord]:
    """Keep all videos of n uniformly sampled unique prompts (seeded)."""
    prompts: list[str] = []
    for rec in dataset:
        if rec.prompt not in prompts:
            prompts.append(rec.prompt)
    if n < 1 or n > len(prompts):
        raise TooFewPrompts(f"cannot sample {n} of {len(prompts)} unique prompts")
    rng = np.random.default_rng(seed)
    chosen = {prompts[i] for i in rng.choice(len(prompts), size=n, replace=False)}
    return [r for r in dataset if r.prompt in chosen]


def best_of_k(
    candidates: Sequence[tuple[VideoRecord, FrameSequence | None]],
    backend: ScorerBackend,
    cache: ScoreCache | None = None,
) -> VideoRecord:
    """The candidate with the highest average aspect score.

    Ties break toward the lowest candidate index; candidates whose scorer
    output fails to parse are excluded.
    """
    if not candidates:
        raise SchemaError("best_of_k needs at least one candidate")
    best: tuple[float, int] | None = None
    for index, (record, frames) in enumerate(candidates):
        try:
            scores = score_video(record, frames, backend, cache=cache)
        except ParseError:
            continue
        avg = average_aspects(scores)
        if best is None or avg > best[0]:
            best = (avg, index)
    if best is None:
        raise AllParsesFailed("every candidate failed to parse")
    return candidates[best[1]][0]


@dataclass(frozen=True)
class LeaderboardRow:
    model: str
    average: float  # 0-100 display scale
    per_aspect: Mapping[str, float]


def leaderboard(records: Sequence[VideoRecord]) -> list[LeaderboardRow]:
    """Per-model mean aspect scores on a 0-100 display scale, best first.

    The display map (mean - 1) / 3 * 100 sends the score range [1, 4] onto
    [0, 100]; it is affine, so it never changes the ranking.
    """
    groups: dict[str, list[VideoRecord]] = {}
    for rec in records:
        groups.setdefault(rec.model_name, []).append(rec)
    if not groups:
        raise EmptyModelGroup("no records to rank")
    def display(mean: float) -> float:
        return (mean - 1.0) / 3.0 * 100.0

    rows = []
    for model, group in groups.items():
        scored = [r for r in group if r.scores is not None]
        if not scored:
            raise EmptyModelGroup(f"model {model!r} has no scored videos")
        aspect_means = {
            aspect: sum(r.scores.get(aspect) for r in scored) / len(scored)
            for aspect in ASPECTS
        }
        raw_average = sum(aspect_means.values()) / len(ASPECTS)
        per_aspect = {aspect: display(mean) for aspect, mean in aspect_means.items()}
        # sort on the raw average: the display map is affine, so the ranking
        # is identical in exact arithmetic and stable at float ties
        rows.append((raw_average, LeaderboardRow(model, display(raw_average), per_aspect)))
    rows.sort(key=lambda pair: (-pair[0], pair[1].model))
    return [row for _, row in rows]


# --- backend / provider factories ---------------------------------------------------

def build_provider(cfg: Mapping):
    """Instantiate an embedding or IQA provider from its config block."""
    from videval.providers import HashEmbeddingStub, HashIqaStub, RemoteProvider

    kind = cfg.get("kind", "stub")
    role = cfg.get("role", "embedding")
    if kind == "stub":
        if role == "iqa":
            return HashIqaStub(seed=int(cfg.get("seed", 0)))
        return HashEmbeddingStub(dim=int(cfg.get("dim", 64)), seed=int(cfg.get("seed", 0)))
    if kind == "remote":
        if "endpoint" not in cfg:
            raise SchemaError("remote provider config needs an 'endpoint'")
        dim = cfg.get("dim")
        return RemoteProvider(
            cfg["endpoint"],
            timeout_s=float(cfg.get("timeout_s", 60.0)),
            retries=int(cfg.get("retries", 2)),
            expected_dim=None if dim is None else int(dim),
        )
    raise SchemaError(f"unknown provider kind {kind!r}")


def build_backend(cfg: Mapping, rules=None, providers: Mapping | None = None) -> ScorerBackend:
    """Instantiate a scorer backend from its config block.

    Kinds: stub (seeded deterministic), echo (returns human labels),
    remote_service (wire-protocol model service), feature_composite
    (per-aspect feature metrics + bin rules).
    """
    providers = providers or {}
    kind = cfg.get("kind", "stub")
    if kind == "stub":
        return StubScorerBackend(seed=int(cfg.get("seed", 0)), mode=cfg.get("mode", "generative"))
    if kind == "echo":
        return EchoBackend()
    if kind in ("remote", "remote_service"):
        if "endpoint" not in cfg:
            raise SchemaError("remote backend config needs an 'endpoint'")
        return RemoteServiceBackend(
            endpoint=cfg["endpoint"],
            mode=cfg.get("mode", "generative"),
            timeout_s=float(cfg.get("timeout_s", 120.0)),
            retries=int(cfg.get("retries", 2)),
            strict=bool(cfg.get("strict", False)),
        )
    if kind in ("composite", "feature_composite"):
        from videval.discretize import default_rules

        emb_cfg = dict(providers.get("embedding", {"kind": "stub"}))
        emb_cfg.setdefault("role", "embedding")
        iqa_cfg = dict(providers.get("iqa", {"kind": "stub"}))
        iqa_cfg["role"] = "iqa"
        return FeatureCompositeBackend(
            rules=rules if rules is not None else default_rules(),
            aspect_metrics=cfg.get("aspects"),
            embedding_provider=build_provider(emb_cfg),
            iqa_provider=build_provider(iqa_cfg),
        )
    raise SchemaError(f"unknown backend kind {kind!r}")


# --- run configuration ------------------------------------------------------------

@dataclass
class RunConfig:
    """File-level configuration for CLI runs; flags override fields."""

    seed: int = 0
    k: int = 5
    vbench_subsample: int = 100
    tie_margin: float = 0.0
    rules: str | None = None
    backend: dict = field(default_factory=lambda: {"kind": "stub"})
    providers: dict = field(default_factory=dict)
    cache_path: str | None = None
    max_workers: int = 1
    random_trials: int = 0
    target_fps: int = 8

    KEYS = (
        "seed", "k", "vbench_subsample", "tie_margin", "rules", "backend",
        "providers", "cache_path", "max_workers", "random_trials", "target_fps",
    )

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("k must be >= 1")
        if self.vbench_subsample < 1:
            raise SchemaError("vbench_subsample must be >= 1")
        if self.tie_margin < 0 or not math.isfinite(self.tie_margin):
            raise SchemaError("tie_margin must be a finite value >= 0")
        if self.max_workers < 1:
            raise SchemaError("max_workers must be >= 1")

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        import yaml

        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise SchemaError(f"config file {path!r} is not valid YAML: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError(f"config file {path!r} must hold a mapping")
        unknown = set(doc) - set(cls.KEYS)
        if unknown:
            raise SchemaError(f"config file {path!r} has unknown keys {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise SchemaError(f"config file {path!r}: {exc}") from exc

    def fingerprint(self, rules_digest: str | None = None) -> dict:
        fp = {
            "seed": self.seed,
            "k": self.k,
            "tie_margin": self.tie_margin,
            "backend": dict(self.backend),
        }
        if rules_digest is not None:
            fp["rules_digest"] = rules_digest
        return fp
