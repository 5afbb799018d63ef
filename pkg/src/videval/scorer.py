"""Scorer adapters: everything that turns a backend into AspectScores.

Backends come in four kinds: fixed-format generative text, five-float
regression output, a remote model service speaking the wire protocol, and a
feature composite that discretizes feature metrics per aspect.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import threading
from pathlib import Path
from typing import Callable, Mapping, Sequence

from videval import metrics, wire
from videval.discretize import BinRule, discretize
from videval.errors import (
    DuplicateAspect,
    MissingAspect,
    OutOfRangeScore,
    ParseError,
    ProviderError,
    SchemaError,
    UnmappedAspect,
    WrongArity,
)
from videval.model import ASPECTS, ASPECT_NAMES, AspectScores, FrameSequence, VideoRecord

logger = logging.getLogger(__name__)

_PREAMBLE = """\
Suppose you are an expert in judging and evaluating the quality of AI-generated videos,
please watch the following frames of a given video and see the text prompt for generating the video,
then give scores from 5 different dimensions:
(1) visual quality: the quality of the video in terms of clearness, resolution, brightness, and color
(2) temporal consistency, the consistency of objects or humans in video
(3) dynamic degree, the degree of dynamic changes
(4) text-to-video alignment, the alignment between the text prompt and the video content
(5) factual consistency, the consistency of the video content with the common-sense and factual knowledge
"""

_TAIL = """\
For this video, the text prompt is "{text_prompt}",
all the frames of video are as follows:
"""

GENERATIVE_TEMPLATE = _PREAMBLE + """
For each dimension, output a number from [1,2,3,4],
in which '1' means 'Bad', '2' means 'Average', '3' means 'Good',
'4' means 'Real' or 'Perfect' (the video is like a real video)
Here is an output example:
visual quality: 4
temporal consistency: 4
dynamic degree: 3
text-to-video alignment: 1
factual consistency: 2

""" + _TAIL

REGRESSION_TEMPLATE = _PREAMBLE + """
For each dimension, output a float number from 1.0 to 4.0,
higher the number is, better the video performs in that dimension,
the lowest 1.0 means Bad, the highest 4.0 means Perfect/Real (the video is like a real video)
Here is an output example:
visual quality: 2.24
temporal consistency: 3.89
dynamic degree: 3.17
text-to-video alignment: 1.86
factual consistency: 2.16

""" + _TAIL


def build_prompt(prompt: str, mode: str) -> str:
    """Scoring request text with the video's prompt substituted in."""
    if not prompt:
        raise ValueError("prompt must be non-empty")
    if mode == "generative":
        template = GENERATIVE_TEMPLATE
    elif mode == "regression":
        template = REGRESSION_TEMPLATE
    else:
        raise ValueError(f"unknown scoring mode {mode!r}")
    # .replace, not .format: prompts may contain literal braces
    return template.replace("{text_prompt}", prompt)


# Accepted spellings per aspect; the canonical name comes first.
_ASPECT_SPELLINGS: dict[str, tuple[str, ...]] = {
    "vq": ("visual quality",),
    "tc": ("temporal consistency",),
    "dd": ("dynamic degree",),
    "tva": ("text-to-video alignment", "text alignment"),
    "fc": ("factual consistency",),
}

_NUMBER = r"(-?\d+(?:\.\d+)?)"


def _aspect_patterns(aspect: str) -> list[tuple[str, re.Pattern]]:
    return [
        (name, re.compile(rf"\b{re.escape(name)}\s*:\s*{_NUMBER}", re.IGNORECASE))
        for name in _ASPECT_SPELLINGS[aspect]
    ]


def render_generative(scores: AspectScores) -> str:
    """The five score lines in the canonical output layout."""
    if not scores.is_integer_valued:
        raise ValueError("generative output carries integer scores only")
    return "\n".join(
        f"{ASPECT_NAMES[aspect]}: {int(scores.get(aspect))}" for aspect in ASPECTS
    )


def parse_generative(text: str, strict: bool = False) -> AspectScores:
    """Extract the five integer aspect scores from generative output.

    Lenient mode (the default) tolerates surrounding prose and accepts the
    known aspect-name synonyms; strict mode requires exactly the five
    canonical lines, in order, and nothing else.
    """
    if strict:
        lines = [l.strip() for l in text.splitlines() if l.strip()]
        if len(lines) != len(ASPECTS):
            raise ParseError("layout", f"strict mode expects exactly {len(ASPECTS)} score lines, got {len(lines)}")
        for line, aspect in zip(lines, ASPECTS):
            if not re.fullmatch(rf"{re.escape(ASPECT_NAMES[aspect])}\s*:\s*{_NUMBER}", line, re.IGNORECASE):
                raise ParseError(aspect, f"strict mode: {line!r} is not a canonical {ASPECT_NAMES[aspect]!r} line")
        text = "\n".join(lines)

    values: dict[str, float] = {}
    for aspect in ASPECTS:
        hits: list[tuple[str, str]] = []
        for name, pattern in _aspect_patterns(aspect):
            hits.extend((name, m) for m in pattern.findall(text))
        if not hits:
            raise MissingAspect(aspect)
        if len(hits) > 1:
            raise DuplicateAspect(aspect)
        name, token = hits[0]
        if name != _ASPECT_SPELLINGS[aspect][0]:
            logger.info("matched aspect %r via synonym %r", aspect, name)
        value = float(token)
        if not value.is_integer() or not 1 <= value <= 4:
            raise OutOfRangeScore(aspect, value)
        values[aspect] = value
    return AspectScores(**values)


def validate_regression(values: Sequence[float]) -> AspectScores:
    """Check five regression outputs and wrap them in aspect order."""
    values = list(values)
    if len(values) != len(ASPECTS):
        raise WrongArity(f"expected {len(ASPECTS)} scores, got {len(values)}")
    for aspect, value in zip(ASPECTS, values):
        v = float(value)
        if not math.isfinite(v) or not 1.0 <= v <= 4.0:
            raise OutOfRangeScore(aspect, v)
    return AspectScores.from_vector([float(v) for v in values])


def average_aspects(scores: AspectScores) -> float:
    """Arithmetic mean of the five aspect scores."""
    return sum(scores.as_tuple()) / len(ASPECTS)


class ScorerBackend:
    """Base class: anything that maps (record, frames) to AspectScores."""

    kind = "abstract"
    needs_frames = False

    def fingerprint(self) -> str:
        raise NotImplementedError

    def score(self, record: VideoRecord, frames: FrameSequence | None) -> AspectScores:
        raise NotImplementedError

    def score_aspects(
        self,
        record: VideoRecord,
        frames: FrameSequence | None,
        aspects: Sequence[str],
    ) -> dict[str, float]:
        """Scores for a subset of aspects (default: full score, then project)."""
        scores = self.score(record, frames)
        return {a: scores.get(a) for a in aspects}


def _digest(*parts: str) -> str:
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()[:16]


class GenerativeTextBackend(ScorerBackend):
    """Wraps a callable producing fixed-format generative text."""

    kind = "generative_text"

    def __init__(
        self,
        fn: Callable[[VideoRecord, FrameSequence | None, str], str],
        name: str = "generative_text",
        strict: bool = False,
        needs_frames: bool = False,
    ):
        self.fn = fn
        self.name = name
        self.strict = strict
        self.needs_frames = needs_frames

    def fingerprint(self) -> str:
        return _digest(self.kind, self.name, _digest(GENERATIVE_TEMPLATE))

    def score(self, record, frames):
        request = build_prompt(record.prompt, "generative")
        return parse_generative(self.fn(record, frames, request), strict=self.strict)


class RegressionFloatsBackend(ScorerBackend):
    """Wraps a callable producing five real-valued scores."""

    kind = "regression_floats"

    def __init__(
        self,
        fn: Callable[[VideoRecord, FrameSequence | None, str], Sequence[float]],
        name: str = "regression_floats",
        needs_frames: bool = False,
    ):
        self.fn = fn
        self.name = name
        self.needs_frames = needs_frames

    def fingerprint(self) -> str:
        return _digest(self.kind, self.name, _digest(REGRESSION_TEMPLATE))

    def score(self, record, frames):
        request = build_prompt(record.prompt, "regression")
        return validate_regression(self.fn(record, frames, request))


class RemoteServiceBackend(ScorerBackend):
    """Scores through a model service speaking the wire protocol."""

    kind = "remote_service"
    needs_frames = True

    def __init__(
        self,
        endpoint: str,
        mode: str = "generative",
        timeout_s: float = 120.0,
        retries: int = 2,
        strict: bool = False,
        transport: wire.Transport | None = None,
    ):
        if mode not in wire.MODES:
            raise SchemaError(f"unknown scoring mode {mode!r}")
        self.endpoint = endpoint
        self.mode = mode
        self.retries = retries
        self.strict = strict
        self.transport = transport if transport is not None else wire.http_transport(timeout_s)

    def fingerprint(self) -> str:
        template = GENERATIVE_TEMPLATE if self.mode == "generative" else REGRESSION_TEMPLATE
        return _digest(self.kind, self.endpoint, self.mode, _digest(template))

    def score(self, record, frames):
        if frames is None:
            raise ProviderError(f"remote backend needs frames for record {record.id!r}")
        request = wire.score_request(build_prompt(record.prompt, self.mode), frames.frames, self.mode)
        body = wire.call_with_retries(self.transport, self.endpoint, request, retries=self.retries)
        if self.mode == "generative":
            text = body.get("text")
            if not isinstance(text, str):
                raise ProviderError("generative response missing 'text' field")
            return parse_generative(text, strict=self.strict)
        scores = body.get("scores")
        if not isinstance(scores, list):
            raise ProviderError("regression response missing 'scores' field")
        return validate_regression(scores)


class FeatureCompositeBackend(ScorerBackend):
    """Scores each aspect with a configured feature metric plus bin rule.

    ``aspect_metrics`` maps aspect keys to metric names (e.g. tc ->
    SSIM-sim, dd -> MSE-dyn-unit).  Aspects without a mapping raise
    UnmappedAspect when requested; there is no feature-based factual
    consistency metric, so full five-aspect scoring needs an explicit
    (non-default) mapping for fc.
    """

    kind = "feature_composite"
    needs_frames = True

    #: Aspect mapping used when none is configured.
    DEFAULT_ASPECTS = {
        "vq": metrics.PIQE,
        "tc": metrics.SSIM_SIM,
        "dd": metrics.MSE_DYN_UNIT,
        "tva": metrics.CLIP_SCORE,
    }

    def __init__(
        self,
        rules: Mapping[str, BinRule],
        aspect_metrics: Mapping[str, str] | None = None,
        embedding_provider: metrics.EmbeddingProvider | None = None,
        iqa_provider: metrics.IqaProvider | None = None,
        dynamics_samples: int = 4,
    ):
        self.rules = dict(rules)
        self.aspect_metrics = dict(aspect_metrics if aspect_metrics is not None else self.DEFAULT_ASPECTS)
        unknown = set(self.aspect_metrics) - set(ASPECTS)
        if unknown:
            raise SchemaError(f"unknown aspects in composite config: {sorted(unknown)}")
        for metric_name in self.aspect_metrics.values():
            if metric_name not in self.rules:
                raise SchemaError(f"no bin rule for metric {metric_name!r}")
        self.embedding_provider = embedding_provider
        self.iqa_provider = iqa_provider
        self.dynamics_samples = dynamics_samples

    def fingerprint(self) -> str:
        rules_blob = json.dumps(
            {name: [list(b) for b in rule.bins] for name, rule in sorted(self.rules.items())},
            sort_keys=True,
        )
        return _digest(self.kind, json.dumps(self.aspect_metrics, sort_keys=True), _digest(rules_blob))

    def _embedding(self) -> metrics.EmbeddingProvider:
        if self.embedding_provider is None:
            raise ProviderError("composite backend has no embedding provider configured")
        return self.embedding_provider

    def _compute(self, metric_name: str, record: VideoRecord, frames: FrameSequence):
        if metric_name in (metrics.PIQE, metrics.BRISQUE):
            if self.iqa_provider is None:
                raise ProviderError("composite backend has no IQA provider configured")
            return metrics.iqa_video_score(frames, self.iqa_provider, metric_name)
        if metric_name in (metrics.CLIP_SIM, metrics.DINO_SIM):
            return metrics.embed_temporal_sim(frames, self._embedding(), metric_name)
        if metric_name == metrics.SSIM_SIM:
            return metrics.ssim_sim(frames)
        if metric_name == metrics.MSE_DYN_UNIT:
            return metrics.dynamic_scores(frames, self.dynamics_samples)[0]
        if metric_name == metrics.SSIM_DYN:
            return metrics.dynamic_scores(frames, self.dynamics_samples)[1]
        if metric_name == metrics.CLIP_SCORE:
            return metrics.text_frame_alignment(frames, record.prompt, self._embedding(), metric_name)
        if metric_name == metrics.XCLIP_SCORE:
            return metrics.text_video_alignment(frames, record.prompt, self._embedding(), metric_name)
        raise SchemaError(f"unknown feature metric {metric_name!r}")

    def score_aspects(self, record, frames, aspects):
        if frames is None:
            raise ProviderError(f"composite backend needs frames for record {record.id!r}")
        out: dict[str, float] = {}
        for aspect in aspects:
            if aspect not in self.aspect_metrics:
                raise UnmappedAspect(aspect)
            value = self._compute(self.aspect_metrics[aspect], record, frames)
            out[aspect] = float(discretize(value, self.rules[value.metric_name]).value)
        return out

    def score(self, record, frames):
        return AspectScores(**self.score_aspects(record, frames, ASPECTS))


class EchoBackend(ScorerBackend):
    """Returns each record's own human scores; the identity sanity check."""

    kind = "echo"
    needs_frames = False

    def fingerprint(self) -> str:
        return _digest(self.kind)

    def score(self, record, frames):
        if record.scores is None:
            raise ProviderError(f"echo backend needs labeled records; {record.id!r} has no scores")
        return record.scores


class StubScorerBackend(ScorerBackend):
    """Seeded deterministic scorer for demos and offline runs.

    Generative mode renders the canonical five-line layout and feeds it back
    through parse_generative, so the real parsing surface is exercised.
    """

    kind = "stub"
    needs_frames = False

    def __init__(self, seed: int = 0, mode: str = "generative"):
        if mode not in wire.MODES:
            raise SchemaError(f"unknown scoring mode {mode!r}")
        self.seed = seed
        self.mode = mode

    def fingerprint(self) -> str:
        return _digest(self.kind, str(self.seed), self.mode)

    def _rng(self, record: VideoRecord):
        import numpy as np

        digest = hashlib.sha256(
            f"{self.seed}\x1f{record.id}\x1f{record.prompt}".encode("utf-8")
        ).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    def score(self, record, frames):
        rng = self._rng(record)
        if self.mode == "generative":
            labels = rng.integers(1, 5, size=len(ASPECTS))
            text = render_generative(AspectScores.from_vector([float(v) for v in labels]))
            return parse_generative(text)
        values = [round(float(v), 2) for v in rng.uniform(1.0, 4.0, size=len(ASPECTS))]
        return validate_regression(values)


class ScoreCache:
    """Scores keyed by (backend fingerprint, record id); optionally persistent.

    With a path, entries append to a JSON Lines file so interrupted sweeps
    resume without re-scoring.  Concurrent writers of the same key are
    harmless: values are deterministic per key, last writer wins.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], AspectScores] = {}
        if self.path is not None and self.path.exists():
            for line in self.path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                self._entries[(obj["fingerprint"], obj["id"])] = AspectScores.from_dict(obj["scores"])

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, fingerprint: str, record_id: str) -> AspectScores | None:
        with self._lock:
            return self._entries.get((fingerprint, record_id))

    def put(self, fingerprint: str, record_id: str, scores: AspectScores):
        line = json.dumps(
            {"fingerprint": fingerprint, "id": record_id, "scores": scores.as_dict()},
            sort_keys=True,
        )
        with self._lock:
            self._entries[(fingerprint, record_id)] = scores
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")


def score_video(
    record: VideoRecord,
    frames: FrameSequence | None,
    backend: ScorerBackend,
    cache: ScoreCache | None = None,
) -> AspectScores:
    """Score one video through a backend, with optional caching."""
    if cache is not None:
        hit = cache.get(backend.fingerprint(), record.id)
        if hit is not None:
            return hit
    scores = backend.score(record, frames)
    if cache is not None:
        cache.put(backend.fingerprint(), record.id, scores)
    return scores
