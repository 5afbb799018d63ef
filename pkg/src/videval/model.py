"""Core domain types shared by every other module.

All types are immutable value objects and safe to share between threads.
``VideoRecord`` (plus optional per-aspect scores) has a canonical JSON Lines
encoding: one object per line with keys ``{id, model_name, prompt,
media_path, fps, width, height, duration_s, scores?}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from videval.errors import SchemaError

#: Fixed aspect order used everywhere a vector form of the five scores appears.
ASPECTS = ("vq", "tc", "dd", "tva", "fc")

#: Canonical long names, as they appear in scorer output lines.
ASPECT_NAMES = {
    "vq": "visual quality",
    "tc": "temporal consistency",
    "dd": "dynamic degree",
    "tva": "text-to-video alignment",
    "fc": "factual consistency",
}


class RatingLabel(IntEnum):
    """Discrete rating on the 1-4 scale."""

    BAD = 1
    AVERAGE = 2
    GOOD = 3
    PERFECT = 4


class Direction(str, Enum):
    """Whether larger raw values of a metric indicate better videos."""

    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class Verdict(str, Enum):
    """Human preference between the two sides of a pair."""

    LEFT = "left"
    RIGHT = "right"
    TIE = "tie"


@dataclass(frozen=True)
class AspectScores:
    """The five per-aspect scores of one video.

    Each field lies in [1.0, 4.0].  Human labels and generative-scorer output
    are integer-valued; regression scorers produce arbitrary reals in range.
    Integer-ness is a property of provenance, not of the type.
    """

    vq: float
    tc: float
    dd: float
    tva: float
    fc: float

    def __post_init__(self):
        for aspect, value in zip(ASPECTS, self.as_tuple()):
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise SchemaError(f"aspect {aspect!r} score must be a finite number, got {value!r}")
            if not 1.0 <= value <= 4.0:
                raise SchemaError(f"aspect {aspect!r} score {value!r} outside [1.0, 4.0]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.vq, self.tc, self.dd, self.tva, self.fc)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(ASPECTS, self.as_tuple()))

    def get(self, aspect: str) -> float:
        if aspect not in ASPECTS:
            raise KeyError(aspect)
        return getattr(self, aspect)

    @property
    def is_integer_valued(self) -> bool:
        return all(float(v).is_integer() for v in self.as_tuple())

    @classmethod
    def from_dict(cls, obj: Mapping[str, float]) -> "AspectScores":
        missing = [a for a in ASPECTS if a not in obj]
        if missing:
            raise SchemaError(f"scores object missing aspects {missing}")
        extra = [k for k in obj if k not in ASPECTS]
        if extra:
            raise SchemaError(f"scores object has unknown keys {extra}")
        return cls(**{a: float(obj[a]) for a in ASPECTS})

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "AspectScores":
        if len(values) != len(ASPECTS):
            raise SchemaError(f"expected {len(ASPECTS)} scores, got {len(values)}")
        return cls(*[float(v) for v in values])


class Frame:
    """One decoded frame: a (h, w) or (h, w, c) intensity grid, c in {1, 3}.

    Floating-point frames hold intensities in [0, 1] (the internal
    convention); uint8 frames hold raw 8-bit values and are normalized on
    entry to any metric.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels)
        if pixels.ndim == 3 and pixels.shape[2] == 1:
            pixels = pixels[:, :, 0]
        if pixels.ndim not in (2, 3):
            raise SchemaError(f"frame must be 2-D or 3-D, got shape {pixels.shape}")
        if pixels.ndim == 3 and pixels.shape[2] != 3:
            raise SchemaError(f"frame channel count must be 1 or 3, got {pixels.shape[2]}")
        if pixels.size == 0:
            raise SchemaError("frame has no pixels")
        if pixels.dtype == np.uint8:
            pass
        elif np.issubdtype(pixels.dtype, np.floating):
            if not np.all(np.isfinite(pixels)):
                raise SchemaError("frame contains non-finite intensities")
            lo, hi = float(pixels.min()), float(pixels.max())
            if lo < 0.0 or hi > 1.0:
                raise SchemaError(f"float frame intensities must lie in [0, 1], got [{lo}, {hi}]")
        else:
            raise SchemaError(f"unsupported frame dtype {pixels.dtype}")
        self.pixels = pixels

    @classmethod
    def from_uint8(cls, pixels: np.ndarray) -> "Frame":
        """Normalize an 8-bit frame into the internal [0, 1] convention."""
        arr = np.asarray(pixels)
        if arr.dtype != np.uint8:
            raise SchemaError(f"expected uint8 pixels, got {arr.dtype}")
        return cls(arr.astype(np.float64) / 255.0)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else self.pixels.shape[2]

    def same_shape(self, other: "Frame") -> bool:
        return self.pixels.shape == other.pixels.shape

    def __repr__(self):
        return f"Frame({self.width}x{self.height}x{self.channels}, {self.pixels.dtype})"


class FrameSequence:
    """An ordered, non-empty list of same-shaped frames at a fixed fps."""

    __slots__ = ("frames", "fps")

    def __init__(self, frames: Sequence[Frame], fps: int):
        frames = list(frames)
        if not frames:
            raise SchemaError("frame sequence must be non-empty")
        if not (isinstance(fps, int) and fps >= 1):
            raise SchemaError(f"fps must be a positive integer, got {fps!r}")
        first = frames[0]
        for f in frames[1:]:
            if not first.same_shape(f):
                raise SchemaError("all frames in a sequence must share shape and channels")
        self.frames = frames
        self.fps = fps

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __getitem__(self, i: int) -> Frame:
        return self.frames[i]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def channels(self) -> int:
        return self.frames[0].channels

    def __repr__(self):
        return f"FrameSequence({len(self.frames)} frames @ {self.fps} fps, {self.width}x{self.height})"


@dataclass(frozen=True)
class VideoRecord:
    """One video under evaluation; pixels live behind ``media_path``."""

    id: str
    model_name: str
    prompt: str
    media_path: str
    fps: int
    width: int
    height: int
    duration_s: float
    scores: AspectScores | None = None

    def __post_init__(self):
        if not self.id:
            raise SchemaError("record id must be a non-empty string")

    def to_json_obj(self) -> dict:
        obj = {
            "id": self.id,
            "model_name": self.model_name,
            "prompt": self.prompt,
            "media_path": self.media_path,
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "duration_s": self.duration_s,
        }
        if self.scores is not None:
            obj["scores"] = self.scores.as_dict()
        return obj

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "VideoRecord":
        if not isinstance(obj, Mapping):
            raise SchemaError(f"record must be an object, got {type(obj).__name__}")
        required = ("id", "model_name", "prompt", "media_path", "fps", "width", "height", "duration_s")
        missing = [k for k in required if k not in obj]
        if missing:
            raise SchemaError(f"record missing keys {missing}")
        try:
            scores = None
            if obj.get("scores") is not None:
                scores = AspectScores.from_dict(obj["scores"])
            return cls(
                id=str(obj["id"]),
                model_name=str(obj["model_name"]),
                prompt=str(obj["prompt"]),
                media_path=str(obj["media_path"]),
                fps=int(obj["fps"]),
                width=int(obj["width"]),
                height=int(obj["height"]),
                duration_s=float(obj["duration_s"]),
                scores=scores,
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"record field with wrong type: {exc}") from exc


@dataclass(frozen=True)
class PreferencePair:
    """Two video ids plus the human verdict between them.

    ``aspect`` optionally tags the pair with the benchmark sub-aspect it was
    judged under, so preference runs can be grouped per aspect.
    """

    left: str
    right: str
    verdict: Verdict
    aspect: str | None = None

    def __post_init__(self):
        if self.left == self.right:
            raise SchemaError(f"preference pair references the same id twice: {self.left!r}")

    def to_json_obj(self) -> dict:
        obj = {"left": self.left, "right": self.right, "verdict": self.verdict.value}
        if self.aspect is not None:
            obj["aspect"] = self.aspect
        return obj

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PreferencePair":
        if not isinstance(obj, Mapping):
            raise SchemaError(f"pair must be an object, got {type(obj).__name__}")
        missing = [k for k in ("left", "right", "verdict") if k not in obj]
        if missing:
            raise SchemaError(f"pair missing keys {missing}")
        try:
            verdict = Verdict(obj["verdict"])
        except ValueError as exc:
            raise SchemaError(f"unknown verdict {obj['verdict']!r}") from exc
        aspect = obj.get("aspect")
        return cls(left=str(obj["left"]), right=str(obj["right"]), verdict=verdict,
                   aspect=None if aspect is None else str(aspect))


@dataclass(frozen=True)
class MetricValue:
    """A raw feature-metric output, tagged with its name and direction."""

    metric_name: str
    direction: Direction
    raw: float

    def __post_init__(self):
        if not math.isfinite(self.raw):
            raise SchemaError(f"metric {self.metric_name!r} produced non-finite value {self.raw!r}")


# --- JSON Lines helpers -------------------------------------------------------

def dump_records_jsonl(records: Iterable[VideoRecord]) -> str:
    return "".join(json.dumps(r.to_json_obj(), sort_keys=True) + "\n" for r in records)


def parse_jsonl(text: str) -> Iterator[tuple[int, object]]:
    """Yield (1-based line number, parsed object) for each non-blank line."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
