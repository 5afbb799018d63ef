"""Frame preprocessing: decode, fps-normalize, crop, sample, and filter.

Decoding, frame interpolation, and NSFW classification are external hooks;
everything else here is pure and deterministic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from videval import metrics
from videval.errors import (
    InvalidTarget,
    NoInterpolatorConfigured,
    ProviderError,
    SchemaError,
    TargetExceedsSource,
    TooFewFrames,
    UnreadableMedia,
    VidevalError,
)
from videval.model import Frame, FrameSequence, VideoRecord


@dataclass(frozen=True)
class PipelineConfig:
    target_fps: int = 8
    sample_count_for_dynamics: int = 4
    static_ssim_min: float = 0.995
    static_mse_max: float = 1e-4  # on [0, 1] intensities
    prompt_min_words: int = 5
    prompt_max_words: int = 100

    def __post_init__(self):
        if self.target_fps < 1:
            raise SchemaError("target_fps must be >= 1")
        if self.sample_count_for_dynamics < 2:
            raise SchemaError("sample_count_for_dynamics must be >= 2")


class FrameDecoder(Protocol):
    """External hook that turns a media locator into raw frames."""

    def decode(self, record: VideoRecord) -> tuple[list[np.ndarray], int]:
        """Return ([h x w x c arrays, uint8 or unit-float], source_fps)."""
        ...


class FrameInterpolator(Protocol):
    """External hook that raises the frame rate of a sequence."""

    def interpolate(self, frames: FrameSequence, target_fps: int) -> FrameSequence: ...


class NsfwClassifier(Protocol):
    """External hook flagging prompts with inappropriate content."""

    def is_nsfw(self, prompt: str) -> bool: ...


@dataclass(frozen=True)
class PromptFilterResult:
    accepted: bool
    reason: str | None = None  # "too_short" | "too_long" | "nsfw"


def _to_frame(raw: np.ndarray) -> Frame:
    arr = np.asarray(raw)
    if arr.dtype == np.uint8:
        return Frame.from_uint8(arr)
    return Frame(arr)


def extract_frames(
    record: VideoRecord,
    config: PipelineConfig,
    decoder: FrameDecoder,
    interpolator: FrameInterpolator | None = None,
) -> FrameSequence:
    """Decode a record and normalize it to ``config.target_fps``.

    Sources above the target rate are uniformly down-sampled; sources below
    it go through the interpolation hook, or fail when none is configured.
    """
    try:
        raw_frames, src_fps = decoder.decode(record)
    except VidevalError:
        raise
    except Exception as exc:
        raise UnreadableMedia(f"decoder failed on {record.media_path!r}: {exc}") from exc
    if not raw_frames:
        raise UnreadableMedia(f"decoder produced no frames for {record.media_path!r}")
    try:
        seq = FrameSequence([_to_frame(f) for f in raw_frames], int(src_fps))
    except SchemaError as exc:
        raise UnreadableMedia(f"decoder output invalid for {record.media_path!r}: {exc}") from exc

    if seq.fps == config.target_fps:
        return seq
    if seq.fps > config.target_fps:
        return downsample_fps(seq, config.target_fps)
    if interpolator is None:
        raise NoInterpolatorConfigured(
            f"source fps {seq.fps} below target {config.target_fps} and no interpolation hook configured"
        )
    out = interpolator.interpolate(seq, config.target_fps)
    if out.fps != config.target_fps:
        raise ProviderError(f"interpolator returned fps {out.fps}, expected {config.target_fps}")
    return out


def downsample_fps(frames: FrameSequence, dst_fps: int) -> FrameSequence:
    """Uniformly down-sample a sequence to a lower frame rate.

    Output frame j is the input frame whose timestamp is nearest to j/dst_fps,
    i.e. index round(j * src_fps / dst_fps) clamped to the valid range.
    """
    if dst_fps < 1 or dst_fps > frames.fps:
        raise InvalidTarget(f"cannot downsample {frames.fps} fps to {dst_fps} fps")
    if dst_fps == frames.fps:
        return FrameSequence(list(frames.frames), dst_fps)
    n = len(frames)
    m = (n * dst_fps) // frames.fps
    if m == 0:
        raise TooFewFrames(f"{n} frames at {frames.fps} fps yield no frames at {dst_fps} fps")
    ratio = frames.fps / dst_fps
    indices = [min(n - 1, max(0, round(j * ratio))) for j in range(m)]
    return FrameSequence([frames.frames[i] for i in indices], dst_fps)


def crop_center(frames: FrameSequence, target_w: int, target_h: int) -> FrameSequence:
    """Center-crop every frame to (target_w, target_h)."""
    if target_w < 1 or target_h < 1:
        raise TargetExceedsSource(f"crop target ({target_w}, {target_h}) must be positive")
    if target_w > frames.width or target_h > frames.height:
        raise TargetExceedsSource(
            f"crop target ({target_w}, {target_h}) exceeds source ({frames.width}, {frames.height})"
        )
    if target_w == frames.width and target_h == frames.height:
        return FrameSequence(list(frames.frames), frames.fps)
    y0 = (frames.height - target_h) // 2
    x0 = (frames.width - target_w) // 2
    cropped = [Frame(f.pixels[y0:y0 + target_h, x0:x0 + target_w]) for f in frames]
    return FrameSequence(cropped, frames.fps)


def uniform_sample(frames: FrameSequence, n: int) -> list[Frame]:
    """Pick n evenly spaced frames, always including the first and last."""
    if n < 2:
        raise TooFewFrames(f"uniform_sample needs n >= 2, got {n}")
    if len(frames) < n:
        raise TooFewFrames(f"cannot sample {n} frames from a {len(frames)}-frame sequence")
    last = len(frames) - 1
    indices = [round(i * last / (n - 1)) for i in range(n)]
    return [frames.frames[i] for i in indices]


def is_static(frames: FrameSequence, config: PipelineConfig) -> bool:
    """True when sampled adjacent frames are near-identical.

    Samples ``config.sample_count_for_dynamics`` frames uniformly and flags
    the video as static iff the mean adjacent-pair SSIM is at least
    ``static_ssim_min`` and the mean adjacent-pair MSE is at most
    ``static_mse_max``.
    """
    sampled = uniform_sample(frames, config.sample_count_for_dynamics)
    ssims = [metrics.ssim(a, b) for a, b in zip(sampled, sampled[1:])]
    mses = [metrics.mse(a, b) for a, b in zip(sampled, sampled[1:])]
    mean_ssim = sum(ssims) / len(ssims)
    mean_mse = sum(mses) / len(mses)
    return mean_ssim >= config.static_ssim_min and mean_mse <= config.static_mse_max


def filter_prompt(
    prompt: str,
    config: PipelineConfig,
    nsfw_classifier: NsfwClassifier | None = None,
) -> PromptFilterResult:
    """Accept or reject a generation prompt.

    Words are runs of non-whitespace.  The NSFW check only runs when a
    classifier hook is configured.
    """
    words = prompt.split()
    if len(words) < config.prompt_min_words:
        return PromptFilterResult(False, "too_short")
    if len(words) > config.prompt_max_words:
        return PromptFilterResult(False, "too_long")
    if nsfw_classifier is not None and nsfw_classifier.is_nsfw(prompt):
        return PromptFilterResult(False, "nsfw")
    return PromptFilterResult(True)


class ImageDirDecoder:
    """Decoder for records whose media_path is a directory of image frames.

    Frames are read in sorted filename order; the source fps is taken from
    the record.  Paths are resolved against ``root`` when given.
    """

    EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

    def __init__(self, root: str | None = None):
        self.root = root

    def decode(self, record: VideoRecord) -> tuple[list[np.ndarray], int]:
        from PIL import Image

        path = record.media_path
        if self.root is not None and not os.path.isabs(path):
            path = os.path.join(self.root, path)
        if not os.path.isdir(path):
            raise UnreadableMedia(f"not a frame directory: {path!r}")
        names = sorted(
            n for n in os.listdir(path) if n.lower().endswith(self.EXTENSIONS)
        )
        if not names:
            raise UnreadableMedia(f"no image frames under {path!r}")
        frames = []
        for name in names:
            with Image.open(os.path.join(path, name)) as img:
                frames.append(np.asarray(img.convert("RGB"), dtype=np.uint8))
        return frames, record.fps
