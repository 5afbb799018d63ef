"""Feature-based quality metrics over frame sequences.

SSIM here is the global-statistics variant: one window covering the whole
frame, constants C1 = (0.01 L)^2 and C2 = (0.03 L)^2 with dynamic range
L = 1 (frames are normalized to [0, 1]).  Color frames are converted to
luma with Rec. 601 weights before SSIM.

Neural features (CLIP/DINO-style embeddings, no-reference IQA scores) come
from provider hooks; the functions here only aggregate them.
"""

from __future__ import annotations

import math
from typing import Protocol, Sequence

import numpy as np

from videval import kernels
from videval.errors import ProviderError, ShapeMismatch, TooFewFrames
from videval.model import Direction, Frame, FrameSequence, MetricValue

SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

_REC601 = np.array([0.299, 0.587, 0.114])

# Canonical metric names; bin rules are keyed by these.
PIQE = "PIQE"
BRISQUE = "BRISQUE"
CLIP_SIM = "CLIP-sim"
DINO_SIM = "DINO-sim"
SSIM_SIM = "SSIM-sim"
MSE_DYN_UNIT = "MSE-dyn-unit"  # MSE on [0, 1] intensities; "MSE-dyn" is the 8-bit-units scale
SSIM_DYN = "SSIM-dyn"
CLIP_SCORE = "CLIP-Score"
XCLIP_SCORE = "X-CLIP-Score"


class EmbeddingProvider(Protocol):
    """External service exposing frame-, text-, and video-embedding endpoints."""

    def embed_frames(self, frames: Sequence[Frame]) -> list[np.ndarray]: ...

    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_video(self, frames: Sequence[Frame]) -> np.ndarray: ...


class IqaProvider(Protocol):
    """External no-reference image-quality scorer; lower scores are better."""

    def iqa(self, frames: Sequence[Frame]) -> list[float]: ...


def _unit(frame: Frame) -> np.ndarray:
    """Frame pixels as float64 intensities in [0, 1]."""
    px = frame.pixels
    if px.dtype == np.uint8:
        return px.astype(np.float64) / 255.0
    return px.astype(np.float64, copy=False)


def _luma(frame: Frame) -> np.ndarray:
    px = _unit(frame)
    if px.ndim == 2:
        return px
    return px @ _REC601


def _check_shapes(a: Frame, b: Frame):
    if not a.same_shape(b):
        raise ShapeMismatch(
            f"frame shapes differ: {a.pixels.shape} vs {b.pixels.shape}"
        )


def ssim(a: Frame, b: Frame) -> float:
    """Global-statistics SSIM between two frames, in [-1, 1]."""
    _check_shapes(a, b)
    la, lb = _luma(a), _luma(b)
    n = la.size
    sa, sb, saa, sbb, sab = kernels.pair_sums(la, lb)
    mu_a = sa / n
    mu_b = sb / n
    var_a = saa / n - mu_a * mu_a
    var_b = sbb / n - mu_b * mu_b
    cov = sab / n - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return num / den


def mse(a: Frame, b: Frame) -> float:
    """Mean squared intensity difference over all pixels and channels."""
    _check_shapes(a, b)
    fa, fb = _unit(a), _unit(b)
    return kernels.sq_diff_sum(fa, fb) / fa.size


def ssim_sim(frames: FrameSequence) -> MetricValue:
    """Mean SSIM over all adjacent frame pairs."""
    if len(frames) < 2:
        raise TooFewFrames("ssim_sim needs at least 2 frames")
    vals = [ssim(a, b) for a, b in zip(frames.frames, frames.frames[1:])]
    return MetricValue(SSIM_SIM, Direction.HIGHER_BETTER, sum(vals) / len(vals))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ProviderError("provider returned a zero-norm embedding")
    return float(np.dot(u, v)) / (nu * nv)


def _check_embeddings(vectors: Sequence[np.ndarray], expected: int) -> list[np.ndarray]:
    if len(vectors) != expected:
        raise ProviderError(f"provider returned {len(vectors)} embeddings for {expected} frames")
    out = [np.asarray(v, dtype=np.float64) for v in vectors]
    dims = {v.shape for v in out}
    if len(dims) > 1 or any(v.ndim != 1 for v in out):
        raise ProviderError(f"provider returned inconsistent embedding shapes: {dims}")
    for v in out:
        if not np.all(np.isfinite(v)):
            raise ProviderError("provider returned non-finite embedding entries")
    return out


def embed_temporal_sim(
    frames: FrameSequence,
    provider: EmbeddingProvider,
    metric_name: str = CLIP_SIM,
) -> MetricValue:
    """Mean cosine similarity of adjacent frame embeddings.

    Covers both CLIP-sim and DINO-sim; which one is computed depends on the
    encoder behind the provider's frame-embedding endpoint.
    """
    if len(frames) < 2:
        raise TooFewFrames("embed_temporal_sim needs at least 2 frames")
    embs = _check_embeddings(provider.embed_frames(frames.frames), len(frames))
    cosines = [_cosine(u, v) for u, v in zip(embs, embs[1:])]
    return MetricValue(metric_name, Direction.HIGHER_BETTER, sum(cosines) / len(cosines))


def dynamic_scores(frames: FrameSequence, n: int = 4) -> tuple[MetricValue, MetricValue]:
    """Dynamic-degree scores from n uniformly sampled frames.

    Returns (mse_dyn, ssim_dyn): the mean MSE (higher = more dynamic) and
    mean SSIM (lower = more dynamic) over the n-1 adjacent sampled pairs.
    MSE is on the [0, 1] intensity scale, hence the MSE-dyn-unit name.
    """
    from videval.pipeline import uniform_sample

    sampled = uniform_sample(frames, n)
    mses = [mse(a, b) for a, b in zip(sampled, sampled[1:])]
    ssims = [ssim(a, b) for a, b in zip(sampled, sampled[1:])]
    return (
        MetricValue(MSE_DYN_UNIT, Direction.HIGHER_BETTER, sum(mses) / len(mses)),
        MetricValue(SSIM_DYN, Direction.LOWER_BETTER, sum(ssims) / len(ssims)),
    )


def text_frame_alignment(
    frames: FrameSequence,
    prompt: str,
    provider: EmbeddingProvider,
    metric_name: str = CLIP_SCORE,
) -> MetricValue:
    """Mean cosine between each frame embedding and the prompt embedding."""
    text_emb = np.asarray(provider.embed_text(prompt), dtype=np.float64)
    if not np.all(np.isfinite(text_emb)):
        raise ProviderError("provider returned non-finite text embedding")
    embs = _check_embeddings(provider.embed_frames(frames.frames), len(frames))
    cosines = [_cosine(e, text_emb) for e in embs]
    return MetricValue(metric_name, Direction.HIGHER_BETTER, sum(cosines) / len(cosines))


def text_video_alignment(
    frames: FrameSequence,
    prompt: str,
    provider: EmbeddingProvider,
    metric_name: str = XCLIP_SCORE,
) -> MetricValue:
    """Cosine between the video-level embedding and the prompt embedding."""
    text_emb = np.asarray(provider.embed_text(prompt), dtype=np.float64)
    video_emb = np.asarray(provider.embed_video(frames.frames), dtype=np.float64)
    for emb in (text_emb, video_emb):
        if not np.all(np.isfinite(emb)):
            raise ProviderError("provider returned non-finite embedding")
    return MetricValue(metric_name, Direction.HIGHER_BETTER, _cosine(video_emb, text_emb))


def iqa_video_score(
    frames: FrameSequence,
    provider: IqaProvider,
    metric_name: str = PIQE,
) -> MetricValue:
    """Mean per-frame score from a no-reference IQA provider."""
    values = provider.iqa(frames.frames)
    if len(values) != len(frames):
        raise ProviderError(f"IQA provider returned {len(values)} scores for {len(frames)} frames")
    vals = [float(v) for v in values]
    if not all(math.isfinite(v) for v in vals):
        raise ProviderError("IQA provider returned non-finite scores")
    return MetricValue(metric_name, Direction.LOWER_BETTER, sum(vals) / len(vals))
