import numpy as np
import pytest

from videval.model import AspectScores, Frame, FrameSequence, VideoRecord


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_frame(value=None, shape=(8, 8), rng=None, channels=1):
    """A constant frame at `value`, or a random one when value is None."""
    full_shape = shape if channels == 1 else (*shape, channels)
    if value is not None:
        return Frame(np.full(full_shape, float(value)))
    assert rng is not None
    return Frame(rng.random(full_shape))


def make_video(n_frames, fps=8, shape=(8, 8), seed=0, channels=1):
    rng = np.random.default_rng(seed)
    return FrameSequence(
        [make_frame(rng=rng, shape=shape, channels=channels) for _ in range(n_frames)], fps
    )


def constant_video(n_frames, value=0.5, fps=8, shape=(8, 8)):
    return FrameSequence([make_frame(value, shape) for _ in range(n_frames)], fps)


def smooth_video(n_frames, fps=8, shape=(8, 8), seed=0, step=0.02, channels=3):
    """Random base plus small per-frame drift: adjacent frames stay similar."""
    rng = np.random.default_rng(seed)
    full_shape = shape if channels == 1 else (*shape, channels)
    base = rng.random(full_shape)
    frames = []
    for _ in range(n_frames):
        base = np.clip(base + rng.normal(0.0, step, full_shape), 0.0, 1.0)
        frames.append(Frame(base.copy()))
    return FrameSequence(frames, fps)


def make_record(i, scores=None, model="model-a", prompt=None):
    return VideoRecord(
        id=f"vid-{i:04d}",
        model_name=model,
        prompt=prompt if prompt is not None else f"a test prompt number {i} with enough words",
        media_path=f"frames/vid-{i:04d}",
        fps=8,
        width=16,
        height=16,
        duration_s=2.0,
        scores=None if scores is None else AspectScores.from_vector(scores),
    )


def labeled_records(n, seed=0, model="model-a"):
    """n records with integer labels drawn uniformly from 1..4."""
    rng = np.random.default_rng(seed)
    return [
        make_record(i, scores=[float(v) for v in rng.integers(1, 5, size=5)], model=model)
        for i in range(n)
    ]
