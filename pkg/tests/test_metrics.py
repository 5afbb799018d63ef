import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from videval import metrics
from videval.errors import ProviderError, ShapeMismatch, TooFewFrames
from videval.model import Direction, Frame, FrameSequence
from .conftest import constant_video, make_frame, make_video
from .oracles import oracle_mse, oracle_ssim


def const_ssim(mu_a, mu_b):
    """Closed form for constant frames: variances and covariance vanish."""
    c1 = metrics.SSIM_C1
    return (2 * mu_a * mu_b + c1) / (mu_a ** 2 + mu_b ** 2 + c1)


class TestSsim:
    def test_identical_frames(self, rng):
        f = make_frame(rng=rng, shape=(16, 16))
        assert metrics.ssim(f, f) == 1.0

    def test_constant_frames_closed_form(self):
        got = metrics.ssim(make_frame(0.2), make_frame(0.4))
        assert got == pytest.approx(const_ssim(0.2, 0.4), abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            metrics.ssim(make_frame(0.5, (4, 4)), make_frame(0.5, (4, 5)))
        with pytest.raises(ShapeMismatch):
            metrics.ssim(make_frame(0.5, (4, 4)), make_frame(0.5, (4, 4), channels=3))

    def test_agrees_with_loop_oracle(self, rng):
        for _ in range(10):
            a = rng.random((12, 10))
            b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
            got = metrics.ssim(Frame(a), Frame(b))
            assert got == pytest.approx(oracle_ssim(a.tolist(), b.tolist()), abs=1e-6)

    def test_color_frames_use_luma(self, rng):
        a = rng.random((6, 6, 3))
        b = rng.random((6, 6, 3))
        got = metrics.ssim(Frame(a), Frame(b))
        assert got == pytest.approx(oracle_ssim(a.tolist(), b.tolist()), abs=1e-6)

    def test_uint8_frames_accepted(self):
        a = Frame(np.full((4, 4), 51, dtype=np.uint8))   # 0.2
        b = Frame(np.full((4, 4), 102, dtype=np.uint8))  # 0.4
        assert metrics.ssim(a, b) == pytest.approx(const_ssim(0.2, 0.4), abs=1e-9)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        a = Frame(rng.random((8, 8)))
        b = Frame(rng.random((8, 8)))
        assert metrics.ssim(a, b) == pytest.approx(metrics.ssim(b, a), abs=1e-12)


class TestMse:
    def test_identical(self, rng):
        f = make_frame(rng=rng)
        assert metrics.mse(f, f) == 0.0

    def test_zeros_vs_ones(self):
        assert metrics.mse(make_frame(0.0), make_frame(1.0)) == 1.0

    def test_hand_case(self):
        a = Frame(np.zeros((2, 2)))
        b = Frame(np.array([[0.5, 0.0], [0.0, 0.0]]))
        assert metrics.mse(a, b) == pytest.approx(0.0625)  # 0.25 / 4

    def test_oracle_agreement(self, rng):
        a = rng.random((5, 7, 3))
        b = rng.random((5, 7, 3))
        got = metrics.mse(Frame(a), Frame(b))
        assert got == pytest.approx(oracle_mse(a.tolist(), b.tolist()), abs=1e-12)

    def test_nonnegative_zero_iff_identical(self, rng):
        a = make_frame(rng=rng)
        b = make_frame(rng=rng)
        assert metrics.mse(a, b) > 0.0
        assert metrics.mse(a, a) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            metrics.mse(make_frame(0.5, (4, 4)), make_frame(0.5, (5, 4)))


class TestSsimSim:
    def test_constant_video(self):
        assert metrics.ssim_sim(constant_video(6)).raw == pytest.approx(1.0)

    def test_mean_over_adjacent_pairs(self):
        video = FrameSequence([make_frame(0.2), make_frame(0.4), make_frame(0.4)], 8)
        expected = (const_ssim(0.2, 0.4) + 1.0) / 2
        got = metrics.ssim_sim(video)
        assert got.metric_name == metrics.SSIM_SIM
        assert got.direction == Direction.HIGHER_BETTER
        assert got.raw == pytest.approx(expected, abs=1e-9)

    def test_single_frame(self):
        with pytest.raises(TooFewFrames):
            metrics.ssim_sim(constant_video(1))


class VectorsByIndex:
    """Embedding stub: frame i gets vectors[i]; text/video get fixed vectors."""

    def __init__(self, vectors, text=None, video=None):
        self.vectors = [np.asarray(v, dtype=float) for v in vectors]
        self.text = None if text is None else np.asarray(text, dtype=float)
        self.video = None if video is None else np.asarray(video, dtype=float)

    def embed_frames(self, frames):
        return self.vectors[: len(frames)]

    def embed_text(self, text):
        return self.text

    def embed_video(self, frames):
        return self.video


class TestEmbedTemporalSim:
    def test_identical_embeddings(self):
        provider = VectorsByIndex([[1, 0]] * 4)
        assert metrics.embed_temporal_sim(constant_video(4), provider).raw == pytest.approx(1.0)

    def test_orthogonal_embeddings(self):
        provider = VectorsByIndex([[1, 0], [0, 1], [1, 0]])
        assert metrics.embed_temporal_sim(constant_video(3), provider).raw == pytest.approx(0.0)

    def test_half_then_full_cosine(self):
        v1 = [0.5, math.sqrt(3) / 2]
        provider = VectorsByIndex([[1, 0], v1, v1])
        got = metrics.embed_temporal_sim(constant_video(3), provider, metrics.DINO_SIM)
        assert got.metric_name == metrics.DINO_SIM
        assert got.raw == pytest.approx(0.75, abs=1e-9)  # (0.5 + 1.0) / 2

    def test_scale_invariance(self):
        provider = VectorsByIndex([[1, 1], [300, 0], [0.001, 0.002]])
        scaled = VectorsByIndex([[7, 7], [0.3, 0], [10, 20]])
        a = metrics.embed_temporal_sim(constant_video(3), provider).raw
        b = metrics.embed_temporal_sim(constant_video(3), scaled).raw
        assert a == pytest.approx(b, abs=1e-12)

    def test_provider_shape_error(self):
        provider = VectorsByIndex([[1, 0]])  # too few
        with pytest.raises(ProviderError):
            metrics.embed_temporal_sim(constant_video(3), provider)


class TestDynamicScores:
    def test_constant_video(self):
        mse_dyn, ssim_dyn = metrics.dynamic_scores(constant_video(8))
        assert mse_dyn.raw == pytest.approx(0.0)
        assert ssim_dyn.raw == pytest.approx(1.0)
        assert mse_dyn.direction == Direction.HIGHER_BETTER
        assert ssim_dyn.direction == Direction.LOWER_BETTER

    def test_alternating_black_white(self):
        frames = [make_frame(float(i % 2)) for i in range(4)]
        mse_dyn, ssim_dyn = metrics.dynamic_scores(FrameSequence(frames, 8))
        assert mse_dyn.raw == pytest.approx(1.0)
        assert ssim_dyn.raw == pytest.approx(const_ssim(0.0, 1.0), abs=1e-9)

    def test_sampled_pair_indices(self):
        # 16 frames: sampled pairs must be (0,5), (5,10), (10,15)
        values = [i / 31 for i in range(16)]
        video = FrameSequence([make_frame(v) for v in values], 8)
        mse_dyn, ssim_dyn = metrics.dynamic_scores(video)
        picks = [values[0], values[5], values[10], values[15]]
        expected_mse = sum((x - y) ** 2 for x, y in zip(picks, picks[1:])) / 3
        expected_ssim = sum(const_ssim(x, y) for x, y in zip(picks, picks[1:])) / 3
        assert mse_dyn.raw == pytest.approx(expected_mse, abs=1e-12)
        assert ssim_dyn.raw == pytest.approx(expected_ssim, abs=1e-9)

    def test_too_few_frames(self):
        with pytest.raises(TooFewFrames):
            metrics.dynamic_scores(constant_video(3))


class TestTextAlignment:
    def test_frame_alignment_identical(self):
        provider = VectorsByIndex([[1, 0]] * 3, text=[1, 0])
        got = metrics.text_frame_alignment(constant_video(3), "p", provider)
        assert got.raw == pytest.approx(1.0)
        assert got.metric_name == metrics.CLIP_SCORE

    def test_frame_alignment_mean(self):
        e0 = [0.2, math.sqrt(1 - 0.04)]
        e1 = [0.4, math.sqrt(1 - 0.16)]
        provider = VectorsByIndex([e0, e1], text=[1, 0])
        got = metrics.text_frame_alignment(constant_video(2), "p", provider)
        assert got.raw == pytest.approx(0.3, abs=1e-9)

    def test_video_alignment_cosines(self):
        provider = VectorsByIndex([], text=[1, 0], video=[-1, 0])
        assert metrics.text_video_alignment(constant_video(2), "p", provider).raw == pytest.approx(-1.0)
        provider = VectorsByIndex([], text=[1, 0], video=[0.23, math.sqrt(1 - 0.23 ** 2)])
        got = metrics.text_video_alignment(constant_video(2), "p", provider)
        assert got.raw == pytest.approx(0.23, abs=1e-9)
        assert got.metric_name == metrics.XCLIP_SCORE


class FixedIqa:
    def __init__(self, values):
        self.values = values

    def iqa(self, frames):
        return self.values[: len(frames)]


class TestIqaVideoScore:
    def test_constant(self):
        got = metrics.iqa_video_score(constant_video(3), FixedIqa([10.0] * 3))
        assert got.raw == pytest.approx(10.0)
        assert got.direction == Direction.LOWER_BETTER

    def test_mean(self):
        got = metrics.iqa_video_score(constant_video(2), FixedIqa([10.0, 30.0]), metrics.BRISQUE)
        assert got.raw == pytest.approx(20.0)
        assert got.metric_name == metrics.BRISQUE

    def test_bad_provider_output(self):
        with pytest.raises(ProviderError):
            metrics.iqa_video_score(constant_video(3), FixedIqa([1.0]))
        with pytest.raises(ProviderError):
            metrics.iqa_video_score(constant_video(1), FixedIqa([float("nan")]))


class TestStubProviders:
    def test_hash_embeddings_deterministic_and_unit(self, rng):
        from videval.providers import HashEmbeddingStub

        stub = HashEmbeddingStub(dim=32, seed=3)
        video = make_video(3, seed=9)
        e1 = stub.embed_frames(video.frames)
        e2 = stub.embed_frames(video.frames)
        for u, v in zip(e1, e2):
            assert np.array_equal(u, v)
            assert np.linalg.norm(u) == pytest.approx(1.0)
        assert -1.0 <= metrics.embed_temporal_sim(video, stub).raw <= 1.0

    def test_hash_iqa_range(self):
        from videval.providers import HashIqaStub

        values = HashIqaStub(seed=1).iqa(make_video(5, seed=2).frames)
        assert len(values) == 5
        assert all(0.0 <= v < 100.0 for v in values)
