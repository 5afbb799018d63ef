import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from videval.errors import (
    InvalidTarget,
    NoInterpolatorConfigured,
    TargetExceedsSource,
    TooFewFrames,
    UnreadableMedia,
)
from videval.model import Frame, FrameSequence
from videval.pipeline import (
    ImageDirDecoder,
    PipelineConfig,
    PromptFilterResult,
    crop_center,
    downsample_fps,
    extract_frames,
    filter_prompt,
    is_static,
    uniform_sample,
)
from .conftest import constant_video, make_record, make_video
from .oracles import oracle_nearest_indices


def indexed_video(n, fps, shape=(4, 4)):
    """Each frame's constant value encodes its index, so picks are traceable."""
    return FrameSequence([Frame(np.full(shape, i / (2 * n))) for i in range(n)], fps)


def frame_index(seq_or_frame, n):
    px = seq_or_frame.pixels if isinstance(seq_or_frame, Frame) else seq_or_frame
    return round(float(px[0, 0]) * 2 * n)


class TestDownsample:
    def test_24_to_8_picks_every_third(self):
        video = indexed_video(24, 24)
        out = downsample_fps(video, 8)
        assert out.fps == 8
        assert [frame_index(f, 24) for f in out] == [0, 3, 6, 9, 12, 15, 18, 21]

    def test_identity_at_equal_fps(self):
        video = indexed_video(16, 8)
        out = downsample_fps(video, 8)
        assert out.fps == 8
        assert [frame_index(f, 16) for f in out] == list(range(16))

    def test_23_to_8_matches_nearest_time_oracle(self):
        video = indexed_video(23, 23)
        out = downsample_fps(video, 8)
        indices = [frame_index(f, 23) for f in out]
        # frozen from the index formula round(j * 23 / 8)
        assert indices == [0, 3, 6, 9, 12, 14, 17, 20]
        for j, idx in enumerate(indices):
            assert idx in oracle_nearest_indices(23, 23, 8, j)

    def test_invalid_targets(self):
        video = indexed_video(8, 8)
        with pytest.raises(InvalidTarget):
            downsample_fps(video, 9)
        with pytest.raises(InvalidTarget):
            downsample_fps(video, 0)

    def test_too_short_for_target(self):
        video = indexed_video(1, 24)
        with pytest.raises(TooFewFrames):
            downsample_fps(video, 8)

    @given(n=st.integers(2, 60), src=st.integers(2, 30), dst=st.integers(1, 30))
    @settings(max_examples=80, deadline=None)
    def test_indices_strictly_increase(self, n, src, dst):
        if dst > src:
            return
        video = indexed_video(n, src)
        try:
            out = downsample_fps(video, dst)
        except TooFewFrames:
            assert (n * dst) // src == 0
            return
        indices = [frame_index(f, n) for f in out]
        assert all(b > a for a, b in zip(indices, indices[1:]))
        assert out.fps == dst
        # idempotent once at the destination rate
        again = downsample_fps(out, dst)
        assert [frame_index(f, n) for f in again] == indices


class TestCropCenter:
    def test_center_window(self):
        px = np.zeros((6, 8))
        px[2:4, 3:5] = 0.5
        video = FrameSequence([Frame(px)], 8)
        out = crop_center(video, 2, 2)
        assert out.width == 2 and out.height == 2
        assert np.all(out[0].pixels == 0.5)
        assert out.fps == 8

    def test_identity_crop(self):
        video = make_video(3, shape=(6, 8))
        out = crop_center(video, 8, 6)
        assert np.array_equal(out[0].pixels, video[0].pixels)

    def test_watermark_crop_shape(self):
        video = FrameSequence([Frame(np.zeros((640, 1088)))], 8)
        out = crop_center(video, 768, 480)
        assert (out.width, out.height) == (768, 480)

    def test_target_exceeds_source(self):
        video = FrameSequence([Frame(np.zeros((640, 1088)))], 8)
        with pytest.raises(TargetExceedsSource):
            crop_center(video, 2000, 480)


class TestUniformSample:
    def test_16_to_4(self):
        video = indexed_video(16, 8)
        picked = uniform_sample(video, 4)
        assert [frame_index(f, 16) for f in picked] == [0, 5, 10, 15]

    def test_full_sequence(self):
        video = indexed_video(4, 8)
        picked = uniform_sample(video, 4)
        assert [frame_index(f, 4) for f in picked] == [0, 1, 2, 3]

    def test_too_few(self):
        with pytest.raises(TooFewFrames):
            uniform_sample(indexed_video(3, 8), 4)

    @given(n_frames=st.integers(2, 80), n=st.integers(2, 10))
    @settings(max_examples=80, deadline=None)
    def test_endpoints_and_monotonic(self, n_frames, n):
        if n > n_frames:
            return
        video = indexed_video(n_frames, 8)
        indices = [frame_index(f, n_frames) for f in uniform_sample(video, n)]
        assert indices[0] == 0
        assert indices[-1] == n_frames - 1
        assert all(b > a for a, b in zip(indices, indices[1:]))


class TestIsStatic:
    def test_constant_video_is_static(self):
        assert is_static(constant_video(12), PipelineConfig()) is True

    def test_constant_video_static_under_any_sane_config(self):
        for ssim_min, mse_max in [(1.0, 0.0), (0.5, 1.0), (0.999, 1e-12)]:
            config = PipelineConfig(static_ssim_min=ssim_min, static_mse_max=mse_max)
            assert is_static(constant_video(8), config) is True

    def test_alternating_black_white_is_not(self):
        frames = [Frame(np.full((4, 4), float(i % 2))) for i in range(8)]
        assert is_static(FrameSequence(frames, 8), PipelineConfig()) is False

    def test_threshold_aggregation_matches_hand_mean(self, rng):
        from videval import metrics
        from videval.pipeline import uniform_sample as us

        base = rng.random((8, 8)) * 0.8 + 0.1
        frames = [Frame(np.clip(base + rng.normal(0, 0.002, base.shape), 0, 1)) for _ in range(4)]
        video = FrameSequence(frames, 8)
        sampled = us(video, 4)
        mean_ssim = sum(metrics.ssim(a, b) for a, b in zip(sampled, sampled[1:])) / 3
        mean_mse = sum(metrics.mse(a, b) for a, b in zip(sampled, sampled[1:])) / 3
        for ssim_min, mse_max in [(0.9, 1e-2), (0.99999, 1e-9), (mean_ssim, mean_mse)]:
            config = PipelineConfig(static_ssim_min=ssim_min, static_mse_max=mse_max)
            assert is_static(video, config) == (mean_ssim >= ssim_min and mean_mse <= mse_max)

    def test_too_few_frames(self):
        with pytest.raises(TooFewFrames):
            is_static(constant_video(3), PipelineConfig())


class TestFilterPrompt:
    def test_short_prompt_rejected(self):
        assert filter_prompt("a red fox", PipelineConfig()) == PromptFilterResult(False, "too_short")

    def test_five_words_accepted(self):
        assert filter_prompt("a red fox jumps high", PipelineConfig()).accepted

    def test_101_words_rejected(self):
        prompt = " ".join(["word"] * 101)
        assert filter_prompt(prompt, PipelineConfig()) == PromptFilterResult(False, "too_long")

    def test_100_words_accepted(self):
        prompt = " ".join(["word"] * 100)
        assert filter_prompt(prompt, PipelineConfig()).accepted

    def test_whitespace_runs_count_once(self):
        assert filter_prompt("one\t two   three\nfour five", PipelineConfig()).accepted

    def test_nsfw_hook(self):
        class Flagger:
            def is_nsfw(self, prompt):
                return "bad" in prompt

        result = filter_prompt("a very bad prompt here", PipelineConfig(), Flagger())
        assert result == PromptFilterResult(False, "nsfw")


class FakeDecoder:
    def __init__(self, n, fps, fail=False):
        self.n, self.fps, self.fail = n, fps, fail

    def decode(self, record):
        if self.fail:
            raise IOError("cannot open")
        rng = np.random.default_rng(0)
        return [rng.integers(0, 256, (4, 4, 3), dtype=np.uint8) for _ in range(self.n)], self.fps


class DoublingInterpolator:
    def interpolate(self, frames, target_fps):
        doubled = []
        for f in frames:
            doubled += [f, f]
        return FrameSequence(doubled, target_fps)


class TestExtractFrames:
    def test_source_already_at_target(self):
        out = extract_frames(make_record(0), PipelineConfig(), FakeDecoder(16, 8))
        assert out.fps == 8 and len(out) == 16

    def test_downsamples_high_fps(self):
        out = extract_frames(make_record(0), PipelineConfig(), FakeDecoder(24, 24))
        assert out.fps == 8 and len(out) == 8

    def test_low_fps_without_interpolator(self):
        with pytest.raises(NoInterpolatorConfigured):
            extract_frames(make_record(0), PipelineConfig(), FakeDecoder(8, 4))

    def test_low_fps_with_interpolator(self):
        out = extract_frames(make_record(0), PipelineConfig(), FakeDecoder(8, 4), DoublingInterpolator())
        assert out.fps == 8 and len(out) == 16

    def test_decoder_failure_wrapped(self):
        with pytest.raises(UnreadableMedia):
            extract_frames(make_record(0), PipelineConfig(), FakeDecoder(8, 8, fail=True))


class TestImageDirDecoder:
    def test_reads_sorted_frames(self, tmp_path):
        from PIL import Image

        d = tmp_path / "frames" / "vid-0000"
        d.mkdir(parents=True)
        for i in range(4):
            Image.fromarray(np.full((4, 4, 3), i * 10, dtype=np.uint8)).save(d / f"{i:03d}.png")
        decoder = ImageDirDecoder(root=str(tmp_path))
        frames, fps = decoder.decode(make_record(0))
        assert fps == 8 and len(frames) == 4
        assert frames[2][0, 0, 0] == 20

    def test_missing_dir(self, tmp_path):
        with pytest.raises(UnreadableMedia):
            ImageDirDecoder(root=str(tmp_path)).decode(make_record(7))
