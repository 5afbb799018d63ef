import numpy as np
import pytest

from videval import wire
from videval.errors import ProviderError
from videval.model import Frame


def test_png_round_trip_gray():
    arr = np.arange(64, dtype=np.uint8).reshape(8, 8)
    again = wire.decode_frame(wire.encode_frame(Frame.from_uint8(arr)))
    assert np.array_equal(again, arr)


def test_png_round_trip_color(rng):
    arr = rng.integers(0, 256, (6, 5, 3)).astype(np.uint8)
    again = wire.decode_frame(wire.encode_frame(Frame(arr)))
    assert np.array_equal(again, arr)


def test_unit_float_frames_encode_via_uint8(rng):
    frame = Frame(rng.random((4, 4)))
    decoded = wire.decode_frame(wire.encode_frame(frame))
    assert np.array_equal(decoded, wire.frame_to_uint8(frame))


def test_score_request_shape():
    frames = [Frame(np.zeros((2, 2)))]
    req = wire.score_request("prompt text", frames, "regression")
    assert req["task"] == "score"
    assert req["mode"] == "regression"
    assert isinstance(req["frames"][0], str)
    with pytest.raises(ValueError):
        wire.score_request("p", frames, "ranking")


def test_call_with_retries_stops_on_error_response():
    calls = []

    def transport(url, payload):
        calls.append(1)
        return {"error": "bad payload"}

    with pytest.raises(ProviderError, match="bad payload"):
        wire.call_with_retries(transport, "http://x", {"task": "iqa"}, retries=3)
    assert len(calls) == 1  # definitive answers are not retried


def test_call_with_retries_retries_transport_failures():
    attempts = []

    def transport(url, payload):
        attempts.append(1)
        if len(attempts) < 3:
            raise ProviderError("refused")
        return {"values": [1.0]}

    got = wire.call_with_retries(transport, "http://x", {"task": "iqa"}, retries=3, backoff_s=0.0)
    assert got == {"values": [1.0]}
    assert len(attempts) == 3
