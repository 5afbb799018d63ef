"""Embedding/IQA provider clients: a remote wire-protocol client plus
deterministic in-process stubs for tests and offline runs.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from videval import wire
from videval.errors import ProviderError
from videval.model import Frame


class RemoteProvider:
    """Client for a provider service speaking the wire protocol.

    Implements both the EmbeddingProvider and IqaProvider protocols.  When
    ``expected_dim`` is set, embedding responses are validated against it.
    """

    def __init__(
        self,
        endpoint: str,
        timeout_s: float = 60.0,
        retries: int = 2,
        expected_dim: int | None = None,
        transport: wire.Transport | None = None,
    ):
        self.endpoint = endpoint
        self.retries = retries
        self.expected_dim = expected_dim
        self.transport = transport if transport is not None else wire.http_transport(timeout_s)

    def _call(self, payload: dict) -> dict:
        return wire.call_with_retries(self.transport, self.endpoint, payload, retries=self.retries)

    def _vectors(self, body: dict, expected: int) -> list[np.ndarray]:
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != expected:
            raise ProviderError(f"provider returned {0 if vectors is None else len(vectors)} vectors, expected {expected}")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ProviderError("provider returned a malformed embedding vector")
            if self.expected_dim is not None and arr.shape[0] != self.expected_dim:
                raise ProviderError(f"embedding dimension {arr.shape[0]} != declared {self.expected_dim}")
            out.append(arr)
        return out

    def embed_frames(self, frames: Sequence[Frame]) -> list[np.ndarray]:
        body = self._call(wire.embed_frames_request(frames))
        return self._vectors(body, len(frames))

    def embed_text(self, text: str) -> np.ndarray:
        body = self._call(wire.embed_text_request(text))
        return self._vectors(body, 1)[0]

    def embed_video(self, frames: Sequence[Frame]) -> np.ndarray:
        body = self._call(wire.embed_video_request(frames))
        return self._vectors(body, 1)[0]

    def iqa(self, frames: Sequence[Frame]) -> list[float]:
        body = self._call(wire.iqa_request(frames))
        values = body.get("values")
        if not isinstance(values, list) or len(values) != len(frames):
            raise ProviderError("provider returned a malformed iqa value list")
        return [float(v) for v in values]


def _hash_rng(seed: int, *parts: bytes) -> np.random.Generator:
    digest = hashlib.sha256(seed.to_bytes(8, "big", signed=True) + b"\x00".join(parts)).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def _frame_bytes(frame: Frame) -> bytes:
    return wire.frame_to_uint8(frame).tobytes()


class HashEmbeddingStub:
    """Deterministic embedding provider: frame/text bytes hash to a unit vector.

    Identical inputs always map to identical embeddings, so temporal- and
    alignment-similarity metrics are reproducible without any model assets.
    """

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 2:
            raise ValueError("embedding dim must be >= 2")
        self.dim = dim
        self.seed = seed

    def _vector(self, *parts: bytes) -> np.ndarray:
        rng = _hash_rng(self.seed, *parts)
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def embed_frames(self, frames: Sequence[Frame]) -> list[np.ndarray]:
        return [self._vector(b"frame", _frame_bytes(f)) for f in frames]

    def embed_text(self, text: str) -> np.ndarray:
        return self._vector(b"text", text.encode("utf-8"))

    def embed_video(self, frames: Sequence[Frame]) -> np.ndarray:
        return self._vector(b"video", *[_frame_bytes(f) for f in frames])


class HashIqaStub:
    """Deterministic no-reference IQA stub with scores in [0, 100)."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def iqa(self, frames: Sequence[Frame]) -> list[float]:
        return [
            float(_hash_rng(self.seed, b"iqa", _frame_bytes(f)).uniform(0.0, 100.0))
            for f in frames
        ]
