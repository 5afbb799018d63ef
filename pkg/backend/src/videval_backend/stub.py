"""Deterministic stub models: payload bytes hash to embeddings and scores.

Identical requests always produce identical responses, so the primary
toolkit can be tested end to end with no model downloads.
"""

from __future__ import annotations

import base64
import hashlib
import io
from typing import Sequence

import numpy as np

ASPECT_LINES = (
    "visual quality",
    "temporal consistency",
    "dynamic degree",
    "text-to-video alignment",
    "factual consistency",
)


def decode_png(payload: str) -> bytes:
    """Raw pixel bytes of a base64 PNG; raises ValueError on bad payloads."""
    from PIL import Image

    try:
        raw = base64.b64decode(payload.encode("ascii"), validate=True)
    except Exception as exc:
        raise ValueError(f"frame is not valid base64: {exc}") from exc
    try:
        with Image.open(io.BytesIO(raw)) as img:
            return img.tobytes()
    except Exception as exc:
        raise ValueError(f"frame is not a decodable image: {exc}") from exc


class StubModels:
    """Seeded hash-based stand-ins for every endpoint role."""

    def __init__(self, seed: int = 0, dim: int = 64):
        self.seed = seed
        self.dim = dim

    def _rng(self, *parts: bytes) -> np.random.Generator:
        digest = hashlib.sha256(
            self.seed.to_bytes(8, "big", signed=True) + b"\x00".join(parts)
        ).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    def _unit_vector(self, *parts: bytes) -> list[float]:
        v = self._rng(*parts).standard_normal(self.dim)
        v /= np.linalg.norm(v)
        return [float(x) for x in v]

    def embed_frames(self, frames: Sequence[str]) -> list[list[float]]:
        return [self._unit_vector(b"frame", decode_png(f)) for f in frames]

    def embed_text(self, text: str) -> list[list[float]]:
        return [self._unit_vector(b"text", text.encode("utf-8"))]

    def embed_video(self, frames: Sequence[str]) -> list[list[float]]:
        digests = [hashlib.sha256(decode_png(f)).digest() for f in frames]
        return [self._unit_vector(b"video", *digests)]

    def iqa(self, frames: Sequence[str]) -> list[float]:
        return [
            float(self._rng(b"iqa", decode_png(f)).uniform(0.0, 100.0)) for f in frames
        ]

    def score(self, prompt: str, frames: Sequence[str], mode: str):
        digests = [hashlib.sha256(decode_png(f)).digest() for f in frames]
        rng = self._rng(b"score", prompt.encode("utf-8"), *digests)
        if mode == "generative":
            labels = rng.integers(1, 5, size=len(ASPECT_LINES))
            text = "\n".join(f"{name}: {int(v)}" for name, v in zip(ASPECT_LINES, labels))
            return {"text": text}
        values = [round(float(v), 2) for v in rng.uniform(1.0, 4.0, size=len(ASPECT_LINES))]
        return {"scores": values}
