"""Provider wire protocol: request/response schema and frame encoding.

One JSON document per request:

    {"task": "score" | "embed_frames" | "embed_text" | "embed_video" | "iqa",
     "prompt": "...",            # optional
     "frames": ["<base64 PNG>"], # optional
     "mode": "generative" | "regression"}  # optional, score task only

Responses carry exactly one payload field: {"text": ...} for generative
scores, {"scores": [5 reals]} for regression, {"vectors": [[...]]} for
embeddings, {"values": [...]} for IQA, or {"error": "..."} on failure.
Frames travel as losslessly compressed PNG bytes in base64.
"""

from __future__ import annotations

import base64
import io
import time
from typing import Callable, Sequence

import numpy as np

from videval.errors import ProviderError
from videval.model import Frame

TASKS = ("score", "embed_frames", "embed_text", "embed_video", "iqa")
MODES = ("generative", "regression")

Transport = Callable[[str, dict], dict]


def frame_to_uint8(frame: Frame) -> np.ndarray:
    """Frame pixels as 8-bit values (the canonical byte form)."""
    px = frame.pixels
    if px.dtype == np.uint8:
        return px
    return np.rint(px * 255.0).astype(np.uint8)


def encode_frame(frame: Frame) -> str:
    """Base64 PNG encoding of one frame."""
    from PIL import Image

    arr = frame_to_uint8(frame)
    img = Image.fromarray(arr, mode="L" if arr.ndim == 2 else "RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_frame(payload: str) -> np.ndarray:
    """Inverse of encode_frame: base64 PNG to a uint8 pixel array."""
    from PIL import Image

    raw = base64.b64decode(payload.encode("ascii"), validate=True)
    with Image.open(io.BytesIO(raw)) as img:
        return np.asarray(img, dtype=np.uint8)


def score_request(prompt_text: str, frames: Sequence[Frame], mode: str) -> dict:
    if mode not in MODES:
        raise ValueError(f"unknown scoring mode {mode!r}")
    return {
        "task": "score",
        "prompt": prompt_text,
        "frames": [encode_frame(f) for f in frames],
        "mode": mode,
    }


def embed_frames_request(frames: Sequence[Frame]) -> dict:
    return {"task": "embed_frames", "frames": [encode_frame(f) for f in frames]}


def embed_text_request(text: str) -> dict:
    return {"task": "embed_text", "prompt": text}


def embed_video_request(frames: Sequence[Frame]) -> dict:
    return {"task": "embed_video", "frames": [encode_frame(f) for f in frames]}


def iqa_request(frames: Sequence[Frame]) -> dict:
    return {"task": "iqa", "frames": [encode_frame(f) for f in frames]}


def http_transport(timeout_s: float = 60.0) -> Transport:
    """Default transport: POST the request document as JSON."""
    import requests

    def post(url: str, payload: dict) -> dict:
        try:
            resp = requests.post(url, json=payload, timeout=timeout_s)
        except requests.RequestException as exc:
            raise ProviderError(f"request to {url} failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"{url} answered HTTP {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise ProviderError(f"{url} answered non-JSON body") from exc
        if not isinstance(body, dict):
            raise ProviderError(f"{url} answered a non-object body")
        return body

    return post


def call_with_retries(
    transport: Transport,
    url: str,
    payload: dict,
    retries: int = 2,
    backoff_s: float = 0.2,
) -> dict:
    """Issue a request with bounded retries and exponential backoff.

    A response carrying an ``error`` field is a definitive provider answer
    and is not retried.
    """
    last: ProviderError | None = None
    for attempt in range(retries + 1):
        try:
            body = transport(url, payload)
        except ProviderError as exc:
            last = exc
            if attempt < retries:
                time.sleep(backoff_s * (2 ** attempt))
            continue
        if body.get("error") is not None:
            raise ProviderError(f"provider error: {body['error']}")
        return body
    assert last is not None
    raise last
