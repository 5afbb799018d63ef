"""Real-mode model loading: every endpoint role resolves a dotted factory.

A factory path looks like "my_models.clip:build"; the callable receives the
role's config entry and must return an object with the method the role
needs (embed_frames/embed_text/embed_video/iqa/score, same signatures as
videval_backend.stub.StubModels, operating on base64 PNG payloads).
"""

from __future__ import annotations

from importlib import import_module

from videval_backend.config import ENDPOINT_ROLES, BackendConfig

ROLE_METHODS = {
    "frame_encoder": "embed_frames",
    "text_encoder": "embed_text",
    "video_encoder": "embed_video",
    "iqa": "iqa",
    "mllm": "score",
}


def _resolve(spec) -> object:
    if isinstance(spec, str):
        path, options = spec, {}
    else:
        path, options = spec.get("factory"), {k: v for k, v in spec.items() if k != "factory"}
    if not path or ":" not in path:
        raise ValueError(f"model factory must look like 'pkg.module:fn', got {spec!r}")
    module_name, attr = path.split(":", 1)
    factory = getattr(import_module(module_name), attr)
    return factory(**options)


class RealModels:
    """Loads one model object per role and delegates the role's method."""

    def __init__(self, config: BackendConfig):
        self._handles = {}
        for role in ENDPOINT_ROLES:
            handle = _resolve(config.models[role])
            method = ROLE_METHODS[role]
            if not callable(getattr(handle, method, None)):
                raise ValueError(f"model for role {role!r} lacks a callable {method!r}")
            self._handles[role] = handle

    def embed_frames(self, frames):
        return self._handles["frame_encoder"].embed_frames(frames)

    def embed_text(self, text):
        return self._handles["text_encoder"].embed_text(text)

    def embed_video(self, frames):
        return self._handles["video_encoder"].embed_video(frames)

    def iqa(self, frames):
        return self._handles["iqa"].iqa(frames)

    def score(self, prompt, frames, mode):
        return self._handles["mllm"].score(prompt, frames, mode)
