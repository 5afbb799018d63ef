"""The HTTP service: one scoring/embedding endpoint plus /health.

Request validation is done by hand so that every malformed payload gets a
protocol-level {"error": ...} answer instead of a framework 4xx; the
service never crashes on bad input.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from videval_backend.config import BackendConfig
from videval_backend.stub import StubModels

TASKS = ("score", "embed_frames", "embed_text", "embed_video", "iqa")
MODES = ("generative", "regression")

NEEDS_FRAMES = {"score", "embed_frames", "embed_video", "iqa"}
NEEDS_PROMPT = {"score", "embed_text"}


def _validate(body, max_batch: int):
    """Return an error string, or None when the request is well-formed."""
    if not isinstance(body, dict):
        return "request must be a JSON object"
    task = body.get("task")
    if task not in TASKS:
        return f"unknown task {task!r}; expected one of {list(TASKS)}"
    frames = body.get("frames")
    if task in NEEDS_FRAMES:
        if not isinstance(frames, list) or not frames:
            return f"task {task!r} needs a non-empty 'frames' list"
        if not all(isinstance(f, str) for f in frames):
            return "'frames' entries must be base64 strings"
        if len(frames) > max_batch:
            return f"batch of {len(frames)} frames exceeds the limit of {max_batch}"
    prompt = body.get("prompt")
    if task in NEEDS_PROMPT and not isinstance(prompt, str):
        return f"task {task!r} needs a string 'prompt'"
    if task == "score" and body.get("mode") not in MODES:
        return f"task 'score' needs mode in {list(MODES)}"
    return None


def _dispatch(models, body: dict) -> dict:
    task = body["task"]
    if task == "score":
        return models.score(body["prompt"], body["frames"], body["mode"])
    if task == "embed_frames":
        return {"vectors": models.embed_frames(body["frames"])}
    if task == "embed_text":
        return {"vectors": models.embed_text(body["prompt"])}
    if task == "embed_video":
        return {"vectors": models.embed_video(body["frames"])}
    return {"values": models.iqa(body["frames"])}


def build_models(config: BackendConfig):
    if config.mode == "stub":
        return StubModels(seed=config.stub_seed, dim=config.stub_dim)
    from videval_backend.real import RealModels

    return RealModels(config)


def create_app(config: BackendConfig | None = None) -> FastAPI:
    config = config if config is not None else BackendConfig()
    models = build_models(config)
    app = FastAPI(title="videval-backend", docs_url=None, redoc_url=None)

    @app.post("/")
    async def handle(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "request body is not valid JSON"})
        problem = _validate(body, config.max_batch)
        if problem is not None:
            return JSONResponse({"error": problem})
        try:
            return JSONResponse(_dispatch(models, body))
        except ValueError as exc:  # undecodable frames and similar payload faults
            return JSONResponse({"error": str(exc)})
        except Exception as exc:  # never crash on bad payloads
            return JSONResponse({"error": f"internal failure: {exc}"})

    @app.get("/health")
    async def health() -> dict:
        return {
            "mode": config.mode,
            "models": {role: str(spec) for role, spec in sorted(config.models.items())},
        }

    return app
