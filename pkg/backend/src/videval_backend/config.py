from __future__ import annotations

from dataclasses import dataclass, field

import yaml

ENDPOINT_ROLES = ("frame_encoder", "text_encoder", "video_encoder", "iqa", "mllm")


@dataclass
class BackendConfig:
    """Service configuration.

    Stub mode requires no external model assets; ``models`` is then purely
    informational.  In real mode each role maps to a dotted factory path
    ("package.module:factory") resolved at startup.
    """

    mode: str = "stub"
    host: str = "127.0.0.1"
    port: int = 8801
    max_batch: int = 256
    stub_seed: int = 0
    stub_dim: int = 64
    models: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("stub", "real"):
            raise ValueError(f"mode must be 'stub' or 'real', got {self.mode!r}")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.stub_dim < 2:
            raise ValueError("stub_dim must be >= 2")
        unknown = set(self.models) - set(ENDPOINT_ROLES)
        if unknown:
            raise ValueError(f"unknown model roles {sorted(unknown)}; expected {ENDPOINT_ROLES}")
        if self.mode == "real":
            missing = [r for r in ENDPOINT_ROLES if r not in self.models]
            if missing:
                raise ValueError(f"real mode needs a factory for every role; missing {missing}")

    @classmethod
    def from_file(cls, path: str) -> "BackendConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ValueError(f"config file {path!r} must hold a mapping")
        known = {"mode", "host", "port", "max_batch", "stub_seed", "stub_dim", "models"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"config file {path!r} has unknown keys {sorted(unknown)}")
        return cls(**doc)
