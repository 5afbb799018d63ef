import base64
import io
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
from fastapi.testclient import TestClient
from PIL import Image

from videval_backend.app import create_app
from videval_backend.config import BackendConfig


def png_b64(array: np.ndarray) -> str:
    """Base64 PNG payload for a uint8 pixel array (test-side encoder)."""
    img = Image.fromarray(array, mode="L" if array.ndim == 2 else "RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def random_frames(n, seed=0, shape=(12, 12, 3)):
    rng = np.random.default_rng(seed)
    return [png_b64(rng.integers(0, 256, shape).astype(np.uint8)) for _ in range(n)]


@pytest.fixture(scope="session")
def client():
    return TestClient(create_app(BackendConfig(stub_seed=7, stub_dim=32)))


@pytest.fixture(scope="session")
def stub_server_url():
    """A real uvicorn server on a free localhost port, for wire round-trips."""
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = BackendConfig(stub_seed=7, stub_dim=32, port=port)
    server = uvicorn.Server(
        uvicorn.Config(create_app(config), host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("stub server failed to start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}/"
    server.should_exit = True
    thread.join(timeout=5)
