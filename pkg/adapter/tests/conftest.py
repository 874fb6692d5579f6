import socket
import threading
import time

import pytest
import requests
import uvicorn

from modeladapter import AdapterConfig, TextGenerator, create_app


@pytest.fixture(scope="session")
def base_model_dir(tmp_path_factory):
    """One trained base generator shared by the whole session."""
    path = tmp_path_factory.mktemp("base-model")
    TextGenerator.train_base().save(path)
    return path


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def service_url(base_model_dir):
    """The adapter served over real HTTP on a local port."""
    port = _free_port()
    cfg = AdapterConfig(generator=str(base_model_dir), port=port)
    server = uvicorn.Server(uvicorn.Config(create_app(cfg), host="127.0.0.1",
                                           port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{port}"
    deadline = time.time() + 30
    while time.time() < deadline:
        try:
            if requests.get(f"{url}/health", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.1)
    else:
        raise RuntimeError("adapter service did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=10)
