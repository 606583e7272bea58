"""End-to-end interop: the primary toolkit's remote client against a live
stub server. The primary's own suite never needs this service; these tests
need the primary installed.
"""

import socket
import threading
import time

import httpx
import pytest
import uvicorn

from genservice.app import create_app
from genservice.stub import noise_image

artaug = pytest.importorskip("artaug")

from artaug.augment import GenerationRequest, execute_plan, plan_variations  # noqa: E402
from artaug.backends import RemoteBackend, remote_generate  # noqa: E402
from artaug.corpus import ArtworkRecord, Dataset  # noqa: E402


@pytest.fixture(scope="module")
def endpoint():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(
        create_app(mode="stub"), host="127.0.0.1", port=port, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline:
        try:
            if httpx.get(url + "/v1/health", timeout=1.0).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        raise RuntimeError("stub server did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=5)


def test_remote_generate_against_stub(endpoint, tmp_path):
    init = tmp_path / "init.png"
    init.write_bytes(noise_image(1, 8, 8))
    request = GenerationRequest(
        parent_id="a1",
        variation_index=0,
        prompt_text="a quiet harbor at dawn",
        init_image_path=str(init),
        seed=123,
        output_size=(16, 16),
    )
    image = remote_generate(request, endpoint, timeout=5.0)
    assert image == noise_image(123, 16, 16)


def test_execute_plan_with_remote_backend(endpoint, tmp_path):
    records = [
        ArtworkRecord(
            id=f"r{i}",
            image_path=f"init{i}.png",
            visual_sentences=[f"scene {i}"],
            split="train",
        )
        for i in range(2)
    ]
    for i in range(2):
        (tmp_path / f"init{i}.png").write_bytes(noise_image(i, 8, 8))
    dataset = Dataset(records=records)
    plan = plan_variations(dataset, 2, base_seed=5, output_size=(8, 8))
    for req in plan:
        req.init_image_path = str(tmp_path / req.init_image_path)
    out_dir = tmp_path / "out"
    report = execute_plan(plan, RemoteBackend(endpoint, timeout=5.0), out_dir)
    assert not report.failures
    assert len(report.dataset.variations) == 4
    for var in report.dataset.variations:
        image = (out_dir / var.image_path).read_bytes()
        assert image == noise_image(var.seed, 8, 8)
    print("ACCEPTANCE PASS: primary remote client end-to-end against stub mode")
