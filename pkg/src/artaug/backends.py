"""Generator backends: a deterministic local mock and an HTTP client.

The mock backend stands in for a diffusion model during tests and dry runs.
It renders a PNG whose pixels are a seeded pseudo-random pattern with the
SHA-256 of the prompt written into the leading bytes, so outputs are
byte-identical for identical requests and differ whenever seed, prompt or
size differ.

The remote backend speaks the variation-generation wire protocol:

    POST {endpoint}/v1/variations
    -> {"image_b64", "prompt", "seed", "count", "strength",
        "guidance_scale", "width", "height"}
    <- {"images_b64": [...], "seeds": [...]}      errors: {"error": "..."}
"""

from __future__ import annotations

import base64
import hashlib
import logging
import struct
import time
import zlib
from pathlib import Path
from typing import Protocol

import httpx

from .augment import GenerationRequest
from .errors import BackendUnavailable, ProtocolError, RemoteError
from .seeds import stream

log = logging.getLogger(__name__)


class GeneratorBackend(Protocol):
    def generate(self, request: GenerationRequest) -> bytes: ...


def encode_png(width: int, height: int, rgb: bytes) -> bytes:
    """Minimal RGB8 PNG encoder; fully deterministic output bytes."""
    if len(rgb) != width * height * 3:
        raise ValueError("rgb buffer does not match width*height*3")

    def chunk(tag: bytes, payload: bytes) -> bytes:
        crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
        return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    stride = width * 3
    raw = b"".join(
        b"\x00" + rgb[y * stride : (y + 1) * stride] for y in range(height)
    )
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )


def mock_generate(request: GenerationRequest) -> bytes:
    """Deterministic stand-in image derived from (seed, prompt digest, size)."""
    width, height = request.output_size
    prompt_digest = hashlib.sha256(request.prompt_text.encode("utf-8")).digest()
    rng = stream("mock-image", request.seed, prompt_digest, width, height)
    pixels = bytearray(rng.randbytes(width * height * 3))
    n = min(len(pixels), len(prompt_digest))
    pixels[:n] = prompt_digest[:n]
    return encode_png(width, height, bytes(pixels))


class MockBackend:
    """Pure, thread-safe test double for the generation service."""

    def generate(self, request: GenerationRequest) -> bytes:
        return mock_generate(request)


def remote_generate(
    request: GenerationRequest,
    endpoint: str,
    timeout: float = 30.0,
    *,
    retries: int = 3,
    backoff: float = 0.5,
    client: httpx.Client | None = None,
) -> bytes:
    """Request one variation from a generation service and return its bytes.

    Connection errors, timeouts and 5xx responses are retried with
    exponential backoff (safe: generation is deterministic given the seed);
    other error statuses raise RemoteError immediately.
    """
    init_image = Path(request.init_image_path).read_bytes()
    payload = {
        "image_b64": base64.b64encode(init_image).decode("ascii"),
        "prompt": request.prompt_text,
        "seed": request.seed,
        "count": 1,
        "strength": request.strength,
        "guidance_scale": request.guidance_scale,
        "width": request.output_size[0],
        "height": request.output_size[1],
    }
    url = endpoint.rstrip("/") + "/v1/variations"
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=timeout)
    try:
        last_error: Exception | None = None
        for attempt in range(retries + 1):
            if attempt:
                time.sleep(backoff * 2 ** (attempt - 1))
            try:
                response = client.post(url, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                log.debug("attempt %d failed: %s", attempt + 1, exc)
                continue
            if response.status_code >= 500 or response.status_code == 429:
                last_error = RemoteError(response.status_code, _error_text(response))
                continue
            if response.status_code != 200:
                raise RemoteError(response.status_code, _error_text(response))
            return _first_image(response)
        raise BackendUnavailable(
            f"{url} still failing after {retries + 1} attempts: {last_error}"
        )
    finally:
        if own_client:
            client.close()


def _error_text(response: httpx.Response) -> str:
    try:
        body = response.json()
        if isinstance(body, dict) and isinstance(body.get("error"), str):
            return body["error"]
    except ValueError:
        pass
    return response.text[:200]


def _first_image(response: httpx.Response) -> bytes:
    try:
        body = response.json()
    except ValueError as exc:
        raise ProtocolError("response body is not JSON") from exc
    images = body.get("images_b64") if isinstance(body, dict) else None
    if not isinstance(images, list) or not images or not isinstance(images[0], str):
        raise ProtocolError("response is missing a non-empty images_b64 list")
    try:
        return base64.b64decode(images[0], validate=True)
    except (ValueError, TypeError) as exc:
        raise ProtocolError("images_b64[0] is not valid base64") from exc


class RemoteBackend:
    """GeneratorBackend adapter around remote_generate."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.client = client

    def generate(self, request: GenerationRequest) -> bytes:
        return remote_generate(
            request,
            self.endpoint,
            self.timeout,
            retries=self.retries,
            backoff=self.backoff,
            client=self.client,
        )
