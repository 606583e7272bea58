"""Real diffusion pipeline wrapper (optional; requires diffusers + torch).

The import is deferred so stub deployments never touch the heavy
dependencies. Requests are serialized through a single lock because the
pipeline is GPU-bound.
"""

from __future__ import annotations

import io
import logging
import threading

log = logging.getLogger(__name__)


class PipelineUnavailable(RuntimeError):
    pass


class DiffusionWorker:
    """Lazily loaded img2img pipeline; one request at a time."""

    def __init__(self, checkpoint: str, device: str = "cpu"):
        self.checkpoint = checkpoint
        self.device = device
        self._lock = threading.Lock()
        self._pipe = None
        self._error: str | None = None
        self._loading = False

    @property
    def loading(self) -> bool:
        return self._loading

    def load(self) -> None:
        with self._lock:
            if self._pipe is not None or self._error is not None:
                return
            self._loading = True
            try:
                import torch  # noqa: PLC0415
                from diffusers import StableDiffusionImg2ImgPipeline  # noqa: PLC0415

                pipe = StableDiffusionImg2ImgPipeline.from_pretrained(self.checkpoint)
                self._pipe = pipe.to(self.device)
                self._torch = torch
            except Exception as exc:  # noqa: BLE001 - surfaced as 503
                self._error = f"pipeline load failed: {exc}"
                log.error("%s", self._error)
            finally:
                self._loading = False

    def generate(
        self,
        init_image: bytes,
        prompt: str,
        seed: int,
        count: int,
        strength: float,
        guidance_scale: float,
        width: int,
        height: int,
    ) -> list[bytes]:
        if self._pipe is None:
            raise PipelineUnavailable(self._error or "pipeline is loading")
        from PIL import Image  # noqa: PLC0415

        source = Image.open(io.BytesIO(init_image)).convert("RGB").resize((width, height))
        images: list[bytes] = []
        with self._lock:
            for j in range(count):
                generator = self._torch.Generator(device=self.device).manual_seed(
                    (seed + j) % 2**63
                )
                result = self._pipe(
                    prompt=prompt,
                    image=source,
                    strength=strength,
                    guidance_scale=guidance_scale,
                    generator=generator,
                ).images[0]
                buf = io.BytesIO()
                result.save(buf, format="PNG")
                images.append(buf.getvalue())
        return images
