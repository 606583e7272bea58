"""Pydantic request/response models for the variation wire protocol."""

from __future__ import annotations

import base64

from pydantic import BaseModel, ConfigDict, Field, field_validator

MAX_SEED = 2**64 - 1


class VariationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    image_b64: str
    prompt: str
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    count: int = Field(default=1, ge=1, le=64)
    strength: float = Field(default=0.75, ge=0.0, le=1.0)
    guidance_scale: float = Field(default=7.5, gt=0.0)
    width: int = Field(default=512, ge=8, le=4096)
    height: int = Field(default=512, ge=8, le=4096)

    @field_validator("image_b64")
    @classmethod
    def _decodable(cls, value: str) -> str:
        try:
            base64.b64decode(value, validate=True)
        except Exception as exc:
            raise ValueError(f"image_b64 is not valid base64: {exc}") from exc
        return value

    def init_image(self) -> bytes:
        return base64.b64decode(self.image_b64)


class VariationResponse(BaseModel):
    images_b64: list[str]
    seeds: list[int]


class HealthResponse(BaseModel):
    model: str
    mode: str
