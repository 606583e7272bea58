"""genservice: HTTP sidecar for image variation generation with a stub mode."""

from .app import create_app
from .models import HealthResponse, VariationRequest, VariationResponse
from .stub import noise_image

__version__ = "0.1.0"

__all__ = [
    "HealthResponse",
    "VariationRequest",
    "VariationResponse",
    "create_app",
    "noise_image",
]
