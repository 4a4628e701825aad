"""HTTP sidecar serving embedding and pair-scoring models behind the
retrieval pipeline's encoder wire protocol."""

from .app import create_app
from .models import (
    CrossEncoderPairModel,
    HashEmbedModel,
    ModelRegistry,
    OverlapPairModel,
    SentenceTransformerEmbedModel,
)

__version__ = "0.1.0"

__all__ = [
    "create_app",
    "ModelRegistry",
    "HashEmbedModel",
    "OverlapPairModel",
    "SentenceTransformerEmbedModel",
    "CrossEncoderPairModel",
]
