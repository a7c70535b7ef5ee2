"""HTTP gateway: sensor ingestion, chat webhook, outbound transport, media."""

from ..envelopes import ChatEnvelope, TransportUnavailable
from .app import create_app
from .media import MediaNotFound, MediaStore
from .transport import FlakyTransport, JsonlTransport, LoopbackTransport, Transport

__all__ = [
    "ChatEnvelope",
    "FlakyTransport",
    "JsonlTransport",
    "LoopbackTransport",
    "MediaNotFound",
    "MediaStore",
    "Transport",
    "TransportUnavailable",
    "create_app",
]
