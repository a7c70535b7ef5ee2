"""Control core, schema enforcement, persistence, and audit logging."""

from .audit import AuditLog
from .context import SECTION_MARKERS, ContextBundle, build_context_bundle
from .core import (
    APOLOGY_TEXT,
    WELCOME_TEXT,
    EchoTranscriber,
    Orchestrator,
    TranscriptionFailure,
    UnknownDevice,
)
from .offline import OfflineAgentClient
from .schema import AgentOutput, ChartAsk, SchemaViolation, enforce_schema
from .storage import Store, StorageFailure, UserProfile, hash_passcode

__all__ = [
    "APOLOGY_TEXT",
    "AgentOutput",
    "AuditLog",
    "ChartAsk",
    "ContextBundle",
    "EchoTranscriber",
    "OfflineAgentClient",
    "Orchestrator",
    "SECTION_MARKERS",
    "SchemaViolation",
    "StorageFailure",
    "Store",
    "TranscriptionFailure",
    "UnknownDevice",
    "UserProfile",
    "WELCOME_TEXT",
    "build_context_bundle",
    "enforce_schema",
    "hash_passcode",
]
