"""Model-as-regressor path: burst -> prompt -> completion -> VitalEstimate."""

from .client import ClientUnavailable, HttpChatClient, ModelClient, ModelParams
from .parse import MalformedReply, VitalEstimate, parse_reply, serialize_estimate
from .prompt import INSTRUCTION_BLOCK, build_prompt
from .service import interpret
from .stubs import ScriptedClient, SequenceEchoClient, WaveformOracleClient

__all__ = [
    "INSTRUCTION_BLOCK",
    "ClientUnavailable",
    "HttpChatClient",
    "MalformedReply",
    "ModelClient",
    "ModelParams",
    "ScriptedClient",
    "SequenceEchoClient",
    "VitalEstimate",
    "WaveformOracleClient",
    "build_prompt",
    "interpret",
    "parse_reply",
    "serialize_estimate",
]
