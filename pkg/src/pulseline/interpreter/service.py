"""Composition of prompt -> completion -> parse for one burst."""

from __future__ import annotations

from ..config import InterpreterSettings
from ..wire.codec import SensorBurst
from .client import ClientUnavailable, ModelClient, ModelParams
from .parse import VitalEstimate, parse_reply
from .prompt import build_prompt


def interpret(burst: SensorBurst, client: ModelClient,
              params: ModelParams | None = None,
              settings: InterpreterSettings | None = None) -> VitalEstimate:
    """Run one burst through the model path.

    Returns exactly one VitalEstimate (possibly with absent fields) or
    raises: MalformedReply for an unparseable completion, ClientUnavailable
    after the retry budget is spent. The caller decides fallback policy;
    nothing is dropped silently.
    """
    settings = settings or InterpreterSettings()
    if params is None:
        params = ModelParams(temperature=settings.temperature,
                             top_p=settings.top_p,
                             model_name=settings.model_name)
    prompt = build_prompt(burst)
    attempts = 1 + max(0, settings.max_retries)
    last_error: ClientUnavailable | None = None
    for _ in range(attempts):
        try:
            text = client.complete(prompt, params)
            break
        except ClientUnavailable as exc:
            last_error = exc
    else:
        raise last_error  # type: ignore[misc]
    estimate = parse_reply(text)
    estimate.source = "llm"
    estimate.burst_ts = burst.ts
    return estimate
