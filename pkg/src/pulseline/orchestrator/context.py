"""Context bundle: the structured prompt assembled before every agent call.

Seven sections in a fixed order, every record carrying its timestamp. The
detail level scales with the routed tier: simple queries ship a trimmed
bundle, summary-grade requests ship everything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..config import OrchestratorSettings
from ..interpreter.parse import VitalEstimate
from ..router.tiers import Tier
from .schema import AGENT_FIELDS
from .storage import Store, UserProfile

SECTION_MARKERS = (
    "## Conversational History",
    "## Long-Term Memory",
    "## Recent Health Metrics",
    "## Personal Profile",
    "## Temporal Context",
    "## Task Instructions",
    "## Output Structure",
)

# markers the offline agent and tests key on
QC_MARKER = "[[QC-REVIEW]]"
EXTRACT_MARKER = "[[PROFILE-EXTRACT]]"

_OUTPUT_SPEC = (
    "Reply with exactly one JSON object with the fields "
    + ", ".join(AGENT_FIELDS) + ". "
    'URGENCY is "urgent" or "not_urgent". RESPONSES is a non-empty list of '
    "message strings delivered in order. QUESTIONS is a list of short "
    "follow-up suggestions rendered as buttons. PERSONAL is false or a short "
    "note on personal relevance. IMAGE is null or "
    '{"metric": one of hr|spo2|temp_body|temp_ambient|activity, '
    '"kind": "line"|"histogram", "hours": number} when a chart would help. '
    "No text outside the JSON object."
)

_DETAILED_INSTRUCTIONS = (
    "You are a personal wellness companion reached through chat. Ground every "
    "statement in the metrics and profile provided; cite concrete numbers "
    "with their timestamps where helpful. Offer conservative self-care "
    "suggestions only; you are not a diagnostic tool, so recommend "
    "professional care when something looks concerning. Keep each message "
    "short and plain-spoken."
)

_MINIMAL_INSTRUCTIONS = (
    "You are a personal wellness companion reached through chat. Answer "
    "briefly and warmly in plain language."
)


@dataclass
class ContextBundle:
    history: list[str]
    memory: list[str]
    metrics: list[str]
    profile: dict
    now: float
    instructions: str
    user_message: str

    def render(self) -> str:
        sections = [
            (SECTION_MARKERS[0], "\n".join(self.history) or "(no prior turns)"),
            (SECTION_MARKERS[1], "\n".join(self.memory) or "(no events)"),
            (SECTION_MARKERS[2], "\n".join(self.metrics) or "(no readings yet)"),
            (SECTION_MARKERS[3], json.dumps(self.profile, sort_keys=True)),
            (SECTION_MARKERS[4],
             f"now={self.now:.0f} (unix seconds); every record above carries "
             "its own timestamp"),
            (SECTION_MARKERS[5],
             f"{self.instructions}\n\nUser message: {self.user_message}"),
            (SECTION_MARKERS[6], _OUTPUT_SPEC),
        ]
        return "\n\n".join(f"{marker}\n{body}" for marker, body in sections)


def _metric_line(est: VitalEstimate) -> str:
    def fmt(v):
        return "n/a" if v is None else (f"{v:.1f}" if isinstance(v, float) else v)

    return (f"ts={est.burst_ts} hr={fmt(est.hr)} spo2={fmt(est.spo2)} "
            f"activity={fmt(est.activity)} temp_body={fmt(est.temp_body)} "
            f"temp_ambient={fmt(est.temp_ambient)} source={est.source}")


def build_context_bundle(store: Store, user: UserProfile, user_message: str,
                         now: float, tier: Tier,
                         settings: OrchestratorSettings | None = None,
                         knowledge=None) -> ContextBundle:
    settings = settings or OrchestratorSettings()
    detailed = tier is not Tier.SIMPLE
    history_turns = settings.history_turns if detailed else 2
    metrics_window = settings.metrics_window if detailed else 3

    history = [
        f"[{env.ts:.0f}] {'user' if env.direction == 'inbound' else 'agent'}: "
        f"{env.body}"
        for env in store.history(user.phone, history_turns)
    ]
    memory = [
        f"[{event['ts']:.0f}] {event['kind']}: {event['summary']}"
        for event in store.memory_events(user.phone)
    ]
    metrics = [_metric_line(est)
               for est in store.recent_vitals(user.phone, metrics_window)]
    profile = {
        "name": user.name, "age": user.age, "bmi": user.bmi,
        "medical_background": user.medical_background,
        "demographic": user.demographic, "phone": user.phone,
    }
    instructions = _DETAILED_INSTRUCTIONS if detailed else _MINIMAL_INSTRUCTIONS
    if detailed and knowledge is not None and len(knowledge) > 0:
        # ground detailed replies in the wellness corpus (and any user uploads)
        passages = knowledge.retrieve(user_message, k=2)
        grounding = "\n".join(
            f"- [{p.doc_id}] {' '.join(p.text.split())[:300]}"
            for p in passages if p.score > 0)
        if grounding:
            instructions += "\n\nBackground passages:\n" + grounding
    return ContextBundle(
        history=history, memory=memory, metrics=metrics, profile=profile,
        now=now,
        instructions=instructions,
        user_message=user_message,
    )


def build_qc_prompt(draft_alert: str, reason: str) -> str:
    return (
        f"{QC_MARKER} You are reviewing a draft urgent alert before it is "
        "sent to a user. Approve it only if it is calm, concrete, and "
        "non-diagnostic.\n"
        f"Trigger: {reason}\n"
        f"Draft: {draft_alert}\n"
        'Reply with one JSON object: {"verdict": "approve"} or '
        '{"verdict": "revise", "text": "<replacement>"} or '
        '{"verdict": "reject", "reason": "<why>"}.'
    )


def build_extraction_prompt(missing_fields: list[str], reply_text: str) -> str:
    return (
        f"{EXTRACT_MARKER} During sign-up the user was asked for: "
        f"{', '.join(missing_fields)}.\n"
        f"User reply: {reply_text}\n"
        "Extract any of these profile fields from the reply: name (string), "
        "age (integer years), bmi (number), medical_background (string), "
        "demographic (string). Reply with one JSON object containing only "
        "the fields you are confident about; use {} when none."
    )
