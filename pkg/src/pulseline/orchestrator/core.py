"""Control core: sensor flow (interpret, persist, urgency, QC, deliver) and
user flow (classify, contextualize, invoke, enforce schema, dispatch).

Work is concurrent across users and strictly serialized per user. Every
outbound envelope is appended to the store first, then flushed through the
transport in id order, so a transport failure can delay but never reorder a
user's messages.
"""

from __future__ import annotations

import secrets
import threading
import time
import uuid

from ..agent_tools import ChartRequest, NoData, fire_no_data_check, render_chart
from ..agent_tools.scheduler import ScheduledTask, Scheduler
from ..config import ServiceConfig
from ..dsp.vitals import ConventionalEstimator
from ..envelopes import ChatEnvelope, TransportUnavailable
from ..interpreter.client import ClientUnavailable, ModelClient, ModelParams
from ..interpreter.parse import MalformedReply, VitalEstimate
from ..interpreter.service import interpret
from ..router.costs import PriceTable, cost
from ..router.tiers import Tier, TierClassifier
from .audit import AuditLog
from .context import (
    build_context_bundle,
    build_extraction_prompt,
    build_qc_prompt,
)
from .schema import AgentOutput, SchemaViolation, enforce_schema
from .storage import Store, UserProfile, hash_passcode


class UnknownDevice(KeyError):
    pass


class TranscriptionFailure(RuntimeError):
    pass


WELCOME_TEXT = (
    "Welcome! Your band is paired and I'm your wellness companion. Ask me "
    "about your heart rate, blood oxygen, temperature, or activity anytime. "
    "To personalize my guidance: what's your name?"
)

APOLOGY_TEXT = ("Sorry, I couldn't put together a proper reply just now. "
                "Please try again in a moment.")

_REPAIR_SUFFIX = (
    "\n\nYour previous reply did not match the required JSON schema. Reply "
    "again with ONLY the JSON object, nothing else."
)


class EchoTranscriber:
    """Stub speech-to-text: utf-8 media decodes to its own text, anything
    else becomes a fixed phrase. A real engine plugs in behind the same
    `transcribe(media_ref) -> str` shape."""

    DEFAULT_PHRASE = "What are my latest vitals?"

    def __init__(self, media_store=None):
        self.media_store = media_store

    def transcribe(self, media_ref: str) -> str:
        if self.media_store is not None and media_ref in self.media_store:
            data, _ = self.media_store.get(media_ref)
            try:
                return data.decode("utf-8")
            except UnicodeDecodeError:
                return self.DEFAULT_PHRASE
        if not media_ref:
            raise TranscriptionFailure("empty media reference")
        return media_ref  # tests pass the transcript inline


class Orchestrator:
    def __init__(self, store: Store, client: ModelClient, media_store=None,
                 transport=None, config: ServiceConfig | None = None,
                 audit: AuditLog | None = None, clock=None,
                 transcriber=None, knowledge=None):
        from ..agent_tools.retrieval import KnowledgeIndex

        self.store = store
        self.client = client
        self.media_store = media_store
        self.transport = transport
        self.config = config or ServiceConfig()
        self.audit = audit or AuditLog()
        self.clock = clock or time.time
        self.transcriber = transcriber or EchoTranscriber(media_store)
        self.knowledge = knowledge if knowledge is not None else KnowledgeIndex()
        self.classifier = TierClassifier(self.config.router)
        self.price_table = PriceTable(dict(self.config.router.prices_per_1k))
        self.conventional = ConventionalEstimator(self.config.dsp)
        self.scheduler = Scheduler(store, self.clock, self._on_task_fire)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _user_lock(self, phone: str) -> threading.Lock:
        with self._locks_guard:
            if phone not in self._locks:
                self._locks[phone] = threading.Lock()
            return self._locks[phone]

    # -- registration --------------------------------------------------------

    def register_user(self, phone: str, passcode: str,
                      device_id: str | None = None) -> tuple[UserProfile, bool]:
        """Create the account, send the welcome exactly once, and install the
        sign-up tasks. Re-registration with the same passcode is a no-op."""
        with self._user_lock(phone):
            token = secrets.token_urlsafe(24)
            device_id = device_id or f"band-{uuid.uuid4().hex[:10]}"
            created = self.store.create_user(phone, hash_passcode(passcode),
                                             token, device_id)
            user = self.store.get_user(phone)
            assert user is not None
            if not created:
                if user.passcode_hash != hash_passcode(passcode):
                    raise PermissionError("phone already registered")
                return user, False
            self.audit.append("signup", user=phone, device_id=device_id)
            self._send_text(phone, WELCOME_TEXT)
            self.store.update_user(phone, welcome_sent=True)
            self.scheduler.schedule(ScheduledTask(
                user=phone, kind="daily_summary",
                cron_expr=self.config.scheduler.daily_summary_cron))
            self.scheduler.schedule(ScheduledTask(
                user=phone, kind="no_data_check",
                cron_expr=self.config.scheduler.no_data_check_cron))
            return self.store.get_user(phone), True  # type: ignore[return-value]

    # -- sensor path -----------------------------------------------------------

    def handle_sensor_burst(self, burst) -> VitalEstimate:
        user = self.store.get_user_by_device(burst.device_id)
        if user is None:
            raise UnknownDevice(burst.device_id)
        with self._user_lock(user.phone):
            estimate = self._interpret_with_fallback(burst, user.phone)
            self.store.save_vital(user.phone, estimate)
            self.audit.append("estimate_stored", user=user.phone,
                              burst_ts=burst.ts, source=estimate.source)
            self._evaluate_urgency(user, estimate, anomaly=burst.anomaly)
            return estimate

    def _interpret_with_fallback(self, burst, phone: str) -> VitalEstimate:
        try:
            return interpret(burst, self.client,
                             settings=self.config.interpreter)
        except (MalformedReply, ClientUnavailable) as exc:
            self.audit.append("interpreter_fallback", user=phone,
                              burst_ts=burst.ts, error=str(exc))
        conventional = self.conventional.estimate(burst)
        if conventional.hr_valid or conventional.spo2_valid:
            return VitalEstimate(
                hr=conventional.hr_bpm, spo2=conventional.spo2_pct,
                source="conventional", burst_ts=burst.ts)
        # nothing recoverable: record the burst as unavailable-from-llm so
        # coverage bookkeeping still sees exactly one estimate
        self.audit.append("unavailable_from_llm", user=phone, burst_ts=burst.ts)
        return VitalEstimate(source="conventional", burst_ts=burst.ts)

    def _thresholds(self, user: UserProfile) -> dict:
        defaults = self.config.orchestrator.thresholds
        merged = {
            "hr_low": defaults.hr_low, "hr_high": defaults.hr_high,
            "spo2_low": defaults.spo2_low,
            "temp_wrist_high": defaults.temp_wrist_high,
        }
        merged.update(user.thresholds or {})
        if merged["hr_low"] >= merged["hr_high"]:
            raise ValueError("hr thresholds must satisfy low < high")
        return merged

    def _evaluate_urgency(self, user: UserProfile, estimate: VitalEstimate,
                          anomaly: bool) -> None:
        bounds = self._thresholds(user)
        reasons: list[str] = []
        if estimate.spo2 is not None and estimate.spo2 < bounds["spo2_low"]:
            reasons.append(f"SpO2 {estimate.spo2:.1f}% below "
                           f"{bounds['spo2_low']:.0f}%")
        if estimate.temp_body is not None \
                and estimate.temp_body > bounds["temp_wrist_high"]:
            reasons.append(f"wrist temperature {estimate.temp_body:.1f} degC "
                           f"above {bounds['temp_wrist_high']:.1f}")
        if estimate.hr is not None and not \
                bounds["hr_low"] <= estimate.hr <= bounds["hr_high"]:
            # heart rate flaps; require a sustained excursion unless the
            # device already flagged the burst as anomalous
            needed = 1 if anomaly else self.config.orchestrator.hr_sustained_count
            recent = self.store.recent_vitals(
                user.phone, self.config.orchestrator.hr_sustained_count)
            sustained = [e for e in recent if e.hr is not None and not
                         bounds["hr_low"] <= e.hr <= bounds["hr_high"]]
            if len(sustained) >= needed:
                reasons.append(f"heart rate {estimate.hr:.0f} BPM outside "
                               f"[{bounds['hr_low']:.0f}, {bounds['hr_high']:.0f}]")
        if not reasons:
            return
        self._urgent_alert(user, estimate, "; ".join(reasons))

    def _urgent_alert(self, user: UserProfile, estimate: VitalEstimate,
                      reason: str) -> None:
        draft = (
            f"Heads up: {reason}. This is a wellness cue, not a diagnosis. "
            "Take a seat, breathe slowly, and re-check in a few minutes; if "
            "you feel unwell, reach out to someone you trust or a clinician."
        )
        verdict, text = self._qc_review(user.phone, draft, reason)
        if verdict == "reject":
            return
        self._send_text(user.phone, text)
        self.audit.append("urgent_delivered", user=user.phone, reason=reason)
        self.store.add_memory_event(
            user.phone, ts=self.clock(), kind="urgent_alert", summary=reason,
            vitals=estimate.to_json_dict())

    def _qc_review(self, phone: str, draft: str, reason: str) -> tuple[str, str]:
        """Always audited before any delivery; unparseable reviews reject."""
        import json as _json
        prompt = build_qc_prompt(draft, reason)
        try:
            reply = self.client.complete(prompt, self._params(Tier.HIGH_RISK))
            data = _json.loads(reply.strip())
            verdict = data.get("verdict", "reject")
            text = data.get("text") or draft
            if verdict not in ("approve", "revise", "reject"):
                verdict = "reject"
        except (ClientUnavailable, ValueError):
            verdict, text = "reject", draft
        self.audit.append("qc_pass", user=phone, verdict=verdict, reason=reason)
        if verdict == "reject":
            self.audit.append("qc_rejected", user=phone, reason=reason)
        return verdict, text

    # -- user path -------------------------------------------------------------

    def handle_user_message(self, envelope: ChatEnvelope) -> AgentOutput | None:
        envelope.validate()
        phone = envelope.user_phone
        user = self.store.get_user(phone)
        with self._user_lock(phone):
            if self.store.seen_webhook(phone, envelope.ts, envelope.body):
                self.audit.append("webhook_duplicate", user=phone)
                return None
            self.store.append_envelope(envelope)
            self.audit.append("message_in", user=phone, msg_kind=envelope.kind)
            if user is None:
                self._send_text(phone, "This number isn't registered yet. "
                                       "Please sign up first.")
                return None
            try:
                text = self._inbound_text(envelope)
            except TranscriptionFailure as exc:
                self.audit.append("transcription_failure", user=phone,
                                  error=str(exc))
                self._send_text(phone, "Sorry, I couldn't make out that "
                                       "voice note. Mind typing it?")
                return None
            if not user.signup_complete:
                self._signup_turn(user, text)
                return None
            return self._agent_turn(user, text)

    def _inbound_text(self, envelope: ChatEnvelope) -> str:
        if envelope.kind == "audio":
            transcript = self.transcriber.transcribe(envelope.body)
            self.audit.append("transcribed", user=envelope.user_phone,
                              chars=len(transcript))
            return transcript
        return envelope.body  # text and button both carry the message

    def conversational_signup(self, envelope: ChatEnvelope) -> None:
        """Public surface for the sign-up conversation; normally reached
        through handle_user_message on an incomplete profile."""
        user = self.store.get_user(envelope.user_phone)
        if user is None:
            raise KeyError(envelope.user_phone)
        with self._user_lock(user.phone):
            self.store.append_envelope(envelope)
            self._signup_turn(user, self._inbound_text(envelope))

    def _signup_turn(self, user: UserProfile, text: str) -> None:
        import json as _json
        missing = user.missing_profile_fields()
        prompt = build_extraction_prompt(missing, text)
        updates: dict = {}
        try:
            reply = self.client.complete(prompt, self._params(Tier.SIMPLE))
            data = _json.loads(reply.strip())
            if isinstance(data, dict):
                allowed = ("name", "age", "bmi", "medical_background",
                           "demographic")
                updates = {k: v for k, v in data.items() if k in allowed}
        except (ClientUnavailable, ValueError):
            pass
        if updates:
            self.store.update_user(user.phone, **updates)
            self.audit.append("profile_update", user=user.phone,
                              fields=sorted(updates))
        refreshed = self.store.get_user(user.phone)
        assert refreshed is not None
        still_missing = refreshed.missing_profile_fields()
        if still_missing:
            prompts = {"name": "what should I call you?",
                       "age": "how old are you?"}
            self._send_text(user.phone,
                            f"Thanks! One more thing: {prompts[still_missing[0]]}")
        else:
            self.store.update_user(user.phone, signup_complete=True)
            self._send_text(
                user.phone,
                f"All set, {refreshed.name}! Your profile is complete. Ask me "
                "anything about your vitals, or send a voice note.")

    def _params(self, tier: Tier) -> ModelParams:
        return ModelParams(
            temperature=self.config.interpreter.temperature,
            top_p=self.config.interpreter.top_p,
            model_name=self.config.router.tier_models[tier.value])

    def _agent_turn(self, user: UserProfile, text: str) -> AgentOutput | None:
        tier = self.classifier.classify(text) if text.strip() else Tier.SIMPLE
        bundle = build_context_bundle(self.store, user, text, self.clock(),
                                      tier, self.config.orchestrator,
                                      knowledge=self.knowledge)
        prompt = bundle.render()
        record = cost(prompt, tier, self.price_table,
                      settings=self.config.router)
        self.store.add_cost_record(
            query_id=uuid.uuid4().hex[:12], phone=user.phone,
            route=tier.value, tokens_per_model=record.tokens_per_model,
            total_usd=record.total_usd, ts=self.clock())
        output = self._invoke_with_repair(user.phone, prompt, tier)
        if output is None:
            self._send_text(user.phone, APOLOGY_TEXT)
            return None
        self.dispatch(user.phone, output)
        return output

    def _invoke_with_repair(self, phone: str, prompt: str,
                            tier: Tier) -> AgentOutput | None:
        params = self._params(tier)
        attempt_prompt = prompt
        for attempt in (1, 2):
            try:
                reply = self.client.complete(attempt_prompt, params)
            except ClientUnavailable as exc:
                self.audit.append("client_unavailable", user=phone,
                                  error=str(exc))
                return None
            try:
                return enforce_schema(reply)
            except SchemaViolation as exc:
                self.audit.append("schema_retry", user=phone, attempt=attempt,
                                  error=str(exc))
                attempt_prompt = prompt + _REPAIR_SUFFIX
        self.audit.append("schema_fallback", user=phone)
        return None

    # -- delivery ----------------------------------------------------------------

    def dispatch(self, phone: str, output: AgentOutput) -> list[ChatEnvelope]:
        """RESPONSES in order, QUESTIONS as buttons on the final envelope,
        IMAGE rendered and sent with explanatory text."""
        envelopes: list[ChatEnvelope] = []
        for body in output.responses:
            envelopes.append(ChatEnvelope(
                direction="outbound", user_phone=phone, ts=self.clock(),
                kind="text", body=body))
        if output.image is not None and self.media_store is not None:
            ask = output.image
            end = self.clock()
            request = ChartRequest(user=phone, metric=ask.metric,
                                   time_range=(end - ask.hours * 3600.0, end),
                                   kind=ask.kind)
            try:
                media_id = render_chart(
                    request, self.store.vitals_range(phone), self.media_store)
                envelopes.append(ChatEnvelope(
                    direction="outbound", user_phone=phone, ts=self.clock(),
                    kind="text",
                    body=f"Here is your {ask.metric} chart for the last "
                         f"{ask.hours:g} hours."))
                envelopes.append(ChatEnvelope(
                    direction="outbound", user_phone=phone, ts=self.clock(),
                    kind="image", body=media_id))
            except NoData:
                envelopes.append(ChatEnvelope(
                    direction="outbound", user_phone=phone, ts=self.clock(),
                    kind="text",
                    body=f"I don't have {ask.metric} readings in that window "
                         "yet, so no chart this time."))
        if output.questions and envelopes:
            envelopes[-1].buttons = list(output.questions)
        for env in envelopes:
            self.store.append_envelope(env)
            self.audit.append("message_out", user=phone, msg_kind=env.kind)
        self.flush_outbound(phone)
        return envelopes

    def _send_text(self, phone: str, body: str,
                   buttons: list[str] | None = None) -> ChatEnvelope:
        env = ChatEnvelope(direction="outbound", user_phone=phone,
                           ts=self.clock(), kind="text", body=body,
                           buttons=buttons or [])
        self.store.append_envelope(env)
        self.audit.append("message_out", user=phone, msg_kind="text")
        self.flush_outbound(phone)
        return env

    def flush_outbound(self, phone: str | None = None) -> int:
        """Deliver queued envelopes in id order; stops at the first transport
        failure so per-user ordering survives retries."""
        if self.transport is None:
            for env in self.store.undelivered(phone):
                self.store.mark_delivered(env.envelope_id)  # type: ignore[arg-type]
            return 0
        delivered = 0
        blocked: set[str] = set()
        for env in self.store.undelivered(phone):
            if env.user_phone in blocked:
                continue
            try:
                self.transport.send(env)
            except TransportUnavailable as exc:
                self.audit.append("transport_retry_queued", user=env.user_phone,
                                  error=str(exc))
                blocked.add(env.user_phone)
                continue
            self.store.mark_delivered(env.envelope_id)  # type: ignore[arg-type]
            delivered += 1
        return delivered

    # -- scheduled work -----------------------------------------------------------

    def _on_task_fire(self, task: ScheduledTask, fire_ts: int) -> None:
        self.audit.append("task_fired", user=task.user, task_kind=task.kind,
                          fire_ts=fire_ts)
        user = self.store.get_user(task.user)
        if user is None:
            return
        if task.kind == "no_data_check":
            reminder = fire_no_data_check(
                self.store, task.user, now=self.clock(),
                interval_s=self.config.scheduler.no_data_interval_s)
            if reminder:
                self._send_text(task.user, reminder)
        elif task.kind == "daily_summary":
            if user.signup_complete:
                with self._user_lock(task.user):
                    self._agent_turn(user, "[scheduled] daily summary, please")
        else:  # medication_reminder / custom payloads go out verbatim
            self._send_text(task.user, task.payload or "Reminder!")
