"""HTTP face of the service.

Endpoints:
    POST /v1/signup      {phone, passcode} -> {token, device_id, created}
    POST /v1/sensors     burst upload (bearer token) -> {accepted}
    POST /v1/webhook     inbound chat envelope -> {ok}
    GET  /v1/media/{id}  stored artifact bytes
    GET  /v1/health      liveness probe
    GET  /v1/outbox      delivered outbound envelopes after a cursor (bearer)
    POST /v1/media       upload media bytes (bearer) -> {media_id}
    POST /v1/uploads     pause/resume sensor ingestion (bearer)
    POST /v1/simulate    run the device simulator for this user (bearer)

The webhook stands in for the chat platform's callback; the outbox is the
loopback read side the browser client polls.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Request, Response
from pydantic import BaseModel, Field

from ..config import ServiceConfig
from ..envelopes import ChatEnvelope
from ..orchestrator.audit import AuditLog
from ..orchestrator.core import Orchestrator, UnknownDevice
from ..orchestrator.offline import OfflineAgentClient
from ..orchestrator.storage import Store, UserProfile
from ..wire.codec import SensorBurst
from ..wire.simulator import DeviceConfig, simulate_device
from ..wire.synth import PRESETS, preset_source
from .media import MediaNotFound, MediaStore
from .transport import LoopbackTransport


class SignupBody(BaseModel):
    phone: str = Field(min_length=5, max_length=24)
    passcode: str = Field(min_length=4, max_length=128)


class SensorUploadBody(BaseModel):
    device_id: str
    uploaded_at: float | None = None
    bursts: list[dict]


class WebhookBody(BaseModel):
    user_phone: str
    ts: float
    kind: str
    body: str = ""


class UploadsBody(BaseModel):
    paused: bool


class SimulateBody(BaseModel):
    preset: str = "normal"
    cycles: int = Field(default=1, ge=1, le=50)


def create_app(config: ServiceConfig | None = None, store: Store | None = None,
               client=None, media_store: MediaStore | None = None,
               transport=None, audit: AuditLog | None = None, clock=None,
               static_dir: str | Path | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = store or Store(str(Path(config.gateway.data_dir) / "service.db"))
    media_store = media_store or MediaStore(Path(config.gateway.data_dir) / "media")
    transport = transport if transport is not None else LoopbackTransport()
    client = client or OfflineAgentClient()
    orchestrator = Orchestrator(store=store, client=client,
                                media_store=media_store, transport=transport,
                                config=config, audit=audit, clock=clock)

    app = FastAPI(title="pulseline gateway")
    app.state.store = store
    app.state.orchestrator = orchestrator
    app.state.media_store = media_store
    app.state.transport = transport
    app.state.config = config

    def bearer_user(authorization: str = Header(default="")) -> UserProfile:
        if not authorization.startswith("Bearer "):
            raise HTTPException(401, "missing bearer token")
        user = store.get_user_by_token(authorization.removeprefix("Bearer ").strip())
        if user is None:
            raise HTTPException(401, "unknown token")
        return user

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/signup")
    def signup(body: SignupBody):
        try:
            user, created = orchestrator.register_user(body.phone, body.passcode)
        except PermissionError:
            raise HTTPException(409, "phone already registered") from None
        return {"token": user.token, "device_id": user.device_id,
                "created": created}

    def ingest_bursts(user: UserProfile, device_id: str,
                      bursts: list[dict]) -> int:
        if user.uploads_paused:
            return 0
        last_ts = None
        parsed: list[SensorBurst] = []
        for raw in bursts:
            try:
                burst = SensorBurst.from_json_dict(raw, device_id=device_id)
            except (KeyError, TypeError, ValueError) as exc:
                raise HTTPException(400, f"malformed burst: {exc}") from None
            if last_ts is not None and burst.ts < last_ts:
                raise HTTPException(400, "bursts must be time-ordered")
            last_ts = burst.ts
            parsed.append(burst)
        accepted = 0
        for burst in parsed:
            if store.seen_upload(device_id, burst.ts):
                continue
            orchestrator.handle_sensor_burst(burst)
            accepted += 1
        return accepted

    @app.post("/v1/sensors")
    def sensors(body: SensorUploadBody, user: UserProfile = Depends(bearer_user)):
        if body.device_id != user.device_id:
            raise HTTPException(401, "unknown device for this token")
        try:
            accepted = ingest_bursts(user, body.device_id, body.bursts)
        except UnknownDevice:
            raise HTTPException(401, "unknown device") from None
        return {"accepted": accepted}

    @app.post("/v1/webhook")
    def webhook(body: WebhookBody):
        try:
            envelope = ChatEnvelope(direction="inbound",
                                    user_phone=body.user_phone, ts=body.ts,
                                    kind=body.kind, body=body.body)
            envelope.validate()
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        orchestrator.handle_user_message(envelope)
        return {"ok": True}

    @app.get("/v1/media/{media_id}")
    def media(media_id: str):
        try:
            data, mime = media_store.get(media_id)
        except MediaNotFound:
            raise HTTPException(404, "no such media") from None
        return Response(content=data, media_type=mime)

    @app.post("/v1/media")
    async def media_upload(request: Request,
                           user: UserProfile = Depends(bearer_user)):
        data = await request.body()
        if not data:
            raise HTTPException(400, "empty body")
        mime = request.headers.get("content-type", "application/octet-stream")
        return {"media_id": media_store.put(data, mime)}

    @app.get("/v1/outbox")
    def outbox(cursor: int = 0, user: UserProfile = Depends(bearer_user)):
        envelopes = store.outbox(user.phone, cursor=cursor)
        return {
            "envelopes": [e.to_json_dict() for e in envelopes],
            "cursor": envelopes[-1].envelope_id if envelopes else cursor,
        }

    @app.post("/v1/uploads")
    def uploads(body: UploadsBody, user: UserProfile = Depends(bearer_user)):
        store.update_user(user.phone, uploads_paused=body.paused)
        return {"paused": body.paused}

    @app.post("/v1/simulate")
    def simulate(body: SimulateBody, user: UserProfile = Depends(bearer_user)):
        if body.preset not in PRESETS:
            raise HTTPException(400, f"unknown preset; choose from "
                                     f"{sorted(PRESETS)}")
        source = preset_source(body.preset)
        # a real band never reuses a timestamp: rapid panel presses must not
        # collide with the replay dedup, so resume after the last upload
        start_ts = int(orchestrator.clock())
        last = store.last_upload_ts(user.device_id)
        if last is not None and start_ts <= last:
            start_ts = last + 1
        records = simulate_device(DeviceConfig(), source, n_cycles=body.cycles,
                                  start_ts=start_ts, device_id=user.device_id)
        anomaly = body.preset != "normal"
        bursts = []
        for record in records:
            payload = record.burst.to_json_dict()
            payload["anomaly"] = anomaly
            bursts.append(payload)
        accepted = ingest_bursts(user, user.device_id, bursts)
        return {"accepted": accepted, "cycles": body.cycles}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app
