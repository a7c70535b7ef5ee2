"""Embedded file-backed store: users, vitals, messages, memory, tasks, costs.

SQLite behind a small interface. One lock serializes writers; readers share
the same connection under the lock, which is plenty at desk scale. Use
path=":memory:" for hermetic tests.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import time
from dataclasses import dataclass

from ..envelopes import ChatEnvelope
from ..interpreter.parse import VitalEstimate


class StorageFailure(RuntimeError):
    pass


_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    phone TEXT PRIMARY KEY,
    passcode_hash TEXT NOT NULL,
    token TEXT NOT NULL,
    device_id TEXT NOT NULL,
    name TEXT, age INTEGER, bmi REAL,
    medical_background TEXT, demographic TEXT,
    signup_complete INTEGER DEFAULT 0,
    welcome_sent INTEGER DEFAULT 0,
    uploads_paused INTEGER DEFAULT 0,
    thresholds_json TEXT DEFAULT '{}',
    created_ts REAL
);
CREATE TABLE IF NOT EXISTS vitals (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    phone TEXT NOT NULL,
    burst_ts INTEGER NOT NULL,
    estimate_json TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS vitals_user_ts ON vitals(phone, burst_ts);
CREATE TABLE IF NOT EXISTS envelopes (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    direction TEXT NOT NULL,
    phone TEXT NOT NULL,
    ts REAL NOT NULL,
    kind TEXT NOT NULL,
    body TEXT NOT NULL,
    buttons_json TEXT DEFAULT '[]',
    reply_to TEXT,
    delivered INTEGER DEFAULT 0
);
CREATE INDEX IF NOT EXISTS envelopes_user ON envelopes(phone, id);
CREATE TABLE IF NOT EXISTS memory_events (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    phone TEXT NOT NULL,
    ts REAL NOT NULL,
    kind TEXT NOT NULL,
    summary TEXT NOT NULL,
    vitals_json TEXT
);
CREATE TABLE IF NOT EXISTS tasks (
    id TEXT PRIMARY KEY,
    phone TEXT NOT NULL,
    kind TEXT NOT NULL,
    cron_expr TEXT NOT NULL,
    payload TEXT DEFAULT '',
    next_fire_ts INTEGER
);
CREATE TABLE IF NOT EXISTS cost_records (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    query_id TEXT,
    phone TEXT,
    route TEXT,
    tokens_json TEXT,
    total_usd REAL,
    ts REAL
);
CREATE TABLE IF NOT EXISTS seen_uploads (
    device_id TEXT NOT NULL,
    burst_ts INTEGER NOT NULL,
    PRIMARY KEY (device_id, burst_ts)
);
CREATE TABLE IF NOT EXISTS seen_webhooks (
    phone TEXT NOT NULL,
    ts REAL NOT NULL,
    body_hash TEXT NOT NULL,
    PRIMARY KEY (phone, ts, body_hash)
);
"""

_USER_FIELDS = ("phone", "passcode_hash", "token", "device_id", "name", "age",
                "bmi", "medical_background", "demographic", "signup_complete",
                "welcome_sent", "uploads_paused", "thresholds_json", "created_ts")


@dataclass
class UserProfile:
    phone: str
    passcode_hash: str
    token: str
    device_id: str
    name: str | None = None
    age: int | None = None
    bmi: float | None = None
    medical_background: str | None = None
    demographic: str | None = None
    signup_complete: bool = False
    welcome_sent: bool = False
    uploads_paused: bool = False
    thresholds: dict | None = None
    created_ts: float = 0.0

    REQUIRED_PROFILE_FIELDS = ("name", "age")

    def missing_profile_fields(self) -> list[str]:
        return [f for f in self.REQUIRED_PROFILE_FIELDS if getattr(self, f) is None]


def hash_passcode(passcode: str) -> str:
    return hashlib.sha256(passcode.encode("utf-8")).hexdigest()


class Store:
    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- users ---------------------------------------------------------------

    def create_user(self, phone: str, passcode_hash: str, token: str,
                    device_id: str) -> bool:
        """True when the row was created; False when the phone exists."""
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO users (phone, passcode_hash, token, device_id,"
                    " created_ts) VALUES (?, ?, ?, ?, ?)",
                    (phone, passcode_hash, token, device_id, time.time()))
                self._conn.commit()
                return True
            except sqlite3.IntegrityError:
                return False

    def _row_to_user(self, row) -> UserProfile:
        return UserProfile(
            phone=row["phone"], passcode_hash=row["passcode_hash"],
            token=row["token"], device_id=row["device_id"], name=row["name"],
            age=row["age"], bmi=row["bmi"],
            medical_background=row["medical_background"],
            demographic=row["demographic"],
            signup_complete=bool(row["signup_complete"]),
            welcome_sent=bool(row["welcome_sent"]),
            uploads_paused=bool(row["uploads_paused"]),
            thresholds=json.loads(row["thresholds_json"] or "{}"),
            created_ts=row["created_ts"],
        )

    def _get_user_where(self, clause: str, args: tuple) -> UserProfile | None:
        with self._lock:
            row = self._conn.execute(
                f"SELECT * FROM users WHERE {clause}", args).fetchone()
        return self._row_to_user(row) if row else None

    def get_user(self, phone: str) -> UserProfile | None:
        return self._get_user_where("phone = ?", (phone,))

    def get_user_by_token(self, token: str) -> UserProfile | None:
        return self._get_user_where("token = ?", (token,))

    def get_user_by_device(self, device_id: str) -> UserProfile | None:
        return self._get_user_where("device_id = ?", (device_id,))

    def update_user(self, phone: str, **fields) -> None:
        if "thresholds" in fields:
            fields["thresholds_json"] = json.dumps(fields.pop("thresholds"))
        unknown = set(fields) - set(_USER_FIELDS)
        if unknown:
            raise StorageFailure(f"unknown user fields: {sorted(unknown)}")
        assignments = ", ".join(f"{k} = ?" for k in fields)
        with self._lock:
            cur = self._conn.execute(
                f"UPDATE users SET {assignments} WHERE phone = ?",
                (*fields.values(), phone))
            self._conn.commit()
        if cur.rowcount == 0:
            raise StorageFailure(f"no such user: {phone}")

    def all_users(self) -> list[UserProfile]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM users ORDER BY phone").fetchall()
        return [self._row_to_user(r) for r in rows]

    # -- vitals --------------------------------------------------------------

    def save_vital(self, phone: str, estimate: VitalEstimate) -> int:
        if estimate.burst_ts is None:
            raise StorageFailure("estimate must carry its burst timestamp")
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO vitals (phone, burst_ts, estimate_json)"
                " VALUES (?, ?, ?)",
                (phone, estimate.burst_ts, json.dumps(estimate.to_json_dict())))
            self._conn.commit()
            return int(cur.lastrowid)

    def vitals_range(self, phone: str, start_ts: float | None = None,
                     end_ts: float | None = None) -> list[VitalEstimate]:
        query = "SELECT estimate_json FROM vitals WHERE phone = ?"
        args: list = [phone]
        if start_ts is not None:
            query += " AND burst_ts >= ?"
            args.append(start_ts)
        if end_ts is not None:
            query += " AND burst_ts <= ?"
            args.append(end_ts)
        query += " ORDER BY burst_ts, id"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [VitalEstimate.from_json_dict(json.loads(r[0])) for r in rows]

    def recent_vitals(self, phone: str, n: int) -> list[VitalEstimate]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT estimate_json FROM vitals WHERE phone = ?"
                " ORDER BY burst_ts DESC, id DESC LIMIT ?", (phone, n)).fetchall()
        return [VitalEstimate.from_json_dict(json.loads(r[0]))
                for r in reversed(rows)]

    def latest_vital(self, phone: str) -> VitalEstimate | None:
        """Max burst_ts; equal timestamps resolve to the latest insertion."""
        got = self.recent_vitals(phone, 1)
        return got[-1] if got else None

    # -- envelopes -----------------------------------------------------------

    def append_envelope(self, env: ChatEnvelope) -> int:
        env.validate()
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO envelopes (direction, phone, ts, kind, body,"
                " buttons_json, reply_to) VALUES (?, ?, ?, ?, ?, ?, ?)",
                (env.direction, env.user_phone, env.ts, env.kind, env.body,
                 json.dumps(env.buttons), env.reply_to))
            self._conn.commit()
            env.envelope_id = int(cur.lastrowid)
            return env.envelope_id

    def mark_delivered(self, envelope_id: int) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE envelopes SET delivered = 1 WHERE id = ?", (envelope_id,))
            self._conn.commit()

    def _row_to_envelope(self, row) -> ChatEnvelope:
        return ChatEnvelope(
            direction=row["direction"], user_phone=row["phone"], ts=row["ts"],
            kind=row["kind"], body=row["body"],
            buttons=json.loads(row["buttons_json"] or "[]"),
            reply_to=row["reply_to"], envelope_id=row["id"])

    def outbox(self, phone: str, cursor: int = 0,
               delivered_only: bool = True) -> list[ChatEnvelope]:
        query = ("SELECT * FROM envelopes WHERE phone = ? AND id > ?"
                 " AND direction = 'outbound'")
        if delivered_only:
            query += " AND delivered = 1"
        query += " ORDER BY id"
        with self._lock:
            rows = self._conn.execute(query, (phone, cursor)).fetchall()
        return [self._row_to_envelope(r) for r in rows]

    def undelivered(self, phone: str | None = None) -> list[ChatEnvelope]:
        query = ("SELECT * FROM envelopes WHERE direction = 'outbound'"
                 " AND delivered = 0")
        args: tuple = ()
        if phone is not None:
            query += " AND phone = ?"
            args = (phone,)
        query += " ORDER BY id"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [self._row_to_envelope(r) for r in rows]

    def history(self, phone: str, turns: int) -> list[ChatEnvelope]:
        """Last `turns` text/button exchanges for prompt context, oldest first."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM envelopes WHERE phone = ? AND kind IN"
                " ('text', 'button') ORDER BY id DESC LIMIT ?",
                (phone, turns)).fetchall()
        return [self._row_to_envelope(r) for r in reversed(rows)]

    # -- memory events -------------------------------------------------------

    def add_memory_event(self, phone: str, ts: float, kind: str, summary: str,
                         vitals: dict | None = None) -> int:
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO memory_events (phone, ts, kind, summary,"
                " vitals_json) VALUES (?, ?, ?, ?, ?)",
                (phone, ts, kind, summary, json.dumps(vitals or {})))
            self._conn.commit()
            return int(cur.lastrowid)

    def memory_events(self, phone: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM memory_events WHERE phone = ? ORDER BY id",
                (phone,)).fetchall()
        return [{"id": r["id"], "ts": r["ts"], "kind": r["kind"],
                 "summary": r["summary"],
                 "vitals": json.loads(r["vitals_json"] or "{}")} for r in rows]

    # -- tasks ---------------------------------------------------------------

    def save_task(self, task_id: str, phone: str, kind: str, cron_expr: str,
                  payload: str, next_fire_ts: int | None) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO tasks (id, phone, kind, cron_expr,"
                " payload, next_fire_ts) VALUES (?, ?, ?, ?, ?, ?)",
                (task_id, phone, kind, cron_expr, payload, next_fire_ts))
            self._conn.commit()

    def update_task_fire(self, task_id: str, next_fire_ts: int | None) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE tasks SET next_fire_ts = ? WHERE id = ?",
                (next_fire_ts, task_id))
            self._conn.commit()

    def load_tasks(self, phone: str | None = None) -> list[dict]:
        query = "SELECT * FROM tasks"
        args: tuple = ()
        if phone is not None:
            query += " WHERE phone = ?"
            args = (phone,)
        query += " ORDER BY id"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [dict(r) for r in rows]

    def delete_task(self, task_id: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM tasks WHERE id = ?", (task_id,))
            self._conn.commit()

    # -- cost records --------------------------------------------------------

    def add_cost_record(self, query_id: str, phone: str, route: str,
                        tokens_per_model: dict, total_usd: float,
                        ts: float) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO cost_records (query_id, phone, route, tokens_json,"
                " total_usd, ts) VALUES (?, ?, ?, ?, ?, ?)",
                (query_id, phone, route, json.dumps(tokens_per_model),
                 total_usd, ts))
            self._conn.commit()

    def cost_records(self, phone: str | None = None) -> list[dict]:
        query = "SELECT * FROM cost_records"
        args: tuple = ()
        if phone is not None:
            query += " WHERE phone = ?"
            args = (phone,)
        query += " ORDER BY id"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [dict(r) for r in rows]

    # -- idempotency helpers ---------------------------------------------------

    def seen_upload(self, device_id: str, burst_ts: int) -> bool:
        """True when (device, ts) was already ingested; records it otherwise."""
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO seen_uploads (device_id, burst_ts) VALUES (?, ?)",
                    (device_id, burst_ts))
                self._conn.commit()
                return False
            except sqlite3.IntegrityError:
                return True

    def last_upload_ts(self, device_id: str) -> int | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT MAX(burst_ts) FROM seen_uploads WHERE device_id = ?",
                (device_id,)).fetchone()
        return None if row[0] is None else int(row[0])

    def seen_webhook(self, phone: str, ts: float, body: str) -> bool:
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO seen_webhooks (phone, ts, body_hash)"
                    " VALUES (?, ?, ?)", (phone, ts, digest))
                self._conn.commit()
                return False
            except sqlite3.IntegrityError:
                return True

    # -- consent surface -------------------------------------------------------

    def export_user(self, phone: str) -> dict:
        user = self.get_user(phone)
        if user is None:
            raise StorageFailure(f"no such user: {phone}")
        with self._lock:
            envelopes = self._conn.execute(
                "SELECT * FROM envelopes WHERE phone = ? ORDER BY id",
                (phone,)).fetchall()
        return {
            "profile": {
                "phone": user.phone, "device_id": user.device_id,
                "name": user.name, "age": user.age, "bmi": user.bmi,
                "medical_background": user.medical_background,
                "demographic": user.demographic,
                "thresholds": user.thresholds,
            },
            "vitals": [v.to_json_dict() for v in self.vitals_range(phone)],
            "messages": [self._row_to_envelope(r).to_json_dict()
                         for r in envelopes],
            "memory_events": self.memory_events(phone),
            "tasks": self.load_tasks(phone),
            "cost_records": self.cost_records(phone),
        }

    def delete_user(self, phone: str) -> None:
        if self.get_user(phone) is None:
            raise StorageFailure(f"no such user: {phone}")
        with self._lock:
            for table in ("vitals", "envelopes", "memory_events", "tasks",
                          "cost_records"):
                self._conn.execute(f"DELETE FROM {table} WHERE phone = ?", (phone,))
            self._conn.execute("DELETE FROM users WHERE phone = ?", (phone,))
            self._conn.commit()
