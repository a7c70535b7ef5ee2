"""In-process task scheduler with an injectable clock.

Tasks persist their next fire instant, so a restarted scheduler resumes
exactly where the previous one stopped: each (task, scheduled instant)
fires once. The external-callback model this replaces would map onto the
same surface (an adapter would call `advance` from its webhook).
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Callable

from ..orchestrator.storage import Store
from .cron import CronExpr, InvalidCron

TASK_KINDS = ("daily_summary", "medication_reminder", "no_data_check", "custom")


@dataclass
class ScheduledTask:
    user: str
    kind: str
    cron_expr: str
    payload: str = ""
    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    next_fire_ts: int | None = None

    def validate(self) -> None:
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        CronExpr.parse(self.cron_expr)  # raises InvalidCron


class Scheduler:
    def __init__(self, store: Store, clock: Callable[[], float],
                 on_fire: Callable[[ScheduledTask, int], None] | None = None):
        self.store = store
        self.clock = clock
        self.on_fire = on_fire or (lambda task, ts: None)

    def schedule(self, task: ScheduledTask) -> str:
        task.validate()
        expr = CronExpr.parse(task.cron_expr)
        if task.next_fire_ts is None:
            task.next_fire_ts = expr.next_after(self.clock())
        self.store.save_task(task.id, task.user, task.kind, task.cron_expr,
                             task.payload, task.next_fire_ts)
        return task.id

    def cancel(self, task_id: str) -> None:
        self.store.delete_task(task_id)

    def tasks(self, user: str | None = None) -> list[ScheduledTask]:
        return [
            ScheduledTask(user=row["phone"], kind=row["kind"],
                          cron_expr=row["cron_expr"], payload=row["payload"],
                          id=row["id"], next_fire_ts=row["next_fire_ts"])
            for row in self.store.load_tasks(user)
        ]

    def advance(self) -> list[tuple[ScheduledTask, int]]:
        """Fire everything due at the clock's current time.

        A clock that jumped across several scheduled instants fires each
        instant once, oldest first. The new next_fire_ts persists before the
        handler runs so a handler failure cannot double-fire.
        """
        now = self.clock()
        fired: list[tuple[ScheduledTask, int]] = []
        for task in self.tasks():
            if task.next_fire_ts is None:
                continue
            expr = CronExpr.parse(task.cron_expr)
            while task.next_fire_ts is not None and task.next_fire_ts <= now:
                fire_ts = task.next_fire_ts
                try:
                    task.next_fire_ts = expr.next_after(fire_ts)
                except InvalidCron:
                    task.next_fire_ts = None
                self.store.update_task_fire(task.id, task.next_fire_ts)
                self.on_fire(task, fire_ts)
                fired.append((task, fire_ts))
        return fired


def fire_no_data_check(store: Store, user: str, now: float,
                       interval_s: float) -> str | None:
    """Reminder text when no estimate landed within the interval; the
    boundary itself (age exactly equal) does not remind."""
    latest = store.latest_vital(user)
    if latest is not None and latest.burst_ts is not None:
        if now - latest.burst_ts <= interval_s:
            return None
    hours = interval_s / 3600.0
    return (f"No new readings have arrived in the last {hours:g} hours. "
            "Is the band on and the app connected?")
