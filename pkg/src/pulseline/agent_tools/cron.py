"""Minimal 5-field cron expressions (minute hour dom month dow).

Supports *, steps (*/n, a-b/n), ranges, and comma lists. Day-of-month and
day-of-week combine with the classic rule: when both are restricted, a time
matches if either does. All arithmetic is UTC on unix timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

_FIELD_RANGES = (
    ("minute", 0, 59),
    ("hour", 0, 23),
    ("dom", 1, 31),
    ("month", 1, 12),
    ("dow", 0, 7),  # 0 and 7 are both Sunday
)

_SEARCH_LIMIT_DAYS = 366 * 5


class InvalidCron(ValueError):
    """Expression does not parse as 5-field cron."""


def _parse_field(token: str, name: str, lo: int, hi: int) -> tuple[frozenset[int], bool]:
    """Returns (allowed values, restricted?)."""
    values: set[int] = set()
    restricted = token != "*"
    for part in token.split(","):
        part = part.strip()
        if not part:
            raise InvalidCron(f"{name}: empty list item")
        step = 1
        if "/" in part:
            part, step_text = part.split("/", 1)
            try:
                step = int(step_text)
            except ValueError:
                raise InvalidCron(f"{name}: bad step {step_text!r}") from None
            if step < 1:
                raise InvalidCron(f"{name}: step must be >= 1")
        if part == "*":
            start, end = lo, hi
        elif "-" in part:
            try:
                a, b = (int(x) for x in part.split("-", 1))
            except ValueError:
                raise InvalidCron(f"{name}: bad range {part!r}") from None
            start, end = a, b
        else:
            try:
                start = end = int(part)
            except ValueError:
                raise InvalidCron(f"{name}: bad value {part!r}") from None
        if not (lo <= start <= hi and lo <= end <= hi and start <= end):
            raise InvalidCron(f"{name}: {part!r} outside {lo}-{hi}")
        values.update(range(start, end + 1, step))
    if not values:
        raise InvalidCron(f"{name}: no values")
    return frozenset(values), restricted


@dataclass(frozen=True)
class CronExpr:
    text: str
    minutes: frozenset[int]
    hours: frozenset[int]
    dom: frozenset[int]
    months: frozenset[int]
    dow: frozenset[int]
    dom_restricted: bool
    dow_restricted: bool

    @classmethod
    def parse(cls, text: str) -> "CronExpr":
        tokens = text.split()
        if len(tokens) != 5:
            raise InvalidCron(f"expected 5 fields, got {len(tokens)}: {text!r}")
        parsed = [
            _parse_field(token, name, lo, hi)
            for token, (name, lo, hi) in zip(tokens, _FIELD_RANGES)
        ]
        dow_values = {v % 7 for v in parsed[4][0]}  # 7 folds onto Sunday
        return cls(
            text=text,
            minutes=parsed[0][0],
            hours=parsed[1][0],
            dom=parsed[2][0],
            months=parsed[3][0],
            dow=frozenset(dow_values),
            dom_restricted=parsed[2][1],
            dow_restricted=parsed[4][1],
        )

    def matches(self, ts: float) -> bool:
        dt = datetime.fromtimestamp(int(ts) // 60 * 60, tz=timezone.utc)
        if (dt.minute not in self.minutes or dt.hour not in self.hours
                or dt.month not in self.months):
            return False
        return self._day_matches(dt)

    def _day_matches(self, dt: datetime) -> bool:
        dom_ok = dt.day in self.dom
        dow_ok = (dt.weekday() + 1) % 7 in self.dow  # cron Sunday=0
        if self.dom_restricted and self.dow_restricted:
            return dom_ok or dow_ok
        return dom_ok and dow_ok

    def next_after(self, ts: float) -> int:
        """First matching minute strictly after `ts`."""
        dt = datetime.fromtimestamp(int(ts) // 60 * 60, tz=timezone.utc)
        dt += timedelta(minutes=1)
        deadline = dt + timedelta(days=_SEARCH_LIMIT_DAYS)
        while dt < deadline:
            if dt.month not in self.months:
                next_month = (dt.replace(day=1) + timedelta(days=32)).replace(
                    day=1, hour=0, minute=0)
                dt = next_month
                continue
            if not self._day_matches(dt):
                dt = dt.replace(hour=0, minute=0) + timedelta(days=1)
                continue
            if dt.hour not in self.hours:
                dt = dt.replace(minute=0) + timedelta(hours=1)
                continue
            if dt.minute not in self.minutes:
                dt += timedelta(minutes=1)
                continue
            return int(dt.timestamp())
        raise InvalidCron(f"no matching time within {_SEARCH_LIMIT_DAYS} days: "
                          f"{self.text!r}")
