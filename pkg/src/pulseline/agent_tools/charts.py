"""Deterministic SVG chart generation for chat delivery.

Plain string assembly, no plotting library: identical (request, data)
pairs must yield byte-identical artifacts for the golden tests, and the
coordinates must be parseable by the verification suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..interpreter.parse import VitalEstimate

METRICS = ("hr", "spo2", "temp_body", "temp_ambient", "activity")
CHART_KINDS = ("line", "histogram")

WIDTH, HEIGHT = 640.0, 360.0
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 64.0, 20.0, 42.0, 46.0

_ACTIVITY_LEVELS = {"sit": 0.0, "walk": 1.0, "run": 2.0}

_UNITS = {"hr": "BPM", "spo2": "%", "temp_body": "degC",
          "temp_ambient": "degC", "activity": "level"}


class NoData(ValueError):
    """No points for the metric in the requested range."""


@dataclass
class ChartRequest:
    user: str
    metric: str
    time_range: tuple[float, float]
    kind: str = "line"

    def validate(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.kind not in CHART_KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}")
        start, end = self.time_range
        if not end >= start:
            raise ValueError("time_range end must be >= start")


def metric_points(estimates: list[VitalEstimate], metric: str) -> list[tuple[float, float]]:
    """(burst_ts, value) pairs; estimates missing the metric are skipped."""
    points = []
    for est in estimates:
        value = getattr(est, metric)
        if metric == "activity":
            value = _ACTIVITY_LEVELS.get(value)
        if value is None or est.burst_ts is None:
            continue
        points.append((float(est.burst_ts), float(value)))
    return points


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def scale_points(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Map (ts, value) to pixel coordinates inside the plot area."""
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    t0, t1 = min(p[0] for p in points), max(p[0] for p in points)
    v0, v1 = min(p[1] for p in points), max(p[1] for p in points)
    t_span = (t1 - t0) or 1.0
    v_span = (v1 - v0) or 1.0

    def to_xy(t: float, v: float) -> tuple[float, float]:
        x = MARGIN_LEFT + (t - t0) / t_span * plot_w
        y = MARGIN_TOP + (1.0 - (v - v0) / v_span) * plot_h
        return x, y

    return [to_xy(t, v) for t, v in points]


def render_chart_svg(metric: str, points: list[tuple[float, float]],
                     kind: str = "line") -> bytes:
    """Fixed-size labeled chart; raises NoData on an empty series."""
    if not points:
        raise NoData(f"no {metric} points in range")
    if kind not in CHART_KINDS:
        raise ValueError(f"unknown chart kind {kind!r}")
    points = sorted(points)
    t0, t1 = points[0][0], points[-1][0]
    values = [v for _, v in points]
    v0, v1 = min(values), max(values)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
        f'<rect x="0" y="0" width="{WIDTH:g}" height="{HEIGHT:g}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:g}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{metric} '
        f'({_UNITS[metric]}), {len(points)} points</text>',
        # axes
        f'<line x1="{MARGIN_LEFT:g}" y1="{MARGIN_TOP:g}" x2="{MARGIN_LEFT:g}" '
        f'y2="{HEIGHT - MARGIN_BOTTOM:g}" stroke="#444444"/>',
        f'<line x1="{MARGIN_LEFT:g}" y1="{HEIGHT - MARGIN_BOTTOM:g}" '
        f'x2="{WIDTH - MARGIN_RIGHT:g}" y2="{HEIGHT - MARGIN_BOTTOM:g}" '
        f'stroke="#444444"/>',
        # axis labels: metric range and time range
        f'<text x="8" y="{MARGIN_TOP + 4:g}" font-family="sans-serif" '
        f'font-size="11">{_fmt(v1)}</text>',
        f'<text x="8" y="{HEIGHT - MARGIN_BOTTOM:g}" font-family="sans-serif" '
        f'font-size="11">{_fmt(v0)}</text>',
        f'<text x="{MARGIN_LEFT:g}" y="{HEIGHT - 12:g}" '
        f'font-family="sans-serif" font-size="11">t={int(t0)}</text>',
        f'<text x="{WIDTH - MARGIN_RIGHT:g}" y="{HEIGHT - 12:g}" '
        f'text-anchor="end" font-family="sans-serif" font-size="11">'
        f't={int(t1)}</text>',
    ]

    if kind == "line":
        scaled = scale_points(points)
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in scaled)
        parts.append(f'<polyline fill="none" stroke="#2a7ae2" stroke-width="2" '
                     f'points="{coords}"/>')
        for (x, y), (t, _) in zip(scaled, points):
            parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" '
                         f'fill="#2a7ae2" data-ts="{int(t)}"/>')
    else:  # histogram over values
        n_bins = 10
        span = (v1 - v0) or 1.0
        counts = [0] * n_bins
        for v in values:
            idx = min(int((v - v0) / span * n_bins), n_bins - 1)
            counts[idx] += 1
        plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        peak = max(counts) or 1
        bar_w = plot_w / n_bins
        for i, count in enumerate(counts):
            bar_h = count / peak * plot_h
            x = MARGIN_LEFT + i * bar_w
            y = HEIGHT - MARGIN_BOTTOM - bar_h
            parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w - 2)}" '
                f'height="{_fmt(bar_h)}" fill="#2a7ae2" data-count="{count}"/>')

    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")


def render_chart(request: ChartRequest, estimates: list[VitalEstimate],
                 media_store) -> str:
    """Render and persist the artifact; returns the media id."""
    request.validate()
    start, end = request.time_range
    in_range = [e for e in estimates
                if e.burst_ts is not None and start <= e.burst_ts <= end]
    points = metric_points(in_range, request.metric)
    svg = render_chart_svg(request.metric, points, request.kind)
    return media_store.put(svg, "image/svg+xml")
