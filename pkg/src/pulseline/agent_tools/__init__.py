"""Tool affordances for the agent: scheduling, charts, retrieval, polling."""

from .charts import ChartRequest, NoData, metric_points, render_chart, render_chart_svg
from .cron import CronExpr, InvalidCron
from .retrieval import EmptyIndex, KnowledgeIndex, KnowledgePassage
from .scheduler import ScheduledTask, Scheduler, fire_no_data_check


def latest_vitals(store, user: str):
    """Most recent stored estimate for the user; None when empty. Equal
    timestamps resolve to the latest insertion."""
    return store.latest_vital(user)


__all__ = [
    "ChartRequest",
    "CronExpr",
    "EmptyIndex",
    "InvalidCron",
    "KnowledgeIndex",
    "KnowledgePassage",
    "NoData",
    "ScheduledTask",
    "Scheduler",
    "fire_no_data_check",
    "latest_vitals",
    "metric_points",
    "render_chart",
    "render_chart_svg",
]
