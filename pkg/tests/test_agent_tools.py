import xml.etree.ElementTree as ET
from datetime import datetime, timezone

import pytest

from pulseline.agent_tools import (
    ChartRequest,
    CronExpr,
    EmptyIndex,
    InvalidCron,
    KnowledgeIndex,
    NoData,
    ScheduledTask,
    Scheduler,
    fire_no_data_check,
    latest_vitals,
    render_chart,
    render_chart_svg,
)
from pulseline.agent_tools.charts import MARGIN_LEFT, MARGIN_TOP, scale_points
from pulseline.gateway.media import MediaNotFound, MediaStore
from pulseline.interpreter.parse import VitalEstimate
from pulseline.orchestrator.storage import Store


def utc(year, month, day, hour=0, minute=0):
    return datetime(year, month, day, hour, minute, tzinfo=timezone.utc).timestamp()


class TestCron:
    def test_daily_nine_am(self):
        expr = CronExpr.parse("0 9 * * *")
        t = expr.next_after(utc(2024, 3, 1, 10, 0))
        assert t == utc(2024, 3, 2, 9, 0)
        assert expr.next_after(utc(2024, 3, 1, 8, 59)) == utc(2024, 3, 1, 9, 0)

    def test_next_is_strictly_after(self):
        expr = CronExpr.parse("0 9 * * *")
        at_nine = utc(2024, 3, 1, 9, 0)
        assert expr.next_after(at_nine) == utc(2024, 3, 2, 9, 0)

    def test_every_five_minutes(self):
        expr = CronExpr.parse("*/5 * * * *")
        t = utc(2024, 3, 1, 0, 0)
        fires = []
        for _ in range(12):
            t = expr.next_after(t)
            fires.append(t)
        assert fires[0] == utc(2024, 3, 1, 0, 5)
        assert fires[-1] == utc(2024, 3, 1, 1, 0)

    def test_ranges_lists_and_steps(self):
        expr = CronExpr.parse("0,30 9-17 * * 1-5")
        friday_noon = utc(2024, 3, 1, 12, 0)  # 2024-03-01 is a Friday
        assert expr.next_after(friday_noon) == utc(2024, 3, 1, 12, 30)
        saturday = utc(2024, 3, 2, 12, 0)
        assert expr.next_after(saturday) == utc(2024, 3, 4, 9, 0)  # Monday

    def test_dow_sunday_aliases(self):
        for token in ("0", "7"):
            expr = CronExpr.parse(f"0 12 * * {token}")
            assert expr.next_after(utc(2024, 3, 1))  == utc(2024, 3, 3, 12, 0)

    def test_malformed_rejected(self):
        for bad in ("9am daily", "* * * *", "61 * * * *", "* * * * * *",
                    "*/0 * * * *", "a b c d e"):
            with pytest.raises(InvalidCron):
                CronExpr.parse(bad)

    def test_monthly_and_dom(self):
        expr = CronExpr.parse("15 6 1 * *")
        assert expr.next_after(utc(2024, 1, 5)) == utc(2024, 2, 1, 6, 15)


class TestScheduler:
    def make(self, now=utc(2024, 3, 1, 0, 0)):
        store = Store(":memory:")
        clock = {"now": now}
        fired = []
        scheduler = Scheduler(store, lambda: clock["now"],
                              lambda task, ts: fired.append((task.id, ts)))
        return store, clock, fired, scheduler

    def test_daily_fires_once_per_day(self):
        store, clock, fired, scheduler = self.make()
        scheduler.schedule(ScheduledTask(user="u", kind="daily_summary",
                                         cron_expr="0 9 * * *"))
        for day in range(1, 4):
            clock["now"] = utc(2024, 3, day, 12, 0)
            scheduler.advance()
        assert len(fired) == 3
        assert [ts for _, ts in fired] == [utc(2024, 3, d, 9, 0) for d in (1, 2, 3)]

    def test_advance_is_idempotent_between_instants(self):
        store, clock, fired, scheduler = self.make()
        scheduler.schedule(ScheduledTask(user="u", kind="daily_summary",
                                         cron_expr="0 9 * * *"))
        clock["now"] = utc(2024, 3, 1, 9, 30)
        scheduler.advance()
        scheduler.advance()
        assert len(fired) == 1

    def test_clock_jump_fires_each_instant_once(self):
        store, clock, fired, scheduler = self.make()
        scheduler.schedule(ScheduledTask(user="u", kind="daily_summary",
                                         cron_expr="0 9 * * *"))
        clock["now"] = utc(2024, 3, 5, 10, 0)
        scheduler.advance()
        assert [ts for _, ts in fired] == [utc(2024, 3, d, 9, 0)
                                           for d in (1, 2, 3, 4, 5)]

    def test_survives_restart_without_refire(self):
        store, clock, fired, scheduler = self.make()
        scheduler.schedule(ScheduledTask(user="u", kind="daily_summary",
                                         cron_expr="0 9 * * *"))
        clock["now"] = utc(2024, 3, 1, 9, 5)
        scheduler.advance()
        # new scheduler instance over the same store: nothing refires until
        # the next scheduled instant
        fresh = Scheduler(store, lambda: clock["now"],
                          lambda task, ts: fired.append((task.id, ts)))
        fresh.advance()
        assert len(fired) == 1
        clock["now"] = utc(2024, 3, 2, 9, 5)
        fresh.advance()
        assert len(fired) == 2

    def test_invalid_cron_rejected(self):
        _, _, _, scheduler = self.make()
        with pytest.raises(InvalidCron):
            scheduler.schedule(ScheduledTask(user="u", kind="custom",
                                             cron_expr="9am daily"))

    def test_unknown_kind_rejected(self):
        _, _, _, scheduler = self.make()
        with pytest.raises(ValueError):
            scheduler.schedule(ScheduledTask(user="u", kind="nonsense",
                                             cron_expr="0 9 * * *"))


class TestNoDataCheck:
    def test_recent_estimate_no_reminder(self):
        store = Store(":memory:")
        store.save_vital("u", VitalEstimate(hr=70.0, burst_ts=1000))
        assert fire_no_data_check(store, "u", now=1000 + 600,
                                  interval_s=6 * 3600) is None

    def test_no_estimates_reminds(self):
        store = Store(":memory:")
        assert fire_no_data_check(store, "u", now=0, interval_s=6 * 3600)

    def test_exact_boundary_no_reminder(self):
        store = Store(":memory:")
        store.save_vital("u", VitalEstimate(hr=70.0, burst_ts=1000))
        boundary = 1000 + 6 * 3600
        assert fire_no_data_check(store, "u", now=boundary,
                                  interval_s=6 * 3600) is None
        assert fire_no_data_check(store, "u", now=boundary + 1,
                                  interval_s=6 * 3600) is not None


class TestLatestVitals:
    def test_picks_max_ts(self):
        store = Store(":memory:")
        for ts in (1, 2, 3):
            store.save_vital("u", VitalEstimate(hr=60.0 + ts, burst_ts=ts))
        assert latest_vitals(store, "u").burst_ts == 3

    def test_absent_when_empty(self):
        assert latest_vitals(Store(":memory:"), "u") is None

    def test_tie_breaks_by_insertion_order(self):
        store = Store(":memory:")
        store.save_vital("u", VitalEstimate(hr=60.0, burst_ts=5))
        store.save_vital("u", VitalEstimate(hr=61.0, burst_ts=5))
        assert latest_vitals(store, "u").hr == 61.0


class TestCharts:
    def test_two_point_line_coordinates(self, tmp_path):
        points = [(100.0, 60.0), (200.0, 90.0)]
        svg = render_chart_svg("hr", points, "line")
        root = ET.fromstring(svg.decode())
        ns = "{http://www.w3.org/2000/svg}"
        polyline = root.find(f"{ns}polyline")
        got = [float(c) for pair in polyline.attrib["points"].split()
               for c in pair.split(",")]
        expected = [c for xy in scale_points(points) for c in xy]
        assert got == pytest.approx(expected, abs=0.01)
        # first point at plot origin corner: min-ts at left; second point has
        # the max value, so it sits at the plot top
        assert got[0] == pytest.approx(MARGIN_LEFT, abs=0.01)
        assert got[3] == pytest.approx(MARGIN_TOP, abs=0.01)
        circles = root.findall(f"{ns}circle")
        assert [c.attrib["data-ts"] for c in circles] == ["100", "200"]

    def test_empty_range_raises(self):
        with pytest.raises(NoData):
            render_chart_svg("hr", [], "line")

    def test_identical_requests_byte_identical(self, tmp_path):
        store = MediaStore(tmp_path)
        estimates = [VitalEstimate(hr=70.0 + i, burst_ts=100 + i) for i in range(5)]
        req = ChartRequest(user="u", metric="hr", time_range=(0, 1000))
        id1 = render_chart(req, estimates, store)
        id2 = render_chart(req, estimates, store)
        assert id1 != id2  # opaque ids are unguessable, not stable
        assert store.get(id1)[0] == store.get(id2)[0]

    def test_histogram_renders(self):
        points = [(float(i), float(v)) for i, v in
                  enumerate([60, 61, 62, 70, 71, 90, 91, 92, 93, 94])]
        svg = render_chart_svg("hr", points, "histogram")
        root = ET.fromstring(svg.decode())
        rects = [r for r in root.iter() if r.tag.endswith("rect")
                 and "data-count" in r.attrib]
        assert sum(int(r.attrib["data-count"]) for r in rects) == 10

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            ChartRequest(user="u", metric="steps", time_range=(0, 1)).validate()

    def test_activity_series_renders(self, tmp_path):
        store = MediaStore(tmp_path)
        estimates = [VitalEstimate(activity=a, burst_ts=i)
                     for i, a in enumerate(["sit", "walk", "run"])]
        req = ChartRequest(user="u", metric="activity", time_range=(0, 10))
        media_id = render_chart(req, estimates, store)
        data, mime = store.get(media_id)
        assert mime == "image/svg+xml" and b"polyline" in data


class TestMediaStore:
    def test_round_trip(self, tmp_path):
        store = MediaStore(tmp_path)
        media_id = store.put(b"hello", "text/plain")
        assert store.get(media_id) == (b"hello", "text/plain")

    def test_unknown_id(self, tmp_path):
        with pytest.raises(MediaNotFound):
            MediaStore(tmp_path).get("nope")

    def test_traversal_rejected(self, tmp_path):
        with pytest.raises(MediaNotFound):
            MediaStore(tmp_path).get("../etc/passwd")


class TestRetrieval:
    def make_index(self):
        index = KnowledgeIndex(corpus_dir=None)
        index.add_document("d1", "hydration water drinking water daily",
                           source="general_corpus")
        index.add_document("d2", "sleep schedule and rest", source="general_corpus")
        index.add_document("d3", "exercise heart rate zones", source="general_corpus")
        return index

    def test_single_match_ranks_first(self):
        result = self.make_index().retrieve("water", k=2)
        assert result[0].doc_id == "d1"
        assert result[0].score > result[1].score

    def test_k_larger_than_corpus(self):
        result = self.make_index().retrieve("sleep", k=10)
        assert len(result) == 3
        assert result[0].doc_id == "d2"

    def test_tie_breaks_on_doc_id(self):
        index = KnowledgeIndex(corpus_dir=None)
        index.add_document("b", "walking daily walking")
        index.add_document("a", "walking often walking")
        result = index.retrieve("walking", k=2)
        # brute-force oracle: equal term counts, so ids decide
        assert index.score("walking", "a") == index.score("walking", "b")
        assert [p.doc_id for p in result] == ["a", "b"]

    def test_prefix_stability(self):
        index = self.make_index()
        for k in (1, 2):
            shorter = [p.doc_id for p in index.retrieve("heart rate sleep", k)]
            longer = [p.doc_id for p in index.retrieve("heart rate sleep", k + 1)]
            assert longer[:k] == shorter

    def test_empty_index_rejected(self):
        with pytest.raises(EmptyIndex):
            KnowledgeIndex(corpus_dir=None).retrieve("x", 1)

    def test_bundled_corpus_loads(self):
        index = KnowledgeIndex()
        assert len(index) >= 5
        hits = index.retrieve("resting heart rate", k=3)
        assert hits[0].doc_id == "heart_rate_basics"
        assert hits[0].source == "general_corpus"

    def test_user_upload_searchable(self):
        index = self.make_index()
        index.add_document("my_report", "doctor notes about my iron levels")
        hits = index.retrieve("iron levels", k=1)
        assert hits[0].doc_id == "my_report"
        assert hits[0].source == "user_uploaded"
