import json

import pytest

from models.performance_tracker import PerformanceTracker


@pytest.fixture
def tracker(tmp_path):
    return PerformanceTracker(metrics_file=str(tmp_path / "metrics.json"), enabled=True)


def test_measure_records_success_and_errors(tracker):
    with tracker.measure("count", n=3):
        pass
    with pytest.raises(RuntimeError):
        with tracker.measure("count"):
            raise RuntimeError("boom")
    stats = tracker.get_statistics()
    assert stats["total_calls"] == 2
    assert stats["error_count"] == 1
    assert stats["avg_processing_times"]["count"]["count"] == 2
    assert tracker.metrics["operations"][0]["n"] == 3


def test_counters_and_reset(tracker):
    tracker.increment("cells", 4)
    tracker.increment("cells")
    assert tracker.get_statistics()["counters"] == {"cells": 5}
    tracker.reset()
    assert tracker.get_statistics()["counters"] == {}


def test_disabled_tracker_ignores_calls(tmp_path):
    tracker = PerformanceTracker(metrics_file="", enabled=False)
    with tracker.measure("count"):
        pass
    assert tracker.get_statistics()["total_calls"] == 0
    assert tracker.save_metrics() is None


def test_save_metrics(tracker, tmp_path):
    with tracker.measure("qe"):
        pass
    path = tracker.save_metrics()
    saved = json.loads(path.read_text(encoding="utf-8"))
    assert saved["total_calls"] == 1
    assert saved["operations"][0]["operation"] == "qe"
    assert "last_updated" in saved
