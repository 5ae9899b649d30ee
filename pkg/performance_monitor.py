# Performance monitoring for the Pareto filtering service
# Tracks: HTTP response times, filter run times and dominance-check counts

import time
from collections import defaultdict
from datetime import datetime, timezone
from functools import wraps

from pareto_core import FilterStats

HISTORY_LIMIT = 1000


def _now():
    return datetime.now(timezone.utc).isoformat()


def _p95(values):
    ordered = sorted(values)
    return ordered[int(len(ordered) * 0.95)] if ordered else 0


class PerformanceMonitor:
    def __init__(self):
        self.metrics = defaultdict(list)
        self.runs = defaultdict(list)
        self.start_time = time.time()

    def record_endpoint(self, endpoint, method, status, duration_ms):
        """Record endpoint performance"""
        key = f"{method} {endpoint}"
        self.metrics[key].append({
            "status": status,
            "duration_ms": duration_ms,
            "timestamp": _now(),
        })
        # Keep only last 1000 records per endpoint
        if len(self.metrics[key]) > HISTORY_LIMIT:
            self.metrics[key] = self.metrics[key][-HISTORY_LIMIT:]

    def record_run(self, label, stats: FilterStats, output_size=None):
        """Record one filter run under an "<algorithm>/<tree>" label."""
        self.runs[label].append({
            "elapsed_ms": stats.elapsed_ns / 1e6,
            "comparisons": stats.comparisons,
            "node_visits": stats.node_visits,
            "output_size": output_size,
            "timestamp": _now(),
        })
        if len(self.runs[label]) > HISTORY_LIMIT:
            self.runs[label] = self.runs[label][-HISTORY_LIMIT:]

    def get_stats(self, label=None):
        """Calculate statistics for one run label, or for all endpoints when no label is given"""
        if label is not None:
            records = self.runs.get(label, [])
            if not records:
                return None
            elapsed = [r["elapsed_ms"] for r in records]
            return {
                "runs": len(records),
                "avg_elapsed_ms": sum(elapsed) / len(elapsed),
                "min_elapsed_ms": min(elapsed),
                "max_elapsed_ms": max(elapsed),
                "p95_elapsed_ms": _p95(elapsed),
                "avg_comparisons": sum(r["comparisons"] for r in records) / len(records),
            }

        records = [r for records in self.metrics.values() for r in records]
        if not records:
            return None
        durations = [r["duration_ms"] for r in records]
        statuses = defaultdict(int)
        for r in records:
            statuses[r["status"]] += 1
        return {
            "requests": len(records),
            "avg_duration_ms": sum(durations) / len(durations),
            "min_duration_ms": min(durations),
            "max_duration_ms": max(durations),
            "p95_duration_ms": _p95(durations),
            "status_codes": dict(statuses),
            "uptime_seconds": time.time() - self.start_time,
        }

    def get_endpoint_stats(self, endpoint):
        records = self.metrics.get(endpoint, [])
        if not records:
            return None
        durations = [r["duration_ms"] for r in records]
        return {
            "requests": len(records),
            "avg_duration_ms": sum(durations) / len(durations),
            "p95_duration_ms": _p95(durations),
        }

    def get_all_stats(self):
        """Get stats for every run label and endpoint"""
        return {
            "runs": {label: self.get_stats(label) for label in self.runs},
            "endpoints": {endpoint: self.get_endpoint_stats(endpoint) for endpoint in self.metrics},
        }

    def reset(self):
        self.metrics.clear()
        self.runs.clear()
        self.start_time = time.time()


monitor = PerformanceMonitor()


def track_run(label):
    """Decorator recording the stats of a function that returns a FilterResult

    The label is formatted with the call's keyword arguments, e.g. "{algorithm}/{tree}".
    """
    def decorator(f):
        @wraps(f)
        def wrapper(*args, **kwargs):
            result = f(*args, **kwargs)
            monitor.record_run(label.format(**kwargs), result.stats, len(result.frontier))
            return result
        return wrapper
    return decorator
