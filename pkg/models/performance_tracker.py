import json
import logging
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

from config import Config

logger = logging.getLogger(__name__)


class PerformanceTracker:
    """Track timings of counting, elimination and verification calls"""

    def __init__(self, metrics_file: Optional[str] = None, enabled: Optional[bool] = None):
        path = metrics_file if metrics_file is not None else Config.METRICS_FILE
        self.metrics_file = Path(path) if path else None
        self.enabled = Config.ENABLE_PERFORMANCE_TRACKING if enabled is None else enabled

        self.metrics = {
            'operations': [],
            'processing_times': defaultdict(list),
            'counters': defaultdict(int),
            'error_count': 0,
            'total_calls': 0,
        }

        # Thread lock for concurrent access
        self.lock = threading.Lock()

    def reset(self):
        with self.lock:
            self.metrics['operations'].clear()
            self.metrics['processing_times'].clear()
            self.metrics['counters'].clear()
            self.metrics['error_count'] = 0
            self.metrics['total_calls'] = 0

    def track_operation(self, name: str, duration: float, status: str = 'success', details: Dict = None):
        """Record one timed call"""
        if not self.enabled:
            return
        with self.lock:
            self.metrics['total_calls'] += 1
            if status == 'error':
                self.metrics['error_count'] += 1
            record = {
                'timestamp': datetime.now().isoformat(),
                'operation': name,
                'duration_ms': round(duration * 1000, 2),
                'status': status,
            }
            if details:
                record.update(details)
            self.metrics['operations'].append(record)
            self.metrics['processing_times'][name].append(duration)

    def increment(self, counter: str, amount: int = 1):
        if not self.enabled:
            return
        with self.lock:
            self.metrics['counters'][counter] += amount

    @contextmanager
    def measure(self, name: str, **details):
        start = time.perf_counter()
        status = 'success'
        try:
            yield
        except Exception:
            status = 'error'
            raise
        finally:
            self.track_operation(name, time.perf_counter() - start, status, details or None)

    def get_statistics(self) -> Dict:
        """Aggregated statistics per operation"""
        with self.lock:
            stats = {
                'total_calls': self.metrics['total_calls'],
                'error_count': self.metrics['error_count'],
                'counters': dict(self.metrics['counters']),
                'avg_processing_times': {},
            }
            for name, times in self.metrics['processing_times'].items():
                if times:
                    stats['avg_processing_times'][name] = {
                        'avg_ms': round(sum(times) / len(times) * 1000, 2),
                        'min_ms': round(min(times) * 1000, 2),
                        'max_ms': round(max(times) * 1000, 2),
                        'total_ms': round(sum(times) * 1000, 2),
                        'count': len(times),
                    }
            return stats

    def save_metrics(self, path: Optional[str] = None) -> Optional[Path]:
        """Persist statistics and the latest operations as JSON"""
        target = Path(path) if path else self.metrics_file
        if target is None:
            return None
        stats = self.get_statistics()
        with self.lock:
            stats['operations'] = self.metrics['operations'][-1000:]  # Keep last 1000
        stats['last_updated'] = datetime.now().isoformat()
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(stats, indent=2), encoding='utf-8')
        except OSError as e:
            logger.warning("Could not save metrics: %s", e)
            return None
        return target


# Global tracker instance
performance_tracker = PerformanceTracker()
