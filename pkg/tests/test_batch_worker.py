import threading
import time
import unittest
from concurrent.futures import CancelledError
from unittest.mock import patch

from app.workers.batch_worker import run_ordered, worker_count


class WorkerCountTests(unittest.TestCase):
    def test_explicit_count_wins(self):
        self.assertEqual(3, worker_count(3))

    def test_auto_leaves_one_core_free(self):
        with patch("app.workers.batch_worker.os.cpu_count", return_value=4):
            self.assertEqual(3, worker_count(0))
        with patch("app.workers.batch_worker.os.cpu_count", return_value=32):
            self.assertEqual(8, worker_count(0))
        with patch("app.workers.batch_worker.os.cpu_count", return_value=None):
            self.assertEqual(1, worker_count(0))


class RunOrderedTests(unittest.TestCase):
    """Results come back in input order whatever the completion order."""

    def test_order_kept_with_uneven_work(self):
        def slow_square(x):
            time.sleep(0.001 * (10 - x))
            return x * x

        self.assertEqual([x * x for x in range(10)], run_ordered(slow_square, range(10), threads=4))

    def test_sequential_and_threaded_agree(self):
        items = [0.1 * i for i in range(37)]
        self.assertEqual(run_ordered(lambda v: v ** 3, items, threads=1),
                         run_ordered(lambda v: v ** 3, items, threads=5))

    def test_empty_input(self):
        self.assertEqual([], run_ordered(lambda v: v, [], threads=3))

    def test_error_propagates(self):
        def boom(x):
            if x == 3:
                raise ValueError("bad item")
            return x

        with self.assertRaises(ValueError):
            run_ordered(boom, range(6), threads=2)

    def test_progress_reported(self):
        seen = []
        run_ordered(lambda v: v, range(120), threads=2, progress_cb=lambda d, t: seen.append((d, t)))
        self.assertEqual((120, 120), seen[-1])
        self.assertIn((50, 120), seen)

    def test_cancellation_stops_early(self):
        calls = []
        lock = threading.Lock()

        def work(x):
            with lock:
                calls.append(x)
            return x

        with self.assertRaises(CancelledError):
            run_ordered(work, range(100), threads=1, cancel_check=lambda: len(calls) >= 5)
        self.assertEqual(5, len(calls))


if __name__ == "__main__":
    unittest.main()
