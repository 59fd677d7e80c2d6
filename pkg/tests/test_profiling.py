#!/usr/bin/python3
import unittest
from concurrent.futures import ThreadPoolExecutor

from frnet import Profiler, profile


@profile
def inner(x):
    return x + 1


@profile
def outer(n):
    return sum(inner(i) for i in range(n))


class TestProfiler(unittest.TestCase):
    """
    Call counting and nesting of the @profile decorator.
    """

    def tearDown(self):
        Profiler.stop()

    def test_inactive(self):
        Profiler.stop()
        self.assertEqual(outer(3), 6)
        self.assertEqual(Profiler.summary(), [])
        self.assertFalse(Profiler.is_active())

    def test_nesting(self):
        Profiler.start()
        outer(4)
        outer(2)
        rows = Profiler.summary(nested=True)
        self.assertEqual([(name.split("─")[-1], calls) for name, _, _, calls in rows],
                         [("outer", 2), ("inner", 6)])
        self.assertTrue(rows[1][0].startswith("└─"))
        for _, seconds, share, _ in rows:
            self.assertGreaterEqual(seconds, 0.)
            self.assertLessEqual(share, 1.)

    def test_restart_discards(self):
        Profiler.start()
        outer(5)
        Profiler.start()
        inner(0)
        self.assertEqual({name: calls for name, (_, calls) in Profiler.totals().items()}, {"inner": 1})

    def test_worker_threads(self):
        Profiler.start()
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(outer, [10] * 20))
        self.assertEqual(results, [55] * 20)
        totals = Profiler.totals()
        self.assertEqual(totals["outer"][1], 20)
        self.assertEqual(totals["inner"][1], 200)
