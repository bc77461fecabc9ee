import os
import unittest
from unittest import mock

import numpy as np

from src.utils.workers import THREADS_VARIABLE, map_chunks, worker_count


class TestWorkers(unittest.TestCase):
    def test_chunks_cover_range_in_order(self):
        data = np.arange(103)
        parts = map_chunks(lambda sl: data[sl] * 2, data.size, workers=4)
        self.assertEqual(len(parts), 4)
        np.testing.assert_array_equal(np.concatenate(parts), data * 2)

    def test_small_and_empty(self):
        self.assertEqual(map_chunks(lambda sl: sl, 0), [])
        self.assertEqual(map_chunks(lambda sl: (sl.start, sl.stop), 1, workers=8), [(0, 1)])

    def test_thread_cap(self):
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: "1"}):
            self.assertEqual(worker_count(), 1)
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: "many"}):
            self.assertEqual(worker_count(), os.cpu_count() or 1)


if __name__ == '__main__':
    unittest.main()
