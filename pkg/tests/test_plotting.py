import os
import tempfile
import unittest

import numpy as np

from src.core.solvers import ProblemSpec, solve_l1
from src.plotting.plot_manager import PlotManager


class TestPlotManager(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.plot_manager = PlotManager(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_initialization(self):
        self.assertIsNotNone(self.plot_manager)
        self.assertEqual(self.plot_manager.xy_path("u"), os.path.join(self.tmp.name, "u.xy"))

    def test_blocks_read_back(self):
        x = np.linspace(0.0, 1.0, 5)
        ok, message = self.plot_manager.save_xy("curves", x, [x ** 2, -x], ["square", "neg"])
        self.assertTrue(ok, message)
        blocks = self.plot_manager.load_xy(self.plot_manager.xy_path("curves"))
        self.assertEqual(len(blocks), 2)
        np.testing.assert_allclose(blocks[0][1], x ** 2)
        np.testing.assert_allclose(blocks[1][0], x)

    def test_mismatched_series(self):
        ok, message = self.plot_manager.save_xy("bad", np.arange(3), [np.arange(4)])
        self.assertFalse(ok)
        self.assertIn("do not match", message)
        self.assertFalse(os.path.exists(self.plot_manager.xy_path("bad")))

    def test_slice_of_solution(self):
        solution = solve_l1(ProblemSpec(0.5, 2, 16.0, 16, 1.0, 16), [0.0, 1.0])
        ok, _ = self.plot_manager.save_slice("slice", solution)
        self.assertTrue(ok)
        blocks = self.plot_manager.load_xy(self.plot_manager.xy_path("slice"))
        self.assertEqual(len(blocks), 2)
        self.assertEqual(blocks[0].shape, (2, 16))


if __name__ == '__main__':
    unittest.main()
