import os

import numpy as np

from ..utils.log import get_logger

logger = get_logger("plotting")


class PlotManager:
    """Writes gnuplot-ready XY blocks; nothing is rendered here"""

    def __init__(self, output_dir="."):
        self.output_dir = output_dir

    def xy_path(self, name):
        return os.path.join(self.output_dir, f"{name}.xy")

    def save_xy(self, name, x, series, labels=None):
        """One block per series, separated by two blank lines (gnuplot `index`)"""
        x = np.asarray(x, dtype=float)
        series = [np.asarray(s, dtype=float) for s in series]
        labels = labels or [f"series {i}" for i in range(len(series))]
        if any(s.shape != x.shape for s in series):
            return False, f"Error: series for {name} do not match the abscissa"
        os.makedirs(self.output_dir, exist_ok=True)
        filename = self.xy_path(name)
        try:
            with open(filename, "w", encoding="utf-8", newline="\n") as file:
                for label, values in zip(labels, series):
                    file.write(f"# {label}\n")
                    for a, b in zip(x, values):
                        file.write(f"{a:.12g} {b:.12g}\n")
                    file.write("\n\n")
        except OSError as e:
            return False, f"Error saving {filename}: {e}"
        logger.info("wrote %s", filename)
        return True, f"Plot data saved to {filename}"

    def save_slice(self, name, solution):
        """Line through the origin along the first axis for each snapshot"""
        lattice = solution.lattice
        centre = lattice.modes // 2
        index = (slice(None),) + (centre,) * (lattice.n - 1)
        series = [u[index] for u in solution.values]
        labels = [f"{solution.solver} t={t:.6g}" for t in solution.times]
        return self.save_xy(name, lattice.axis, series, labels)

    def load_xy(self, filename):
        """Read back the blocks written by save_xy as a list of (x, y) arrays"""
        blocks, current = [], []
        with open(filename, "r", encoding="utf-8") as file:
            for line in file:
                line = line.strip()
                if not line:
                    if current:
                        blocks.append(np.array(current).T)
                        current = []
                    continue
                if line.startswith("#"):
                    continue
                current.append([float(v) for v in line.split()])
        if current:
            blocks.append(np.array(current).T)
        return blocks
