"""Spectral solvers for u_t + D^alpha u - Laplace u = f on a periodic box.

All three solvers work mode by mode in Fourier space:

* explicit: u~(xi, t) = G~(|xi|^2, t) g~(xi) + forcing kernel applied to f~(xi, .)
* l1: implicit Euler for u_t with the L1 rule for the Caputo term
* memory: the equivalent equation u_t - Laplace u + k * Laplace u = 0 with the
  memory kernel k, integrated with product-integration weights
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from ..utils.log import get_logger
from ..utils.workers import map_chunks
from .errors import DomainError, SetupError
from .fracops import TimeGrid, caputo_l1_weights
from .greens import GreenSeriesParams, SpectralField, forcing_kernel, green_symbol_array
from .volterra import memory_kernel

logger = get_logger("solvers")

DECAY_LIMIT = 1e-10
BOUNDARY_LIMIT = 1e-6
IMAGINARY_LIMIT = 1e-10
WORST_MODES = 5

SOLVERS = ("explicit", "l1", "memory")


def gaussian(*x):
    return np.exp(-sum(xi ** 2 for xi in x))


def ring(*x):
    radius = np.sqrt(sum(xi ** 2 for xi in x))
    return np.exp(-4.0 * (radius - 1.5) ** 2)


def gaussian_pulse(t, *x):
    return np.exp(-sum(xi ** 2 for xi in x)) * math.exp(-t)


INITIAL_DATA = {"gaussian": gaussian, "ring": ring}
FORCING_DATA = {"gaussian-pulse": gaussian_pulse}


@dataclass(frozen=True)
class Lattice:
    """Periodic lattice x_j = -L + j 2L/M per axis and its Fourier modes"""
    n: int
    half_width: float
    modes: int

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise SetupError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.modes < 16 or self.modes & (self.modes - 1):
            raise SetupError(f"modes per axis must be a power of two >= 16, got {self.modes}")
        if not self.half_width > 0.0:
            raise SetupError("box half-width must be positive")

    @property
    def dx(self):
        return 2.0 * self.half_width / self.modes

    @property
    def axis(self):
        return -self.half_width + np.arange(self.modes) * self.dx

    @property
    def cell_volume(self):
        return self.dx ** self.n

    @property
    def shape(self):
        return (self.modes,) * self.n

    def coordinates(self):
        return np.meshgrid(*([self.axis] * self.n), indexing="ij")

    def radius2(self):
        return sum(c ** 2 for c in self.coordinates())

    def xi2(self):
        k = 2.0 * np.pi * np.fft.fftfreq(self.modes, self.dx)
        return sum(c ** 2 for c in np.meshgrid(*([k] * self.n), indexing="ij"))

    def to_spectral(self, u, t=0.0):
        return SpectralField(np.fft.fftn(u), self.half_width, t)

    def to_physical(self, spectrum):
        """Inverse transform; returns (real part, imaginary residue relative to max)"""
        u = np.fft.ifftn(spectrum)
        scale = max(float(np.max(np.abs(u.real))), np.finfo(float).tiny)
        return u.real, float(np.max(np.abs(u.imag))) / scale


@dataclass(frozen=True)
class ProblemSpec:
    """Data of one run; g and f are callables of the coordinates (f also of t) or arrays"""
    alpha: float
    n: int = 1
    half_width: float = 16.0
    modes: int = 256
    horizon: float = 1.0
    steps: int = 1024
    g: Union[Callable, np.ndarray, None] = field(default=gaussian, repr=False)
    f: Union[Callable, np.ndarray, None] = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.steps < 16:
            raise SetupError(f"need at least 16 time steps, got {self.steps}")

    @property
    def lattice(self):
        return Lattice(self.n, self.half_width, self.modes)

    @property
    def grid(self):
        return TimeGrid(self.horizon, self.steps)


@dataclass
class SolutionField:
    times: np.ndarray
    values: np.ndarray = field(repr=False)
    lattice: Lattice
    solver: str
    spectra: np.ndarray = field(repr=False, default=None)
    meta: dict = field(default_factory=dict)

    @property
    def masses(self):
        return self.meta["mass"]


def _check_decay(samples, lattice, what):
    peak = float(np.max(np.abs(samples)))
    if peak == 0.0:
        return
    outside = lattice.radius2() > (0.5 * lattice.half_width) ** 2
    far = np.abs(samples)[..., outside] if samples.ndim > lattice.n else np.abs(samples)[outside]
    if far.size and float(np.max(far)) > DECAY_LIMIT * peak:
        raise SetupError(f"{what} does not decay inside |x| <= L/2 "
                         f"({float(np.max(far)):.2e} of its peak); enlarge the box")


def initial_samples(ps):
    lattice = ps.lattice
    if ps.g is None:
        g = np.zeros(lattice.shape)
    elif callable(ps.g):
        g = np.asarray(ps.g(*lattice.coordinates()), dtype=float) * np.ones(lattice.shape)
    else:
        g = np.asarray(ps.g, dtype=float)
        if g.shape != lattice.shape:
            raise SetupError(f"initial data has shape {g.shape}, lattice is {lattice.shape}")
    _check_decay(g, lattice, "initial datum")
    return g


def forcing_samples(ps):
    """f on every grid time, shape (N+1,) + lattice shape, or None"""
    if ps.f is None:
        return None
    lattice, grid = ps.lattice, ps.grid
    if callable(ps.f):
        coords = lattice.coordinates()
        f = np.stack([np.asarray(ps.f(t, *coords), dtype=float) * np.ones(lattice.shape)
                      for t in grid.nodes])
    else:
        f = np.asarray(ps.f, dtype=float)
        if f.shape != (grid.steps + 1,) + lattice.shape:
            raise SetupError(f"forcing has shape {f.shape}, expected "
                             f"{(grid.steps + 1,) + lattice.shape}")
    _check_decay(f, lattice, "forcing")
    return f


def output_indices(grid, out_times):
    return np.array([grid.snap(t) for t in np.atleast_1d(out_times)], dtype=int)


def boundary_amplitude(u, lattice):
    """max |u| on the box faces relative to max |u|"""
    peak = float(np.max(np.abs(u)))
    if peak == 0.0:
        return 0.0
    face = 0.0
    for axis in range(lattice.n):
        for index in (0, -1):
            face = max(face, float(np.max(np.abs(np.take(u, index, axis=axis)))))
    return face / peak


def _finish(name, ps, grid, indices, spectra):
    """Transform snapshots to physical space and collect diagnostics"""
    lattice = ps.lattice
    r2 = lattice.radius2()
    values = np.empty((len(indices),) + lattice.shape)
    meta = {"mass": [], "second_moment": [], "boundary": [], "imaginary_residue": [],
            "steps": grid.steps, "dt": grid.dt, "modes": lattice.modes,
            "half_width": lattice.half_width, "alpha": ps.alpha, "n": ps.n}
    for i, spectrum in enumerate(spectra):
        u, residue = lattice.to_physical(spectrum.reshape(lattice.shape))
        values[i] = u
        mass = float(np.sum(u) * lattice.cell_volume)
        meta["mass"].append(mass)
        meta["second_moment"].append(
            float(np.sum(r2 * u) * lattice.cell_volume / mass) if mass else float("nan"))
        edge = boundary_amplitude(u, lattice)
        meta["boundary"].append(edge)
        meta["imaginary_residue"].append(residue)
        if edge > BOUNDARY_LIMIT:
            logger.warning("%s: boundary amplitude %.2e at t=%g; enlarge L",
                           name, edge, grid.nodes[indices[i]])
        if residue > IMAGINARY_LIMIT:
            logger.warning("%s: imaginary residue %.2e at t=%g", name, residue,
                           grid.nodes[indices[i]])
    return SolutionField(grid.nodes[indices], values, lattice, name,
                         np.asarray(spectra), meta)


def _spectral_data(ps):
    lattice = ps.lattice
    initial = lattice.to_spectral(initial_samples(ps))
    logger.debug("initial spectrum hermitian defect %.2e", initial.hermitian_defect())
    g_hat = initial.values.ravel()
    f = forcing_samples(ps)
    f_hat = None
    if f is not None:
        axes = tuple(range(1, lattice.n + 1))
        f_hat = np.fft.fftn(f, axes=axes).reshape(f.shape[0], -1)
    return lattice.xi2().ravel(), g_hat, f_hat


def solve_explicit(ps, out_times, p=None):
    """Closed-form solution mode by mode: G~ g~ plus the forcing series"""
    grid = ps.grid
    indices = output_indices(grid, out_times)
    xi2, g_hat, f_hat = _spectral_data(ps)
    p = p or GreenSeriesParams(ps.alpha)
    unique, inverse = np.unique(xi2, return_inverse=True)

    spectra = []
    for index in indices:
        t = float(grid.nodes[index])
        symbol, by_series = green_symbol_array(unique, t, p)
        logger.info("explicit: t=%g, %d of %d symbols by series", t, int(by_series.sum()),
                    unique.size)
        spectra.append(symbol[inverse] * g_hat)

    if f_hat is not None:
        def chunk(sl):
            return forcing_kernel(xi2[sl], grid, ps.alpha, f_hat[:, sl])[indices]

        forced = np.concatenate(map_chunks(chunk, xi2.size), axis=1)
        spectra = [s + forced[i] for i, s in enumerate(spectra)]
    return _finish("explicit", ps, grid, indices, spectra)


def _march(step_chunk, size):
    """Run an independent time march for each chunk of modes and stitch the snapshots"""
    parts = map_chunks(step_chunk, size)
    return np.concatenate(parts, axis=1)


def solve_l1(ps, out_times):
    """Implicit Euler plus L1-Caputo, one scalar equation per mode and step"""
    grid = ps.grid
    indices = output_indices(grid, out_times)
    xi2, g_hat, f_hat = _spectral_data(ps)
    weights = caputo_l1_weights(ps.alpha, grid)
    b, c, dt = weights.weights, weights.scale, grid.dt
    wanted = set(int(i) for i in indices)

    def chunk(sl):
        q = xi2[sl]
        u = g_hat[sl].copy()
        increments = np.zeros((grid.steps, u.size), dtype=complex)
        snaps = {0: u.copy()}
        diagonal = 1.0 / dt + c * b[0] + q
        for m in range(1, grid.steps + 1):
            rhs = u / dt + c * b[0] * u
            if m >= 2:
                rhs = rhs - c * (b[1:m] @ increments[m - 2::-1])
            if f_hat is not None:
                rhs = rhs + f_hat[m, sl]
            new = rhs / diagonal
            increments[m - 1] = new - u
            u = new
            if m in wanted:
                snaps[m] = u
        return np.stack([snaps[int(i)] for i in indices])

    spectra = _march(chunk, xi2.size)
    return _finish("l1", ps, grid, indices, list(spectra))


def solve_memory(ps, out_times):
    """Memory-kernel form u_t - Laplace u + k * Laplace u = 0 (homogeneous only)"""
    if ps.f is not None:
        raise SetupError("the memory-kernel solver handles the homogeneous equation only")
    grid = ps.grid
    indices = output_indices(grid, out_times)
    xi2, g_hat, _ = _spectral_data(ps)
    W = memory_kernel(ps.alpha, grid).matrix
    dt = grid.dt
    logger.info("memory: kernel weights sum to %.12g over [0, T]", float(W[-1].sum()))

    def chunk(sl):
        q = xi2[sl]
        U = np.empty((grid.steps + 1, q.size), dtype=complex)
        U[0] = g_hat[sl]
        # steps 1 and 2 are coupled through W[1, 2]
        a11 = 1.0 / dt + q - q * W[1, 1]
        a12 = -q * W[1, 2]
        a21 = -1.0 / dt - q * W[2, 1]
        a22 = 1.0 / dt + q - q * W[2, 2]
        b1 = U[0] / dt + q * W[1, 0] * U[0]
        b2 = q * W[2, 0] * U[0]
        det = a11 * a22 - a12 * a21
        U[1] = (b1 * a22 - a12 * b2) / det
        U[2] = (a11 * b2 - a21 * b1) / det
        for m in range(3, grid.steps + 1):
            history = W[m, :m] @ U[:m]
            U[m] = (U[m - 1] / dt + q * history) / (1.0 / dt + q - q * W[m, m])
        return U[indices]

    spectra = _march(chunk, xi2.size)
    return _finish("memory", ps, grid, indices, list(spectra))


def _run(name, ps, out_times):
    return {"explicit": solve_explicit, "l1": solve_l1, "memory": solve_memory}[name](
        ps, out_times)


def compare_solvers(ps, out_times, solvers=None):
    """Run several solvers on one problem and report their pairwise differences"""
    if solvers is None:
        solvers = SOLVERS if ps.f is None else SOLVERS[:2]
    names = list(solvers)
    if not names:
        raise SetupError("no solver selected")
    fields = {name: _run(name, ps, out_times) for name in names}
    volume = ps.lattice.cell_volume
    report = {"times": [float(t) for t in fields[names[0]].times], "solvers": {}, "pairs": {}}
    for name, sol in fields.items():
        masses = np.asarray(sol.meta["mass"])
        drift = float(np.max(np.abs(masses / masses[0] - 1.0))) if masses[0] else 0.0
        report["solvers"][name] = {
            "mass": sol.meta["mass"],
            "mass_drift": drift,
            "second_moment": sol.meta["second_moment"],
            "boundary": sol.meta["boundary"],
            "min_value": [float(np.min(u)) for u in sol.values],
        }
    for i, first in enumerate(names):
        for second in names[i + 1:]:
            a, b = fields[first], fields[second]
            diff = a.values - b.values
            axes = tuple(range(1, diff.ndim))
            spectral = np.abs(a.spectra[-1] - b.spectra[-1])
            worst = np.argsort(spectral)[::-1][:WORST_MODES]
            report["pairs"][f"{first}-{second}"] = {
                "max": [float(v) for v in np.max(np.abs(diff), axis=axes)],
                "l2": [float(v) for v in np.sqrt(np.sum(diff ** 2, axis=axes) * volume)],
                "worst_modes": [int(k) for k in worst],
                "worst_mode_diff": [float(spectral[k]) for k in worst],
            }
    return report, fields
