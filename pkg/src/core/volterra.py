"""Second-kind Volterra equations with weakly singular convolution kernels.

A kernel is stored as k(u) = u**(-sigma) h(u) with h sampled on the grid. Both h
and the unknown are reconstructed piecewise-quadratically; the factor
(m + v)**(-sigma) of panel m is integrated exactly (Gauss-Jacobi on the first
panel). When the exact cumulative K(t) = int_0^t k is known, the panel moments
are rescaled so that each panel carries its exact mass.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from ..utils.log import get_logger
from .errors import DomainError, IllConditionedStepError
from .fracops import TimeGrid
from .laplace import laplace_forward
from .quadrature import power_moments
from .specfun import ml_cumulatives, prabhakar_array

logger = get_logger("volterra")

DIAGONAL_LIMIT = 1e-12

# Lagrange bases in the panel coordinate v, nodes v = -1, 0, 1 and v = 0, 1, 2
_CENTERED = ([0.0, -0.5, 0.5], [1.0, 0.0, -1.0], [0.0, 0.5, 0.5])
_FORWARD = ([1.0, -1.5, 0.5], [0.0, 2.0, -1.0], [0.0, -0.5, 0.5])
_UNIT = ([1.0],)
_DEGREE = 4


@dataclass(frozen=True)
class KernelSamples:
    """Samples of k(t) = t**(-singular_exponent) * smooth(t) on a time grid"""
    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    smooth: np.ndarray = field(repr=False)
    singular_exponent: float = 0.0
    cumulative: Optional[Callable] = field(default=None, repr=False)
    masses: Optional[np.ndarray] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.singular_exponent < 1.0:
            raise DomainError(f"kernels need 0 <= sigma < 1, got {self.singular_exponent}")
        if len(self.values) != self.grid.steps + 1 or len(self.smooth) != self.grid.steps + 1:
            raise DomainError("kernel samples do not match the grid")

    @cached_property
    def matrix(self):
        return convolution_matrix(self)

    def scaled(self, factor):
        """The kernel multiplied by a constant"""
        masses = None if self.masses is None else factor * self.masses
        cumulative = None
        if self.cumulative is not None:
            base = self.cumulative
            cumulative = lambda t: factor * base(t)  # noqa: E731
        return KernelSamples(self.grid, factor * self.values, factor * self.smooth,
                             self.singular_exponent, cumulative, masses,
                             f"{factor}*{self.label}")


def _extrapolate_origin(smooth):
    smooth = smooth.copy()
    smooth[0] = 3.0 * smooth[1] - 3.0 * smooth[2] + smooth[3]
    return smooth


def _masses_from(cumulative, grid):
    return np.diff(np.asarray(cumulative(grid.nodes), dtype=float))


def kernel_from_function(fn, grid, singular_exponent=0.0, smooth=None, cumulative=None, label=""):
    """Sample a kernel given as a callable.

    smooth, when given, is the callable h with k(t) = t**(-sigma) h(t); otherwise h is
    derived from fn and extrapolated to t = 0.
    """
    t = grid.nodes
    values = np.empty(t.shape)
    if singular_exponent > 0.0:
        values[0] = np.nan
        values[1:] = fn(t[1:])
    else:
        values[:] = fn(t)
    if smooth is not None:
        h = np.asarray(smooth(t), dtype=float) * np.ones_like(t)
    elif singular_exponent > 0.0:
        h = np.empty(t.shape)
        h[1:] = t[1:] ** singular_exponent * values[1:]
        h = _extrapolate_origin(h)
    else:
        h = values.copy()
    masses = None if cumulative is None else _masses_from(cumulative, grid)
    return KernelSamples(grid, values, h, float(singular_exponent), cumulative, masses, label)


def memory_kernel(alpha, grid):
    """k(t) = t**(-alpha) E_{1-alpha,1-alpha}(-t**(1-alpha)) with K(t) = 1 - E_{1-alpha}(-t**(1-alpha))"""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    a = 1.0 - alpha
    return kernel_from_function(
        lambda t: t ** (-alpha) * prabhakar_array(a, a, 1.0, -t ** a),
        grid,
        singular_exponent=alpha,
        smooth=lambda t: prabhakar_array(a, a, 1.0, -t ** a),
        cumulative=lambda t: ml_cumulatives(alpha, t)[0],
        label=f"memory(alpha={alpha})",
    )


def _tensor(kernel_basis, phi_basis):
    """Coefficients T[s, b, p] of kernel_basis[s] * phi_basis[b]"""
    out = np.zeros((len(kernel_basis), len(phi_basis), _DEGREE + 1))
    for s, ks in enumerate(kernel_basis):
        for b, pb in enumerate(phi_basis):
            c = P.polymul(ks, pb)
            out[s, b, :len(c)] = c
    return out


def _family(k, phi_basis, moments):
    """Weights of each phi basis function on every panel m = 0..N-1, shape (len(basis), N)"""
    h = k.smooth
    steps = k.grid.steps
    scale = k.grid.dt ** (1.0 - k.singular_exponent)
    out = np.empty((len(phi_basis), steps))

    # panel 0 reconstructs h through nodes 0, 1, 2; later panels through m-1, m, m+1
    start = _tensor(_FORWARD, phi_basis)
    out[:, 0] = np.einsum("s,sbp,p->b", h[:3], start, moments[:, 0])
    if steps > 1:
        centered = _tensor(_CENTERED, phi_basis)
        stencil = np.stack([h[:-2], h[1:-1], h[2:]])  # (3, N-1) for m = 1..N-1
        out[:, 1:] = np.einsum("sm,sbp,pm->bm", stencil, centered, moments[:, 1:])
    return scale * out


def approximate_masses(k):
    """Panel masses int_{t_m}^{t_m+1} k from the quadratic reconstruction alone"""
    moments = power_moments(k.singular_exponent, np.arange(k.grid.steps), _DEGREE)
    return _family(k, _UNIT, moments)[0]


def convolution_matrix(k):
    """W with (k * phi)(t_n) ~ (W @ phi)_n.

    W is lower triangular except for W[1, 2]: the first step reconstructs phi
    through t_0, t_1, t_2 like every later row does on its first panel.
    """
    steps = k.grid.steps
    if steps < 3:
        raise DomainError("quadratic product integration needs at least 3 steps")
    moments = power_moments(k.singular_exponent, np.arange(steps), _DEGREE)
    interior = _family(k, _FORWARD, moments)   # phi_{j+1}, phi_j, phi_{j-1}
    start = _family(k, _CENTERED, moments)     # phi_2, phi_1, phi_0 on panel j = 0

    if k.masses is not None:
        approx = _family(k, _UNIT, moments)[0]
        ratio = np.ones(steps)
        nonzero = approx != 0.0
        ratio[nonzero] = k.masses[nonzero] / approx[nonzero]
        interior, start = interior * ratio, start * ratio

    W = np.zeros((steps + 1, steps + 1))
    n, i = np.tril_indices(steps + 1)
    d = n - i
    late = n >= 2
    sel = late & (i >= 2)
    W[n[sel], i[sel]] += interior[0, d[sel]]
    sel = late & (i >= 1) & (i <= n - 1)
    W[n[sel], i[sel]] += interior[1, d[sel] - 1]
    sel = late & (i <= n - 2)
    W[n[sel], i[sel]] += interior[2, d[sel] - 2]

    rows = np.arange(1, steps + 1)
    W[rows, 2] += start[0, rows - 1]
    W[rows, 1] += start[1, rows - 1]
    W[rows, 0] += start[2, rows - 1]
    return W


def _forward_substitution(W, f):
    """Solve (I - W) phi = f; steps 1 and 2 form one 2x2 block"""
    f = np.asarray(f, dtype=float)
    phi = np.empty_like(f)
    phi[0] = f[0]
    block = np.eye(2) - W[1:3, 1:3]
    det = np.linalg.det(block)
    if abs(det) < DIAGONAL_LIMIT:
        raise IllConditionedStepError(f"starting block is singular (det {det:.3g})",
                                      estimate=abs(det))
    phi[1:3] = np.linalg.solve(block, f[1:3] + np.tensordot(W[1:3, 0], phi[0], axes=0))
    for n in range(3, f.shape[0]):
        pivot = 1.0 - W[n, n]
        if abs(pivot) < DIAGONAL_LIMIT:
            raise IllConditionedStepError(f"diagonal weight {W[n, n]} at step {n}",
                                          estimate=abs(pivot))
        phi[n] = (f[n] + W[n, :n] @ phi[:n]) / pivot
    return phi


def volterra_apply(k, f):
    """Solve phi = f + k * phi on the kernel's grid"""
    return _forward_substitution(k.matrix, f)


def resolvent_representation(r, f):
    """phi = f + r * f (no linear solve)"""
    f = np.asarray(f, dtype=float)
    return f + r.matrix @ f


def _differentiate(R, dt):
    r = np.empty_like(R)
    r[1:-1] = (R[2:] - R[:-2]) / (2.0 * dt)
    r[-1] = (3.0 * R[-1] - 4.0 * R[-2] + R[-3]) / (2.0 * dt)
    r[0] = np.nan
    return r


def resolvent_solve(k):
    """Resolvent r of k, r = k + k * r.

    Regular kernels are solved directly. For singular kernels the cumulative
    R = int r solves R = K + k * R, and r is its derivative on the grid.
    """
    grid = k.grid
    if k.singular_exponent == 0.0:
        r = volterra_apply(k, k.values)
        return kernel_from_function(lambda t: r, grid, 0.0, label=f"resolvent({k.label})")

    K = np.concatenate([[0.0], np.cumsum(k.masses if k.masses is not None
                                         else approximate_masses(k))])
    R = volterra_apply(k, K)
    r = _differentiate(R, grid.dt)
    sigma = k.singular_exponent
    h = np.empty_like(r)
    h[1:] = grid.nodes[1:] ** sigma * r[1:]
    h = _extrapolate_origin(h)
    logger.debug("resolvent of %s: R(T) = %.6g", k.label, R[-1])
    return KernelSamples(grid, r, h, sigma, None, np.diff(R), f"resolvent({k.label})")


def caputo_from_resolvent(r, u):
    """History term int_0^t r(t - tau) u'(tau) dtau of the resolvent form of the equation"""
    u = np.asarray(u, dtype=float)
    du = np.gradient(u, r.grid.dt, axis=0, edge_order=2)
    return r.matrix @ du


def laplace_of_samples(k, s):
    """int_0^T exp(-s u) k(u) du for a sampled kernel.

    With an exact cumulative the transform is integrated by parts,
    K(T) + s int_0^T exp(-s u) (K(u) - K(T)) du, which leaves a bounded integrand
    for the graded forward quadrature. Otherwise the last row of the product
    integration weights is applied to exp(-s (T - t)).
    """
    grid = k.grid
    if k.cumulative is not None:
        total = float(k.cumulative(np.array([grid.horizon]))[0])
        shifted = lambda u: np.asarray(k.cumulative(u), dtype=float) - total  # noqa: E731
        inner = laplace_forward(shifted, s, horizon=grid.horizon)
        return float(total + s * inner.value.real)
    phi = np.exp(-s * (grid.horizon - grid.nodes))
    return float(k.matrix[-1] @ phi)
