"""Fractional integral and derivative operators on a uniform time grid.

Every operator reconstructs its argument piecewise-linearly and integrates the
kernel against the two hat functions of each panel, so a convolution becomes

    (k * phi)(t_n) = sum_m A_m phi_{n-m} + B_m phi_{n-m-1},   m = 0..n-1

with panel moments A_m (right end) and B_m (left end).
"""
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma as _gamma, rgamma

from .errors import DomainError
from .specfun import MLParams, prabhakar_array

EXACT = "product-integration-exact-cumulative"
POWERLAW = "product-integration-powerlaw"
L1 = "L1-caputo"
# series terms u**(alpha n) below this total exponent are integrated exactly
HEAD_EXPONENT = 2.5
MAX_HEAD_TERMS = 16


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_N = T"""
    horizon: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError(f"need at least 2 steps, got {self.steps}")

    @property
    def dt(self):
        return self.horizon / self.steps

    @property
    def nodes(self):
        return np.arange(self.steps + 1) * self.dt

    def snap(self, t):
        """Index of the grid node nearest to t (clipped to the grid)"""
        return int(min(max(round(float(t) / self.dt), 0), self.steps))


@dataclass(frozen=True)
class PrabhakarKernelSpec:
    """Kernel t**(beta-1) E^gamma_{alpha,beta}(omega t**alpha); omega may be one value per mode"""
    p: MLParams
    omega: Union[float, np.ndarray] = 0.0

    def __post_init__(self):
        if not self.p.beta > 0.0:
            raise DomainError(f"beta must be positive for an integrable kernel, got {self.p.beta}")


@dataclass(frozen=True)
class ConvolutionWeights:
    weights: np.ndarray
    scheme: str
    lagged: Optional[np.ndarray] = None
    scale: float = 1.0


def _causal_convolve(a, b, length):
    """First `length` entries of the full convolution along axis 0"""
    if a.ndim == 1 and b.ndim == 1:
        return np.convolve(a, b)[:length]
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    trailing = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    a = np.broadcast_to(a, a.shape[:1] + trailing)
    b = np.broadcast_to(b, b.shape[:1] + trailing)
    return fftconvolve(a, b, axes=0)[:length]


def _powerlaw_moments(beta, steps):
    m = np.arange(steps, dtype=float)
    p0 = ((m + 1.0) ** beta - m ** beta) / beta
    p1 = ((m + 1.0) ** (beta + 1.0) - m ** (beta + 1.0)) / (beta + 1.0)
    return (m + 1.0) * p0 - p1, p1 - m * p0


def _series_head(alpha, beta, gamma_p):
    """Coefficients (gamma)_n / (n! Gamma(alpha n + beta)) of the terms u**(alpha n) that are
    not smooth enough at the origin to be frozen at a panel midpoint"""
    count = min(max(1, math.ceil((HEAD_EXPONENT - beta) / alpha)), MAX_HEAD_TERMS)
    coeffs, poch = [], 1.0
    for n in range(count):
        if n > 0:
            poch *= (gamma_p + n - 1.0) / n
        coeffs.append(poch * float(rgamma(alpha * n + beta)))
    return coeffs


def prabhakar_weights(spec, grid, scheme=POWERLAW):
    """Panel moments of the Prabhakar kernel on `grid`.

    POWERLAW integrates u**(beta-1) exactly and freezes the Mittag-Leffler factor at
    the panel midpoint. Near the origin the leading terms u**(alpha n) of that factor
    are integrated exactly instead and only the smooth remainder is frozen.
    EXACT uses the closed-form antiderivatives u**beta E^gamma_{alpha,beta+1} and
    u**(beta+1) E^gamma_{alpha,beta+2}.
    """
    alpha, beta, gamma_p = spec.p.alpha, spec.p.beta, spec.p.gamma_p
    omega = np.asarray(spec.omega, dtype=float)
    dt = grid.dt
    if scheme == POWERLAW:
        lower, upper = _powerlaw_moments(beta, grid.steps)
        shape = (-1,) + (1,) * omega.ndim
        mid = ((np.arange(grid.steps) + 0.5) * dt) ** alpha
        v_mid = omega[None, ...] * mid.reshape(shape)
        factor = prabhakar_array(alpha, beta, gamma_p, v_mid)
        current = dt ** beta * lower.reshape(shape) * factor
        lagged = dt ** beta * upper.reshape(shape) * factor
        # panels where the leading series terms dominate the factor
        right = (((np.arange(grid.steps) + 1.0) * dt) ** alpha).reshape(shape)
        near = np.abs(omega[None, ...]) * right <= 1.0
        if gamma_p != 0.0 and np.any(near & (omega[None, ...] != 0.0)):
            for n, c in enumerate(_series_head(alpha, beta, gamma_p)):
                if n == 0:
                    continue
                lo_n, up_n = _powerlaw_moments(beta + alpha * n, grid.steps)
                exact = c * omega[None, ...] ** n * dt ** (beta + alpha * n)
                frozen = c * v_mid ** n * dt ** beta
                current = current + np.where(near, exact * lo_n.reshape(shape)
                                             - frozen * lower.reshape(shape), 0.0)
                lagged = lagged + np.where(near, exact * up_n.reshape(shape)
                                           - frozen * upper.reshape(shape), 0.0)
    elif scheme == EXACT:
        u = grid.nodes.reshape((-1,) + (1,) * omega.ndim)
        z = omega[None, ...] * u ** alpha
        first = u ** beta * prabhakar_array(alpha, beta + 1.0, gamma_p, z)
        second = u ** (beta + 1.0) * prabhakar_array(alpha, beta + 2.0, gamma_p, z)
        slope = np.diff(second, axis=0) / dt
        current = slope - first[:-1]
        lagged = first[1:] - slope
    else:
        raise DomainError(f"unknown product-integration scheme {scheme!r}")
    return ConvolutionWeights(current, scheme, lagged)


def apply_weights(weights, phi):
    """Apply product-integration weights to samples phi (axis 0 is time)"""
    phi = np.asarray(phi, dtype=float)
    steps = phi.shape[0] - 1
    a, b = weights.weights, weights.lagged
    if a.ndim < phi.ndim:
        a = a.reshape(a.shape + (1,) * (phi.ndim - a.ndim))
        b = b.reshape(b.shape + (1,) * (phi.ndim - b.ndim))
    elif phi.ndim < a.ndim:
        # one weight column per mode, shared samples
        phi = phi.reshape(phi.shape + (1,) * (a.ndim - phi.ndim))
    out = np.zeros(np.broadcast_shapes(phi.shape, (phi.shape[0],) + a.shape[1:]))
    out[1:] = _causal_convolve(a, phi[1:], steps) + _causal_convolve(b, phi, steps)
    return out


def prabhakar_integral(spec, phi, grid, scheme=POWERLAW):
    """Prabhakar fractional integral (t**(beta-1) E^gamma_{alpha,beta}(omega t**alpha)) * phi"""
    return apply_weights(prabhakar_weights(spec, grid, scheme), phi)


def riemann_liouville_integral(alpha, phi, grid):
    """Riemann-Liouville integral of order alpha; exact for piecewise-linear phi"""
    if not alpha > 0.0:
        raise DomainError(f"order must be positive, got {alpha}")
    # E^0_{1,alpha} = 1/Gamma(alpha) turns the Prabhakar kernel into t**(alpha-1)/Gamma(alpha)
    spec = PrabhakarKernelSpec(MLParams(1.0, alpha, 0.0), 0.0)
    return prabhakar_integral(spec, phi, grid, POWERLAW)


def caputo_l1_weights(alpha, grid):
    """L1 weights b_k = (k+1)**(1-alpha) - k**(1-alpha) with prefactor dt**(-alpha)/Gamma(2-alpha)"""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    k = np.arange(grid.steps, dtype=float)
    b = (k + 1.0) ** (1.0 - alpha) - k ** (1.0 - alpha)
    return ConvolutionWeights(b, L1, None, grid.dt ** (-alpha) / _gamma(2.0 - alpha))


def caputo_l1(alpha, u, grid):
    """L1 approximation of the Gerasimov-Caputo derivative at every node (zero at t_0)"""
    w = caputo_l1_weights(alpha, grid)
    u = np.asarray(u, dtype=float)
    increments = np.diff(u, axis=0)
    b = w.weights if u.ndim == 1 else w.weights.reshape((-1,) + (1,) * (u.ndim - 1))
    out = np.zeros_like(u)
    out[1:] = w.scale * _causal_convolve(b, increments, grid.steps)
    return out
