"""Fourier-space Green function of u_t + D^alpha u - Laplace u = f.

The symbol G~(xi, t) is the inverse Laplace transform of
(1 + s**(alpha-1)) / (s + s**alpha + |xi|**2). Expanding the denominator in
powers of s**alpha / (s + |xi|**2) gives

    G~ = sum_j (-t**(1-alpha))**j [E^{j+1}_{1,b_j}(-|xi|**2 t) - [j >= 1] E^j_{1,b_j}(-|xi|**2 t)]

with b_j = (1-alpha) j + 1, and the forcing kernel is the same expansion applied
as Prabhakar integrals. Physical space is reached through the radial (Hankel)
form of the inverse Fourier transform.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma, kv, rgamma

from ..utils.log import get_logger
from ..utils.workers import map_chunks
from .errors import DomainError, EvaluationError
from .fracops import EXACT, PrabhakarKernelSpec, prabhakar_integral
from .laplace import CONVERGENCE_LIMIT, TALBOT_NODES, talbot_weights
from .quadrature import MOMENT_NODES, composite_rule
from .specfun import MLParams, bessel_j, prabhakar_array

logger = get_logger("greens")

# largest |xi|^2 t handed to the symbol series
SERIES_ARGUMENT = 5.0
DECAY_LIMIT = 1e-12
# closed-form tail terms subtracted from the symbol before radial quadrature
TAIL_TERMS = 3
TRUNCATION_LIMIT = 1e-9
XI_START = 16.0
XI_CAP = 1024.0
RADIAL_BLOCK = 32


@dataclass(frozen=True)
class GreenSeriesParams:
    alpha: float
    j_max: int = 120
    tol: float = 1e-12
    cancellation_limit: float = 1e8
    series_reach: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.tol < 1.0:
            raise DomainError(f"tol must lie in (0, 1), got {self.tol}")
        if self.j_max < 8:
            raise DomainError(f"j_max must be at least 8, got {self.j_max}")


@dataclass(frozen=True)
class SpectralField:
    """Fourier image of a snapshot on an n-dimensional periodic lattice"""
    values: np.ndarray = field(repr=False)
    half_width: float
    t: float = 0.0

    @property
    def n(self):
        return self.values.ndim

    @property
    def modes(self):
        return self.values.shape[0]

    def hermitian_defect(self):
        """max |F(xi) - conj F(-xi)| relative to max |F|; zero for real fields"""
        mirrored = np.conj(self.values)
        for axis in range(self.n):
            mirrored = np.roll(np.flip(mirrored, axis=axis), 1, axis=axis)
        scale = max(float(np.max(np.abs(self.values))), np.finfo(float).tiny)
        return float(np.max(np.abs(self.values - mirrored))) / scale


@dataclass(frozen=True)
class RadialProfile:
    """Samples of a radial function of |x| (or |xi|) in n dimensions.

    `evaluator`, when present, is used instead of interpolating the samples.
    """
    radii: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    n: int = 1
    evaluator: Optional[Callable] = field(default=None, repr=False)
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.n}")
        if len(self.radii) < 17:
            raise DomainError("radial profiles need at least 17 radii")
        if np.any(np.diff(self.radii) <= 0.0) or self.radii[0] < 0.0:
            raise DomainError("radii must be nonnegative and increasing")

    def __call__(self, r):
        if self.evaluator is not None:
            return self.evaluator(r)
        return CubicSpline(self.radii, self.values)(r)


def _talbot_symbol(xi2, t, alpha, node_count=TALBOT_NODES):
    """Talbot inversion of the symbol image for many xi2 at once"""
    mu = node_count / t
    results = []
    for nodes in (node_count, 2 * node_count):
        s, w = talbot_weights(nodes, mu, t)
        s = s[:, None]
        image = (1.0 + s ** (alpha - 1.0)) / (s + s ** alpha + xi2[None, :])
        results.append((w @ image).real)
    value, estimate = results[0], np.abs(results[0] - results[1])
    if np.any(estimate > CONVERGENCE_LIMIT * np.maximum(1.0, np.abs(value))):
        raise EvaluationError(f"Talbot inversion of the Green symbol failed at t={t}",
                              estimate=float(np.max(estimate)))
    return value


def _series_symbol(xi2, t, p):
    """Series value per element plus a mask of the elements it can be trusted for"""
    a = 1.0 - p.alpha
    tau = t ** a
    x = -xi2 * t
    total = np.zeros_like(xi2)
    largest = np.zeros_like(xi2)
    quiet = np.zeros(xi2.shape, dtype=int)
    for j in range(p.j_max):
        beta = a * j + 1.0
        bracket = prabhakar_array(1.0, beta, j + 1.0, x)
        if j > 0:
            bracket = bracket - prabhakar_array(1.0, beta, float(j), x)
        term = (-tau) ** j * bracket
        total = total + term
        largest = np.maximum(largest, np.abs(total))
        quiet = np.where(np.abs(term) <= p.tol * np.abs(total), quiet + 1, 0)
        if j >= 2 and np.all(quiet >= 2):
            break
    trusted = (quiet >= 2) & (largest <= p.cancellation_limit * np.abs(total))
    return total, trusted


def green_symbol_array(xi2, t, p):
    """G~ at many xi2 for one t; returns (values, mask of series-evaluated entries)"""
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    if np.any(xi2 < 0.0):
        raise DomainError("xi2 must be nonnegative")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    values = np.ones(xi2.shape)
    by_series = np.ones(xi2.shape, dtype=bool)
    if t == 0.0:
        return values, by_series

    candidates = (xi2 * t <= SERIES_ARGUMENT) if t ** (1.0 - p.alpha) <= p.series_reach \
        else np.zeros(xi2.shape, dtype=bool)
    if np.any(candidates):
        try:
            total, trusted = _series_symbol(xi2[candidates], t, p)
        except EvaluationError as exc:
            logger.debug("symbol series failed (%s), using Talbot", exc)
            total, trusted = None, np.zeros(int(candidates.sum()), dtype=bool)
        idx = np.flatnonzero(candidates)
        if total is not None:
            values[idx[trusted]] = total[trusted]
        candidates[idx[~trusted]] = False
    by_series = candidates

    rest = ~by_series
    if np.any(rest):
        values[rest] = _talbot_symbol(xi2[rest], t, p.alpha)
    return values, by_series


def green_symbol(xi2, t, p):
    """Fourier image G~(xi, t) of the Green function, |xi|**2 = xi2"""
    values, _ = green_symbol_array(np.array([xi2], dtype=float), float(t), p)
    return float(values[0])


def forcing_kernel(xi2, grid, alpha, f_mode, tol=1e-12, j_max=120, scheme=EXACT):
    """Forcing contribution sum_j (-1)**j (E^{j+1}_{1,(1-alpha)j+1,-xi2} f)(t) on the grid.

    xi2 may hold one value per mode, in which case f_mode has shape (N+1, modes).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    xi2 = np.asarray(xi2, dtype=float)
    if np.any(xi2 < 0.0):
        raise DomainError("xi2 must be nonnegative")
    if np.iscomplexobj(f_mode):
        return (forcing_kernel(xi2, grid, alpha, np.real(f_mode), tol, j_max, scheme)
                + 1j * forcing_kernel(xi2, grid, alpha, np.imag(f_mode), tol, j_max, scheme))
    f = np.asarray(f_mode, dtype=float)
    if f.shape[0] != grid.steps + 1:
        raise DomainError("forcing samples do not match the grid")
    shape = np.broadcast_shapes(f.shape, (f.shape[0],) + xi2.shape)
    total = np.zeros(shape)
    if not np.any(f):
        return total

    a = 1.0 - alpha
    peak = 0.0
    size = 0.0
    for j in range(j_max):
        spec = PrabhakarKernelSpec(MLParams(1.0, a * j + 1.0, j + 1.0), -xi2)
        term = prabhakar_integral(spec, f, grid, scheme)
        total = total + (-1.0) ** j * term
        size = float(np.max(np.abs(term)))
        peak = max(peak, size)
        if size <= tol * peak:
            break
    else:
        logger.warning("forcing series stopped at %d terms; last term %.3e of peak %.3e",
                       j_max, size, peak)
    return total


def _radial_nodes(xi_max, r_max):
    # panels no longer than a quarter period of J(r_max rho)
    panel = math.pi / (2.0 * r_max) if r_max > 0.0 else xi_max / 16.0
    count = max(1, int(math.ceil(xi_max / panel)))
    return composite_rule(np.linspace(0.0, xi_max, count + 1), MOMENT_NODES)


def radial_inverse_fourier(profile, x_radii, n=None, check_decay=True):
    """Inverse Fourier transform of a radial function by its Hankel form.

    f(r) = (2 pi)**(-n/2) r**(1-n/2) int_0^Xi rho**(n/2) F(rho) J_{n/2-1}(r rho) drho,
    with Xi the last radius of the profile. check_decay=False leaves the
    truncation judgement to the caller.
    """
    n = n or profile.n
    if n not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {n}")
    x = np.asarray(x_radii, dtype=float)
    if np.any(x < 0.0):
        raise DomainError("radii must be nonnegative")
    xi_max = float(profile.radii[-1])
    rho, w = _radial_nodes(xi_max, float(np.max(x, initial=0.0)))
    F = np.asarray(profile(rho), dtype=float)
    weighted = w * F

    truncated, edge = False, None
    if check_decay:
        edge = abs(float(np.asarray(profile(np.array([xi_max])))[0]))
        peak = max(float(np.max(np.abs(F))), edge)
        truncated = edge > DECAY_LIMIT * peak
    if truncated:
        logger.warning("radial profile not decayed at Xi=%g: |F(Xi)| = %.3e (peak %.3e)",
                       xi_max, edge, peak)

    nu = 0.5 * n - 1.0
    norm = (2.0 * math.pi) ** (-0.5 * n)
    kernel = rho ** (0.5 * n) * weighted
    origin = norm * np.sum(rho ** (n - 1) * weighted) / (2.0 ** nu * _gamma(0.5 * n))

    def block(sl):
        r = x[sl]
        out = np.empty(r.shape)
        for start in range(0, r.size, RADIAL_BLOCK):
            chunk = r[start:start + RADIAL_BLOCK]
            positive = chunk > 0.0
            part = np.full(chunk.shape, origin)
            if np.any(positive):
                rp = chunk[positive]
                J = bessel_j(nu, rp[:, None] * rho[None, :])
                part[positive] = norm * rp ** (1.0 - 0.5 * n) * (J @ kernel)
            out[start:start + RADIAL_BLOCK] = part
        return out

    values = np.concatenate(map_chunks(block, x.size)) if x.size else np.empty(0)
    return RadialProfile(x, values, n, truncated=truncated,
                         meta={"xi_max": xi_max, "edge": edge})


def _tail_coefficients(t, alpha, count=TAIL_TERMS):
    """Coefficients b_m of the large-|xi| expansion G~ ~ sum_m b_m (1 + |xi|**2)**(-m).

    In powers of 1/|xi|**2 the m-th coefficient is the inverse Laplace transform, for
    t > 0, of (-1)**(m-1) (1 + s**(alpha-1)) (s + s**alpha)**(m-1); the powers of
    1/|xi|**2 are then re-expanded in 1/(1 + |xi|**2).
    """
    plain = []
    for k in range(1, count + 1):
        total = 0.0
        for i in range(k):
            p = i + alpha * (k - 1 - i)
            for power in (p, p + alpha - 1.0):
                # s**power inverts to t**(-power-1) / Gamma(-power); zero at integers
                total += math.comb(k - 1, i) * t ** (-power - 1.0) * float(rgamma(-power))
        plain.append((-1.0) ** (k - 1) * total)
    return [sum(math.comb(m - 1, k - 1) * plain[k - 1] for k in range(1, m + 1))
            for m in range(1, count + 1)]


def _tail_physical(r, n, m=1):
    """Inverse Fourier transform of (1 + |xi|**2)**(-m) in n dimensions"""
    mu = m - 0.5 * n
    scale = (2.0 * math.pi) ** (-0.5 * n) * 2.0 ** (1 - m) / math.gamma(m)
    out = np.empty(r.shape)
    positive = r > 0.0
    rp = r[positive]
    out[positive] = scale * rp ** mu * kv(mu, rp)
    out[~positive] = scale * 2.0 ** (mu - 1.0) * _gamma(mu) if mu > 0.0 else np.inf
    return out


def _tail_bound(edge, xi_max, n):
    # int_Xi^inf rho**(n-1) |F| for a remainder decaying like rho**(-2 TAIL_TERMS - 2)
    decay = 2 * TAIL_TERMS + 2
    return (2.0 * math.pi) ** (-0.5 * n) * abs(edge) * xi_max ** n / (decay - n)


def green_physical(x_radii, t, alpha, n, p=None, xi_max=None):
    """Green function G(|x|, t) on the given radii.

    The leading terms b_m / (1 + |xi|**2)**m of the symbol are inverted in closed
    form and only the remainder, which decays like |xi|**-8, goes through radial
    quadrature. meta["core_mass"] holds the mass inside the first radius so that
    radial_mass covers the whole ball.
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    p = p or GreenSeriesParams(alpha)
    x = np.asarray(x_radii, dtype=float)
    if n > 1 and np.any(x <= 0.0):
        raise DomainError("G is singular at the origin for n > 1; use positive radii")
    coefficients = _tail_coefficients(t, alpha)
    counts = {"series": 0, "total": 0}

    def remainder(rho):
        rho = np.asarray(rho, dtype=float)
        values, by_series = green_symbol_array(rho ** 2, t, p)
        counts["series"] += int(by_series.sum())
        counts["total"] += by_series.size
        w = 1.0 / (1.0 + rho ** 2)
        return values - sum(b * w ** m for m, b in enumerate(coefficients, start=1))

    def tails(r):
        return sum(b * _tail_physical(r, n, m) for m, b in enumerate(coefficients, start=1))

    def bound(xi):
        return _tail_bound(remainder(np.array([xi]))[0], xi, n)

    if xi_max is None:
        xi_max = XI_START
        while xi_max < XI_CAP and bound(xi_max) > TRUNCATION_LIMIT:
            xi_max *= 2.0
    remaining = bound(xi_max)
    truncated = remaining > TRUNCATION_LIMIT
    if truncated:
        logger.warning("Green remainder not resolved at Xi=%g: tail bound %.3e", xi_max, remaining)

    # Gauss nodes on [0, r_0] for the mass inside the first radius
    core_r, core_w = composite_rule(np.array([0.0, x[0]]), MOMENT_NODES) if x.size and x[0] > 0.0 \
        else (np.empty(0), np.empty(0))
    xi_grid = np.linspace(0.0, xi_max, 33)
    spectrum = RadialProfile(xi_grid, remainder(xi_grid), n, evaluator=remainder)
    smooth = radial_inverse_fourier(spectrum, np.concatenate([x, core_r]), n, check_decay=False)
    values = smooth.values + tails(np.concatenate([x, core_r]))
    surface = 2.0 * math.pi ** (0.5 * n) / _gamma(0.5 * n)
    core_mass = float(surface * np.sum(core_w * core_r ** (n - 1) * values[x.size:]))
    fraction = counts["series"] / max(counts["total"], 1)
    logger.info("green_physical t=%g alpha=%g n=%d Xi=%g series fraction %.2f",
                t, alpha, n, xi_max, fraction)
    return RadialProfile(x, values[:x.size], n, truncated=truncated,
                         meta={"xi_max": xi_max, "t": t, "alpha": alpha, "tail_bound": remaining,
                               "core_mass": core_mass, "series_fraction": fraction})


def radial_mass(profile):
    """Integral of a radial function over R^n from its samples (plus meta["core_mass"])"""
    n = profile.n
    surface = 2.0 * math.pi ** (0.5 * n) / _gamma(0.5 * n)
    r = profile.radii
    spline = CubicSpline(r, r ** (n - 1) * profile.values)
    return float(surface * spline.integrate(r[0], r[-1]) + profile.meta.get("core_mass", 0.0))


def mean_squared_displacement(alpha, n, t):
    """<|x|^2>(t) = 2 n t E_{1-alpha,2}(-t**(1-alpha))"""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    t = np.asarray(t, dtype=float)
    value = 2.0 * n * t * prabhakar_array(1.0 - alpha, 2.0, 1.0, -t ** (1.0 - alpha))
    return float(value) if np.ndim(value) == 0 else value
