"""Gamma, Bessel and Mittag-Leffler type functions of a real argument.

The Mittag-Leffler family is evaluated with two strategies: the power series
for moderate arguments and, when the series cannot reach the precision goal,
a Talbot inversion of the Laplace image s**(a*g - b) / (s**a - z)**g at t = 1.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma, gammaln, jv, rgamma

from ..utils.log import get_logger
from .errors import DomainError, EvaluationError
from .laplace import TALBOT_NODES, talbot_weights

logger = get_logger("specfun")

DEFAULT_GOAL = 1e-12
Z_SWITCH = 5.0
MAX_TERMS = 400
# consecutive negligible terms before the series is declared converged
STOP_RUN = 3
# accepted series must satisfy SAFETY * eps * max|term| <= goal * max(|sum|, 1)
CANCELLATION_SAFETY = 8.0
CONTOUR_TOLERANCE = 1e-6

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MLParams:
    """Parameters (alpha, beta, gamma) of the Prabhakar function"""
    alpha: float
    beta: float = 1.0
    gamma_p: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta}")
        if not (math.isfinite(self.gamma_p) and self.gamma_p >= 0.0):
            raise DomainError(f"gamma must be nonnegative, got {self.gamma_p}")


@dataclass(frozen=True)
class EvalPoint:
    """Real argument plus the relative tolerance asked for"""
    z: float
    precision_goal: float = DEFAULT_GOAL

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise DomainError(f"argument must be finite, got {self.z}")
        if not (1e-15 < self.precision_goal < 1e-2):
            raise DomainError(f"precision goal {self.precision_goal} outside (1e-15, 1e-2)")


def gamma_fn(x):
    """Gamma function with a domain error at the poles"""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return float(_gamma(x))


def bessel_j(nu, x):
    """Bessel function of the first kind for real order nu >= -1/2 and x >= 0"""
    if nu < -0.5:
        raise DomainError(f"Bessel order must be >= -1/2, got {nu}")
    if np.any(np.asarray(x) < 0.0):
        raise DomainError("Bessel argument must be nonnegative")
    value = jv(nu, x)
    return float(value) if np.ndim(value) == 0 else value


def _series(alpha, beta, gamma_p, z, goal, max_terms=MAX_TERMS):
    """Power series on nonzero z; returns (sum, max |term|, converged mask)"""
    total = np.zeros_like(z)
    biggest = np.zeros_like(z)
    quiet = np.zeros(z.shape, dtype=int)
    done = np.zeros(z.shape, dtype=bool)
    log_abs = np.log(np.abs(z))
    sign_z = np.sign(z)
    log_poch = 0.0  # log((gamma)_n / n!)

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(max_terms):
            if n > 0:
                log_poch += math.log((gamma_p + n - 1.0) / n)
            arg = alpha * n + beta
            term = (np.sign(rgamma(arg)) * sign_z ** n
                    * np.exp(n * log_abs + log_poch - gammaln(arg)))
            active = ~done
            total = np.where(active, total + term, total)
            biggest = np.where(active, np.maximum(biggest, np.abs(term)), biggest)
            # terms under the rounding floor of the largest one cannot move the sum
            small = np.abs(term) <= np.maximum(goal * np.abs(total), _EPS * biggest)
            quiet = np.where(active & small, quiet + 1, 0)
            done |= quiet >= STOP_RUN
            if done.all():
                break
    return total, biggest, done


def _accepted(total, biggest, done, goal):
    """Mask of series sums that converged and lost no more than the goal to cancellation

    The rounding error of an alternating sum is bounded by a few eps times its
    largest term. That bound is held against goal * max(|sum|, 1), so a sum that
    sits near a root of the function is still accepted when its absolute error
    is far below the goal.
    """
    finite = np.isfinite(total) & np.isfinite(biggest)
    with np.errstate(invalid="ignore"):
        clean = CANCELLATION_SAFETY * _EPS * biggest <= goal * np.maximum(np.abs(total), 1.0)
    return done & finite & clean


def _contour_negative(alpha, beta, gamma_p, z, node_count=TALBOT_NODES):
    """Talbot inversion of the Laplace image at t = 1 for z < 0"""
    values = []
    for nodes in (node_count, 2 * node_count):
        s, w = talbot_weights(nodes, mu=float(node_count), t=1.0)
        s = s[:, None]
        image = s ** (alpha * gamma_p - beta) / (s ** alpha - z[None, :]) ** gamma_p
        values.append((w @ image).real)
    return values[0], np.abs(values[0] - values[1])


def _contour_positive(alpha, beta, z, node_count=TALBOT_NODES):
    """Residue at s* = z**(1/alpha) plus inversion of the pole-free remainder (gamma = 1)"""
    pole = z ** (1.0 / alpha)
    residue = pole ** (1.0 - beta) / alpha
    with np.errstate(over="ignore"):
        growth = residue * np.exp(pole)
    values = []
    for nodes in (node_count, 2 * node_count):
        s, w = talbot_weights(nodes, mu=float(node_count), t=1.0)
        s = s[:, None]
        image = (s ** (alpha - beta) / (s ** alpha - z[None, :])
                 - residue[None, :] / (s - pole[None, :]))
        values.append(growth + (w @ image).real)
    return values[0], np.abs(values[0] - values[1])


def prabhakar_array(alpha, beta, gamma_p, z, precision_goal=DEFAULT_GOAL, z_switch=Z_SWITCH):
    """Vectorized three-parameter Mittag-Leffler function E^gamma_{alpha,beta}(z)"""
    MLParams(alpha, beta, gamma_p)
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.full(z.shape, float(rgamma(beta)))
    if gamma_p == 0.0:
        return float(out[0]) if scalar else out

    flat_z = z.ravel()
    flat = out.ravel()
    pending = flat_z != 0.0

    near = pending & (np.abs(flat_z) <= z_switch)
    if np.any(near):
        total, biggest, done = _series(alpha, beta, gamma_p, flat_z[near], precision_goal)
        ok = _accepted(total, biggest, done, precision_goal)
        idx = np.flatnonzero(near)
        flat[idx[ok]] = total[ok]
        pending[idx[ok]] = False

    negative = pending & (flat_z < 0.0)
    if np.any(negative):
        logger.debug("contour route for %d negative arguments", int(negative.sum()))
        value, estimate = _contour_negative(alpha, beta, gamma_p, flat_z[negative])
        scale = np.maximum(1.0, np.abs(value))
        if np.any(estimate > CONTOUR_TOLERANCE * scale):
            worst = float(np.max(estimate / scale))
            raise EvaluationError(
                f"E^{gamma_p}_{alpha},{beta} did not converge for negative arguments",
                estimate=worst)
        flat[negative] = value
        pending[negative] = False

    positive = pending & (flat_z > 0.0)
    if np.any(positive):
        if gamma_p == 1.0 and alpha < 2.0:
            value, estimate = _contour_positive(alpha, beta, flat_z[positive])
            scale = np.maximum(1.0, np.abs(value))
            if not np.all(np.isfinite(value)) or np.any(estimate > CONTOUR_TOLERANCE * scale):
                raise EvaluationError(
                    f"E_{alpha},{beta} overflow or contour failure for positive arguments",
                    estimate=float(np.nanmax(estimate / scale)))
            flat[positive] = value
        else:
            total, biggest, done = _series(alpha, beta, gamma_p, flat_z[positive], precision_goal)
            if not np.all(done & np.isfinite(total)):
                raise EvaluationError(
                    f"series for E^{gamma_p}_{alpha},{beta} did not converge in {MAX_TERMS} terms",
                    estimate=float(np.nanmax(biggest)))
            flat[positive] = total

    out = flat.reshape(z.shape)
    return float(out[0]) if scalar else out


def prabhakar(p, pt):
    """E^gamma_{alpha,beta}(z) for MLParams p at EvalPoint pt"""
    return prabhakar_array(p.alpha, p.beta, p.gamma_p, pt.z, pt.precision_goal)


def mittag_leffler(p, pt):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z)"""
    if p.gamma_p != 1.0:
        raise DomainError("mittag_leffler needs gamma = 1; use prabhakar")
    return prabhakar_array(p.alpha, p.beta, 1.0, pt.z, pt.precision_goal)


def mittag_leffler_array(alpha, beta, z, precision_goal=DEFAULT_GOAL):
    """Vectorized E_{alpha,beta}(z), the gamma = 1 case of prabhakar_array"""
    return prabhakar_array(alpha, beta, 1.0, z, precision_goal)


def _check_memory_alpha(alpha):
    """The memory kernel exists only for 0 < alpha < 1"""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def ml_kernel_derivative(alpha, t):
    """d/dt E_{1-alpha}(-t**(1-alpha)) = -t**(-alpha) E_{1-alpha,1-alpha}(-t**(1-alpha))"""
    _check_memory_alpha(alpha)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("the derivative is singular at t = 0")
    a = 1.0 - alpha
    value = -t ** (-alpha) * prabhakar_array(a, a, 1.0, -t ** a)
    return float(value) if np.ndim(value) == 0 else value


def ml_cumulatives(alpha, t):
    """First and second antiderivatives of the memory kernel t**(-alpha) E_{1-alpha,1-alpha}(-t**(1-alpha)).

    K1(t) = 1 - E_{1-alpha}(-t**(1-alpha)) and K2(t) = t - t E_{1-alpha,2}(-t**(1-alpha)).
    """
    _check_memory_alpha(alpha)
    t = np.asarray(t, dtype=float)
    a = 1.0 - alpha
    z = -t ** a
    first = 1.0 - prabhakar_array(a, 1.0, 1.0, z)
    second = t - t * prabhakar_array(a, 2.0, 1.0, z)
    return first, second
