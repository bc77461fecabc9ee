"""Numerical Laplace transforms.

The inverse uses a fixed cotangent (Talbot) contour

    s(theta) = mu * (0.5017 theta cot(0.6407 theta) - 0.6122 + 0.2645 i theta)

with mu = M / t_scale and the trapezoid rule in theta. The a-posteriori error
estimate re-evaluates the same contour with 2M nodes. The forward transform is
a composite Gauss rule and only serves as a test instrument.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..utils.log import get_logger
from .errors import DomainError, EvaluationError
from .quadrature import composite_rule, gauss_jacobi_left

logger = get_logger("laplace")

TALBOT_NODES = 48
CONVERGENCE_LIMIT = 1e-6
FORWARD_NODES = 20
# geometric refinement levels toward t = 0 in the forward quadrature
FORWARD_LEVELS = 40
TAIL_LIMIT = 1e-12

_SIGMA, _NU, _A, _B = 0.6122, 0.2645, 0.5017, 0.6407


@dataclass(frozen=True)
class TalbotParams:
    node_count: int = TALBOT_NODES
    t_scale: Optional[float] = None

    def __post_init__(self):
        if self.node_count % 2 or not 16 <= self.node_count <= 256:
            raise DomainError(f"node count must be even and in [16, 256], got {self.node_count}")
        if self.t_scale is not None and not self.t_scale > 0.0:
            raise DomainError("t_scale must be positive")


@dataclass(frozen=True)
class TalbotResult:
    value: float
    error_estimate: float
    node_count: int


@dataclass(frozen=True)
class LaplaceImage:
    """Image F(s), analytic to the right of `abscissa` and off the negative real axis"""
    evaluator: Callable = field(repr=False)
    abscissa: float = 0.0
    label: str = ""

    def __call__(self, s):
        return self.evaluator(s)


@dataclass(frozen=True)
class ForwardResult:
    value: complex
    tail_ratio: float
    accurate: bool


def talbot_weights(node_count, mu, t):
    """Contour nodes s_j and weights w_j with f(t) ~ Re(sum_j w_j F(s_j)).

    Only the upper half of the contour is sampled; F(conj s) = conj F(s).
    """
    theta = (np.arange(node_count // 2) + 0.5) * (2.0 * np.pi / node_count)
    cot = 1.0 / np.tan(_B * theta)
    s = mu * (_A * theta * cot - _SIGMA + 1j * _NU * theta)
    ds = mu * (_A * (cot - _B * theta * (1.0 + cot ** 2)) + 1j * _NU)
    weights = np.exp(s * t) * ds * (2.0 / (1j * node_count))
    return s, weights


def _invert(F, t, node_count, t_scale):
    mu = node_count / t_scale
    coarse_s, coarse_w = talbot_weights(node_count, mu, t)
    fine_s, fine_w = talbot_weights(2 * node_count, mu, t)
    coarse = float((coarse_w * F(coarse_s)).sum().real)
    fine = float((fine_w * F(fine_s)).sum().real)
    return coarse, fine


def talbot_invert_with_error(F, t, p=None):
    """Inverse transform at t > 0 together with the node-doubling error estimate"""
    p = p or TalbotParams()
    if not t > 0.0:
        raise DomainError(f"inversion time must be positive, got {t}")
    coarse, fine = _invert(F, float(t), p.node_count, p.t_scale or float(t))
    estimate = abs(coarse - fine)
    if not math.isfinite(coarse) or estimate > CONVERGENCE_LIMIT * max(1.0, abs(coarse)):
        raise EvaluationError(
            f"Talbot inversion of {F.label or 'image'} did not converge at t={t}",
            estimate=estimate, values=(coarse, fine))
    return TalbotResult(coarse, estimate, p.node_count)


def talbot_invert(F, t, p=None):
    """Inverse Laplace transform of F at time t"""
    return talbot_invert_with_error(F, t, p).value


def talbot_invert_many(F, times, p=None):
    """Invert F at each time; returns (values, error estimates)"""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    values = np.empty(times.shape)
    errors = np.empty(times.shape)
    for i, t in enumerate(times):
        result = talbot_invert_with_error(F, t, p)
        values[i] = result.value
        errors[i] = result.error_estimate
    return values, errors


def _power(s, a):
    # principal branch, s off the negative real axis
    return np.exp(a * np.log(s))


def symbol_homogeneous(xi2, alpha):
    """Image of the Green symbol: (1 + s**(alpha-1)) / (s + s**alpha + xi2)"""
    if xi2 < 0.0:
        raise DomainError("xi2 must be nonnegative")

    def evaluate(s):
        s = np.asarray(s, dtype=complex)
        return (1.0 + _power(s, alpha - 1.0)) / (s + _power(s, alpha) + xi2)

    return LaplaceImage(evaluate, 0.0, f"homogeneous(xi2={xi2}, alpha={alpha})")


def symbol_forcing(xi2, alpha):
    """Image of the forcing kernel: 1 / (s + s**alpha + xi2)"""
    if xi2 < 0.0:
        raise DomainError("xi2 must be nonnegative")

    def evaluate(s):
        s = np.asarray(s, dtype=complex)
        return 1.0 / (s + _power(s, alpha) + xi2)

    return LaplaceImage(evaluate, 0.0, f"forcing(xi2={xi2}, alpha={alpha})")


def prabhakar_image(alpha, beta, gamma_p, omega, shift=0.0):
    """Image of exp(-shift t) t**(beta-1) E^gamma_{alpha,beta}(omega t**alpha)"""

    def evaluate(s):
        q = np.asarray(s, dtype=complex) + shift
        return _power(q, alpha * gamma_p - beta) / (_power(q, alpha) - omega) ** gamma_p

    return LaplaceImage(evaluate, -shift,
                        f"prabhakar({alpha}, {beta}, {gamma_p}, {omega}, shift={shift})")


def product_image(*images):
    """Pointwise product of images (Laplace image of a convolution)"""

    def evaluate(s):
        value = 1.0
        for image in images:
            value = value * image(s)
        return value

    return LaplaceImage(evaluate, max(im.abscissa for im in images),
                        " * ".join(im.label for im in images))


def laplace_forward(f, s, horizon=None, singular_exponent=0.0, nodes=FORWARD_NODES):
    """Composite Gauss approximation of int_0^T exp(-s t) f(t) dt.

    f is a vectorized callable; near t = 0 it may behave like t**(-singular_exponent)
    with 0 <= singular_exponent < 1, which the innermost panel integrates with
    Gauss-Jacobi weights.
    """
    s = complex(s)
    if not s.real > 0.0:
        raise DomainError("forward transform needs Re(s) > 0")
    if not 0.0 <= singular_exponent < 1.0:
        raise DomainError("singular exponent must lie in [0, 1)")
    horizon = float(horizon) if horizon else 40.0 / s.real
    unit = min(1.0, 1.0 / abs(s), horizon)

    # Geometric panels toward the origin, uniform panels beyond `unit`
    geometric = unit * 2.0 ** -np.arange(FORWARD_LEVELS, -1, -1)
    count = max(1, int(math.ceil((horizon - unit) / unit)))
    uniform = np.linspace(unit, horizon, count + 1)[1:] if horizon > unit else np.array([])
    edges = np.concatenate([geometric, uniform])
    t, w = composite_rule(edges, nodes)
    total = np.sum(w * np.exp(-s * t) * f(t))

    eps = geometric[0]
    v, wv = gauss_jacobi_left(nodes, float(singular_exponent))
    tv = eps * v
    inner = eps ** (1.0 - singular_exponent) * np.sum(
        wv * tv ** singular_exponent * f(tv) * np.exp(-s * tv))
    total = complex(total + inner)

    tail = abs(complex(np.asarray(f(np.array([horizon])))[0]) * np.exp(-s * horizon))
    ratio = tail / max(abs(total), np.finfo(float).tiny)
    accurate = ratio < TAIL_LIMIT
    if not accurate:
        logger.warning("forward transform at s=%s: tail ratio %.2e at T=%g", s, ratio, horizon)
    return ForwardResult(total, ratio, accurate)
