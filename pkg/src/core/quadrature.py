"""Gauss rules and panel moments shared by the integral operators."""
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

# Nodes per panel for the moment integrals; exact for the polynomial degrees used here
MOMENT_NODES = 16


@lru_cache(maxsize=32)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only, cached)"""
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_jacobi_left(n, sigma):
    """Nodes and weights on [0, 1] for the weight v**(-sigma)"""
    if sigma == 0.0:
        x, w = gauss_legendre(n)
        v, wv = 0.5 * (x + 1.0), 0.5 * w
    else:
        x, w = roots_jacobi(n, 0.0, -sigma)
        v = 0.5 * (x + 1.0)
        wv = 2.0 ** (sigma - 1.0) * w
    v = np.asarray(v, dtype=float)
    wv = np.asarray(wv, dtype=float)
    v.setflags(write=False)
    wv.setflags(write=False)
    return v, wv


def composite_rule(edges, n):
    """Composite Gauss-Legendre rule over consecutive panels given by their edges"""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = a + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def power_moments(sigma, m, pmax):
    """Moments I_p(m) = int_0^1 (m + v)**(-sigma) v**p dv for p = 0..pmax.

    m is an array of nonnegative integers; returns shape (pmax + 1, len(m)).
    The m = 0 panel carries the weak singularity and uses Gauss-Jacobi nodes.
    """
    m = np.asarray(m, dtype=float)
    out = np.empty((pmax + 1, m.size))
    p = np.arange(pmax + 1)[:, None]

    first = m == 0.0
    if np.any(first):
        v, wv = gauss_jacobi_left(MOMENT_NODES, float(sigma))
        out[:, first] = (wv[None, :] * v[None, :] ** p).sum(axis=1)[:, None]

    rest = ~first
    if np.any(rest):
        x, w = gauss_legendre(MOMENT_NODES)
        v = 0.5 * (x + 1.0)
        base = (m[rest, None] + v[None, :]) ** (-sigma)  # (k, nodes)
        powers = v[None, :] ** p  # (pmax+1, nodes)
        out[:, rest] = np.einsum("pj,kj->pk", 0.5 * w[None, :] * powers, base)
    return out
