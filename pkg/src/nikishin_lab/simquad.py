"""
Simultaneous Gauss--Jacobi type quadrature from type II polynomials and the
Markov-convergence rate against the conformal bound ``delta_K``.

All nodes share one polynomial ``Q_n``; the weights of measure ``s_{0,k}``
are ``lambda_{k,i} = int Q_n(x) / ((x - x_i) Q_n'(x_i)) ds_{0,k}(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy
from numpy.polynomial import chebyshev as C

from .errors import InputError, PointOnSupport
from .hermite_pade import remainder, type2_pade, zeros_in_hull
from .measures import Interval, integrate

__all__ = ['SimultaneousRule', 'RateReport', 'build_rule', 'exactness_test',
           'integrate_simultaneously', 'phi_t', 'delta_K', 'markov_rate',
           'diagonal_indices', 'DEFAULT_RATE_PROBES', 'T_GRID']

T_GRID = 64
DEFAULT_RATE_PROBES = (3j, 1.5 + 0.5j, -2.0 + 0j)
_ON_HULL_EPS = 1e-12


@dataclass
class SimultaneousRule:
    """Shared nodes ``x_{n,i}`` and weights ``lambda[k][i]``."""

    n: tuple
    nodes: numpy.ndarray
    weights: numpy.ndarray
    hull: Interval = field(repr=False, default=None)


@dataclass
class RateReport:
    """Per-index Markov errors and their ``1/(2|n|)`` roots."""

    compact_probes: tuple
    indices: list
    errors: numpy.ndarray          # (len(indices), len(probes))
    roots: numpy.ndarray
    delta_K: float
    delta_per_probe: numpy.ndarray

    @property
    def sizes(self):
        return [sum(n) for n in self.indices]


def build_rule(sys, n):
    """Simultaneous rule for ``(s_{0,0}, ..., s_{0,m})`` at multi-index ``n``.

    The node factor is divided out of ``Q_n`` in the Chebyshev basis of the
    reduced variable, so no limit has to be taken at the nodes.
    """
    n = tuple(int(v) for v in n)
    Q, _, form = type2_pade(sys, n)
    nodes = zeros_in_hull(form)
    h = sys.sigma(0).hull
    c = numpy.asarray(Q.coef, dtype=float)
    dQ = Q.deriv()(nodes)
    quos = []
    for x in nodes:
        t = (x - h.center) / h.half
        quo, _ = C.chebdiv(c, [-t, 1.0])
        quos.append(quo)
    size = len(nodes)
    quo_mat = numpy.zeros((size, size))
    for i, q in enumerate(quos):
        quo_mat[i, :len(q)] = q
    weights = numpy.zeros((sys.m + 1, size))
    for k in range(sys.m + 1):
        s0k = sys.s(0, k)

        def f(x):
            return C.chebvander((x - h.center) / h.half, size - 1) @ quo_mat.T

        vals = numpy.atleast_1d(integrate(s0k, f,
                                          tol=1e-15 * s0k._weight_scale()))
        weights[k] = vals / (h.half * dQ)
    return SimultaneousRule(n, nodes, weights, h)


def _reduced(rule, x):
    return (x - rule.hull.center) / rule.hull.half


def exactness_test(rule, sys, n=None, return_table=False):
    """Worst relative error of the rule on ``t^d`` for ``d <= |n| + n_k - 1``.

    ``t`` is the variable reduced to the hull of ``sigma_0``. Each error is
    divided by ``max(|s_{0,k}|, sum_i |lambda_{k,i} t_i^d|)``, which bounds
    both sides since ``|t| <= 1`` on the hull.
    """
    n = tuple(rule.n if n is None else n)
    size = sum(n)
    table = []
    worst = 0.0
    ti = _reduced(rule, rule.nodes)
    for k in range(sys.m + 1):
        top = size + n[k] - 1
        s0k = sys.s(0, k)
        mom = numpy.atleast_1d(integrate(
            s0k, lambda x: _reduced(rule, x)[:, None]
            ** numpy.arange(top + 1)[None, :],
            tol=1e-15 * s0k._weight_scale()))
        V = ti[:, None] ** numpy.arange(top + 1)[None, :]
        quad = rule.weights[k] @ V
        scale = numpy.maximum(abs(s0k.mass), numpy.abs(rule.weights[k]) @
                              numpy.abs(V))
        rel = numpy.abs(quad - mom) / scale
        for d in range(top + 1):
            table.append((k, d, float(mom[d]), float(quad[d]), float(rel[d])))
        worst = max(worst, float(rel.max()))
    return (worst, table) if return_table else worst


def integrate_simultaneously(rule, f):
    """``sum_i lambda_{k,i} f(x_i)`` for every ``k``."""
    return rule.weights @ numpy.asarray(f(rule.nodes), dtype=float)


def _joukowski_inverse(w):
    """Branch of ``w + sqrt(w^2 - 1)`` with modulus above one."""
    w = numpy.asarray(w, dtype=complex)
    r = numpy.sqrt(w - 1) * numpy.sqrt(w + 1)
    J = w + r
    small = numpy.abs(J) < 1
    return numpy.where(small, w - r, J)


def phi_t(hull, t, z):
    """Conformal map of the exterior of ``hull`` onto the unit disk sending
    ``t`` to 0 with positive derivative there (``t = inf`` allowed).

    ``phi_inf = 1 / J`` after reduction to ``[-1, 1]``; finite ``t`` composes
    this with a disk automorphism.
    """
    z = numpy.asarray(z, dtype=complex)
    w = (z - hull.center) / hull.half
    if numpy.any((numpy.abs(w.imag) <= _ON_HULL_EPS)
                 & (numpy.abs(w.real) <= 1 + _ON_HULL_EPS)):
        raise PointOnSupport("z lies on the hull")
    u = 1.0 / _joukowski_inverse(w)
    if t is None or numpy.isinf(t):
        return u
    wt = (t - hull.center) / hull.half
    if abs(wt) <= 1:
        raise PointOnSupport("t lies on the hull")
    a = float(numpy.real(1.0 / _joukowski_inverse(wt)))
    # 1/J decreases along the real axis off [-1, 1]
    return -(u - a) / (1 - a * u)


def delta_K(hull0, hull1, probes, grid=T_GRID):
    """``max |phi_t(z)|`` over probes and ``t`` in Chebyshev points of
    ``hull1`` plus infinity. Returns ``(delta, per_probe)``."""
    probes = numpy.atleast_1d(numpy.asarray(probes, dtype=complex))
    ts = [numpy.inf]
    if hull1 is not None:
        k = numpy.arange(grid)
        ts += list(hull1.center + hull1.half
                   * numpy.cos(numpy.pi * (k + 0.5) / grid))
    vals = numpy.array([numpy.abs(phi_t(hull0, t, probes)) for t in ts])
    per = vals.max(axis=0)
    return float(per.max()), per


def diagonal_indices(m, max_size, min_size=1):
    """``n`` with ``|n| = N`` spread as evenly as possible, larger
    components first."""
    out = []
    for N in range(min_size, max_size + 1):
        q, r = divmod(N, m + 1)
        out.append(tuple(q + 1 if k < r else q for k in range(m + 1)))
    return out


def markov_rate(sys, index_sequence, probes=DEFAULT_RATE_PROBES):
    """Markov errors ``e_n = max_k |s_{0,k}^ - P_{n,k}/Q_n|`` at the probes.

    The error is evaluated as ``|R_{n,k}(z) / Q_n(z)|`` with
    ``R_{n,k}(z) = int Q_n(x) ds_{0,k}(x) / (z - x)``, which avoids the
    cancellation in the difference.
    """
    probes = tuple(complex(z) for z in probes)
    h0 = sys.sigma(0).hull
    for z in probes:
        if h0.distance(z) <= 0:
            raise InputError("probes must avoid the hull of sigma_0")
    h1 = sys.sigma(1).hull if sys.m >= 1 else None
    delta, per = delta_K(h0, h1, probes)
    zz = numpy.array(probes)
    errs, roots = [], []
    for n in index_sequence:
        n = tuple(int(v) for v in n)
        Q, _, form = type2_pade(sys, n)
        qz = Q(zz)
        e = numpy.zeros(len(zz))
        for k in range(sys.m + 1):
            r = numpy.atleast_1d(remainder(form, k, zz))
            e = numpy.maximum(e, numpy.abs(r / qz))
        errs.append(e)
        roots.append(e ** (1.0 / (2 * sum(n))))
    return RateReport(probes, [tuple(n) for n in index_sequence],
                      numpy.array(errs), numpy.array(roots), delta, per)
