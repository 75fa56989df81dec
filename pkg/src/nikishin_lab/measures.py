"""
Constant-sign measures on compact real sets and their Cauchy transforms.

Three representations are supported:

* :class:`WeightedInterval` -- Jacobi-type density on an interval, optionally
  with finitely many point masses, integrated with Gauss--Jacobi rules.
* :class:`MomentBacked` -- a measure known through its moments and carried by
  a fixed Gauss rule (used for inverse measures).
* :class:`CauchyWeighted` -- a base measure multiplied by a product of Cauchy
  transforms (and reciprocals of Cauchy transforms) of other measures.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy
from scipy.special import roots_jacobi, roots_legendre

from .errors import (IndefiniteHankel, InputError, NonConvergence,
                     OverlappingSupports, PointOnSupport, SignChangeDetected,
                     SingularInversion)

__all__ = ['Interval', 'QuadratureRule', 'Measure', 'WeightedInterval',
           'MomentBacked', 'CauchyFactor', 'CauchyWeighted', 'Affine',
           'integrate', 'cauchy_transform', 'moments', 'product',
           'inverse_measure', 'gauss_from_moments', 'weighted_derivate',
           'measure_from_descriptor', 'lebesgue', 'chebyshev_weight',
           'NODE_CAP', 'DEFAULT_TOL']

NODE_CAP = 4096
DEFAULT_TOL = 1e-12
# relative accuracy requested when a transform is used as a weight factor
_FACTOR_TOL = 1e-15
_ON_SUPPORT_EPS = 1e-8
_CHUNK = 256
_STALL = 1e-10
_EPS = numpy.finfo(float).eps


# =====
# Types
# =====

@dataclass(frozen=True)
class Interval:
    """Closed interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (numpy.isfinite(a) and numpy.isfinite(b)) or not a < b:
            raise InputError(f"invalid interval [{self.a}, {self.b}]")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @property
    def length(self):
        return self.b - self.a

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def half(self):
        return 0.5 * (self.b - self.a)

    def distance(self, z):
        """Euclidean distance from ``z`` (scalar or array) to the interval."""
        z = numpy.asarray(z, dtype=complex)
        dx = numpy.maximum(numpy.maximum(self.a - z.real, z.real - self.b),
                           0.0)
        return numpy.hypot(dx, z.imag)

    def disjoint(self, other):
        return self.b < other.a or other.b < self.a

    def hull(self, other):
        return Interval(min(self.a, other.a), max(self.b, other.b))

    def to_unit(self, x):
        return (numpy.asarray(x) - self.center) / self.half

    def from_unit(self, t):
        return self.center + self.half * numpy.asarray(t)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (strictly increasing) and signed weights."""

    nodes: numpy.ndarray
    weights: numpy.ndarray

    def __post_init__(self):
        x = numpy.asarray(self.nodes, dtype=float)
        w = numpy.asarray(self.weights, dtype=float)
        if x.shape != w.shape or x.ndim != 1:
            raise ValueError("nodes and weights must be 1-d of equal length")
        order = numpy.argsort(x, kind='stable')
        object.__setattr__(self, 'nodes', x[order])
        object.__setattr__(self, 'weights', w[order])

    def __len__(self):
        return len(self.nodes)

    def apply(self, values):
        """Contract ``values`` (first axis over nodes) with the weights."""
        return numpy.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True)
class Affine:
    """Degree-one polynomial ``a z + b``."""

    a: float
    b: float

    def __call__(self, z):
        return self.a * numpy.asarray(z) + self.b


# ========
# Measures
# ========

class Measure:
    """Abstract constant-sign measure.

    Subclasses provide ``hull``, ``sign`` and ``_rule(n)``. A measure is
    *discrete* when its rule does not depend on ``n``.
    """

    hull: Interval
    sign: int
    is_discrete: bool = False
    label: str = 'mu'

    def _rule(self, n):
        raise NotImplementedError

    def rule(self, n=64):
        cache = self.__dict__.setdefault('_rule_cache', {})
        key = None if self.is_discrete else int(n)
        if key not in cache:
            cache[key] = self._rule(n)
        return cache[key]

    @functools.cached_property
    def mass(self):
        """Total mass ``|s|`` (signed)."""
        return float(integrate(self, lambda x: numpy.ones_like(x),
                               tol=1e-15 * self._weight_scale()))

    def _weight_scale(self):
        r = self.rule(16)
        return max(float(numpy.sum(numpy.abs(r.weights))), 1e-300)

    def cauchy(self, z, tol=1e-13, derivative=0):
        return cauchy_transform(self, z, tol=tol, derivative=derivative)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label} on " \
               f"[{self.hull.a:g}, {self.hull.b:g}] sign={self.sign:+d}>"


@functools.lru_cache(maxsize=64)
def _jacobi_reference(n, alpha, beta):
    # nodes and weights on [-1, 1] for (1-t)^alpha (1+t)^beta
    if alpha == 0.0 and beta == 0.0:
        t, w = roots_legendre(n)
    else:
        t, w = roots_jacobi(n, alpha, beta)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


class WeightedInterval(Measure):
    """Jacobi-type measure ``sign * scale * (b-x)^alpha (x-a)^beta g(x) dx``
    on an interval, plus finitely many point masses.

    Parameters
    ----------
    interval : Interval or (a, b)
    alpha, beta : float
        Endpoint exponents, both > -1.
    g : callable, optional
        Positive factor analytic near the interval.
    point_masses : sequence of (location, mass)
        Locations outside the open interval, masses > 0.
    sign : {+1, -1}
    scale : float
        Positive overall multiplier.
    """

    def __init__(self, interval, alpha=0.0, beta=0.0, g=None,
                 point_masses=(), sign=1, scale=1.0, label='sigma',
                 g_coeffs=None):
        if not isinstance(interval, Interval):
            interval = Interval(*interval)
        if alpha <= -1 or beta <= -1:
            raise InputError("Jacobi exponents must exceed -1")
        if sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        if not scale > 0:
            raise InputError("scale must be positive")
        self.interval = interval
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.g_coeffs = None if g_coeffs is None else list(map(float,
                                                               g_coeffs))
        if g is None and g_coeffs is not None:
            poly = numpy.polynomial.Polynomial(self.g_coeffs)
            g = poly
        self.g = g
        self.sign = int(sign)
        self.scale = float(scale)
        self.label = label
        pm = []
        for loc, m in point_masses:
            loc, m = float(loc), float(m)
            if interval.a < loc < interval.b:
                raise InputError("point masses must lie outside the "
                                 "continuous interval")
            if not m > 0:
                raise InputError("point masses must be positive")
            pm.append((loc, m))
        self.point_masses = tuple(sorted(pm))
        lo = min([interval.a] + [p[0] for p in pm])
        hi = max([interval.b] + [p[0] for p in pm])
        self.hull = Interval(lo, hi)
        if g is not None:
            x = interval.from_unit(numpy.cos(numpy.linspace(0, numpy.pi,
                                                            257)))
            if numpy.any(numpy.asarray(g(x)) <= 0):
                raise InputError("density factor g must be positive")

    def _rule(self, n):
        t, w = _jacobi_reference(int(n), self.alpha, self.beta)
        iv = self.interval
        x = iv.from_unit(t)
        w = w * iv.half ** (self.alpha + self.beta + 1.0) * self.scale
        if self.g is not None:
            w = w * numpy.asarray(self.g(x), dtype=float)
        if self.point_masses:
            x = numpy.concatenate([x, [p[0] for p in self.point_masses]])
            w = numpy.concatenate([w, [self.scale * p[1]
                                       for p in self.point_masses]])
        return QuadratureRule(x, self.sign * w)

    def descriptor(self):
        """Serializable record; raises if ``g`` is an arbitrary callable."""
        if self.g is not None and self.g_coeffs is None:
            raise InputError("callable density factors are not serializable")
        d = {'kind': 'jacobi', 'interval': [self.interval.a,
                                            self.interval.b],
             'alpha': self.alpha, 'beta': self.beta, 'sign': self.sign,
             'point_masses': [list(p) for p in self.point_masses]}
        if self.scale != 1.0:
            d['scale'] = self.scale
        if self.g_coeffs is not None:
            d['g_coeffs'] = list(self.g_coeffs)
        if self.label != 'sigma':
            d['label'] = self.label
        return d


class MomentBacked(Measure):
    """Measure carried by a fixed Gauss rule (built from moments)."""

    is_discrete = True

    def __init__(self, rule, hull=None, moments_=None, label='tau'):
        self._fixed = rule
        if len(rule):
            signs = numpy.sign(rule.weights)
            if not (numpy.all(signs > 0) or numpy.all(signs < 0)):
                raise SignChangeDetected("moment-backed rule has mixed signs")
            self.sign = int(signs[0])
        else:
            self.sign = 1
        if hull is None:
            hull = Interval(rule.nodes[0] - 0.5, rule.nodes[-1] + 0.5)
        self.hull = hull
        self._moments = moments_
        self.label = label

    @classmethod
    def from_moments(cls, moments_, hull=None, label='tau'):
        rule = gauss_from_moments(moments_)
        if hull is None:
            lo, hi = rule.nodes[0], rule.nodes[-1]
            pad = max(hi - lo, 1.0) * 1e-6
            hull = Interval(lo - pad, hi + pad)
        return cls(rule, hull=hull, moments_=numpy.asarray(moments_,
                                                           dtype=float),
                   label=label)

    def _rule(self, n):
        return self._fixed

    @property
    def moments(self):
        if self._moments is None:
            r = self._fixed
            k = numpy.arange(2 * len(r))
            self._moments = r.weights @ (r.nodes[:, None] ** k[None, :])
        return self._moments


@dataclass(frozen=True, eq=False)
class CauchyFactor:
    """Weight ``constant * num^(x) / den^(x)``; either measure may be absent."""

    numerator: Optional[Measure] = None
    denominator: Optional[Measure] = None
    constant: float = 1.0

    def __post_init__(self):
        if self.numerator is None and self.denominator is None:
            raise InputError("CauchyFactor needs a numerator or denominator")

    def hulls(self):
        return [m.hull for m in (self.numerator, self.denominator)
                if m is not None]

    def value(self, x):
        x = numpy.asarray(x, dtype=float)
        out = numpy.full(x.shape, self.constant, dtype=float)
        if self.numerator is not None:
            out = out * self.numerator.cauchy(x, tol=_FACTOR_TOL).real
        if self.denominator is not None:
            out = out / self.denominator.cauchy(x, tol=_FACTOR_TOL).real
        return out


class CauchyWeighted(Measure):
    """Base measure times a product of :class:`CauchyFactor` weights."""

    def __init__(self, base, factors, label=None):
        self.base = base
        self.factors = tuple(factors)
        for f in self.factors:
            for h in f.hulls():
                if not h.disjoint(base.hull):
                    raise OverlappingSupports(
                        f"factor support [{h.a:g},{h.b:g}] meets base hull "
                        f"[{base.hull.a:g},{base.hull.b:g}]")
        self.hull = base.hull
        self.is_discrete = base.is_discrete
        self.label = label or f"w({base.label})"
        r = self.rule(16)
        if len(r):
            signs = numpy.sign(r.weights)
            if not (numpy.all(signs > 0) or numpy.all(signs < 0)):
                raise SignChangeDetected(
                    f"weight of {self.label} changes sign on the base")
            self.sign = int(signs[0])
        else:
            self.sign = 1

    def _rule(self, n):
        r = self.base.rule(n)
        w = r.weights.copy()
        for f in self.factors:
            w = w * f.value(r.nodes)
        return QuadratureRule(r.nodes, w)


# =================
# Basic operations
# =================

def _check_off_support(mu, z):
    d = mu.hull.distance(z)
    eps = _ON_SUPPORT_EPS * mu.hull.length
    if numpy.any(d <= eps):
        raise PointOnSupport(f"evaluation point within {eps:.1e} of the "
                             f"support of {mu.label}")


def integrate(mu, f, tol=DEFAULT_TOL, n0=16):
    """Integrate ``f`` against ``mu`` by node doubling.

    ``f`` maps an array of nodes to an array whose first axis runs over the
    nodes (trailing axes give several integrals at once). Doubling stops when
    two successive estimates agree within ``tol`` (absolute), or within the
    rounding level of the weighted sum when that is larger.
    """
    n = n0
    prev = None
    while True:
        r = mu.rule(n)
        if len(r) == 0:
            return numpy.zeros(numpy.shape(f(numpy.zeros(1)))[1:])[()]
        fx = numpy.asarray(f(r.nodes))
        val = r.apply(fx)
        if mu.is_discrete:
            return val
        # floor at the rounding level of the sum itself
        floor = 256 * _EPS * numpy.tensordot(numpy.abs(r.weights),
                                           numpy.abs(fx), axes=(0, 0))
        if prev is not None and numpy.all(numpy.abs(val - prev)
                                          <= tol + floor):
            return val
        prev = val
        n *= 2
        if n > NODE_CAP:
            raise NonConvergence(f"integration against {mu.label} did not "
                                 f"stabilize at {NODE_CAP} nodes")


def cauchy_transform(mu, z, tol=1e-13, derivative=0):
    """Cauchy transform ``int dmu(x) / (z - x)`` (or its derivative).

    Vectorized over ``z``. Convergence is judged relative to
    ``sum |w_i| / |z - x_i|^(d+1)``, the natural conditioning scale of the sum.
    Real input gives real output.
    """
    z_in = numpy.asarray(z)
    real_in = not numpy.iscomplexobj(z_in)
    zz = numpy.atleast_1d(z_in).astype(complex).ravel()
    _check_off_support(mu, zz)
    out = numpy.empty(zz.shape, dtype=complex)
    p = derivative + 1
    coef = (-1.0) ** derivative * float(numpy.prod(numpy.arange(1, p)))
    for lo in range(0, len(zz), _CHUNK):
        zc = zz[lo:lo + _CHUNK]
        n = 16
        prev = prev_diff = None
        while True:
            r = mu.rule(n)
            if len(r) == 0:
                out[lo:lo + _CHUNK] = 0.0
                break
            kern = 1.0 / (zc[:, None] - r.nodes[None, :]) ** p
            val = coef * (kern @ r.weights)
            if mu.is_discrete:
                out[lo:lo + _CHUNK] = val
                break
            scale = numpy.abs(kern) @ numpy.abs(r.weights)
            if prev is not None:
                diff = numpy.max(numpy.abs(val - prev) / scale)
                if diff <= tol + 256 * _EPS:
                    out[lo:lo + _CHUNK] = val
                    break
                # large Jacobi rules carry ~1e-12 node noise; once the
                # differences stop shrinking below _STALL, keep the best
                if prev_diff is not None and prev_diff <= _STALL \
                        and diff >= 0.5 * prev_diff:
                    out[lo:lo + _CHUNK] = prev
                    break
                prev_diff = diff
            prev = val
            n *= 2
            if n > NODE_CAP:
                raise NonConvergence(f"Cauchy transform of {mu.label} did "
                                     f"not stabilize at {NODE_CAP} nodes")
    out = out.reshape(numpy.shape(z_in))
    if real_in:
        out = out.real
    return out[()] if out.ndim == 0 else out


def moments(mu, count, tol=DEFAULT_TOL):
    """Power moments ``m_k = int x^k dmu``, ``k = 0..count-1``."""
    if count < 1:
        raise InputError("count must be >= 1")
    k = numpy.arange(count)
    return integrate(mu, lambda x: x[:, None] ** k[None, :], tol=tol)


def product(sigma_alpha, sigma_beta, label=None):
    """Nikishin product ``<sigma_alpha, sigma_beta>``: base ``sigma_alpha``
    weighted by the Cauchy transform of ``sigma_beta``."""
    if not sigma_alpha.hull.disjoint(sigma_beta.hull):
        raise OverlappingSupports(
            f"hulls of {sigma_alpha.label} and {sigma_beta.label} intersect")
    return CauchyWeighted(sigma_alpha, [CauchyFactor(numerator=sigma_beta)],
                          label=label or
                          f"<{sigma_alpha.label},{sigma_beta.label}>")


def weighted_derivate(base, factors, label=None):
    """Base measure multiplied by all ``factors``."""
    factors = list(factors)
    if not factors:
        return base
    return CauchyWeighted(base, factors, label=label)


# ===============================
# Gauss rules from (modified) moments
# ===============================

def _modified_chebyshev(mom, a_ref, b_ref, n, truncate=False):
    """Recurrence coefficients from modified moments.

    ``mom[l] = int pi_l dmu`` for monic reference polynomials with
    ``pi_{l+1} = (t - a_ref[l]) pi_l - b_ref[l] pi_{l-1}``.
    With ``truncate`` the recursion stops at the first numerically
    vanishing ``beta`` (an effectively discrete measure) instead of raising.
    """
    mom = numpy.asarray(mom, dtype=float)
    alpha = numpy.zeros(n)
    beta = numpy.zeros(n)
    if mom[0] <= 0:
        raise IndefiniteHankel("zeroth moment must be positive")
    sig_prev = numpy.zeros(2 * n)
    sig = mom[:2 * n].copy()
    alpha[0] = a_ref[0] + mom[1] / mom[0]
    beta[0] = mom[0]
    for k in range(1, n):
        new = numpy.zeros(2 * n)
        for l in range(k, 2 * n - k):
            new[l] = (sig[l + 1] - (alpha[k - 1] - a_ref[l]) * sig[l]
                      - beta[k - 1] * sig_prev[l] + b_ref[l] * sig[l - 1])
        bk = new[k] / sig[k - 1]
        if not bk > 0 or (truncate and bk < 1e-11 * max(beta[1:k].max()
                                                        if k > 1 else 1.0,
                                                        1e-300)):
            if truncate:
                return alpha[:k], beta[:k]
            raise IndefiniteHankel(f"Hankel determinant nonpositive at "
                                   f"depth {k}")
        alpha[k] = a_ref[k] + new[k + 1] / new[k] - sig[k] / sig[k - 1]
        beta[k] = bk
        sig_prev, sig = sig, new
    return alpha, beta


def _golub_welsch(alpha, beta):
    n = len(alpha)
    if n == 1:
        return numpy.array([alpha[0]]), numpy.array([beta[0]])
    off = numpy.sqrt(beta[1:])
    jac = numpy.diag(alpha) + numpy.diag(off, 1) + numpy.diag(off, -1)
    x, v = numpy.linalg.eigh(jac)
    return x, beta[0] * v[0, :] ** 2


def gauss_from_moments(moments_):
    """N-node Gauss rule from power moments ``m_0..m_{2N-1}``.

    Uses the (unmodified) Chebyshev algorithm. A negative measure is handled
    by factoring out the sign.
    """
    mom = numpy.asarray(moments_, dtype=float)
    if len(mom) < 2 or len(mom) % 2:
        raise InputError("need an even number (>= 2) of moments")
    if mom[0] == 0:
        raise IndefiniteHankel("zeroth moment vanishes")
    sign = 1.0 if mom[0] > 0 else -1.0
    n = len(mom) // 2
    zeros = numpy.zeros(2 * n)
    alpha, beta = _modified_chebyshev(sign * mom, zeros, zeros, n)
    x, w = _golub_welsch(alpha, beta)
    return QuadratureRule(x, sign * w)


def _chebyshev_u_table(t, count):
    """Rows U_0..U_{count-1} evaluated at ``t`` (shape ``(len(t), count)``)."""
    t = numpy.asarray(t, dtype=float)
    out = numpy.empty((t.size, count))
    out[:, 0] = 1.0
    if count > 1:
        out[:, 1] = 2.0 * t
    for k in range(2, count):
        out[:, k] = 2.0 * t * out[:, k - 1] - out[:, k - 2]
    return out


def inverse_measure(s, n_nodes=12, tol=1e-14, label=None):
    """Inverse measure: ``1/s^(z) = ell(z) + tau^(z)``.

    The Laurent series of ``s^`` is inverted in the exterior Joukowski
    variable of the hull of ``s``, where the series coefficients are the
    moments of ``s`` against Chebyshev polynomials of the second kind. The
    recursion is triangular, and ``2N+2`` such moments yield the ``2N``
    moments that define the ``N``-node Gauss rule of ``tau``.

    Returns
    -------
    ell : Affine
    tau : MomentBacked
    """
    hull = s.hull
    c, h = hull.center, hull.half
    if s.is_discrete:
        atoms = len(s.rule())
        n_nodes = min(n_nodes, atoms - 1)
    depth = 2 * max(n_nodes, 0) + 2
    # U_k moments inherit node rounding amplified by |U_k'| ~ k^2 at the ends
    nu = numpy.atleast_1d(integrate(
        s, lambda x: _chebyshev_u_table((x - c) / h, depth),
        tol=tol * depth ** 2 * s._weight_scale()))
    if nu[0] == 0:
        raise SingularInversion("measure has zero mass")
    ratio = nu / nu[0]
    d = numpy.zeros(depth)
    d[0] = 1.0
    for k in range(1, depth):
        d[k] = -numpy.dot(ratio[1:k + 1], d[k - 1::-1][:k])
    ell = Affine(1.0 / nu[0], -c / nu[0] + h * d[1] / (2.0 * nu[0]))
    lab = label or f"tau[{s.label}]"
    if n_nodes < 1:
        return ell, MomentBacked(QuadratureRule(numpy.zeros(0),
                                                numpy.zeros(0)),
                                 hull=hull, label=lab)
    mu = numpy.empty(2 * n_nodes)
    mu[0] = (d[2] - 1.0) / (4.0 * nu[0])
    mu[1:] = d[3:2 * n_nodes + 2] / (4.0 * nu[0])
    if mu[0] == 0:
        raise IndefiniteHankel("inverse measure has zero mass")
    sign = 1.0 if mu[0] > 0 else -1.0
    modified = sign * mu / 2.0 ** numpy.arange(2 * n_nodes)
    a_ref = numpy.zeros(2 * n_nodes)
    b_ref = numpy.full(2 * n_nodes, 0.25)
    alpha, beta = _modified_chebyshev(modified, a_ref, b_ref, n_nodes,
                                      truncate=True)
    t, w = _golub_welsch(alpha, beta)
    rule = QuadratureRule(c + h * t, sign * h * h * w)
    return ell, MomentBacked(rule, hull=hull, label=lab)


# ===========
# Descriptors
# ===========

def lebesgue(a, b, sign=1, label='sigma'):
    return WeightedInterval(Interval(a, b), sign=sign, label=label)


def chebyshev_weight(a, b, sign=1, label='sigma'):
    return WeightedInterval(Interval(a, b), alpha=-0.5, beta=-0.5,
                            sign=sign, label=label)


def measure_from_descriptor(d):
    """Build a :class:`WeightedInterval` from a config record."""
    if not isinstance(d, dict):
        raise InputError("measure descriptor must be a mapping")
    kind = d.get('kind', 'jacobi')
    try:
        a, b = d['interval']
    except (KeyError, TypeError, ValueError):
        raise InputError("descriptor needs 'interval': [a, b]")
    alpha, beta = d.get('alpha', 0.0), d.get('beta', 0.0)
    if kind == 'lebesgue':
        alpha = beta = 0.0
    elif kind == 'chebyshev':
        alpha = beta = -0.5
    elif kind != 'jacobi':
        raise InputError(f"unknown measure kind {kind!r}")
    try:
        return WeightedInterval(Interval(float(a), float(b)),
                                alpha=float(alpha), beta=float(beta),
                                point_masses=d.get('point_masses', ()),
                                sign=int(d.get('sign', 1)),
                                scale=float(d.get('scale', 1.0)),
                                g_coeffs=d.get('g_coeffs'),
                                label=d.get('label', 'sigma'))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad measure descriptor: {exc}")
