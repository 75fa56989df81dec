"""
Mixed-type Hermite--Pade forms: solving, normalization, diagnostics,
remainders, zeros, type II approximants and the AT zero-count experiment.

Unknown polynomials are expanded in Chebyshev polynomials of the variable
``t = (x - c) / h`` reduced to the hull of ``sigma_0``; the same basis spans
the test polynomials of the orthogonality conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq

from .errors import (ContourThroughZero, IllConditioned, InputError,
                     NotNormal, NullspaceTooLarge, ZeroCountMismatch,
                     ZeroLeadingCoefficient)
from ._extended import DEFAULT_DPS, MAX_DPS, extended_tables
from .measures import integrate
from .nikishin import MixedSystem, NikishinSystem

__all__ = ['MultiIndex2', 'NormalityReport', 'MixedForm', 'solve_mixed',
           'monic_normalize', 'monic_index', 'normality_scan', 'remainder',
           'zeros_in_hull', 'type2_pade', 'at_zero_count',
           'orthogonality_residuals', 'compositions', 'type2_system']

GAP_THRESHOLD = 1e-8
DEGREE_THRESHOLD = 1e-12
SAFETY_DIGITS = 24
CANCELLATION_LIMIT = 1e-6


# =====
# Types
# =====

@dataclass(frozen=True)
class MultiIndex2:
    """Pair ``(n1; n2)`` with ``|n1| = |n2| + 1`` for mixed solving."""

    n1: tuple
    n2: tuple

    def __post_init__(self):
        n1 = tuple(int(v) for v in self.n1)
        n2 = tuple(int(v) for v in self.n2)
        if not n1 or not n2:
            raise InputError("n1 and n2 must be non-empty")
        if min(n1) < 0 or min(n2) < 0:
            raise InputError("multi-index components must be >= 0")
        object.__setattr__(self, 'n1', n1)
        object.__setattr__(self, 'n2', n2)

    @property
    def size1(self):
        return sum(self.n1)

    @property
    def size2(self):
        return sum(self.n2)

    def check_mixed(self):
        if self.size1 != self.size2 + 1:
            raise InputError(f"|n1| = {self.size1} must equal |n2| + 1 = "
                             f"{self.size2 + 1}")

    def __str__(self):
        return f"({','.join(map(str, self.n1))};{','.join(map(str, self.n2))})"


@dataclass
class NormalityReport:
    multi_index: MultiIndex2
    achieved_degrees: list
    nullity: int
    singular_gap: float
    normal: bool
    residual: float = float('nan')
    error: Optional[str] = None


@dataclass
class MixedForm:
    """Coefficients of ``a_{n,0..m1}`` (Chebyshev, reduced variable)."""

    coeffs: list
    system: MixedSystem
    multi_index: MultiIndex2
    report: Optional[NormalityReport] = None
    ext: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def domain(self):
        h = self.system.sigma0.hull
        return [h.a, h.b]

    def polys(self):
        """``a_{n,k}`` as :class:`numpy.polynomial.Chebyshev` in ``x``."""
        return [Chebyshev(c if len(c) else [0.0], domain=self.domain)
                for c in self.coeffs]

    def vector(self):
        return numpy.concatenate([numpy.asarray(c, dtype=float)
                                  for c in self.coeffs])

    def scaled(self, factor):
        ext = None
        if self.ext is not None:
            tab, cs = self.ext
            with mpmath.workdps(tab.dps):
                f = mpmath.mpf(factor)
                ext = (tab, [[v * f for v in c] for c in cs])
        return MixedForm([numpy.asarray(c) * factor for c in self.coeffs],
                         self.system, self.multi_index, self.report, ext)

    def evaluate_extended(self, z, derivative=False):
        """``A_n(z)`` from the extended-precision coefficients; falls back
        to :meth:`evaluate` when they are not available."""
        if self.ext is None:
            return self.evaluate(z, derivative)
        tab, cs = self.ext
        return tab.evaluate_form(cs, z, derivative)

    def cancellation(self, z):
        """``|A_n(z)| / sum_k |a_{n,k}(z) s_{1,k}^(z)|`` (termwise scale)."""
        z = numpy.asarray(z)
        S1 = self.system.S1
        polys = self.polys()
        total = numpy.zeros(z.shape)
        for k, p in enumerate(polys):
            if not len(self.coeffs[k]):
                continue
            v = p(z) * (1.0 if k == 0 else S1.s(1, k).cauchy(z))
            total = total + numpy.abs(v)
        return numpy.abs(self.evaluate(z)) / numpy.where(total > 0, total,
                                                         1.0)

    def evaluate(self, z, derivative=False):
        """``A_n(z)`` (or ``A_n'(z)``)."""
        z = numpy.asarray(z)
        S1 = self.system.S1
        polys = self.polys()
        if derivative:
            out = polys[0].deriv()(z) if len(self.coeffs[0]) else 0 * z
        else:
            out = polys[0](z) if len(self.coeffs[0]) else 0 * z
        out = out + 0 * z
        for k in range(1, len(polys)):
            if not len(self.coeffs[k]):
                continue
            sk = S1.s(1, k)
            val = polys[k](z) * sk.cauchy(z)
            if derivative:
                val = polys[k].deriv()(z) * sk.cauchy(z) \
                    + polys[k](z) * sk.cauchy(z, derivative=1)
            out = out + val
        return out

    def leading_coefficient(self, k):
        """Leading coefficient of ``a_{n,k}`` in powers of ``x``."""
        c = self.coeffs[k]
        d = len(c) - 1
        if d < 0:
            return 0.0
        if d == 0:
            return float(c[0])
        h = 0.5 * (self.domain[1] - self.domain[0])
        return float(c[-1]) * 2.0 ** (d - 1) / h ** d

    def __call__(self, z):
        return self.evaluate(z)


# ==============
# Moment tables
# ==============

def _base_tables(mix, nq):
    """Nodes, weights, row functions and column functions on ``sigma_0``."""
    cache = mix.__dict__.setdefault('_hp_tables', {})
    if nq not in cache:
        r = mix.sigma0.rule(nq)
        cache[nq] = (r.nodes, r.weights, mix.row_functions(r.nodes),
                     mix.column_functions(r.nodes))
    return cache[nq]


def _reduced(mix, x):
    h = mix.sigma0.hull
    return (x - h.center) / h.half


def _block_matrix(x, t, funcs, sizes):
    cols = []
    for k, nk in enumerate(sizes):
        if nk == 0:
            continue
        cols.append(C.chebvander(t, nk - 1) * funcs[:, k:k + 1])
    if not cols:
        return numpy.zeros((len(x), 0))
    return numpy.hstack(cols)


def _moment_matrix_at(mix, n, nq):
    x, w, U, V = _base_tables(mix, nq)
    t = _reduced(mix, x)
    B2 = _block_matrix(x, t, U, n.n2)
    B1 = _block_matrix(x, t, V, n.n1)
    return (B2 * w[:, None]).T @ B1


def mixed_moment_matrix(mix, n, tol=1e-13):
    """Matrix ``M[(j,nu),(k,i)] = int T_nu U_j T_i V_k dsigma_0`` with the
    quadrature size doubled until successive matrices agree to ``tol``
    relative to the matrix norm. Returns ``(M, nq)``.

    Once the change stops decreasing the rule has reached its roundoff
    floor; the last matrix is accepted if that floor is below ``1e-10``.
    """
    if mix.sigma0.is_discrete:
        return _moment_matrix_at(mix, n, None), None
    nq = 32
    while nq < 2 * (n.size1 + n.size2) + 8:
        nq *= 2
    prev = _moment_matrix_at(mix, n, nq)
    if prev.size == 0:
        return prev, nq
    last = numpy.inf
    while True:
        nq2 = 2 * nq
        cur = _moment_matrix_at(mix, n, nq2)
        scale = max(numpy.abs(cur).max(), 1e-300)
        diff = numpy.abs(cur - prev).max() / scale
        if diff <= tol:
            return cur, nq2
        if diff >= last and last <= 1e-10:
            return prev, nq
        last = diff
        prev, nq = cur, nq2
        if nq > 2048:
            raise IllConditioned("mixed moments did not stabilize")


# ======
# Solver
# ======

def _split(vec, sizes):
    out, pos = [], 0
    for nk in sizes:
        out.append(numpy.array(vec[pos:pos + nk], dtype=float))
        pos += nk
    return out


def _achieved_degrees(coeffs, norm):
    degs = []
    for c in coeffs:
        big = numpy.nonzero(numpy.abs(c) > DEGREE_THRESHOLD * norm)[0]
        degs.append(int(big[-1]) if len(big) else -1)
    return degs


def solve_mixed(mix, n, tol=1e-13, gap_threshold=GAP_THRESHOLD,
                raise_on_abnormal=True):
    """Nullspace solution of the mixed-type orthogonality conditions.

    The test space ``span{T_nu U_j}`` and the trial space
    ``span{T_i V_k}`` are orthonormalized in ``L2(|sigma_0|)`` in extended
    precision. ``singular_gap`` is the smallest kept singular value of the
    resulting matrix of principal-angle cosines relative to the largest;
    the rank cut uses ``gap_threshold``. The working precision is raised
    until it exceeds the digits lost to the conditioning of both bases by
    a safety margin. ``tol`` is kept for interface compatibility with the
    double-precision moment routines.
    """
    if not isinstance(n, MultiIndex2):
        n = MultiIndex2(*n)
    n.check_mixed()
    if len(n.n1) != mix.m1 + 1 or len(n.n2) != mix.m2 + 1:
        raise InputError("multi-index lengths do not match the system")
    nmax = max(max(n.n1), max(n.n2), 1)
    dps = DEFAULT_DPS
    while True:
        tab = extended_tables(mix, nmax, dps)
        try:
            vec, svals, nullity, resid, lost, ext = tab.solve(n, gap_threshold)
        except IllConditioned:
            if dps >= MAX_DPS:
                raise
            dps = min(MAX_DPS, 2 * dps)
            continue
        need = int(lost) + SAFETY_DIGITS
        if need <= dps:
            break
        if dps >= MAX_DPS:
            raise IllConditioned(f"{lost:.0f} digits lost at {n}; exceeds "
                                 f"the precision cap")
        dps = min(MAX_DPS, max(need + 10, 2 * dps))
    gap = float(svals[-1] / svals[0]) if len(svals) and svals[0] > 0 \
        else 1.0
    coeffs = _split(vec, n.n1)
    degs = _achieved_degrees(coeffs, 1.0)
    full = lambda dd: all(d == nk - 1 for d, nk in zip(dd, n.n1) if nk >= 1)
    if nullity == 1 and not full(degs) and dps < MAX_DPS:
        degs = _confirmed_degrees(mix, n, nmax, dps, ext, gap_threshold)
    normal = nullity == 1 and full(degs)
    report = NormalityReport(n, degs, nullity, gap, normal, resid)
    if nullity > 1 and raise_on_abnormal:
        err = NullspaceTooLarge(f"nullity {nullity} at {n} (gap {gap:.2e})")
        err.report = report
        raise err
    # fix the overall sign deterministically
    nz = numpy.nonzero(numpy.abs(vec) > 1e-12)[0]
    if len(nz) and vec[nz[-1]] < 0:
        coeffs = [-c for c in coeffs]
        ext = [-v for v in ext]
    return MixedForm(coeffs, mix, n, report, ext=(tab, _split_list(ext, n.n1)))


def _confirmed_degrees(mix, n, nmax, dps, ext, gap_threshold):
    """Degrees from extended coefficients that survive a re-solve at
    twice the precision (same sign, within 1% relative).

    Leading coefficients can be genuinely far below double precision
    relative to the coefficient norm; stability under doubled precision
    separates them from rounding noise.
    """
    hi = min(MAX_DPS, 2 * dps)
    tab = extended_tables(mix, nmax, hi)
    ext_hi = tab.solve(n, gap_threshold)[5]
    if ext_hi[-1] * ext[-1] < 0:
        ext_hi = [-v for v in ext_hi]
    degs, pos = [], 0
    for nk in n.n1:
        d = -1
        for i in range(nk):
            a, b = ext[pos + i], ext_hi[pos + i]
            if b != 0 and abs(a - b) <= 0.01 * abs(b):
                d = i
        degs.append(d)
        pos += nk
    return degs


def _split_list(vals, sizes):
    out, pos = [], 0
    for nk in sizes:
        out.append(vals[pos:pos + nk])
        pos += nk
    return out


def monic_index(n1):
    """Index ``j`` whose polynomial is made monic.

    ``j = m1`` when the last component attains the minimum; otherwise the
    index attaining the minimum with all later components strictly larger.
    Both cases select the last index attaining the minimum.
    """
    n1 = list(n1)
    mn = min(n1)
    return max(i for i, v in enumerate(n1) if v == mn)


def monic_normalize(form):
    rep = form.report
    if rep is not None and not rep.normal:
        raise NotNormal(f"index {form.multi_index} is not normal")
    n1 = form.multi_index.n1
    if min(n1) < 1:
        raise InputError("monic normalization needs min(n1) >= 1")
    j = monic_index(n1)
    lead = form.leading_coefficient(j)
    norm = numpy.linalg.norm(form.vector())
    c = form.coeffs[j]
    if abs(c[-1]) <= 1e-14 * norm:
        raise ZeroLeadingCoefficient(f"a_{{n,{j}}} has vanishing leading "
                                     f"coefficient")
    return form.scaled(1.0 / lead)


def compositions(total, parts):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def normality_scan(mix, max_total, tol=1e-13, min_total=1):
    """Reports for every ``(n1; n2)`` with ``|n1| <= max_total``."""
    if max_total < 1:
        raise InputError("max_total must be >= 1")
    reports = []
    for N in range(min_total, max_total + 1):
        for n1 in compositions(N, mix.m1 + 1):
            for n2 in compositions(N - 1, mix.m2 + 1):
                idx = MultiIndex2(n1, n2)
                try:
                    rep = solve_mixed(mix, idx, tol=tol,
                                      raise_on_abnormal=False).report
                except Exception as exc:  # keep scanning
                    rep = NormalityReport(idx, [], -1, float('nan'), False,
                                          error=f"{type(exc).__name__}: "
                                                f"{exc}")
                reports.append(rep)
    return reports


def orthogonality_residuals(form, nq=None):
    """``|int T_nu(t) U_j A_n dsigma_0|`` per row, relative to the scale
    ``||coeffs|| * ||M||``, recomputed on an independent, finer rule."""
    mix, n = form.system, form.multi_index
    M, nq0 = mixed_moment_matrix(mix, n)
    if nq is None:
        nq = None if nq0 is None else 2 * nq0
    x, w, U, V = _base_tables(mix, nq)
    t = _reduced(mix, x)
    A = numpy.zeros_like(x)
    for k, c in enumerate(form.coeffs):
        if len(c):
            A = A + C.chebval(t, c) * V[:, k]
    out = []
    vec = form.vector()
    mnorm = numpy.linalg.norm(M, 2) if M.size else 1.0
    scale = max(numpy.linalg.norm(vec) * mnorm, 1e-300)
    for j, nj in enumerate(n.n2):
        if nj == 0:
            out.append(numpy.zeros(0))
            continue
        B = C.chebvander(t, nj - 1) * U[:, j:j + 1]
        out.append(numpy.abs((B * (w * A)[:, None]).sum(axis=0)) / scale)
    return out


# =======================
# Remainders and zeros
# =======================

def remainder(form, j, z, tol=1e-14):
    """``R_{n,j}(z) = int U_j(x) A_n(x) dsigma_0(x) / (z - x)``."""
    mix = form.system
    z = numpy.atleast_1d(numpy.asarray(z, dtype=complex))
    h = mix.sigma0.hull
    if numpy.any(h.distance(z) <= 1e-8 * h.length):
        from .errors import PointOnSupport
        raise PointOnSupport("remainder evaluated on the support")
    if form.ext is not None:
        tab, cs = form.ext
        val = tab.remainder(cs, j, z)
        return val[0] if val.size == 1 else val
    S2 = mix.S2
    coeffs, t_of = form.coeffs, lambda x: _reduced(mix, x)

    def f(x):
        t = t_of(x)
        V = mix.column_functions(x)
        A = numpy.zeros_like(x)
        for k, c in enumerate(coeffs):
            if len(c):
                A = A + C.chebval(t, c) * V[:, k]
        u = numpy.ones_like(x) if j == 0 else S2.s(1, j).cauchy(x)
        return (u * A)[:, None] / (z[None, :] - x[:, None])

    r = mix.sigma0.rule(64)
    scale = (numpy.abs(r.weights) @ numpy.abs(f(r.nodes))).max()
    val = integrate(mix.sigma0, f, tol=tol * max(scale, 1e-300))
    return val[0] if val.size == 1 else val


def zeros_in_hull(form, grid=2048, strict=True):
    """Sign changes of ``A_n`` in the open hull of ``supp sigma_0``."""
    n = form.multi_index
    h = form.system.sigma0.hull
    theta = numpy.pi * (numpy.arange(grid) + 0.5) / grid
    xs = numpy.sort(h.center + h.half * numpy.cos(theta))
    ev = form.evaluate
    if form.system.m1 > 0 and form.ext is not None \
            and numpy.median(form.cancellation(xs)) < CANCELLATION_LIMIT:
        ev = form.evaluate_extended
    vals = numpy.real(ev(xs))
    f = lambda x: float(numpy.real(ev(numpy.array([x]))[0]))
    roots = []
    for i in range(grid - 1):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-12,
                                rtol=4 * numpy.finfo(float).eps))
    roots = numpy.array(sorted(roots))
    if strict and len(roots) != n.size2:
        raise ZeroCountMismatch(f"found {len(roots)} sign changes of A_n in "
                                f"the hull, expected |n2| = {n.size2}")
    if strict and len(roots) > 1:
        d = numpy.real(ev(roots, derivative=True))
        if numpy.any(d == 0) or numpy.any(numpy.sign(d[1:])
                                          == numpy.sign(d[:-1])):
            raise ZeroCountMismatch("derivative signs at the zeros do not "
                                    "alternate (non-simple zero)")
    return roots


# ==============
# Type II forms
# ==============

def type2_system(sys):
    """Mixed system ``(N(sigma_0), sys)`` realizing type II conditions."""
    return MixedSystem(NikishinSystem([sys.sigma(0)]), sys)


def type2_pade(sys, n, tol=1e-13):
    """Type II Hermite--Pade approximants of ``(s_{0,0}^, ..., s_{0,m}^)``.

    Returns ``(Q, P, form)`` with ``Q`` a monic Chebyshev series in ``x`` of
    degree ``|n|`` and ``P[k]`` power series in ``x``.
    """
    n = tuple(int(v) for v in n)
    if len(n) != sys.m + 1:
        raise InputError("multi-index length must be m+1")
    if sum(n) < 1:
        raise InputError("|n| must be >= 1")
    mix = _type2_cache(sys)
    form = monic_normalize(solve_mixed(mix, MultiIndex2((sum(n) + 1,), n),
                                       tol=tol))
    Q = form.polys()[0]
    h = sys.sigma(0).hull
    q = C.cheb2poly(form.coeffs[0])          # power coefficients in t
    deg = len(q) - 1
    P = []
    for k in range(sys.m + 1):
        s0k = sys.s(0, k)
        mom = numpy.atleast_1d(integrate(
            s0k, lambda x: ((x - h.center) / h.half)[:, None]
            ** numpy.arange(max(deg, 1))[None, :],
            tol=1e-15 * s0k._weight_scale()))
        coef = numpy.zeros(max(deg, 1))
        for r in range(deg):
            coef[r] = sum(q[i] * mom[i - 1 - r] for i in range(r + 1,
                                                                 deg + 1))
        P.append(Polynomial(coef / h.half, domain=[h.a, h.b],
                            window=[-1, 1]))
    return Q, P, form


def _type2_cache(sys):
    cache = sys.__dict__.setdefault('_type2_mix', [])
    if not cache:
        cache.append(type2_system(sys))
    return cache[0]


# =====================
# AT-system zero counts
# =====================

def _winding(vals):
    ang = numpy.angle(vals[1:] / vals[:-1])
    return ang.sum() / (2 * numpy.pi), numpy.abs(ang).max()


def _rectangle(cx, cy, hw, hh, per_edge):
    """Counter-clockwise closed polygon, ``4 * per_edge + 1`` points."""
    s = numpy.linspace(0.0, 1.0, per_edge, endpoint=False)
    x0, x1, y0, y1 = cx - hw, cx + hw, cy - hh, cy + hh
    pts = numpy.concatenate([
        x0 + (x1 - x0) * s + 1j * y0,
        x1 + 1j * (y0 + (y1 - y0) * s),
        x1 - (x1 - x0) * s + 1j * y1,
        x0 + 1j * (y1 - (y1 - y0) * s)])
    return numpy.append(pts, pts[0])


class _ZeroCounter:
    """Zero counter for ``p_0 + sum p_k s_{1,k}^`` on a fixed region.

    The region is a large rectangle minus a thin rectangle around ``Delta_1``;
    transforms are tabulated once on the contour and on a real sign grid.
    """

    def __init__(self, sys_tail, n, per_edge=1024, margin=0.06,
                 reach=6.0):
        self.sys = sys_tail
        self.n = tuple(n)
        self.m = len(n) - 1
        if self.m == 0:
            return
        d1 = sys_tail.sigma(1).hull
        allh = [g.hull for g in sys_tail.generators]
        lo = min(h.a for h in allh)
        hi = max(h.b for h in allh)
        span = max(hi - lo, 1.0)
        cx = 0.5 * (lo + hi)
        self.d1 = d1
        self._build(cx, reach * span, margin * d1.length, per_edge)

    def _build(self, cx, half, margin, per_edge):
        d1 = self.d1
        self.outer = _rectangle(cx + 0.013 * half, 0.011 * half, half,
                                half, per_edge)
        self.inner = _rectangle(d1.center, 0.0, d1.half + margin,
                                margin, per_edge // 2)
        left = numpy.linspace(cx - half, d1.a - margin, 4 * per_edge)
        right = numpy.linspace(d1.b + margin, cx + half, 4 * per_edge)
        self.real_grid = [left, right]
        self.tab = {}
        for name, pts in (('outer', self.outer), ('inner', self.inner),
                          ('left', left), ('right', right)):
            cols = [self.sys.s(1, k).cauchy(pts) for k in
                    range(1, self.m + 1)]
            self.tab[name] = (pts, cols)

    def _eval(self, name, polys):
        pts, cols = self.tab[name]
        val = polys[0](pts) + 0 * pts
        for k in range(1, self.m + 1):
            val = val + polys[k](pts) * cols[k - 1]
        return val

    def count(self, polys):
        if self.m == 0:
            p0 = polys[0].trim()
            return 0 if p0.degree() <= 0 else len(p0.roots())
        vo = self._eval('outer', polys)
        vi = self._eval('inner', polys)
        scale = max(numpy.abs(vo).max(), numpy.abs(vi).max())
        if min(numpy.abs(vo).min(), numpy.abs(vi).min()) <= 1e-13 * scale:
            raise ContourThroughZero("form vanishes on the counting contour")
        wo, jo = _winding(vo)
        wi, ji = _winding(vi)
        if max(jo, ji) > numpy.pi / 2:
            raise ContourThroughZero("contour sampling too coarse")
        wind = int(round(wo - wi))
        real = 0
        for name in ('left', 'right'):
            v = numpy.real(self._eval(name, polys))
            real += int(numpy.sum(v[1:] * v[:-1] < 0))
        return max(wind, real)


def _random_polys(n, rng):
    return [Polynomial(rng.uniform(-1.0, 1.0, size=nk)) if nk else
            Polynomial([0.0]) for nk in n]


def at_zero_count(sys_tail, n, trials=200, seed=0, return_counts=False):
    """Largest zero count of random forms ``p_0 + sum p_k s_{1,k}^`` in
    ``C \\ Delta_1`` (lower bound from winding and real sign changes).

    ``sys_tail`` is the system ``N(sigma_1, ..., sigma_m)`` (offset 1) or
    ``None`` when ``m = 0``.
    """
    n = tuple(int(v) for v in n)
    if trials < 1:
        raise InputError("trials must be >= 1")
    if len(n) > 1 and (sys_tail is None or sys_tail.offset != 1
                       or sys_tail.m != len(n) - 1):
        raise InputError("sys_tail must be N(sigma_1..sigma_m) matching n")
    rng = numpy.random.default_rng(seed)
    counter = _ZeroCounter(sys_tail, n)
    counts = []
    for _ in range(trials):
        polys = _random_polys(n, rng)
        for attempt in range(3):
            try:
                counts.append(counter.count(polys))
                break
            except ContourThroughZero:
                if attempt == 2:
                    raise
                counter._build(counter.outer.real.mean(),
                               0.97 * (counter.outer.real.max()
                                       - counter.outer.real.min()) / 2,
                               1.3 * (counter.inner.imag.max()),
                               2 * (len(counter.outer) - 1) // 4)
    best = max(counts)
    return (best, counts) if return_counts else best
