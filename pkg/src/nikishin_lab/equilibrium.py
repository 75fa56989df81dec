"""
Vector logarithmic-potential equilibrium, the n-th root limit ``G`` and
empirical ratio asymptotics of mixed-type forms.

Components are labelled ``j = -m2, ..., m1``. Measures are discretized as
piecewise-constant densities on cells; all kernel entries are exact
cell averages of ``log 1/|x - y|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy

from .errors import (BadProbabilityVector, IndefiniteInteraction, InputError,
                     NonConvergence, PointOnSupport)
from .hermite_pade import MultiIndex2, monic_normalize, solve_mixed
from .measures import Interval, integrate

__all__ = ['InteractionMatrix', 'DiscretizedMeasure', 'EquilibriumSolution',
           'build_interaction', 'solve_vector_equilibrium', 'G_function',
           'nth_root_compare', 'ratio_experiment', 'period_step',
           'log_potential', 'equilibrium_residual', 'arcsine_cell_masses',
           'tv_distance', 'system_supports', 'TOL_EQ', 'MAX_ITER']

TOL_EQ = 5e-3
MAX_ITER = 50_000
_PSD_TOL = 1e-10


# =====
# Types
# =====

@dataclass
class InteractionMatrix:
    """Tridiagonal ``C`` on labels ``-m2..m1`` with ``c_jj = P_j^2`` and
    ``c_{j,j+1} = -P_j P_{j+1} / 2``."""

    m1: int
    m2: int
    P: dict
    matrix: numpy.ndarray

    @property
    def labels(self):
        return list(range(-self.m2, self.m1 + 1))

    def entry(self, j, k):
        return self.matrix[j + self.m2, k + self.m2]

    @property
    def symmetric(self):
        return bool(numpy.allclose(self.matrix, self.matrix.T))

    @property
    def min_eigenvalue(self):
        return float(numpy.linalg.eigvalsh(self.matrix).min())

    @property
    def psd(self):
        return self.min_eigenvalue >= -_PSD_TOL


@dataclass
class DiscretizedMeasure:
    """Cell masses of a probability measure on a union of intervals."""

    edges_left: numpy.ndarray
    edges_right: numpy.ndarray
    masses: numpy.ndarray

    @property
    def grid(self):
        return 0.5 * (self.edges_left + self.edges_right)

    @property
    def widths(self):
        return self.edges_right - self.edges_left

    def potential(self, z):
        return log_potential(self, z)


@dataclass
class EquilibriumSolution:
    """Equilibrium vector measure, constants ``w_j`` and energy ``J``."""

    labels: list
    measures: list
    constants: numpy.ndarray
    energy: float
    interaction: Optional[InteractionMatrix] = None
    C: numpy.ndarray = field(default=None, repr=False)
    iterations: int = 0
    energies: list = field(default_factory=list, repr=False)
    fields: Optional[list] = field(default=None, repr=False)

    def measure(self, j):
        return self.measures[self.labels.index(j)]

    def constant(self, j):
        return float(self.constants[self.labels.index(j)])


# ===================
# Interaction matrix
# ===================

def _check_probability(p, name):
    p = numpy.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise BadProbabilityVector(f"{name} must be a non-empty vector")
    ok_range = numpy.all((p > 0) & (p < 1)) if p.size > 1 else \
        numpy.isclose(p[0], 1.0)
    if not ok_range or abs(p.sum() - 1.0) > 1e-12:
        raise BadProbabilityVector(
            f"{name} entries must lie in (0,1) and sum to 1; got {p}")
    return p


def _tail_sums(p):
    """``P_j = sum_{k >= j} p_{lambda(k)}`` with ``p`` sorted decreasingly
    (ties keep their original order)."""
    order = sorted(range(len(p)), key=lambda i: (-p[i], i))
    ps = p[order]
    return [float(ps[j:].sum()) for j in range(len(p))]


def build_interaction(p1, p2):
    """Interaction matrix from the ray parameters of ``n_1`` and ``n_2``."""
    p1 = _check_probability(p1, 'p1')
    p2 = _check_probability(p2, 'p2')
    m1, m2 = len(p1) - 1, len(p2) - 1
    P1, P2 = _tail_sums(p1), _tail_sums(p2)
    P = {j: P1[j] for j in range(m1 + 1)}
    for j in range(1, m2 + 1):
        P[-j] = P2[j]
    labels = list(range(-m2, m1 + 1))
    size = len(labels)
    M = numpy.zeros((size, size))
    for a, j in enumerate(labels):
        M[a, a] = P[j] ** 2
        if a + 1 < size:
            M[a, a + 1] = M[a + 1, a] = -P[j] * P[labels[a + 1]] / 2
    return InteractionMatrix(m1, m2, P, M)


# ==========================
# Logarithmic kernels
# ==========================

def _G2(u):
    """Second antiderivative of ``log|u|``."""
    u = numpy.asarray(u, dtype=float)
    au = numpy.abs(u)
    with numpy.errstate(divide='ignore', invalid='ignore'):
        lg = numpy.where(au > 0, numpy.log(numpy.where(au > 0, au, 1.0)), 0.0)
    return 0.5 * u * u * lg - 0.75 * u * u


def _H1(u):
    """Antiderivative of ``log|u|``."""
    u = numpy.asarray(u, dtype=float)
    au = numpy.abs(u)
    with numpy.errstate(divide='ignore', invalid='ignore'):
        lg = numpy.where(au > 0, numpy.log(numpy.where(au > 0, au, 1.0)), 0.0)
    return u * lg - u


def _cell_kernel(aL, aR, bL, bR):
    """Average of ``log 1/|x - y|`` over cell pairs (exact)."""
    aL, aR = aL[:, None], aR[:, None]
    bL, bR = bL[None, :], bR[None, :]
    s = _G2(aR - bL) - _G2(aL - bL) - _G2(aR - bR) + _G2(aL - bR)
    return -s / ((aR - aL) * (bR - bL))


def log_potential(mu, z):
    """``V^mu(z) = int log 1/|z - y| dmu(y)`` of a piecewise-constant
    density, exact for real and complex ``z``."""
    z = numpy.asarray(z)
    zz = numpy.atleast_1d(z).astype(complex).ravel()
    aL, aR, w = mu.edges_left, mu.edges_right, mu.masses
    dens = w / (aR - aL)
    out = numpy.empty(zz.shape)
    real = numpy.abs(zz.imag) == 0
    if numpy.any(real):
        x = zz.real[real][:, None]
        integ = _H1(x - aL[None, :]) - _H1(x - aR[None, :])
        out[real] = -(integ @ dens)
    if numpy.any(~real):
        zc = zz[~real][:, None]
        ua, ub = zc - aL[None, :], zc - aR[None, :]
        F = lambda u: u * numpy.log(u) - u
        integ = numpy.real(F(ua) - F(ub))
        out[~real] = -(integ @ dens)
    return out.reshape(z.shape) if z.ndim else float(out[0])


# ===================
# Discretization
# ===================

def _as_intervals(E):
    if isinstance(E, Interval):
        return [E]
    if isinstance(E, (tuple, list)) and len(E) == 2 and \
            all(isinstance(v, (int, float)) for v in E):
        return [Interval(float(E[0]), float(E[1]))]
    return [iv if isinstance(iv, Interval) else Interval(*iv) for iv in E]


def _cells(E, count, mesh='chebyshev'):
    """Cell edges on each interval of ``E``: uniform, or graded like
    Chebyshev points so that cells shrink toward the endpoints."""
    ivs = _as_intervals(E)
    total = sum(iv.length for iv in ivs)
    sizes = [max(1, int(round(count * iv.length / total))) for iv in ivs]
    sizes[-1] = max(1, count - sum(sizes[:-1]))
    left, right = [], []
    for iv, c in zip(ivs, sizes):
        if mesh == 'uniform':
            e = numpy.linspace(iv.a, iv.b, c + 1)
        elif mesh == 'chebyshev':
            e = iv.center - iv.half * numpy.cos(numpy.pi
                                                * numpy.arange(c + 1) / c)
            e[0], e[-1] = iv.a, iv.b
        else:
            raise InputError(f"unknown mesh {mesh!r}")
        left.append(e[:-1])
        right.append(e[1:])
    return numpy.concatenate(left), numpy.concatenate(right)


def _project_simplex(v):
    """Euclidean projection onto ``{x >= 0, sum x = 1}``."""
    u = numpy.sort(v)[::-1]
    css = numpy.cumsum(u) - 1.0
    ind = numpy.arange(1, len(v) + 1)
    rho = numpy.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return numpy.maximum(v - theta, 0.0)


# ===================
# Minimizer
# ===================

class _Problem:
    """Discrete energy ``mu^T A mu + 2 phi^T mu`` on a product of simplices."""

    def __init__(self, C, cells, fields):
        self.C = C
        self.cells = cells
        sizes = [len(c[0]) for c in cells]
        self.offsets = numpy.concatenate([[0], numpy.cumsum(sizes)])
        N = self.offsets[-1]
        A = numpy.zeros((N, N))
        for a in range(len(cells)):
            for b in range(len(cells)):
                if C[a, b] == 0:
                    continue
                K = _cell_kernel(cells[a][0], cells[a][1],
                                 cells[b][0], cells[b][1])
                A[self.block(a), self.block(b)] = C[a, b] * K
        self.A = 0.5 * (A + A.T)
        self.phi = numpy.concatenate(fields)
        self.blocks = len(cells)

    def block(self, a):
        return slice(self.offsets[a], self.offsets[a + 1])

    def energy(self, mu):
        return float(mu @ self.A @ mu + 2 * self.phi @ mu)

    def grad(self, mu):
        return self.A @ mu + self.phi          # half gradient

    def project(self, v):
        out = numpy.empty_like(v)
        for a in range(self.blocks):
            out[self.block(a)] = _project_simplex(v[self.block(a)])
        return out

    def constants(self, mu, g=None):
        g = self.grad(mu) if g is None else g
        return numpy.array([g[self.block(a)] @ mu[self.block(a)]
                            for a in range(self.blocks)])

    def kkt(self, mu):
        """Largest violation of the discrete equilibrium conditions."""
        g = self.grad(mu)
        w = self.constants(mu, g)
        viol = 0.0
        for a in range(self.blocks):
            ga, ma = g[self.block(a)], mu[self.block(a)]
            viol = max(viol, float(numpy.max(w[a] - ga)),
                       float(numpy.max(numpy.where(ma > 0, ga - w[a], 0.0))))
        return viol

    def face_step(self, mu):
        """Minimizer on the face ``{mu_i = 0, i not in support}``."""
        free = mu > 0
        idx = numpy.nonzero(free)[0]
        nb = self.blocks
        B = numpy.zeros((nb, len(idx)))
        for a in range(nb):
            sl = self.block(a)
            B[a] = (idx >= sl.start) & (idx < sl.stop)
        K = numpy.block([[self.A[numpy.ix_(idx, idx)], -B.T],
                         [B, numpy.zeros((nb, nb))]])
        rhs = numpy.concatenate([-self.phi[idx], numpy.ones(nb)])
        try:
            sol = numpy.linalg.solve(K, rhs)
        except numpy.linalg.LinAlgError:
            sol = numpy.linalg.lstsq(K, rhs, rcond=None)[0]
        target = numpy.zeros_like(mu)
        target[idx] = sol[:len(idx)]
        return target

    def line_min(self, mu, d, tmax):
        """Exact minimizer of the quadratic along ``mu + t d``, ``t`` in
        ``[0, tmax]``."""
        curv = float(d @ self.A @ d)
        slope = float(d @ self.grad(mu))
        if curv <= 0:
            return tmax if slope < 0 else 0.0
        return float(min(max(-slope / curv, 0.0), tmax))


def solve_vector_equilibrium(C, supports, grid=512, fields=None, seed=None,
                             tol=1e-12, max_iter=MAX_ITER, mesh='chebyshev'):
    """Minimize the discretized vector energy over the product of simplices.

    Parameters
    ----------
    C : InteractionMatrix or array
        Interaction matrix in label order ``-m2..m1``.
    supports : list
        Per component an :class:`Interval`, a pair, or a list of intervals.
    grid : int or list of int
        Number of cells per component.
    mesh : {'chebyshev', 'uniform'}
        Cell layout. Graded cells resolve the inverse square-root endpoint
        behaviour, which keeps the residual first order in the cell size.
    fields : list of callables, optional
        External fields ``phi_j``; the energy gains ``2 sum int phi_j dmu_j``.
    seed : int, optional
        Random initial masses; uniform masses when ``None``.

    Notes
    -----
    Each iteration takes a projected-gradient step and then a step toward
    the minimizer on the current support face, both with exact line search
    on the quadratic, so the energy never increases.
    """
    inter = C if isinstance(C, InteractionMatrix) else None
    Cm = numpy.asarray(inter.matrix if inter else C, dtype=float)
    if Cm.ndim != 2 or Cm.shape[0] != Cm.shape[1] or \
            Cm.shape[0] != len(supports):
        raise InputError("interaction matrix and supports do not match")
    if numpy.linalg.eigvalsh(0.5 * (Cm + Cm.T)).min() < -_PSD_TOL:
        raise IndefiniteInteraction("interaction matrix is not PSD")
    nb = len(supports)
    grids = [grid] * nb if numpy.isscalar(grid) else list(grid)
    cells = [_cells(E, g, mesh) for E, g in zip(supports, grids)]
    phis = []
    for a in range(nb):
        if fields is None or fields[a] is None:
            phis.append(numpy.zeros(len(cells[a][0])))
        else:
            mid = 0.5 * (cells[a][0] + cells[a][1])
            phis.append(numpy.asarray(fields[a](mid), dtype=float)
                        * numpy.ones_like(mid))
    prob = _Problem(Cm, cells, phis)
    rng = numpy.random.default_rng(seed) if seed is not None else None
    mu = numpy.empty(prob.offsets[-1])
    for a in range(nb):
        n = prob.offsets[a + 1] - prob.offsets[a]
        v = rng.uniform(0.1, 1.0, n) if rng is not None else numpy.ones(n)
        mu[prob.block(a)] = v / v.sum()
    energies = [prob.energy(mu)]
    step = 1.0 / max(numpy.abs(prob.A).sum(axis=1).max(), 1e-300)
    it = 0
    while True:
        if prob.kkt(mu) <= tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"equilibrium minimizer hit {max_iter} "
                                 "iterations")
        it += 1
        # gradient projection
        d = prob.project(mu - step * prob.grad(mu)) - mu
        t = prob.line_min(mu, d, 1.0)
        mu = numpy.maximum(mu + t * d, 0.0)
        # face step toward the support minimizer, truncated at the boundary
        target = prob.face_step(mu)
        d = target - mu
        neg = d < 0
        tmax = 1.0
        if numpy.any(neg):
            tmax = float(min(1.0, numpy.min(mu[neg] / -d[neg])))
        t = prob.line_min(mu, d, tmax)
        new = mu + t * d
        new[new < 1e-300] = 0.0
        if t == tmax and tmax < 1.0:
            j = numpy.nonzero(neg)[0][numpy.argmin(mu[neg] / -d[neg])]
            new[j] = 0.0
        for a in range(nb):
            new[prob.block(a)] /= new[prob.block(a)].sum()
        if prob.energy(new) <= prob.energy(mu):
            mu = new
        energies.append(prob.energy(mu))
    labels = (inter.labels if inter is not None
              else list(range(-(nb - 1), 1)))
    measures = [DiscretizedMeasure(cells[a][0], cells[a][1],
                                   mu[prob.block(a)].copy())
                for a in range(nb)]
    w = prob.constants(mu)
    return EquilibriumSolution(labels, measures, w, prob.energy(mu), inter,
                               Cm, it, energies, fields)


def equilibrium_residual(sol):
    """``max_j max_x (w_j - W_j(x) - phi_j(x))_+`` with ``x`` running over
    the cell edges and midpoints of ``E_j`` and ``W_j`` the pointwise
    combined potential."""
    worst = 0.0
    nb = len(sol.measures)
    for a in range(nb):
        mu = sol.measures[a]
        xs = numpy.unique(numpy.concatenate([mu.edges_left, mu.edges_right,
                                             mu.grid]))
        W = numpy.zeros(len(xs))
        for b in range(nb):
            if sol.C[a, b] != 0:
                W = W + sol.C[a, b] * log_potential(sol.measures[b], xs)
        if sol.fields is not None and sol.fields[a] is not None:
            W = W + sol.fields[a](xs)
        worst = max(worst, float(numpy.max(sol.constants[a] - W)))
    return max(worst, 0.0)


def arcsine_cell_masses(mu, a=-1.0, b=1.0):
    """Cell masses of the arcsine distribution of ``[a, b]``."""
    c, h = (a + b) / 2, (b - a) / 2
    F = lambda x: numpy.arcsin(numpy.clip((x - c) / h, -1, 1)) / numpy.pi
    return F(mu.edges_right) - F(mu.edges_left)


def tv_distance(p, q):
    """Total variation ``sup_A |p(A) - q(A)| = sum |p - q| / 2``."""
    return 0.5 * float(numpy.abs(numpy.asarray(p) - numpy.asarray(q)).sum())


# ===================
# n-th root limit
# ===================

def G_function(sol, z):
    """``exp(P_1 V^{mu_1}(z) - P_0 V^{mu_0}(z) - 2 sum_k w_k / P_k)``.

    Terms for components absent when ``m1 = 0`` are dropped.
    """
    inter = sol.interaction
    if inter is None:
        raise InputError("solution carries no interaction matrix")
    z = numpy.asarray(z, dtype=complex)
    for j in (0, 1):
        if j in sol.labels:
            mu = sol.measure(j)
            lo, hi = mu.edges_left[0], mu.edges_right[-1]
            if numpy.any((numpy.abs(z.imag) == 0) & (z.real >= lo)
                         & (z.real <= hi)):
                raise PointOnSupport(f"z lies on E_{j}")
    val = -inter.P[0] * log_potential(sol.measure(0), z)
    if inter.m1 >= 1:
        val = val + inter.P[1] * log_potential(sol.measure(1), z)
        val = val - 2 * sum(sol.constant(k) / inter.P[k]
                            for k in range(1, inter.m1 + 1))
    return numpy.exp(val)


def system_supports(mix):
    """Compact sets ``E_j``: hulls of the second tail for ``j < 0``, of
    ``sigma_0`` for ``j = 0`` and of the first tail for ``j > 0``."""
    out = []
    for j in range(mix.m2, 0, -1):
        out.append(mix.S2.sigma(j).hull)
    out.append(mix.sigma0.hull)
    for j in range(1, mix.m1 + 1):
        out.append(mix.S1.sigma(j).hull)
    return out


def _form_values(form, z):
    """``A_n(z)`` from the extended coefficients, which avoids the
    cancellation between ``a_0`` and ``a_k s^`` off the hull."""
    z = numpy.asarray(z, dtype=complex)
    return numpy.asarray(form.evaluate_extended(z), dtype=complex)


def _monic_form(mix, n):
    form = solve_mixed(mix, n)
    return monic_normalize(form) if min(n.n1) >= 1 else form


def nth_root_compare(mix, ray, probes, grid=512, p1=None, p2=None,
                     root='n1'):
    """``| |A_n(z)|^{1/|n_1|} - G(z) | / G(z)`` along a ray of indices.

    ``ray`` is a list of :class:`MultiIndex2`; ``p1``, ``p2`` default to the
    proportions of the last index. ``root='n2'`` uses ``1/|n_2|`` instead,
    the degree of ``A_n`` when ``m1 = 0``. Returns ``(sizes, gaps, G)`` with
    ``gaps[i, q]`` for index ``i`` and probe ``q``.
    """
    if root not in ('n1', 'n2'):
        raise InputError("root must be 'n1' or 'n2'")
    ray = list(ray)
    last = ray[-1]
    p1 = numpy.asarray(last.n1, float) / last.size1 if p1 is None else p1
    p2 = numpy.asarray(last.n2, float) / last.size2 if p2 is None else p2
    inter = build_interaction(p1, p2)
    sol = solve_vector_equilibrium(inter, system_supports(mix), grid=grid)
    probes = numpy.asarray(probes, dtype=complex)
    G = G_function(sol, probes)
    gaps, sizes = [], []
    for n in ray:
        form = _monic_form(mix, n)
        size = n.size1 if root == 'n1' else n.size2
        val = numpy.abs(_form_values(form, probes)) ** (1.0 / size)
        gaps.append(numpy.abs(val - G) / G)
        sizes.append(size)
    return numpy.array(sizes), numpy.array(gaps), G


# ===================
# Ratio asymptotics
# ===================

def period_step(m1, m2):
    """Step adding ``M/(m_i + 1)`` to every component, ``M`` the least
    common multiple of ``m1 + 1`` and ``m2 + 1``."""
    M = math.lcm(m1 + 1, m2 + 1)
    return (tuple([M // (m1 + 1)] * (m1 + 1)),
            tuple([M // (m2 + 1)] * (m2 + 1)))


def _shift(n, step, times=1):
    return MultiIndex2(tuple(a + times * b for a, b in zip(n.n1, step[0])),
                       tuple(a + times * b for a, b in zip(n.n2, step[1])))


def ratio_experiment(mix, base, count, probes, step=None,
                     normalization='monic'):
    """Ratios ``r_i(z) = A_{n_{i+1}}(z) / A_{n_i}(z)`` along
    ``n_i = base + i * step`` and their successive differences.

    ``normalization='orthonormal'`` (only for ``m1 = m2 = 0``) scales each
    polynomial to unit ``L^2(sigma_0)`` norm.

    Returns
    -------
    dict
        ``indices``, ``ratios`` (``count`` x probes) and ``differences``
        (``count - 1`` x probes).
    """
    if step is None:
        step = period_step(mix.m1, mix.m2)
    probes = numpy.asarray(probes, dtype=complex)
    if normalization == 'orthonormal' and (mix.m1 or mix.m2):
        raise InputError("orthonormal scaling needs m1 = m2 = 0")
    idx = [_shift(base, step, i) for i in range(count + 1)]
    vals = []
    for n in idx:
        form = _monic_form(mix, n)
        v = _form_values(form, probes)
        if normalization == 'orthonormal':
            nrm = float(integrate(mix.sigma0,
                                  lambda x: numpy.real(form.evaluate(x)) ** 2,
                                  tol=1e-15))
            v = v / math.sqrt(nrm)
        vals.append(v)
    ratios = numpy.array([vals[i + 1] / vals[i] for i in range(count)])
    diffs = numpy.abs(numpy.diff(ratios, axis=0))
    return {'indices': idx, 'ratios': ratios, 'differences': diffs}
