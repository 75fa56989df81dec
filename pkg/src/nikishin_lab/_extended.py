"""Extended-precision moment tables for the mixed Hermite--Pade solver.

Every generator is replaced by its double-precision Gauss rule, which is a
legitimate discrete measure. All sums, Gram matrices and factorizations are
then carried out in ``mpmath`` so that the near-dependence of the functions
``T_nu U_j`` (and ``T_i V_k``) on ``supp sigma_0`` does not destroy the
solution. Only the final coefficients are rounded back to double.
"""

from __future__ import annotations

import math

import mpmath
import numpy

from .errors import IllConditioned

__all__ = ['ExtendedTables', 'extended_tables', 'rule_size']

DEFAULT_DPS = 40
MAX_DPS = 400
_GEN_START = 32
_GEN_CAP = 1024


def _generator_size(mu, targets):
    """Smallest doubling ``n`` whose rule reproduces the transform of
    ``mu`` at ``targets`` to near roundoff."""
    if mu.is_discrete:
        return None
    n = _GEN_START
    f = lambda r: (r.weights[None, :]
                   / (targets[:, None] - r.nodes[None, :])).sum(axis=1)
    val = f(mu.rule(n))
    while n < _GEN_CAP:
        n2 = 2 * n
        val2 = f(mu.rule(n2))
        scale = numpy.abs(val2).max()
        if numpy.abs(val2 - val).max() <= 1e-15 * scale:
            return n2
        n, val = n2, val2
    return n


def _mp_rule(mu, n):
    r = mu.rule(n)
    return ([mpmath.mpf(float(x)) for x in r.nodes],
            [mpmath.mpf(float(w)) for w in r.weights],
            numpy.asarray(r.nodes, dtype=float))


class _Chains:
    """Nested transforms ``s_{1,k}^`` of one side, built on fixed rules.

    ``inner[k]`` holds ``s_{2,k}^`` (or 1 for ``k = 1``) on the nodes of the
    rule for ``sigma_1`` so that ``s_{1,k}^`` at any point is one sum.
    """

    def __init__(self, sys, targets):
        self.m = sys.m
        rules = []
        for k in range(1, sys.m + 1):
            n = _generator_size(sys.sigma(k), targets)
            xs, ws, targets = _mp_rule(sys.sigma(k), n)
            rules.append((xs, ws))
        self.inner = []
        for k in range(1, sys.m + 1):
            f = [mpmath.mpf(1)] * len(rules[k - 1][0])
            for lvl in range(k, 1, -1):
                xs, ws = rules[lvl - 1]
                wf = [w * v for w, v in zip(ws, f)]
                f = [mpmath.fsum(c / (y - x) for c, x in zip(wf, xs))
                     for y in rules[lvl - 2][0]]
            self.inner.append(f)
        if rules:
            self.x1 = rules[0][0]
            self.w1 = rules[0][1]

    def values(self, k, pts, derivative=0):
        """``s_{1,k}^`` (or its derivative) at the mp points ``pts``."""
        wf = [w * v for w, v in zip(self.w1, self.inner[k - 1])]
        if derivative:
            return [-mpmath.fsum(c / (y - x) ** 2 for c, x in zip(wf, self.x1))
                    for y in pts]
        return [mpmath.fsum(c / (y - x) for c, x in zip(wf, self.x1))
                for y in pts]


class ExtendedTables:
    """Chebyshev moment tables of a mixed system in extended precision.

    Parameters
    ----------
    mix : MixedSystem
    nq : int or None
        Size of the rule for ``sigma_0`` (``None`` for discrete measures).
    nmax : int
        Largest polynomial length that will be requested.
    dps : int
        Decimal digits of the working precision.
    """

    def __init__(self, mix, nq, nmax, dps=DEFAULT_DPS):
        self.mix = mix
        self.nq = nq
        self.nmax = int(nmax)
        self.dps = int(dps)
        with mpmath.workdps(self.dps):
            self._build()

    def _build(self):
        mix = self.mix
        x0, w0, _ = _mp_rule(mix.sigma0, self.nq)
        h = mix.sigma0.hull
        c, hh = mpmath.mpf(h.center), mpmath.mpf(h.half)
        t = [(x - c) / hh for x in x0]
        self.w = w0
        self.x0 = x0
        self.aw = [abs(v) for v in w0]
        one = [mpmath.mpf(1)] * len(x0)
        x0f = numpy.array([float(v) for v in x0])
        self.chains1 = _Chains(mix.S1, x0f)
        self.chains2 = _Chains(mix.S2, x0f)
        self.U = [one] + [self.chains2.values(k, x0)
                          for k in range(1, mix.m2 + 1)]
        self.V = [one] + [self.chains1.values(k, x0)
                          for k in range(1, mix.m1 + 1)]
        nr = 2 * self.nmax
        T = [one, list(t)]
        for r in range(2, nr):
            T.append([2 * tt * a - b for tt, a, b in zip(t, T[-1], T[-2])])
        self.T = T[:max(nr, 1)]
        self._moments = {}

    def _mom(self, key, weights, f, g):
        """``sum weights * f * g * T_r`` for ``r < 2 nmax``."""
        if key not in self._moments:
            p = [w * a * b for w, a, b in zip(weights, f, g)]
            self._moments[key] = [mpmath.fdot(p, Tr) for Tr in self.T]
        return self._moments[key]

    def _block(self, mom, rows, cols):
        half = mpmath.mpf(1) / 2
        return [[half * (mom[nu + i] + mom[abs(nu - i)]) for i in range(cols)]
                for nu in range(rows)]

    def _assemble(self, kind, left, right):
        """Block matrix of ``<T_nu F_a, T_i G_b>`` for index vectors."""
        if kind == 'cross':
            F, G, W = self.U, self.V, self.w
        elif kind == 'trial':
            F, G, W = self.V, self.V, self.aw
        else:
            F, G, W = self.U, self.U, self.aw
        rows = sum(left)
        cols = sum(right)
        M = mpmath.zeros(rows, cols)
        r0 = 0
        for a, na in enumerate(left):
            c0 = 0
            for b, nb in enumerate(right):
                if na and nb:
                    mom = self._mom((kind, a, b), W, F[a], G[b])
                    blk = self._block(mom, na, nb)
                    for i in range(na):
                        for j in range(nb):
                            M[r0 + i, c0 + j] = blk[i][j]
                c0 += nb
            r0 += na
        return M

    def solve(self, n, gap_threshold):
        """Null vector of the orthogonality conditions for ``n``.

        Returns ``(vec, svals, nullity, resid, digits)`` where ``svals`` are
        the cosines of the principal angles between the orthonormalized
        test and trial spaces and ``digits`` estimates the decimal digits
        lost to the conditioning of those bases.
        """
        cols = n.size1
        if n.size2 == 0:
            vec = numpy.zeros(cols)
            vec[0] = 1.0
            with mpmath.workdps(self.dps):
                ext = [mpmath.mpf(v) for v in vec]
            return vec, numpy.zeros(0), cols, 0.0, 0.0, ext
        with mpmath.workdps(self.dps):
            M = self._assemble('cross', n.n2, n.n1)
            G1 = self._assemble('trial', n.n1, n.n1)
            G2 = self._assemble('test', n.n2, n.n2)
            try:
                L1 = mpmath.cholesky(G1)
                L2 = mpmath.cholesky(G2)
            except (ZeroDivisionError, ValueError) as exc:
                raise IllConditioned(f"Gram matrix not positive definite "
                                     f"at {self.dps} digits") from exc
            digits = max(_lost_digits(L1), _lost_digits(L2))
            # K = L2^{-1} M L1^{-T}
            K = _lower_solve(L1, _lower_solve(L2, M).T).T
            Kf = numpy.array(K.tolist(), dtype=float)
            svals = numpy.linalg.svd(Kf, compute_uv=False)
            rank = int(numpy.sum(svals > gap_threshold * svals[0]))
            Q, _ = mpmath.qr(K.T, mode='full')
            y = Q.column(Q.cols - 1)
            cvec = _lower_solve(L1, y, transpose=True)
            cvec = cvec / mpmath.norm(cvec)
            r = M * cvec
            resid = float(max(abs(v) for v in r) / mpmath.mnorm(M, 'f'))
            vec = numpy.array([float(v) for v in cvec])
        return vec, svals, cols - rank, resid, digits, list(cvec)

    def remainder(self, coeffs, j, z):
        """``int U_j A_n dsigma_0 / (z - x)`` in extended precision."""
        z = numpy.atleast_1d(numpy.asarray(z, dtype=complex))
        with mpmath.workdps(self.dps):
            a = _form_on_nodes(self, coeffs)
            p = [w * u * v for w, u, v in zip(self.w, self.U[j], a)]
            out = []
            for zz in z:
                zc = mpmath.mpc(zz)
                out.append(complex(mpmath.fsum(c / (zc - x)
                                               for c, x in zip(p, self.x0))))
        return numpy.array(out)

    def evaluate_form(self, coeffs, z, derivative=False):
        """Extended-precision ``A_n(z)`` for mp coefficient lists."""
        mix = self.mix
        h = mix.sigma0.hull
        z = numpy.atleast_1d(numpy.asarray(z))
        cplx = numpy.iscomplexobj(z)
        with mpmath.workdps(self.dps):
            conv = mpmath.mpc if cplx else mpmath.mpf
            pts = [conv(v) for v in z]
            c, hh = mpmath.mpf(h.center), mpmath.mpf(h.half)
            tt = [(p - c) / hh for p in pts]
            out = [0] * len(pts)
            for k, ck in enumerate(coeffs):
                if not len(ck):
                    continue
                pv = [_cheb_eval(ck, t) for t in tt]
                if k == 0:
                    if derivative:
                        out = [o + _cheb_eval(ck, t, 1) / hh
                               for o, t in zip(out, tt)]
                    else:
                        out = [o + v for o, v in zip(out, pv)]
                    continue
                sv = self.chains1.values(k, pts)
                if derivative:
                    dv = self.chains1.values(k, pts, derivative=1)
                    pd = [_cheb_eval(ck, t, 1) / hh for t in tt]
                    out = [o + a * b + e * f for o, a, b, e, f
                           in zip(out, pd, sv, pv, dv)]
                else:
                    out = [o + a * b for o, a, b in zip(out, pv, sv)]
            dtype = complex if cplx else float
            return numpy.array([dtype(v) for v in out])


def _form_on_nodes(tab, coeffs):
    """``A_n`` at the nodes of the ``sigma_0`` rule."""
    vals = [mpmath.mpf(0)] * len(tab.w)
    for k, ck in enumerate(coeffs):
        for i, cv in enumerate(ck):
            vals = [v + cv * a * b
                    for v, a, b in zip(vals, tab.T[i], tab.V[k])]
    return vals


def _cheb_eval(c, t, derivative=0):
    """Clenshaw evaluation of a Chebyshev series (or its derivative)."""
    if derivative:
        # T_i' = i U_{i-1}
        b1 = b2 = 0
        for i in range(len(c) - 1, 0, -1):
            b1, b2 = i * c[i] + 2 * t * b1 - b2, b1
        return b1
    b1 = b2 = 0
    for i in range(len(c) - 1, 0, -1):
        b1, b2 = c[i] + 2 * t * b1 - b2, b1
    return c[0] + t * b1 - b2


def _lower_solve(L, B, transpose=False):
    """``L^{-1} B`` (or ``L^{-T} B``) for lower-triangular ``L``."""
    n = L.rows
    X = B.copy()
    order = range(n - 1, -1, -1) if transpose else range(n)
    for c in range(X.cols):
        for i in order:
            if transpose:
                acc = mpmath.fsum(L[k, i] * X[k, c] for k in range(i + 1, n))
            else:
                acc = mpmath.fsum(L[i, k] * X[k, c] for k in range(i))
            X[i, c] = (X[i, c] - acc) / L[i, i]
    return X


def _lost_digits(L):
    d = [abs(L[i, i]) for i in range(L.rows)]
    if not d:
        return 0.0
    return 2.0 * float(mpmath.log10(max(d) / min(d)))


def rule_size(mix, cap):
    """Size of the ``sigma_0`` rule for polynomial lengths up to ``cap``."""
    if mix.sigma0.is_discrete:
        return None
    return max(64, 1 << math.ceil(math.log2(4 * cap + 16)))


def extended_tables(mix, nmax, dps=DEFAULT_DPS):
    """Cached :class:`ExtendedTables` with capacity at least ``nmax``."""
    cache = mix.__dict__.setdefault('_ext_tables', {})
    tab = cache.get(dps)
    if tab is None or tab.nmax < nmax:
        cap = 8 * math.ceil(max(nmax, 1) / 8)
        tab = ExtendedTables(mix, rule_size(mix, cap), cap, dps)
        cache[dps] = tab
    return tab
