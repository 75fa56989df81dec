"""Nikishin systems and the mixed-type pair of systems."""

from __future__ import annotations

import numpy

from .errors import AdjacentOverlap, InputError, ValidationError
from .measures import Measure, measure_from_descriptor, product

__all__ = ['NikishinSystem', 'MixedSystem', 'build', 'markov_function',
           'mixed_weight_matrix', 'system_from_descriptor',
           'system_to_descriptor']


class NikishinSystem:
    """Generator chain ``sigma_offset, ..., sigma_{offset+m}``.

    Chains are addressed with absolute generator indices. ``s(j, k)`` is
    ``<sigma_j, ..., sigma_k>`` for ``j <= k`` and the reversed chain
    ``<sigma_j, sigma_{j-1}, ..., sigma_k>`` for ``j > k``. Both are built
    as a base generator weighted by the transform of the shorter chain.

    Parameters
    ----------
    generators : sequence of Measure
    offset : int
        Absolute index of the first generator (0 for full systems, 1 for the
        tails ``N(sigma_1, ..., sigma_m)`` used in the reduction algebra).
    """

    def __init__(self, generators, offset=0):
        gens = list(generators)
        if not gens:
            raise InputError("a Nikishin system needs at least one generator")
        for g in gens:
            if not isinstance(g, Measure):
                raise InputError("generators must be Measure instances")
        for i in range(len(gens) - 1):
            if not gens[i].hull.disjoint(gens[i + 1].hull):
                a, b = i + offset, i + 1 + offset
                raise AdjacentOverlap(
                    f"generators {a} and {b} have intersecting hulls")
        self.generators = tuple(gens)
        self.offset = int(offset)
        self._cache = {}

    @property
    def m(self):
        """Index of the last generator."""
        return self.offset + len(self.generators) - 1

    def sigma(self, j):
        if not self.offset <= j <= self.m:
            raise IndexError(f"generator {j} outside {self.offset}..{self.m}")
        return self.generators[j - self.offset]

    def s(self, j, k):
        """Chain measure ``s_{j,k}``."""
        key = (j, k)
        if key in self._cache:
            return self._cache[key]
        if j == k:
            out = self.sigma(j)
        else:
            step = 1 if k > j else -1
            inner = self.s(j + step, k)
            out = product(self.sigma(j), inner, label=f"s{j},{k}")
        self._cache[key] = out
        return out

    def markov(self, j, k, z):
        return markov_function(self, j, k, z)

    def tail(self):
        """The system ``N(sigma_{offset+1}, ...)``."""
        if len(self.generators) < 2:
            raise InputError("system has no tail")
        return NikishinSystem(self.generators[1:], offset=self.offset + 1)

    def __len__(self):
        return len(self.generators)

    def __repr__(self):
        hulls = ', '.join(f"[{g.hull.a:g},{g.hull.b:g}]"
                          for g in self.generators)
        return f"NikishinSystem(offset={self.offset}, {hulls})"


def build(generators, offset=0):
    """Nikishin system generated by ``generators``."""
    return NikishinSystem(generators, offset=offset)


def markov_function(sys, j, k, z):
    """``s_{j,k}^(z)`` (``j <= k``), by quadrature on ``sigma_j``."""
    if j > k:
        raise InputError("markov_function expects j <= k")
    return sys.s(j, k).cauchy(z)


class MixedSystem:
    """Two Nikishin systems sharing the base measure object ``sigma_0``."""

    def __init__(self, S1, S2):
        if S1.offset != 0 or S2.offset != 0:
            raise ValidationError("mixed systems need full systems")
        if S1.sigma(0) is not S2.sigma(0):
            raise ValidationError("both systems must share the same base "
                                  "measure sigma_0")
        self.S1 = S1
        self.S2 = S2

    @property
    def m1(self):
        return self.S1.m

    @property
    def m2(self):
        return self.S2.m

    @property
    def sigma0(self):
        return self.S1.sigma(0)

    def row_functions(self, x):
        """``(1, s2_{1,1}(x), ..., s2_{1,m2}(x))`` as columns of an array."""
        return _transform_columns(self.S2, x)

    def column_functions(self, x):
        return _transform_columns(self.S1, x)

    def __repr__(self):
        return f"MixedSystem(m1={self.m1}, m2={self.m2})"


def _transform_columns(S, x):
    x = numpy.atleast_1d(numpy.asarray(x))
    out = numpy.ones((x.size, S.m + 1), dtype=numpy.result_type(x, float))
    for k in range(1, S.m + 1):
        out[:, k] = S.s(1, k).cauchy(x)
    return out


def mixed_weight_matrix(mix, x):
    """``W(x) = U(x)^t V(x)``, an ``(m2+1) x (m1+1)`` rank-one matrix."""
    u = mix.row_functions(numpy.array([x], dtype=float))[0]
    v = mix.column_functions(numpy.array([x], dtype=float))[0]
    return numpy.outer(u, v)


def system_from_descriptor(d):
    """Build a :class:`MixedSystem` from a config mapping.

    Either ``sigma0`` holds the base record and ``S1``/``S2`` list the
    generators ``1..m`` of each side, or ``S1``/``S2`` both start with the
    base record, in which case the two base records must coincide.
    """
    if not isinstance(d, dict) or not ('S1' in d or 'S2' in d
                                       or 'sigma0' in d):
        raise InputError("system descriptor needs 'sigma0' and/or "
                         "'S1', 'S2' lists")
    recs = {}
    for key in ('S1', 'S2'):
        r = d.get(key, [])
        if not isinstance(r, list):
            raise InputError(f"{key} must be a list of measure records")
        recs[key] = list(r)
    if 'sigma0' in d:
        base_rec = d['sigma0']
    else:
        if not recs['S1'] or not recs['S2']:
            raise InputError("without 'sigma0', S1 and S2 must both start "
                             "with the base measure")
        if recs['S1'][0] != recs['S2'][0]:
            raise ValidationError("S1 and S2 declare different base "
                                  "measures")
        base_rec = recs['S1'][0]
        recs = {k: v[1:] for k, v in recs.items()}
    base = measure_from_descriptor(base_rec)
    sides = [NikishinSystem([base] + [measure_from_descriptor(r)
                                      for r in recs[k]])
             for k in ('S1', 'S2')]
    return MixedSystem(*sides)


def system_to_descriptor(mix):
    """Inverse of :func:`system_from_descriptor` (``sigma0`` form)."""
    return {'sigma0': mix.sigma0.descriptor(),
            'S1': [g.descriptor() for g in mix.S1.generators[1:]],
            'S2': [g.descriptor() for g in mix.S2.generators[1:]]}
