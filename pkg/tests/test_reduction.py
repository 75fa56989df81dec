import itertools

import numpy
import pytest
from numpy.polynomial import Polynomial

from nikishin_lab.demos import load_demo
from nikishin_lab.errors import ClaimViolation, PreconditionViolated
from nikishin_lab.hermite_pade import MultiIndex2, orthogonality_residuals, solve_mixed
from nikishin_lab.measures import lebesgue
from nikishin_lab.nikishin import NikishinSystem
from nikishin_lab.reduction import (DEFAULT_PROBES, IDENTITY_IDS, default_case,
                                    form_scale, form_value, identity_sides,
                                    lemma3_reduced_zero_check, lemma4_transform,
                                    theorem3_reduce, theorem4_check,
                                    verify_identity)

IVS = [(-1.0, 1.0), (2.0, 3.0), (-4.0, -3.0)]
PROBES = numpy.array(DEFAULT_PROBES)


def _tail(m):
    return NikishinSystem([lebesgue(*IVS[i]) for i in range(m)], offset=1)


def _random_polys(n, rng):
    return [Polynomial(rng.uniform(-1, 1, nk)) if nk else Polynomial([0.0]) for nk in n]


def _lemma4_residual(tail, res, p):
    lhs = form_value(tail, p, PROBES)
    rhs = form_value(res.system_star, res.coeff_map(p), PROBES) * res.factor.cauchy(PROBES)
    return numpy.max(numpy.abs(lhs - rhs) / form_scale(tail, p, PROBES))


def _theorem3_residual(tail, red, p):
    lhs = form_value(tail, p, PROBES)
    q = red.coeff_map(p)
    rhs = form_value(red.system, q, PROBES)
    if red.factor is not None:
        rhs = rhs * red.factor.cauchy(PROBES)
    return numpy.max(numpy.abs(lhs - rhs) / form_scale(tail, p, PROBES))


# -------
# Oracles
# -------

def test_p21_residual():
    assert verify_identity(default_case('P21'), probes=[5 + 2j]) < 1e-8


def test_p23_constant_term():
    lhs, _, const = identity_sides(default_case('P23'))
    b = default_case('P23').bindings
    from nikishin_lab.measures import product
    expected = product(b['alpha'], b['beta']).mass / b['alpha'].mass
    assert const == pytest.approx(expected, rel=1e-12)
    assert complex(lhs(1e6)) == pytest.approx(expected, rel=1e-4)


def test_shirenu_double_nesting():
    assert verify_identity(default_case('SHIRENU')) < 1e-6


def test_lemma4_j1():
    tail = _tail(2)
    res = lemma4_transform(tail, (1, 2, 0), 1)
    assert res.n_star == (2, 1, 0)
    assert res.permutation == (1, 0, 2)
    rng = numpy.random.default_rng(3)
    assert _lemma4_residual(tail, res, _random_polys((1, 2, 0), rng)) < 1e-7


def test_lemma4_rejects_nonmax_j():
    with pytest.raises(PreconditionViolated):
        lemma4_transform(_tail(2), (3, 1, 1), 1)


def test_lemma4_j2_branch_a():
    tail = _tail(3)
    n = (2, 1, 3, 0)
    res = lemma4_transform(tail, n, 2)
    assert res.n_star == (3, 2, 1, 0)
    rng = numpy.random.default_rng(4)
    assert _lemma4_residual(tail, res, _random_polys(n, rng)) < 1e-7


def test_theorem3_identity_on_decreasing():
    tail = _tail(2)
    red = theorem3_reduce(tail, (3, 2, 1))
    assert red.permutation == (0, 1, 2)
    assert red.system is tail and red.factor is None


def test_theorem3_swap():
    tail = _tail(1)
    red = theorem3_reduce(tail, (1, 2))
    assert red.permutation == (1, 0)
    assert red.factor is tail.s(1, 1)
    assert len(red.system.generators) == 1


def test_theorem3_m2_residual():
    tail = _tail(2)
    red = theorem3_reduce(tail, (1, 2, 1))
    rng = numpy.random.default_rng(5)
    assert _theorem3_residual(tail, red, _random_polys((1, 2, 1), rng)) < 1e-7


def test_theorem4_identity_permutation():
    mix = load_demo('11')
    n = MultiIndex2((2, 2), (2, 1))
    form = solve_mixed(mix, n)
    out = theorem4_check(mix, n, form)
    assert out['permutation'] == (0, 1)
    assert out['max'] < 1e-8
    assert max(r.max() for r in orthogonality_residuals(form)) < 1e-8


def test_theorem4_needs_reordering():
    mix = load_demo('11')
    n = MultiIndex2((1, 1), (0, 1))
    out = theorem4_check(mix, n, solve_mixed(mix, n))
    assert out['permutation'] == (1, 0) and out['max'] < 1e-8


def test_lemma3_m0():
    ok, best = lemma3_reduced_zero_check(None, (3,))
    assert ok and best <= 2


def test_lemma3_21():
    ok, best = lemma3_reduced_zero_check(_tail(1), (2, 1))
    assert ok and best <= 2


def test_lemma3_11():
    ok, best = lemma3_reduced_zero_check(_tail(1), (1, 1))
    assert ok and best <= 1


# ----------
# Properties
# ----------

@pytest.mark.parametrize('cid', IDENTITY_IDS)
def test_identity_suite(cid):
    verify_identity(default_case(cid), strict=True)


def test_strict_identity_raises():
    with pytest.raises(ClaimViolation):
        verify_identity(default_case('P21'), tol=0.0, strict=True)


@pytest.mark.parametrize('m', [1, 2, 3])
def test_lemma4_multiset_and_degrees(m):
    tail = _tail(m)
    for n in itertools.product(range(4), repeat=m + 1):
        j = next((j for j in range(1, m + 1) if n[j] == max((n[0] + 1,) + n[1:])), None)
        if j is None:
            continue
        res = lemma4_transform(tail, n, j)
        assert sorted(res.n_star) == sorted(n)
        q = res.coeff_map(_random_polys(n, numpy.random.default_rng(0)))
        for qk, nk in zip(q, res.n_star):
            assert len(qk.trim().coef) <= max(nk, 1)


def test_theorem3_sorted_and_degrees():
    tail = _tail(3)
    rng = numpy.random.default_rng(7)
    for n in [(0, 2, 1, 3), (1, 1, 3, 2), (2, 3, 3, 1), (0, 0, 0, 1)]:
        red = theorem3_reduce(tail, n)
        ns = red.n_sorted
        assert all(a >= b for a, b in zip(ns, ns[1:]))
        p = _random_polys(n, rng)
        for qk, k in zip(red.coeff_map(p), red.permutation):
            assert len(qk.trim().coef) <= max(n[k], 1)
        assert _theorem3_residual(tail, red, p) < 1e-7


def test_canonical_tie_rule():
    red = theorem3_reduce(_tail(3), (1, 2, 2, 0))
    assert red.permutation == (1, 2, 0, 3)
