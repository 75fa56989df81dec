import math

import numpy
import pytest

from nikishin_lab.demos import load_demo
from nikishin_lab.errors import PointOnSupport
from nikishin_lab.measures import Interval
from nikishin_lab.simquad import (build_rule, delta_K, diagonal_indices,
                                  exactness_test, integrate_simultaneously,
                                  markov_rate, phi_t)

SQ = 1 / math.sqrt(3)


@pytest.fixture(scope='module')
def s_m0():
    return load_demo('m0').S2


@pytest.fixture(scope='module')
def s_m1():
    return load_demo('01').S2


# -------
# Oracles
# -------

def test_m0_is_gauss_legendre(s_m0):
    rule = build_rule(s_m0, (2,))
    numpy.testing.assert_allclose(rule.nodes, [-SQ, SQ], atol=1e-12)
    numpy.testing.assert_allclose(rule.weights[0], [1, 1], atol=1e-12)


def test_weights_sum_to_masses(s_m1):
    rule = build_rule(s_m1, (3, 4))
    for k in range(2):
        assert rule.weights[k].sum() == pytest.approx(s_m1.s(0, k).mass, rel=1e-12)


def test_sign_pattern_12(s_m1):
    rule = build_rule(s_m1, (1, 2))
    for k in range(2):
        assert numpy.all(numpy.sign(rule.weights[k]) == numpy.sign(s_m1.s(0, k).mass))


def test_exactness_degree_zero(s_m1):
    _, table = exactness_test(build_rule(s_m1, (2, 3)), s_m1, return_table=True)
    assert all(rel < 1e-13 for k, d, _, _, rel in table if d == 0)


def test_parity_degree_three(s_m0):
    rule = build_rule(s_m0, (2,))
    assert abs(integrate_simultaneously(rule, lambda x: x ** 3)[0]) < 1e-15


def test_negative_control_degree_four(s_m0):
    rule = build_rule(s_m0, (2,))
    q = integrate_simultaneously(rule, lambda x: x ** 4)[0]
    assert q == pytest.approx(2 / 9, abs=1e-13)
    assert abs(q - 2 / 5) > 0.1


def test_exp_m0_target(s_m0):
    rule = build_rule(s_m0, (6,))
    assert integrate_simultaneously(rule, numpy.exp)[0] == pytest.approx(math.e - 1 / math.e, abs=1e-10)


def test_abs_converges_slowly(s_m0):
    errs = [abs(integrate_simultaneously(build_rule(s_m0, (n,)), numpy.abs)[0] - 1) for n in (4, 8, 16)]
    assert errs[2] < errs[0] and errs[2] > 1e-8


def test_constant_gives_masses(s_m1):
    rule = build_rule(s_m1, (4, 4))
    numpy.testing.assert_allclose(integrate_simultaneously(rule, numpy.ones_like),
                                  [s_m1.s(0, 0).mass, s_m1.s(0, 1).mass], rtol=1e-12)


def test_phi_infinity_at_three():
    assert abs(phi_t(Interval(-1, 1), None, 3.0)) == pytest.approx(1 / (3 + 2 * math.sqrt(2)), rel=1e-14)


def test_phi_vanishes_at_t():
    h = Interval(-1, 1)
    for t in (2.0, -3.5, 1.25):
        assert abs(phi_t(h, t, t)) < 1e-14


def test_phi_positive_derivative_at_t():
    h, t, eps = Interval(-1, 1), 2.5, 1e-6
    d = (phi_t(h, t, t + eps) - phi_t(h, t, t - eps)) / (2 * eps)
    assert abs(d.imag) < 1e-8 and d.real > 0


def test_phi_boundary_modulus():
    h = Interval(-1, 1)
    z = numpy.array([0.3 + 1e-7j, -0.9 - 1e-7j, 1.0 + 1e-7j])
    numpy.testing.assert_allclose(numpy.abs(phi_t(h, 3.0, z)), 1, atol=1e-3)


def test_phi_rejects_hull_point():
    with pytest.raises(PointOnSupport):
        phi_t(Interval(-1, 1), None, 0.5)


def test_m0_markov_rate_control(s_m0):
    rep = markov_rate(s_m0, [(n,) for n in (6, 12, 18)], probes=[3.0])
    assert rep.roots[-1, 0] == pytest.approx(1 / (3 + 2 * math.sqrt(2)), rel=0.05)


def test_rate_decreasing_along_diagonal(s_m1):
    rep = markov_rate(s_m1, diagonal_indices(1, 12, 2))
    assert numpy.all(rep.errors[-1] < rep.errors[0])


# ----------
# Properties
# ----------

@pytest.mark.parametrize('n', [(1, 1), (2, 3), (4, 3), (5, 6)])
def test_nodes_inside_and_increasing(s_m1, n):
    rule = build_rule(s_m1, n)
    assert len(rule.nodes) == sum(n)
    assert numpy.all(numpy.diff(rule.nodes) > 0)
    assert numpy.all((rule.nodes > -1) & (rule.nodes < 1))


@pytest.mark.parametrize('n', [1, 2, 3, 4])
def test_weight_sign_invariant(s_m1, n):
    rule = build_rule(s_m1, (n, n + 1))
    for k in range(2):
        assert numpy.all(numpy.sign(rule.weights[k]) == numpy.sign(s_m1.s(0, k).mass))


@pytest.mark.parametrize('n', [(3, 3), (2, 5), (5, 1), (4, 4)])
def test_exactness_invariant(s_m1, n):
    assert exactness_test(build_rule(s_m1, n), s_m1) < 1e-8


def test_phi_affine_invariance():
    rng = numpy.random.default_rng(11)
    for _ in range(20):
        a, s = rng.uniform(-3, 3), rng.uniform(0.2, 4)
        t = rng.choice([-1, 1]) * rng.uniform(1.1, 4)
        z = complex(rng.uniform(-4, 4), rng.uniform(0.1, 3))
        ref = abs(phi_t(Interval(-1, 1), t, z))
        moved = abs(phi_t(Interval(a - s, a + s), a + s * t, a + s * z))
        assert moved == pytest.approx(ref, rel=1e-12)


def test_delta_K_below_one(s_m1):
    d, per = delta_K(Interval(-1, 1), Interval(2, 3), [3j, -2.0, 1.5 + 0.5j])
    assert 0 < d < 1 and len(per) == 3


def test_diagonal_indices_balanced():
    assert diagonal_indices(1, 5) == [(1, 0), (1, 1), (2, 1), (2, 2), (3, 2)]
