import math

import numpy
import pytest

from nikishin_lab.demos import DEMOS, demo_descriptor, load_demo
from nikishin_lab.errors import AdjacentOverlap, InputError, ValidationError
from nikishin_lab.measures import WeightedInterval, cauchy_transform, lebesgue
from nikishin_lab.nikishin import (MixedSystem, build, markov_function,
                                   mixed_weight_matrix, system_from_descriptor,
                                   system_to_descriptor)


def _three():
    return build([lebesgue(-1, 1), lebesgue(2, 3), WeightedInterval((-4, -3), alpha=0.5)])


# -------
# Oracles
# -------

def test_single_generator_chain_is_generator():
    s0 = lebesgue(-1, 1)
    assert build([s0]).s(0, 0) is s0


def test_s01_mass_closed_form():
    S = build([lebesgue(-1, 1), lebesgue(2, 3)])
    assert abs(S.s(0, 1).mass) == pytest.approx(math.log(64 / 27), abs=1e-12)


def test_adjacent_overlap():
    with pytest.raises(AdjacentOverlap):
        build([lebesgue(-1, 1), lebesgue(0, 2)])


def test_markov_diagonal_is_cauchy():
    S = _three()
    z = 0.5 + 2j
    assert markov_function(S, 1, 1, z) == pytest.approx(cauchy_transform(S.sigma(1), z), abs=1e-15)


def test_markov_far_point_mass():
    S = _three()
    z = 1e6
    assert (z * markov_function(S, 0, 1, z)).real == pytest.approx(S.s(0, 1).mass, rel=1e-4)


def test_markov_nested_quadrature():
    S = build([lebesgue(-1, 1), lebesgue(2, 3)])
    z = 5 + 1j
    x, w = numpy.polynomial.legendre.leggauss(60)
    inner = numpy.log((x - 2) / (x - 3))
    direct = numpy.sum(w * inner / (z - x))
    assert abs(markov_function(S, 0, 1, z) - direct) < 1e-9


def test_weight_matrix_m0():
    mix = load_demo('m0')
    numpy.testing.assert_array_equal(mixed_weight_matrix(mix, 0.3), [[1.0]])


def test_weight_matrix_rank_one_and_entry():
    mix = load_demo('11')
    x = 0.25
    W = mixed_weight_matrix(mix, x)
    assert W.shape == (2, 2) and W[0, 0] == 1.0
    sv = numpy.linalg.svd(W, compute_uv=False)
    assert sv[1] <= 1e-14 * sv[0]
    direct = mix.S2.sigma(1).cauchy(x) * mix.S1.sigma(1).cauchy(x)
    assert W[1, 1] == pytest.approx(direct, rel=1e-14)


# ----------
# Properties
# ----------

def test_shared_support():
    S = _three()
    for k in range(S.m + 1):
        assert S.s(0, k).hull == S.sigma(0).hull


def test_constant_sign_on_base():
    S = _three()
    x = numpy.linspace(-1, 1, 512)
    for k in (1, 2):
        v = S.s(1, k).cauchy(x)
        assert numpy.all(v > 0) or numpy.all(v < 0)


def test_cache_coherence_with_flattened_chain():
    S = _three()
    s1, s2 = S.sigma(1), S.sigma(2)
    x0, w0 = numpy.polynomial.legendre.leggauss(80)
    x1 = 2.5 + 0.5 * numpy.polynomial.legendre.leggauss(80)[0]
    w1 = 0.5 * numpy.polynomial.legendre.leggauss(80)[1]
    inner = s2.cauchy(x1) * w1
    s12 = numpy.array([numpy.sum(inner / (x - x1)) for x in x0])
    assert S.s(0, 2).mass == pytest.approx(numpy.sum(w0 * s12), rel=1e-9)


def test_mixed_system_requires_shared_base():
    with pytest.raises(ValidationError):
        MixedSystem(build([lebesgue(-1, 1)]), build([lebesgue(-1, 1)]))


@pytest.mark.parametrize('name', sorted(DEMOS))
def test_descriptor_round_trip(name):
    mix = load_demo(name)
    again = system_from_descriptor(system_to_descriptor(mix))
    assert (again.m1, again.m2) == (mix.m1, mix.m2)
    assert system_to_descriptor(again) == system_to_descriptor(mix)


def test_descriptor_rejects_garbage():
    with pytest.raises(InputError):
        system_from_descriptor({'bad': 1})
    d = demo_descriptor('11')
    d['S1'][0]['interval'] = [0.0, 2.0]
    with pytest.raises(AdjacentOverlap):
        system_from_descriptor(d)
