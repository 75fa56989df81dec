import math

import numpy
import pytest

from nikishin_lab.demos import load_demo
from nikishin_lab.equilibrium import (G_function, TOL_EQ, arcsine_cell_masses,
                                      build_interaction, equilibrium_residual,
                                      nth_root_compare, period_step,
                                      ratio_experiment, solve_vector_equilibrium,
                                      system_supports, tv_distance)
from nikishin_lab.errors import BadProbabilityVector, IndefiniteInteraction
from nikishin_lab.hermite_pade import MultiIndex2
from nikishin_lab.measures import Interval

LN2 = math.log(2)


@pytest.fixture(scope='module')
def arcsine():
    return solve_vector_equilibrium(build_interaction((1.0,), (1.0,)), [Interval(-1, 1)], grid=256)


def _mass_between(mu, a, b):
    lo = numpy.clip(mu.edges_left, a, b)
    hi = numpy.clip(mu.edges_right, a, b)
    return float(numpy.sum(mu.masses * (hi - lo) / mu.widths))


# -------
# Oracles
# -------

def test_interaction_m0():
    numpy.testing.assert_array_equal(build_interaction((1.0,), (1.0,)).matrix, [[1.0]])


def test_interaction_m10_half():
    C = build_interaction((0.5, 0.5), (1.0,))
    assert C.labels == [0, 1]
    numpy.testing.assert_allclose(C.matrix, [[1.0, -0.25], [-0.25, 0.25]], atol=1e-15)


def test_interaction_flags():
    C = build_interaction((0.3, 0.7), (0.2, 0.5, 0.3))
    assert C.symmetric and C.psd and C.min_eigenvalue >= -1e-10


def test_arcsine_central_mass(arcsine):
    assert _mass_between(arcsine.measure(0), -0.5, 0.5) == pytest.approx(1 / 3, abs=5e-3)


def test_arcsine_robin_constant(arcsine):
    assert arcsine.constant(0) == pytest.approx(LN2, abs=1e-3)


def test_scaling_shifts_constant_by_ln2(arcsine):
    sol = solve_vector_equilibrium(numpy.eye(1), [Interval(-2, 2)], grid=256)
    assert sol.constant(0) == pytest.approx(arcsine.constant(0) - LN2, abs=1e-6)


def test_constant_field_shift(arcsine):
    sol = solve_vector_equilibrium(numpy.eye(1), [Interval(-1, 1)], grid=256,
                                   fields=[lambda x: 0.3 + 0 * x])
    assert sol.constant(0) == pytest.approx(arcsine.constant(0) + 0.3, abs=1e-9)
    assert tv_distance(sol.measure(0).masses, arcsine.measure(0).masses) < 1e-6


def test_G_m0_closed_form(arcsine):
    assert G_function(arcsine, 2.0) == pytest.approx((2 + math.sqrt(3)) / 2, rel=1e-3)


def test_G_conjugate_symmetry(arcsine):
    z = 0.4 + 1.3j
    assert G_function(arcsine, z) == pytest.approx(G_function(arcsine, z.conjugate()), rel=1e-14)


def test_G_growth(arcsine):
    z = 1e3
    assert G_function(arcsine, z) / z == pytest.approx(1.0, rel=1e-3)


def test_nth_root_m0_at_two():
    mix = load_demo('m0')
    ray = [MultiIndex2((n + 1,), (n,)) for n in (8, 16)]
    sizes, gaps, G = nth_root_compare(mix, ray, [2.0], grid=256, root='n2')
    assert gaps[-1, 0] < 0.02


def test_nth_root_large_real_probe():
    mix = load_demo('m0')
    ray = [MultiIndex2((n + 1,), (n,)) for n in (4, 8)]
    _, gaps, _ = nth_root_compare(mix, ray, [1e3], grid=128, root='n2')
    assert gaps[-1, 0] < 1e-3


def test_nth_root_01_decreasing():
    mix = load_demo('01')
    ray = [MultiIndex2((2 * k + 1,), (k, k)) for k in (2, 4, 6)]
    _, gaps, _ = nth_root_compare(mix, ray, [2.5j, -2.0], grid=256)
    assert numpy.all(numpy.diff(gaps, axis=0) < 0)


def test_ratio_m0_at_three():
    mix = load_demo('m0')
    r = ratio_experiment(mix, MultiIndex2((12,), (11,)), 6, [3.0], step=((1,), (1,)),
                         normalization='orthonormal')
    assert r['ratios'][-1, 0].real == pytest.approx(3 + 2 * math.sqrt(2), rel=1e-2)


def test_ratio_01_differences_decrease():
    mix = load_demo('01')
    r = ratio_experiment(mix, MultiIndex2((7,), (3, 3)), 4, [2.5j, -2.0], step=((2,), (1, 1)))
    assert numpy.all(numpy.diff(r['differences'], axis=0) < 0)


def test_period_step_10():
    assert period_step(1, 0) == ((1, 1), (2,))


# ----------
# Properties
# ----------

def test_energy_monotone(arcsine):
    e = numpy.asarray(arcsine.energies)
    assert numpy.all(numpy.diff(e) <= 1e-14 * abs(e[0]))


def test_masses_on_simplex(arcsine):
    mu = arcsine.measure(0)
    assert abs(mu.masses.sum() - 1) < 1e-12 and numpy.all(mu.masses >= 0)


def test_residual_halves_under_refinement():
    C = build_interaction((1.0,), (1.0,))
    r = [equilibrium_residual(solve_vector_equilibrium(C, [Interval(-1, 1)], grid=g)) for g in (128, 256)]
    assert r[0] <= TOL_EQ * 4
    assert r[1] <= 0.6 * r[0]


def test_arcsine_tv(arcsine):
    mu = arcsine.measure(0)
    assert tv_distance(mu.masses, arcsine_cell_masses(mu)) < 2e-2


def test_two_initializations_agree():
    mix = load_demo('01')
    C = build_interaction((1.0,), (0.5, 0.5))
    sup = system_supports(mix)
    a = solve_vector_equilibrium(C, sup, grid=128, seed=1)
    b = solve_vector_equilibrium(C, sup, grid=128, seed=2)
    assert abs(a.energy - b.energy) < 1e-6
    for j in a.labels:
        assert tv_distance(a.measure(j).masses, b.measure(j).masses) < 1e-2


def test_scalar_weighted_norm_root():
    """Orthonormal-scaled Legendre norms: ||Q_n||^(1/n) -> exp(-w) = 1/2."""
    from nikishin_lab.hermite_pade import type2_pade
    from nikishin_lab.measures import integrate
    S = load_demo('m0').S2
    Q, _, _ = type2_pade(S, (16,))
    norm = math.sqrt(integrate(S.sigma(0), lambda x: Q(x) ** 2))
    assert norm ** (1 / 16) == pytest.approx(math.exp(-LN2), rel=0.05)


# ------
# Errors
# ------

@pytest.mark.parametrize('p', [(0.5, 0.6), (1.2, -0.2), (0.5,), (0.0, 1.0)])
def test_bad_probability_vector(p):
    with pytest.raises(BadProbabilityVector):
        build_interaction(p, (1.0,))


def test_indefinite_interaction():
    with pytest.raises(IndefiniteInteraction):
        solve_vector_equilibrium(numpy.array([[1.0, 2.0], [2.0, 1.0]]),
                                 [Interval(-1, 1), Interval(2, 3)], grid=16)
