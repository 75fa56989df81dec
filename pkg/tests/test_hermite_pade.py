import math

import numpy
import pytest
from numpy.polynomial import legendre

from nikishin_lab.demos import load_demo
from nikishin_lab.errors import InputError, ZeroCountMismatch
from nikishin_lab.hermite_pade import (MixedForm, MultiIndex2, at_zero_count,
                                       monic_index, monic_normalize,
                                       normality_scan, orthogonality_residuals,
                                       remainder, solve_mixed, type2_pade,
                                       zeros_in_hull)
from nikishin_lab.measures import lebesgue
from nikishin_lab.nikishin import build

X60, W60 = legendre.leggauss(60)


def _s_23(x):
    """Transform of Lebesgue[2,3] at real x < 2."""
    return numpy.log((x - 2) / (x - 3))


def _poly_values(form, x):
    return [p(x) if len(c) else numpy.zeros_like(x)
            for p, c in zip(form.polys(), form.coeffs)]


# -------
# Oracles
# -------

def test_legendre_q2():
    Q, _, _ = type2_pade(load_demo('m0').S2, (2,))
    x = numpy.linspace(-1, 1, 7)
    numpy.testing.assert_allclose(Q(x), x ** 2 - 1 / 3, atol=1e-13)


def test_no_constraints_constant_form():
    form = solve_mixed(load_demo('10'), MultiIndex2((1, 0), (0,)))
    assert len(form.coeffs[0]) == 1 and form.coeffs[0][0] != 0
    assert len(form.coeffs[1]) == 0


def test_brute_force_two_by_three():
    """Type I form on the (1,0) demo at n1 = (2,1), n2 = (2,)."""
    mix = load_demo('10')
    form = solve_mixed(mix, MultiIndex2((2, 1), (2,)))
    x, w = X60, W60
    cols = [x ** 0, x, _s_23(x)]
    M = numpy.array([[numpy.sum(w * x ** nu * c) for c in cols] for nu in range(2)])
    null = numpy.linalg.svd(M)[2][-1]
    xs = numpy.linspace(-0.9, 0.9, 11)
    a0, a1 = _poly_values(form, xs)
    ours = numpy.concatenate([a0, a1])
    ref = numpy.concatenate([null[0] + null[1] * xs, null[2] * numpy.ones_like(xs)])
    cos = abs(ours @ ref) / (numpy.linalg.norm(ours) * numpy.linalg.norm(ref))
    assert 1 - cos < 1e-9


def test_monic_index_last_min():
    assert monic_index((2, 1, 1)) == 2


def test_monic_index_strict_min():
    assert monic_index((1, 2, 2)) == 0


def test_monic_m0_scaling():
    form = monic_normalize(solve_mixed(load_demo('m0'), MultiIndex2((4,), (3,))))
    assert form.leading_coefficient(0) == pytest.approx(1.0, rel=1e-13)


def test_scan_m0_all_normal():
    reps = normality_scan(load_demo('m0'), 9)
    assert len(reps) == 9 and all(r.normal for r in reps)


def test_scan_01_all_normal():
    reps = normality_scan(load_demo('01'), 7)
    assert all(r.normal for r in reps)


def test_scan_count_10():
    assert len(normality_scan(load_demo('10'), 3)) == 9


def test_remainder_leading_laurent_coefficient():
    _, _, form = type2_pade(load_demo('m0').S2, (2,))
    z = 1e3
    assert (z ** 3 * remainder(form, 0, z)).real == pytest.approx(8 / 45, rel=1e-5)


def test_remainder_decay_order():
    _, _, form = type2_pade(load_demo('01').S2, (2, 2))
    for j, nj in enumerate((2, 2)):
        r1 = abs(remainder(form, j, 50.0)) * 50.0 ** nj
        r2 = abs(remainder(form, j, 100.0)) * 100.0 ** nj
        assert r2 < 0.6 * r1


def test_remainder_conjugate_symmetry():
    form = solve_mixed(load_demo('11'), MultiIndex2((2, 2), (2, 1)))
    z = 1.5 + 2j
    assert remainder(form, 1, z.conjugate()) == pytest.approx(numpy.conj(remainder(form, 1, z)), abs=1e-14)


def test_zeros_legendre():
    _, _, form = type2_pade(load_demo('m0').S2, (2,))
    numpy.testing.assert_allclose(zeros_in_hull(form), [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-12)


def test_zeros_empty():
    form = solve_mixed(load_demo('10'), MultiIndex2((1, 0), (0,)))
    assert len(zeros_in_hull(form)) == 0


def test_zeros_inside_open_hull():
    form = solve_mixed(load_demo('11'), MultiIndex2((3, 3), (3, 2)))
    z = zeros_in_hull(form)
    assert len(z) == 5 and numpy.all((z > -1) & (z < 1)) and numpy.all(numpy.diff(z) > 0)


def test_type2_m0_is_classical_pade():
    S = load_demo('m0').S2
    Q, P, _ = type2_pade(S, (3,))
    z = numpy.array([2.0, 3j, -1.5 + 0.5j])
    exact = numpy.log((z + 1) / (z - 1))
    # Pade error is O(z^{-2n-1}) relative to Q
    err = abs(Q(z) * exact - P[0](z))
    assert numpy.all(err < 2 * numpy.abs(z) ** -3.0)


def test_type2_numerator_degree():
    Q, P, _ = type2_pade(load_demo('01').S2, (3, 2))
    for p in P:
        c = p.convert(domain=[-1, 1], window=[-1, 1]).coef
        assert len(c) == 5 and abs(c[-1]) > 1e-8


def test_type2_converges_at_three():
    S = load_demo('01').S2
    target = S.s(0, 1).cauchy(3.0)
    errs = []
    for N in (2, 4, 6, 8):
        n = (N // 2, N // 2)
        Q, P, _ = type2_pade(S, n)
        errs.append(abs(P[1](3.0) / Q(3.0) - target))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_at_zero_count_m0():
    assert at_zero_count(None, (3,), trials=50) <= 2


def test_at_zero_count_11():
    tail = build([lebesgue(2, 3)], offset=1)
    assert at_zero_count(tail, (1, 1), trials=50) <= 1


def test_at_zero_count_22():
    tail = build([lebesgue(2, 3)], offset=1)
    assert at_zero_count(tail, (2, 2), trials=200) <= 3


# ----------
# Properties
# ----------

@pytest.mark.parametrize('demo,n1,n2', [('01', (5,), (2, 2)), ('10', (2, 3), (4,)),
                                        ('11', (3, 2), (2, 2)), ('02', (6,), (2, 2, 1))])
def test_orthogonality_residuals(demo, n1, n2):
    form = solve_mixed(load_demo(demo), MultiIndex2(n1, n2))
    assert max(r.max() if r.size else 0 for r in orthogonality_residuals(form)) < 1e-8


def test_uniqueness_against_permuted_rows():
    mix = load_demo('10')
    form = solve_mixed(mix, MultiIndex2((2, 2), (3,)))
    x, w = X60, W60
    cols = [x ** 0, x, _s_23(x), x * _s_23(x)]
    M = numpy.array([[numpy.sum(w * x ** nu * c) for c in cols] for nu in (2, 0, 1)])
    null = numpy.linalg.svd(M)[2][-1]
    xs = numpy.linspace(-0.9, 0.9, 9)
    ours = numpy.concatenate(_poly_values(form, xs))
    ref = numpy.concatenate([null[0] + null[1] * xs, null[2] + null[3] * xs])
    cos = abs(ours @ ref) / (numpy.linalg.norm(ours) * numpy.linalg.norm(ref))
    assert 1 - cos < 1e-8


def test_degree_attainment():
    for r in normality_scan(load_demo('11'), 5):
        assert r.achieved_degrees == [v - 1 for v in r.multi_index.n1]


def test_zero_interlacing_m0_diagonal():
    S = load_demo('01').S2
    prev = None
    for N in range(2, 9):
        n = ((N + 1) // 2, N // 2)
        z = zeros_in_hull(type2_pade(S, n)[2])
        if prev is not None:
            assert numpy.all((z[:-1] < prev) & (prev < z[1:]))
        prev = z


def test_brute_force_equivalence_small():
    mix = load_demo('10')
    x, w = X60, W60
    for n1 in ((1, 1), (2, 1), (1, 2), (3, 1), (2, 2)):
        n2 = (sum(n1) - 1,)
        form = solve_mixed(mix, MultiIndex2(n1, n2))
        cols = [x ** i for i in range(n1[0])] + [x ** i * _s_23(x) for i in range(n1[1])]
        M = numpy.array([[numpy.sum(w * x ** nu * c) for c in cols] for nu in range(n2[0])])
        null = numpy.linalg.svd(M)[2][-1]
        xs = numpy.linspace(-0.9, 0.9, 9)
        ours = numpy.concatenate(_poly_values(form, xs))
        ref = numpy.concatenate([numpy.polyval(null[:n1[0]][::-1], xs),
                                 numpy.polyval(null[n1[0]:][::-1], xs)])
        cos = abs(ours @ ref) / (numpy.linalg.norm(ours) * numpy.linalg.norm(ref))
        assert 1 - cos < 1e-8, n1


# ------
# Errors
# ------

def test_size_mismatch_rejected():
    with pytest.raises(InputError):
        solve_mixed(load_demo('11'), MultiIndex2((2, 2), (2, 2)))


def test_wrong_zero_count_detected():
    mix = load_demo('m0')
    fake = MixedForm([numpy.array([1.0, 0.0, 0.0, 0.0, 1.0])], mix, MultiIndex2((5,), (4,)))
    with pytest.raises(ZeroCountMismatch):
        zeros_in_hull(fake)
