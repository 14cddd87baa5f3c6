import math

import numpy as np
import scipy.integrate

from . import kernel_algebra as ka

_ONE = ka.constant()
_X = ka.monomial(1)


def _product(dim=1):
    return ka.CollisionKernel('product', dim,
                              (ka.SeparableTerm(1.0, (_X,) * dim,
                                                (_X,) * dim),))


def _uniform(dim=1):
    return ka.SmoothBreakage(
        'uniform', dim,
        (ka.SeparableTerm(2.0**dim, (_ONE,) * dim, (ka.monomial(-1),) * dim),))


def _literal():
    return ka.SmoothBreakage('tc3_literal', 1, (ka.SeparableTerm(
        1.5, (ka.monomial(0.5),), (ka.monomial(0.5),)),))


def test_eval_collision():
    root = ka.shifted_power(0, 1 / 3)
    poly = ka.CollisionKernel('poly(0)', 1,
                              (ka.SeparableTerm(1.0, (root,), (root,)),))
    const = ka.CollisionKernel('constant', 2,
                               (ka.SeparableTerm(1.0, (_ONE,) * 2,
                                                 (_ONE,) * 2),))
    assert float(ka.eval_collision(_product(), 2, 3)) == 6
    assert math.isclose(float(ka.eval_collision(poly, 8, 27)), 6,
                        rel_tol=1e-14)
    np.testing.assert_array_equal(
        ka.eval_collision(const, [[0.1, 0.2], [1.5, 1.9]], [0.3, 0.4]), [1, 1])
    assert float(ka.eval_collision(_product(2), [1, 2], [3, 4])) == 24


def test_eval_breakage_support():
    np.testing.assert_allclose(ka.eval_breakage(_uniform(), [0.5, 2, 3], 2),
                               [1, 1, 0])
    got = ka.eval_breakage(_uniform(2), [[0.5, 0.5], [0.5, 1.5]], [1, 1])
    np.testing.assert_allclose(got, [4, 0])
    dirac = ka.DiracBreakage('dirac', 1, ((0.4, 1.0), (0.6, 1.0)))
    try:
        ka.eval_breakage(dirac, 0.4, 1)
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Kernel ‘dirac’ has no pointwise values'


def test_multiplicity():
    dirac = ka.DiracBreakage('dirac', 1, ((0.4, 1.0), (0.6, 1.0)))
    # yapf: disable
    tests = [
        ((_uniform(), 0.7), 2.0),
        ((_uniform(), 4.2), 2.0),
        ((dirac, 3.0), 2.0),
        ((_uniform(2), [0.3, 1.7]), 4.0),
        ((_uniform(3), [0.3, 1.7, 1.0]), 8.0),
        ((_literal(), 1.0), 1.0),
    ]
    # yapf: enable
    got = []
    want = []
    for (kernel, y), expected in tests:
        want.append(expected)
        got.append(round(float(ka.multiplicity(kernel, y)), 12))
    assert want == got

    bad = ka.SmoothBreakage('bad', 1, (ka.SeparableTerm(
        1.0, (ka.monomial(-1),), (_ONE,)),))
    try:
        ka.multiplicity(bad, 1.0)
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Non-integrable factor ‘x^-1’ against x^0'


def test_check_hypervolume_conservation():
    dirac = ka.DiracBreakage('dirac', 1, ((0.4, 1.0), (0.6, 1.0)))
    # yapf: disable
    tests = [
        ((_uniform(), 0.3), (True, 0.0)),
        ((_uniform(), 5.0), (True, 0.0)),
        ((dirac, 2.5), (True, 0.0)),
        ((_uniform(2), [1.0, 2.0]), (True, 0.0)),
        ((_literal(), 1.0), (False, -0.4)),
    ]
    # yapf: enable
    got = []
    want = []
    for (kernel, y), expected in tests:
        want.append(expected)
        check = ka.check_hypervolume_conservation(kernel, y)
        got.append((check.passed, round(check.defect, 12)))
    assert want == got


def test_dirac_conservation_iff_unit_first_moment():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ratios = rng.uniform(0.05, 0.95, 3)
        weights = rng.uniform(0.5, 2, 3)
        if rng.uniform() < 0.5:
            weights = weights / np.dot(weights, ratios)
        kernel = ka.DiracBreakage('dirac', 2,
                                  tuple(zip(ratios.tolist(),
                                            weights.tolist())))
        unit = math.isclose(np.dot(weights, ratios), 1, rel_tol=1e-12)
        assert ka.check_hypervolume_conservation(kernel,
                                                 [0.7, 1.3]).passed == unit


def test_dirac_validation():
    # yapf: disable
    tests = [
        (((0.4, 1.0),), 'ok'),
        (((1.0, 1.0),), 'Err: Atom ratio ‘1’ not in (0, 1)'),
        (((0.0, 1.0),), 'Err: Atom ratio ‘0’ not in (0, 1)'),
        (((0.5, 0.0),), 'Err: Non-positive atom weight ‘0’'),
        ((), 'Err: Dirac breakage needs at least one atom'),
    ]
    # yapf: enable
    got = []
    want = []
    for atoms, expected in tests:
        want.append(expected)
        try:
            ka.DiracBreakage('dirac', 1, atoms)
            got.append('ok')
        except ValueError as ex:
            got.append(f'Err: {ex}')
    assert want == got


def test_symmetry_defect():
    bounds = [(1e-9, 5)]
    assert ka.symmetry_defect(_product(), bounds) <= 1e-13
    sum_kernel = ka.CollisionKernel('sum', 1, (
        ka.SeparableTerm(1.0, (_X,), (_ONE,)),
        ka.SeparableTerm(1.0, (_ONE,), (_X,)),
    ))
    assert ka.symmetry_defect(sum_kernel, bounds) <= 1e-13
    lopsided = ka.CollisionKernel('lopsided', 1,
                                  (ka.SeparableTerm(1.0, (_X,), (_ONE,)),))
    assert ka.symmetry_defect(lopsided, bounds) > 0.1


def test_bounds_and_stability_constant():
    bounds = [(1e-9, 5)]
    assert ka.collision_bound(_product(), bounds) == 25
    assert math.isclose(ka.breakage_bound(_uniform(), bounds), 2e9)
    dirac = ka.DiracBreakage('dirac', 1, ((0.4, 1.0), (0.6, 1.0)))
    assert ka.breakage_bound(dirac, bounds) == math.inf

    const = ka.CollisionKernel('constant', 1,
                               (ka.SeparableTerm(1.0, (_ONE,), (_ONE,)),))
    flat = ka.SmoothBreakage('flat', 1, (ka.SeparableTerm(1.0, (_ONE,),
                                                          (_ONE,)),))
    got = ka.stability_constant(const, flat, [(0, 4)])
    assert got == 4**1.5 + 2
    zero = ka.CollisionKernel('zero', 1, ())
    assert ka.stability_constant(zero, dirac, bounds) == 0


def test_moment_integral():
    ys = np.array([0.5, 1.0, 3.0])
    # yapf: disable
    factors = [
        (ka.constant(2.0), 1),
        (ka.monomial(0.5), 2),
        (ka.shifted_power(0.5, 1 / 3), 2),
        (ka.shifted_power(1.0, -1), 1),
        (ka.exponential(1.5), 3),
    ]
    # yapf: enable
    for factor, order in factors:
        for y in ys:
            want = scipy.integrate.quad(
                lambda x, f=factor, m=order: x**m * float(f(x)),
                0,
                y,
                epsabs=0,
                epsrel=1e-13)[0]
            assert math.isclose(float(factor.moment_integral(order, y)),
                                want,
                                rel_tol=1e-11), str(factor)


def test_factor_product():
    product = ka.FactorProduct.of(ka.constant(3), ka.monomial(1),
                                  ka.monomial(0.5), ka.exponential(2))
    assert (product.coef, product.power) == (3, 1.5)
    assert product.polynomial_degree is None
    assert product.singular
    assert math.isclose(float(product(2.0)), 3 * 2**1.5 * math.exp(-4))

    poly = ka.FactorProduct.of(ka.monomial(2), ka.shifted_power(1, 2))
    assert poly.polynomial_degree == 4
    assert ka.FactorProduct.of(ka.monomial(-1)).singular
    assert ka.FactorProduct.of(ka.monomial(1 / 3)).singular

    # ∫_0^∞ y^{1/3} e^{−y} dy = Γ(4/3)
    cube = ka.FactorProduct.of(ka.monomial(1 / 3))
    assert math.isclose(float(cube.exp_integral(1.0, 0.0, math.inf)),
                        math.gamma(4 / 3),
                        rel_tol=1e-13)
    for shape in (cube, product, poly):
        for rate, lo, hi in ((1.3, 0.2, 2.0), (0.0, 0.1, 1.0), (2.0, 1e-9, 5)):
            want = scipy.integrate.quad(
                lambda y, s=shape, k=rate: float(s(y)) * math.exp(-k * y),
                lo,
                hi,
                epsabs=0,
                epsrel=1e-13)[0]
            assert math.isclose(float(shape.exp_integral(rate, lo, hi)),
                                want,
                                rel_tol=1e-10)


def test_growth_rate_factor():
    assert math.isclose(ka.growth_rate_factor(1 / 3), 0.797412, rel_tol=1e-5)
    assert ka.growth_rate_factor(1) == 1
