import math

import numpy as np
import scipy.integrate

from lib import kernelspec

from . import fe_basis
from . import mesh as meshlib
from . import source


def _source(dim, collision, breakage, bounds):
    return source.ManufacturedSource(
        source.ExponentialSolution(dim),
        kernelspec.parse_collision(collision, dim),
        kernelspec.parse_breakage(breakage, dim), tuple(bounds))


def _integrate(fn, lo, hi):
    return scipy.integrate.quad(lambda y: float(fn(np.float64(y))),
                                lo,
                                hi,
                                epsabs=1e-14,
                                epsrel=1e-12,
                                limit=200)[0]


def test_exponential_solution():
    sol = source.ExponentialSolution(1)
    assert float(sol(0.0, 0.0)) == 1
    assert math.isclose(float(sol(5.0, 0.3)),
                        1.3**2 * math.exp(-6.5),
                        rel_tol=1e-14)
    assert round(float(sol(5.0, 0.3)), 4) == 0.0025
    np.testing.assert_allclose(sol([0.5, 1.0], 1.0),
                               4 * np.exp(-2 * np.array([0.5, 1.0])))
    plane = source.ExponentialSolution(2)
    assert math.isclose(float(plane([0.5, 0.25], 1.0)),
                        16 * math.exp(-1.5),
                        rel_tol=1e-14)
    np.testing.assert_allclose(plane.gradient([[0.5, 0.25]], 1.0),
                               [[-32 * math.exp(-1.5)] * 2])
    # yapf: disable
    tests = [
        ((1, (0,), 0.0), 1.0),
        ((1, (0,), 2.0), 3.0),
        ((1, (1,), 2.0), 1.0),
        ((2, (0, 0), 1.0), 4.0),
        ((2, (1, 1), 1.0), 1.0),
        ((3, (1, 1, 1), 0.5), 1.0),
        ((3, (0, 0, 0), 0.5), 3.375),
    ]
    # yapf: enable
    got = []
    want = []
    for (dim, order, t), expected in tests:
        want.append(expected)
        got.append(
            round(source.ExponentialSolution(dim).moment(order, t), 12))
    assert want == got


def test_source_vanishes_for_exact_solution():
    src = _source(1, 'product', 'binary_uniform', [(0.0, math.inf)])
    xs = np.linspace(0.01, 6, 13)
    for t in (0.0, 0.4, 1.0):
        np.testing.assert_allclose(src(xs, t), 0, atol=1e-12)


def test_source_matches_direct_residual():
    bounds = (1e-9, 5.0)
    src = _source(1, 'product', 'binary_uniform', [bounds])
    sol = src.solution
    for x, t in ((0.3, 0.0), (1.3, 0.4), (4.9, 1.0)):
        rate = sol.rate(t)
        dudt = (2 / rate - x) * float(sol(x, t))
        partner = _integrate(lambda z, t=t: z * sol(z, t), *bounds)
        loss = float(sol(x, t)) * x * partner
        gain = 2 * partner * _integrate(lambda y, t=t: sol(y, t), x, bounds[1])
        assert math.isclose(float(src(x, t)),
                            dudt - gain + loss,
                            rel_tol=1e-9,
                            abs_tol=1e-12)


def test_source_total_in_2d():
    # The kernels force dM₀₀/dt = 3 M₁₁² = 3 while M₀₀ = (1 + t)².
    src = _source(2, 'product', 'multi_uniform(2)', [(0.0, math.inf)] * 2)
    for t in (0.0, 0.5, 2.0):
        total = sum(
            term.coef * math.prod(
                _integrate(factor, 0, math.inf) for factor in term.factors)
            for term in src.terms(t))
        assert math.isclose(total, 2 * (1 + t) - 3, abs_tol=1e-9)


def test_load_vector_partition_of_unity():
    bounds = (1e-9, 5.0)
    src = _source(1, 'product', 'binary_uniform', [bounds])
    for degree in (1, 2):
        dof_map = fe_basis.build_dof_map(
            meshlib.build_mesh([bounds], 10), degree)
        load = src.bind(dof_map)
        for t in (0.0, 0.7):
            want = _integrate(lambda x, t=t: src(x, t), *bounds)
            assert math.isclose(float(np.sum(load(t))),
                                want,
                                rel_tol=1e-10,
                                abs_tol=1e-12)


def test_source_validation():
    # yapf: disable
    tests = [
        ((1, 'product', 'dirac(0.4:1,0.6:1)', [(1e-9, 5)]),
         'Err: Manufactured source needs a smooth breakage kernel, got '
         '‘dirac(0.4:1,0.6:1)’'),
        ((1, 'product', 'binary_uniform', [(1e-9, 5)] * 2),
         'Err: Dimension mismatch in manufactured source for 1D solution'),
        ((1, 'product', 'binary_uniform', [(1e-9, 5)]), 'ok'),
    ]
    # yapf: enable
    got = []
    want = []
    for args, expected in tests:
        want.append(expected)
        try:
            _source(*args)
            got.append('ok')
        except ValueError as ex:
            got.append(f'Err: {ex}')
    assert want == got
