import math

import numpy as np
import scipy.integrate

from fem import kernel_algebra as ka
from fem import stepper

from . import cases
from . import published


def _quad(fn, lo=0.0, hi=math.inf):
    return scipy.integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-11,
                                limit=200)[0]


def test_registry():
    got = [(case.id, case.dim) for case in cases.registry()]
    want = [('m1', 1), ('m2', 1), ('m3', 1), ('m4', 1), ('m5', 2), ('m6', 3),
            ('c1', 1), ('c2', 1), ('c3', 2), ('c4', 3)]
    assert want == got

    assert cases.get('c3').exact is not None
    try:
        cases.get('m7')
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == ('Unknown case ‘m7’; expected one of: m1, m2, m3, '
                           'm4, m5, m6, c1, c2, c3, c4')


def test_kernels():
    got = []
    want = []
    for case in cases.registry():
        collision = case.collision_kernel()
        assert ka.symmetry_defect(collision, case.bounds) <= 1e-14, case.id
        for name in list(case.variants) or ['default']:
            variant = case.variant(name)
            want.append((case.id, name, variant.conserving))
            got.append((case.id, name,
                        ka.conserves_hypervolume(case.breakage_kernel(name),
                                                 case.bounds)))
    assert want == got
    assert ('m3', 'literal', False) in got


def test_exact_moment():
    # yapf: disable
    tests = [
        (('m2', 0, 0.45, None), 1.8182),
        (('m6', (0, 0, 0), 2.0, None), 15.0),
        (('m5', (1, 1), 1.3, None), 1.0),
        (('m4', 0, 1.0, None), 1.98),
        (('m3', 0, 2.0, None), 3.0),
        (('m3', 0, 2.0, 'ternary'), 5.0),
        (('m3', 0, 3.0, 'normalized'), 3.0),
        (('c1', 1, 0.7, None), 1.0),
        (('c1', 2, 1.0, None), 1.0),
        (('c2', 0, 0.5, None), 1.5),
        (('c3', (1, 1), 0.5, None), 1.0),
        (('c3', (0, 0), 1.0, None), 4.0),
        (('c4', 0, 1.0, None), 8.0),
        (('m1', 2, 1.0, None), 'Err: No moment law for order (2,) of case ‘m1’'),
        (('m1', 0, 1.0, 'x'), 'Err: Unknown variant ‘x’ of case ‘m1’'),
    ]
    # yapf: enable
    got = []
    want = []
    for (case_id, order, t, variant), expected in tests:
        want.append(expected)
        try:
            value = cases.exact_moment(cases.get(case_id), order, t, variant)
            got.append(round(value, 4))
        except ValueError as ex:
            got.append(f'Err: {ex}')
    assert want == got


def test_exact_solution():
    c1 = cases.get('c1')
    c2 = cases.get('c2')
    assert float(cases.exact_solution(c1, 0.0, 0.0)) == 1.0
    assert round(float(cases.exact_solution(c1, 5.0, 0.3)), 4) == 0.0025
    assert math.isclose(float(cases.exact_solution(c2, 0.5, 1.0)),
                        math.exp(-0.5) * 2.5,
                        rel_tol=1e-14)
    assert float(cases.exact_solution(c2, 1.5, 1.0)) == 0
    assert cases.exact_atom(c2, 1.0) == (1.0, math.exp(-1))
    assert cases.exact_atom(c1, 1.0) is None
    assert cases.support(c2) == (1.0,)
    assert cases.support(c1) is None

    for t in (0.2, 1.0):
        slope = cases.exact_gradient(c2, [[0.3]], t)[0, 0]
        step = 1e-6
        fd = float(cases.exact_solution(c2, 0.3 + step, t) -
                   cases.exact_solution(c2, 0.3 - step, t)) / (2 * step)
        assert math.isclose(slope, fd, rel_tol=1e-7)

    try:
        cases.exact_solution(cases.get('m1'), 1.0, 0.0)
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Case ‘m1’ has no exact solution'


def _initial_moment(case, order):
    datum = case.initial
    if isinstance(datum, stepper.DiracDatum):
        return datum.weight * math.prod(
            x**k for x, k in zip(datum.location, order))
    return datum.scale * math.prod(
        _quad(lambda x, f=factor, k=k: x**k * float(f(x)))
        for factor, k in zip(datum.factors, order))


def test_initial_data_match_moment_laws():
    for case in cases.registry():
        for name in list(case.variants) or ['default']:
            for order, law in case.variant(name).moments.items():
                assert math.isclose(_initial_moment(case, order),
                                    law(0.0),
                                    abs_tol=1e-10), (case.id, name, order)


def test_exact_solution_reproduces_moments():
    for case_id in ('c1', 'c3', 'c4'):
        case = cases.get(case_id)
        for t in (0.0, 0.7):
            for order in case.moments:
                k = case.exact.rate(t)
                per_axis = [
                    _quad(lambda x, j=j, k=k: x**j * math.exp(-k * x))
                    for j in order
                ]
                value = case.exact.amplitude(t) * math.prod(per_axis)
                assert math.isclose(value,
                                    cases.exact_moment(case, order, t),
                                    rel_tol=1e-8), (case_id, order, t)

    c2 = cases.get('c2')
    for t in (0.3, 1.0):
        for order in ((0,), (1,)):
            smooth = _quad(
                lambda x, j=order[0], t=t: x**j * float(
                    cases.exact_solution(c2, x, t)), 0.0, 1.0)
            _, weight = cases.exact_atom(c2, t)
            assert math.isclose(smooth + weight,
                                cases.exact_moment(c2, order, t),
                                rel_tol=1e-8), (order, t)


def test_growth_checks():
    # yapf: disable
    tests = [
        ('m1', None, True),
        ('m2', None, True),
        ('m3', 'literal', False),
        ('m3', 'normalized', True),
        ('m3', 'ternary', True),
        ('m4', None, False),
        ('m5', None, True),
        ('m6', None, True),
        ('c1', None, True),
        ('c2', None, True),
        ('c3', None, False),
        ('c4', None, False),
    ]
    # yapf: enable
    got = []
    want = []
    for case_id, variant, consistent in tests:
        want.append((case_id, variant, consistent))
        check = cases.growth_check(cases.get(case_id), variant)
        got.append((case_id, variant, check.consistent))
    assert want == got

    m4 = cases.get('m4')
    check = cases.growth_check(m4)
    assert math.isclose(check.quadrature, 0.797412, abs_tol=1e-4)
    assert math.isclose(check.quadrature, m4.derived_rate, rel_tol=1e-7)
    assert math.isclose(check.closure, 0.98, rel_tol=1e-9)
    literal = cases.growth_check(cases.get('m3'), 'literal')
    assert math.isclose(literal.quadrature, 5.0, rel_tol=1e-7)
    assert math.isclose(cases.growth_check(cases.get('c3')).quadrature,
                        3.0,
                        rel_tol=1e-9)


def test_discrepancies():
    rows = cases.discrepancies()
    got = {(row.case, row.variant): row.status for row in rows}
    mismatches = sorted(key for key, status in got.items()
                        if status == 'MISMATCH')
    assert mismatches == [('c3', 'default'), ('c4', 'default'),
                          ('m3', 'literal'), ('m4', 'default')]
    (literal,) = [row for row in rows if row.variant == 'literal']
    assert math.isclose(literal.hypervolume_defect, -0.4, rel_tol=1e-12)
    assert math.isclose(literal.fragments, 1.0, rel_tol=1e-14)
    (shatter,) = [row for row in rows if row.case == 'm6']
    assert math.isclose(shatter.fragments, 8.0, rel_tol=1e-14)

    notes = {row.case: row.note for row in rows if row.note}
    assert sorted(notes) == ['m1', 'm4']
    assert notes['m4'].startswith('Horizon capped at t = 2 instead of 5')
    assert 'do not change with N' in notes['m1']
    (m1,) = [row for row in rows if row.case == 'm1']
    assert math.isclose(m1.mass_truncation, 11 * math.exp(-10), rel_tol=1e-6)
    assert shatter.mass_truncation == 0


def test_mass_truncation():
    # yapf: disable
    tests = [
        ('m1', 11 * math.exp(-10)),
        ('m2', 6 * math.exp(-5)),
        ('c3', 1 - (1 - 3 * math.exp(-2))**2),
        ('c2', 0.0),
    ]
    # yapf: enable
    got = []
    want = []
    for case_id, expected in tests:
        value = cases.mass_truncation(cases.get(case_id))
        want.append((case_id, True))
        got.append((case_id,
                    math.isclose(value, expected, rel_tol=1e-8,
                                 abs_tol=1e-15)))
    assert want == got


def test_capped_horizon():
    m4 = cases.get('m4')
    assert m4.final_time == cases.M4_HORIZON == 2.0
    assert m4.snapshots[-1] == m4.final_time
    assert m4.notes
    assert all(not case.notes
               for case in cases.registry()
               if case.id not in ('m1', 'm4'))


def test_published_moments_agree_with_moment_laws():
    for table in published.MOMENTS:
        if table.case not in ('m1', 'm3', 'm5', 'm6'):
            continue
        case = cases.get(table.case)
        for t, values, errors in zip(table.times, table.values,
                                     table.errors):
            want = cases.exact_moment(case, table.order, t)
            for value, error in zip(values, errors):
                assert abs(abs(value - want) / want - error) <= 2e-4, (
                    table.case, table.order, t, value)


def test_published_point_values_agree_with_exact_solution():
    case = cases.get('c1')
    table = published.point_values('c1', case.probes[0])
    for t, exact in zip(table.times, table.exact):
        if t < 1.0:
            continue
        got = float(cases.exact_solution(case, table.x, t))
        assert math.isclose(got, exact, rel_tol=1e-3), (t, got, exact)


def test_initial_value():
    c3 = cases.get('c3')
    np.testing.assert_allclose(cases.initial_value(c3, [[0.5, 0.25]]),
                               [math.exp(-0.75)])
    try:
        cases.initial_value(cases.get('m5'), [[1.0, 1.0]])
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Case ‘m5’ starts from a point mass'
