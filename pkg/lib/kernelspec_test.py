import math

from fem import kernel_algebra as ka

from . import kernelspec


def test_parse_collision():
    # yapf: disable
    tests = [
        (('product', 1), ('product', 1, 1)),
        ((' product ', 2), ('product', 2, 1)),
        (('constant', 3), ('constant', 3, 1)),
        (('poly(0)', 1), ('poly(0)', 1, 1)),
        (('poly( 0.5 )', 1), ('poly(0.5)', 1, 1)),
        (('sum', 1), ('sum', 1, 2)),
        (('zero', 2), ('zero', 2, 0)),
        (('sum', 2), 'Err: Kernel ‘sum’ is one-dimensional, not 2D'),
        (('poly', 1), 'Err: Kernel ‘poly’ expects 1 argument(s)'),
        (('poly(a)', 1), 'Err: Invalid number ‘a’'),
        (('poly(-1)', 1), 'Err: Negative shift ‘-1.0’'),
        (('product(1)', 1), 'Err: Kernel ‘product’ takes no arguments'),
        (('brownian', 1), 'Err: Unknown collision kernel ‘brownian’'),
        (('Product', 1), 'Err: Invalid kernel specification ‘Product’'),
        (('', 1), 'Err: Empty kernel specification'),
        (('product', 4), 'Err: Unsupported dimension ‘4’'),
    ]
    # yapf: enable
    got = []
    want = []
    for (text, dim), expected in tests:
        want.append(expected)
        try:
            kernel = kernelspec.parse_collision(text, dim)
            got.append((kernel.name, kernel.dim, len(kernel.terms)))
        except ValueError as ex:
            got.append(f'Err: {ex}')
    assert want == got


def test_parse_breakage():
    # yapf: disable
    tests = [
        (('binary_uniform', 1), ('binary_uniform', 2.0, 0.0)),
        (('multi_uniform(2)', 2), ('multi_uniform(2)', 4.0, 0.0)),
        (('multi_uniform(3)', 3), ('multi_uniform(3)', 8.0, 0.0)),
        (('dirac(0.4:1, 0.6:1)', 1), ('dirac(0.4:1,0.6:1)', 2.0, 0.0)),
        (('power(2,0,-1)', 1), ('power(2,0,-1)', 2.0, 0.0)),
        (('tc3_literal', 1), ('tc3_literal', 1.0, -0.4)),
        (('tc3_normalized', 1), ('tc3_normalized', 1.666666666667, 0.0)),
        (('tc3_ternary', 1), ('tc3_ternary', 3.0, 0.0)),
        (('zero', 1), ('zero', 0.0, -1.0)),
        (('multi_uniform(2)', 3),
         'Err: Kernel ‘multi_uniform(2)’ is for dimension 2, not 3'),
        (('binary_uniform', 2),
         'Err: Kernel ‘binary_uniform’ is one-dimensional, not 2D'),
        (('dirac(0.4)', 1),
         'Err: Invalid atom ‘0.4’; expected <ratio>:<weight>'),
        (('dirac(1.4:1)', 1), 'Err: Atom ratio ‘1.4’ not in (0, 1)'),
        (('dirac()', 1), 'Err: Kernel ‘dirac’ needs at least one atom'),
        (('power(1,2)', 1), 'Err: Kernel ‘power’ expects 3 argument(s)'),
        (('shatter', 1), 'Err: Unknown breakage kernel ‘shatter’'),
    ]
    # yapf: enable
    got = []
    want = []
    for (text, dim), expected in tests:
        want.append(expected)
        try:
            kernel = kernelspec.parse_breakage(text, dim)
            y = [1.0] * dim
            got.append((kernel.name, round(float(ka.multiplicity(kernel, y)),
                                           12),
                        round(ka.check_hypervolume_conservation(kernel,
                                                                y).defect,
                              12)))
        except ValueError as ex:
            got.append(f'Err: {ex}')
    assert want == got


def test_parsed_kernels_evaluate():
    poly = kernelspec.parse_collision('poly(0)', 1)
    assert math.isclose(float(ka.eval_collision(poly, 8, 27)), 6,
                        rel_tol=1e-14)
    product = kernelspec.parse_collision('product', 3)
    assert float(ka.eval_collision(product, [1, 2, 3], [1, 1, 2])) == 12
    added = kernelspec.parse_collision('sum', 1)
    assert float(ka.eval_collision(added, 2, 3)) == 5
    shatter = kernelspec.parse_breakage('multi_uniform(2)', 2)
    assert float(ka.eval_breakage(shatter, [0.5, 0.5], [2, 1])) == 2
    dirac = kernelspec.parse_breakage('dirac(0.4:1,0.6:1)', 1)
    assert isinstance(dirac, ka.DiracBreakage)
    assert dirac.atoms == ((0.4, 1.0), (0.6, 1.0))
