import dataclasses
import math

import numpy as np

from lib import kernelspec

from . import fe_basis
from . import kernel_algebra as ka
from . import linalg
from . import mesh
from . import operators
from . import oracle

# (collision, breakage) pairs of the one-dimensional moment cases plus the
# conserving Test Case 3 variants.
_KERNELS_1D = [
    ('product', 'binary_uniform'),
    ('constant', 'dirac(0.4:1,0.6:1)'),
    ('product', 'tc3_literal'),
    ('product', 'tc3_normalized'),
    ('product', 'tc3_ternary'),
    ('poly(0)', 'binary_uniform'),
]
_CONSERVING_1D = [pair for pair in _KERNELS_1D if pair[1] != 'tc3_literal']


def _setup(bounds, num, degree, collision, breakage, nonlinearity='consistent',
           quad_points=None):
    dim = len(bounds)
    dofs = fe_basis.build_dof_map(mesh.build_mesh(bounds, num), degree)
    gamma = kernelspec.parse_collision(collision, dim)
    beta = kernelspec.parse_breakage(breakage, dim)
    ops = operators.assemble_operators(dofs,
                                       gamma,
                                       beta,
                                       nonlinearity=nonlinearity,
                                       quad_points=quad_points)
    return dofs, gamma, beta, ops


def _loss_only(ops):
    return dataclasses.replace(
        ops, terms=tuple(term for term in ops.terms if term.coef > 0))


def _coordinates(dofs):
    return linalg.kron_vector([axis.coordinates for axis in dofs.axes])


def test_assemble_mass():
    dofs = fe_basis.build_dof_map(mesh.build_mesh([(0, 1)], 1), 1)
    mass = operators.assemble_mass(dofs)
    np.testing.assert_allclose(mass.dense(), [[1 / 3, 1 / 6], [1 / 6, 1 / 3]],
                               rtol=1e-14)

    for degree in fe_basis.SUPPORTED_DEGREES:
        dofs = fe_basis.build_dof_map(
            mesh.TensorMesh((mesh.nonuniform_axis(0, 3, 7, 'random',
                                                  seed=2),)), degree)
        mass = operators.assemble_mass(dofs).dense()
        np.testing.assert_allclose(mass, mass.T, atol=1e-15)
        assert np.all(np.linalg.eigvalsh(mass) > 0)
        unit = ka.FactorProduct.of()
        np.testing.assert_allclose(
            mass.sum(axis=1),
            operators.weighted_vector(dofs.axes[0], unit, 4),
            rtol=1e-13)


def test_assemble_mass_tensor():
    dofs = fe_basis.build_dof_map(mesh.build_mesh([(0, 1), (0, 2)], 3), 2)
    mass = operators.assemble_mass(dofs)
    alpha = np.random.default_rng(0).uniform(size=dofs.size)
    np.testing.assert_allclose(mass.apply(alpha),
                               mass.dense() @ alpha,
                               rtol=1e-13)

    # Direct tensor quadrature of a few entries.
    rule = fe_basis.gauss_rule(6)
    for first, second in ((0, 0), (3, 10), (24, 17), (48, 48)):
        total = 0.0
        for e1 in range(3):
            for e2 in range(3):
                xs = (e1 + rule.points) / 3
                ys = 2 * (e2 + rule.points) / 3
                x, y = np.meshgrid(xs, ys, indexing='ij')
                points = np.stack([x.ravel(), y.ravel()], axis=-1)
                w = np.outer(rule.weights / 3, 2 * rule.weights / 3).ravel()
                left = np.zeros(dofs.size)
                right = np.zeros(dofs.size)
                left[first] = 1
                right[second] = 1
                total += np.sum(w *
                                fe_basis.eval_fe_function(left, dofs, points) *
                                fe_basis.eval_fe_function(right, dofs, points))
        assert math.isclose(mass.dense()[first, second], total,
                            abs_tol=1e-13)


def test_assemble_loss():
    dofs, _, _, ops = _setup([(0, 1)], 1, 1, 'constant', 'zero')
    np.testing.assert_allclose(operators.nonlinear_residual(ops, [1, 1]),
                               [0.5, 0.5],
                               rtol=1e-14)

    dofs = fe_basis.build_dof_map(mesh.build_mesh([(1e-9, 5)], 6), 2)
    loss = operators.assemble_loss(dofs,
                                   kernelspec.parse_collision('product', 1))
    identity = ka.FactorProduct.of(ka.monomial(1))
    np.testing.assert_allclose(loss.terms[0].right[0],
                               operators.weighted_vector(
                                   dofs.axes[0], identity, 5),
                               rtol=1e-14)


def test_dirac_gain_support():
    dofs = fe_basis.build_dof_map(mesh.build_mesh([(0, 5)], 10), 1)
    one = ka.FactorProduct.of()
    gain = operators.dirac_gain_matrix(dofs.axes[0], [(0.6, 1.0)], one, 4)
    coords = dofs.axes[0].coordinates
    # φ_j vanishes on [0, 3] when its support starts at or beyond 3.
    beyond = coords - 0.5 >= 3
    assert np.all(gain[beyond] == 0)
    assert np.all(np.abs(gain[~beyond]).sum(axis=1) > 0)


def test_oracle_equivalence_1d():
    rng = np.random.default_rng(11)
    for collision, breakage in _KERNELS_1D:
        for num in (2, 4, 8):
            for degree in (1, 2):
                dofs, gamma, beta, ops = _setup([(1e-9, 5)], num, degree,
                                                collision, breakage)
                for _ in range(4):
                    alpha = rng.uniform(0, 1, dofs.size)
                    got = operators.nonlinear_residual(ops, alpha)
                    want = oracle.dense_oracle_residual(
                        dofs, gamma, beta, alpha)
                    scale = 1 + np.max(np.abs(got))
                    assert np.max(np.abs(got - want)) <= 1e-10 * scale, (
                        collision, breakage, num, degree)


def test_oracle_equivalence_multi_d():
    rng = np.random.default_rng(5)
    # yapf: disable
    configs = [
        ([(1e-9, 2)] * 2, 2, 1, 'product', 'multi_uniform(2)'),
        ([(1e-9, 2)] * 2, 4, 1, 'product', 'multi_uniform(2)'),
        ([(1e-9, 2)] * 2, 2, 2, 'product', 'multi_uniform(2)'),
        ([(1e-9, 2)] * 2, 2, 1, 'constant', 'dirac(0.4:1,0.6:1)'),
        ([(1e-9, 2)] * 3, 1, 1, 'product', 'multi_uniform(3)'),
        ([(1e-9, 2)] * 3, 2, 1, 'product', 'multi_uniform(3)'),
    ]
    # yapf: enable
    for bounds, num, degree, collision, breakage in configs:
        dofs, gamma, beta, ops = _setup(bounds, num, degree, collision,
                                        breakage)
        for _ in range(2):
            alpha = rng.uniform(0, 1, dofs.size)
            got = operators.nonlinear_residual(ops, alpha)
            want = oracle.dense_oracle_residual(dofs,
                                                gamma,
                                                beta,
                                                alpha,
                                                quad_points=degree + 2)
            scale = 1 + np.max(np.abs(got))
            assert np.max(np.abs(got - want)) <= 1e-10 * scale, (bounds, num,
                                                                 degree)


def test_oracle_trivial_kernels():
    dofs, gamma, beta, _ = _setup([(1e-9, 5)], 4, 1, 'zero', 'binary_uniform')
    alpha = np.random.default_rng(1).uniform(0, 1, dofs.size)
    assert not np.any(oracle.dense_oracle_residual(dofs, gamma, beta, alpha))

    dofs, gamma, beta, _ = _setup([(1e-9, 5)], 4, 1, 'product', 'zero')
    assert np.all(oracle.dense_oracle_residual(dofs, gamma, beta, alpha) >= 0)

    dofs = fe_basis.build_dof_map(mesh.build_mesh([(0, 1)], 201), 1)
    try:
        oracle.dense_oracle_residual(dofs, gamma, beta, np.zeros(dofs.size))
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Oracle limited to 200 DOFs, got 202'


def test_hypervolume_annihilation():
    rng = np.random.default_rng(7)
    setups = [_setup([(1e-9, 5)], 8, degree, *pair)
              for pair in _CONSERVING_1D
              for degree in (1, 2)]
    setups.append(
        _setup([(1e-9, 2)] * 2, 4, 1, 'product', 'multi_uniform(2)'))
    setups.append(
        _setup([(1e-9, 2)] * 3, 2, 2, 'product', 'multi_uniform(3)'))
    for dofs, _, _, ops in setups:
        xi = _coordinates(dofs)
        for _ in range(20):
            alpha = rng.uniform(0, 1, dofs.size)
            balance = xi @ operators.nonlinear_residual(ops, alpha)
            loss = np.abs(operators.nonlinear_residual(_loss_only(ops), alpha))
            assert abs(balance) <= 1e-10 * (xi @ loss)
        np.testing.assert_allclose(ops.mass_dense @ xi,
                                   ops.hypervolume_functional,
                                   rtol=1e-12,
                                   atol=1e-15)


def test_number_growth():
    rng = np.random.default_rng(8)
    setups = [
        _setup([(1e-9, 5)], 8, 1, 'product', 'binary_uniform'),
        _setup([(1e-9, 5)], 8, 1, 'constant', 'dirac(0.4:1,0.6:1)'),
        _setup([(1e-9, 5)], 8, 1, 'product', 'tc3_ternary'),
        _setup([(1e-9, 2)] * 2, 4, 1, 'product', 'multi_uniform(2)'),
    ]
    for _, _, _, ops in setups:
        for _ in range(20):
            alpha = rng.uniform(0, 1, ops.size)
            growth = -ops.number_functional @ operators.nonlinear_residual(
                ops, alpha)
            assert growth >= -1e-12


def test_nonlinear_residual_homogeneity():
    _, _, _, ops = _setup([(1e-9, 5)], 6, 2, 'product', 'binary_uniform')
    assert not np.any(operators.nonlinear_residual(ops, np.zeros(ops.size)))
    alpha = np.random.default_rng(2).uniform(0, 1, ops.size)
    np.testing.assert_allclose(operators.nonlinear_residual(ops, 3 * alpha),
                               9 * operators.nonlinear_residual(ops, alpha),
                               rtol=1e-12,
                               atol=1e-14)


def test_default_rules_exact_for_polynomial_kernels():
    # Raising the number of Gauss points leaves the 2D product/uniform
    # operators unchanged for every degree.
    rng = np.random.default_rng(5)
    for degree in fe_basis.SUPPORTED_DEGREES:
        args = ([(1e-9, 2)] * 2, 4, degree, 'product', 'multi_uniform(2)')
        _, _, _, ops = _setup(*args)
        _, _, _, fine = _setup(*args, quad_points=16)
        alpha = rng.uniform(0, 1, ops.size)
        np.testing.assert_allclose(operators.nonlinear_residual(fine, alpha),
                                   operators.nonlinear_residual(ops, alpha),
                                   rtol=1e-11,
                                   atol=1e-13)
        np.testing.assert_allclose(fine.mass_dense, ops.mass_dense,
                                   rtol=1e-13,
                                   atol=1e-15)


def test_nonlinear_jacobian():
    rng = np.random.default_rng(4)
    setups = [
        _setup([(1e-9, 5)], 4, 1, 'product', 'binary_uniform'),
        _setup([(1e-9, 5)], 4, 2, 'constant', 'dirac(0.4:1,0.6:1)'),
        _setup([(1e-9, 5)], 8, 1, 'poly(0)', 'binary_uniform'),
        _setup([(1e-9, 5)], 4, 2, 'product', 'binary_uniform', 'hadamard'),
        _setup([(1e-9, 2)] * 2, 2, 2, 'product', 'multi_uniform(2)'),
    ]
    eps = 1e-5
    for _, _, _, ops in setups:
        assert not np.any(operators.nonlinear_jacobian(ops,
                                                       np.zeros(ops.size)))
        alpha = rng.uniform(0, 1, ops.size)
        jac = operators.nonlinear_jacobian(ops, alpha)
        action = operators.jacobian_action(ops, alpha)
        for _ in range(3):
            direction = rng.normal(size=ops.size)
            fd = (operators.nonlinear_residual(ops, alpha + eps * direction) -
                  operators.nonlinear_residual(ops, alpha - eps * direction)
                 ) / (2 * eps)
            exact = jac @ direction
            assert np.linalg.norm(fd - exact) <= 1e-6 * np.linalg.norm(exact)
            np.testing.assert_allclose(action.apply(direction),
                                       exact,
                                       rtol=1e-10,
                                       atol=1e-12 * np.max(np.abs(exact)))
        if ops.nonlinearity == 'consistent':
            scaled = sum(term.coef * linalg.kron_dot(term.right, alpha) *
                         linalg.kron_dense(term.left) for term in ops.terms)
            rest = jac - scaled
            rank = np.linalg.matrix_rank(rest,
                                         tol=1e-10 * np.max(np.abs(rest)))
            assert rank <= len(ops.terms)


def test_hadamard_contraction():
    _, _, _, consistent = _setup([(1e-9, 5)], 4, 1, 'product',
                                 'binary_uniform')
    hadamard = dataclasses.replace(consistent, nonlinearity='hadamard')
    alpha = np.random.default_rng(9).uniform(0, 1, consistent.size)
    want = np.zeros(consistent.size)
    for index, value in enumerate(alpha):
        unit = np.zeros(consistent.size)
        unit[index] = 1
        want += value**2 * operators.nonlinear_residual(consistent, unit)
    np.testing.assert_allclose(operators.nonlinear_residual(hadamard, alpha),
                               want,
                               rtol=1e-12,
                               atol=1e-14)
    try:
        dataclasses.replace(consistent, nonlinearity='diagonal')
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'Invalid nonlinearity ‘diagonal’'


def test_kronecker_compose_1d_identity():
    dofs, _, _, ops = _setup([(1e-9, 5)], 5, 2, 'product', 'binary_uniform')
    assert ops.shape == (dofs.size,)
    np.testing.assert_array_equal(ops.mass_dense, ops.mass.axes[0])
    np.testing.assert_array_equal(ops.hypervolume_functional,
                                  ops.hypervolume[0])


def test_save_and_load_operators(tmp_path):
    _, _, _, ops = _setup([(1e-9, 2)] * 2, 2, 1, 'product',
                          'multi_uniform(2)')
    path = tmp_path / 'ops.bin'
    key = {'case': 'm5', 'n': 2, 'degree': 1}
    assert operators.load_operators(path, key) is None
    operators.save_operators(ops, path, key)
    first = path.read_bytes().split(b'\n', 1)[0]
    assert first.startswith(b'{') and b'"format": "ncbe-operators-1"' in first

    loaded = operators.load_operators(path, dict(key))
    assert loaded is not None
    alpha = np.random.default_rng(3).uniform(0, 1, ops.size)
    np.testing.assert_array_equal(operators.nonlinear_residual(loaded, alpha),
                                  operators.nonlinear_residual(ops, alpha))
    assert operators.load_operators(path, {**key, 'degree': 2}) is None
