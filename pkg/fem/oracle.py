"""Brute-force evaluation of the weak loss and gain forms.

Reference for the factorized operators: kernels are evaluated pointwise on
nested quadrature grids without exploiting separability.  Only meant for
small meshes.
"""

import itertools
import typing

import numpy as np
import numpy.typing as npt

from . import fe_basis
from . import kernel_algebra as ka
from . import operators

Array = npt.NDArray[np.float64]

MAX_ORACLE_DOFS = 200


def _tensor_rule(
        rules: typing.Sequence[fe_basis.QuadratureRule]) -> tuple[Array, Array]:
    """Returns points (P, d) and weights (P,) of a tensor-product rule."""
    grids = np.meshgrid(*[rule.points for rule in rules], indexing='ij')
    weights = np.meshgrid(*[rule.weights for rule in rules], indexing='ij')
    points = np.stack([grid.ravel() for grid in grids], axis=-1)
    return points, np.prod([w.ravel() for w in weights], axis=0)


def _basis_matrix(dof_map: fe_basis.DofMap, points: Array) -> Array:
    """Returns φ_j(x_p) for all points and all global DOFs, shape (P, n)."""
    out = np.ones((len(points), 1))
    for a, axis in enumerate(dof_map.axes):
        values = np.stack([axis.basis_vector(x) for x in points[:, a]])
        out = (out[:, :, None] * values[:, None, :]).reshape(len(points), -1)
    return out


def _weights(collision: ka.CollisionKernel,
             breakage: ka.BreakageKernel) -> list[ka.FactorProduct]:
    """Returns the per-axis weights the nested integrals multiply u_h by."""
    out = []
    for term in collision.terms:
        out.extend(ka.FactorProduct.of(factor)
                   for factor in term.first + term.second)
        if isinstance(breakage, ka.SmoothBreakage):
            for bterm in breakage.terms:
                out.extend(ka.FactorProduct.of(factor) for factor in bterm.first)
                out.extend(
                    ka.FactorProduct.of(parent, rate)
                    for parent, rate in zip(bterm.second, term.first))
    return out


def dense_oracle_residual(dof_map: fe_basis.DofMap,
                          collision: ka.CollisionKernel,
                          breakage: ka.BreakageKernel,
                          coeffs: npt.ArrayLike,
                          quad_points: typing.Optional[int] = None) -> Array:
    """Evaluates A(u_h,u_h;φ_j) − B(u_h,u_h;φ_j) by nested quadrature.

    Args:
        dof_map: DOF map of the discrete space.
        collision: Collision kernel Γ.
        breakage: Breakage kernel β.
        coeffs: DOF vector α of u_h.
        quad_points: Gauss points per panel and axis.  When any weight the
            integrals multiply u_h by is not a polynomial, at least 20
            points are used and panels next to the origin are graded.
    Returns:
        The residual vector.
    Raises:
        ValueError: if the space has more than 200 DOFs.
    """
    if dof_map.size > MAX_ORACLE_DOFS:
        raise ValueError(f'Oracle limited to {MAX_ORACLE_DOFS} DOFs, got '
                         f'{dof_map.size}')
    alpha = np.asarray(coeffs, dtype=np.float64)
    points = quad_points or fe_basis.default_points(dof_map.degree)
    singular = any(weight.polynomial_degree is None
                   for weight in _weights(collision, breakage))
    policy = fe_basis.QuadraturePolicy(max(points, 20) if singular else points,
                                       singular=singular)
    bounds = [(axis.axis.x_min, axis.axis.x_max) for axis in dof_map.axes]

    def u_h(at: Array) -> Array:
        return fe_basis.eval_fe_function(alpha, dof_map, at)

    # Z(y) = ∫ Γ(y, z) u_h(z) dz on arbitrary points y.
    z_rules = [
        operators.panel_quadrature(axis.axis.nodes, policy)
        for axis in dof_map.axes
    ]
    z_points, z_weights = _tensor_rule(z_rules)
    z_mass = z_weights * u_h(z_points)

    def collide(at: Array) -> Array:
        rates = ka.eval_collision(collision, at[:, None, :], z_points[None, :, :])
        return rates @ z_mass

    if isinstance(breakage, ka.DiracBreakage):
        breaks = [
            np.unique(
                np.concatenate([axis.axis.nodes] + [
                    ratio * axis.axis.nodes
                    for ratio, _ in breakage.atoms
                    if ratio * axis.axis.x_max > axis.axis.x_min
                ]))
            for axis in dof_map.axes
        ]
        breaks = [edges[edges >= lo] for edges, (lo, _) in zip(breaks, bounds)]
    else:
        breaks = [axis.axis.nodes for axis in dof_map.axes]
    x_points, x_weights = _tensor_rule(
        [operators.panel_quadrature(edges, policy) for edges in breaks])
    x_values = u_h(x_points)
    loss = x_weights * x_values * collide(x_points)

    gain = np.zeros(len(x_points))
    if isinstance(breakage, ka.DiracBreakage):
        for combo in itertools.product(breakage.atoms, repeat=dof_map.dim):
            ratios = np.array([ratio for ratio, _ in combo])
            scale = np.prod([weight / ratio for ratio, weight in combo])
            parents = x_points / ratios
            inside = np.all(parents <= [hi for _, hi in bounds], axis=1)
            if not np.any(inside):
                continue
            at = parents[inside]
            gain[inside] += scale * u_h(at) * collide(at)
    else:
        # Parents y ≥ x: the element containing x_a is integrated from x_a,
        # whole elements to its right reuse u_h·Z tabulated on the z grid.
        full_elements = [
            axis.axis.locate(rule.points)
            for axis, rule in zip(dof_map.axes, z_rules)
        ]
        flux_full = (u_h(z_points) * collide(z_points)).reshape(
            [len(rule.points) for rule in z_rules])
        for index, x in enumerate(x_points):
            choices = []
            for a, axis in enumerate(dof_map.axes):
                element = int(axis.axis.locate(x[a]))
                partial = policy.rule(x[a], axis.axis.nodes[element + 1])
                mask = full_elements[a] > element
                choices.append(((partial, None),
                                (fe_basis.QuadratureRule(
                                    z_rules[a].points[mask],
                                    z_rules[a].weights[mask]), mask)))
            total = 0.0
            for combo in itertools.product(*choices):
                y_points, y_weights = _tensor_rule([rule for rule, _ in combo])
                if not len(y_points):
                    continue
                masks = [mask for _, mask in combo]
                if all(mask is not None for mask in masks):
                    flux = flux_full[np.ix_(*masks)].ravel()
                else:
                    flux = u_h(y_points) * collide(y_points)
                rates = ka.eval_breakage(breakage, x[None, :], y_points)
                total += float(np.sum(y_weights * rates * flux))
            gain[index] = total
    gain *= x_weights
    basis = _basis_matrix(dof_map, x_points)
    return basis.T @ (loss - gain)
