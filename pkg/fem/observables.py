"""Moments, error norms, convergence orders and conservation diagnostics."""

import functools
import math
import typing

import numpy as np
import numpy.typing as npt
import scipy.sparse

from . import fe_basis
from . import kernel_algebra as ka
from . import linalg
from . import operators
from . import stepper

Array = npt.NDArray[np.float64]
PointFn = typing.Callable[[Array], Array]

NORMS = ('L1', 'L2', 'Linf', 'RelLinf', 'H1')

# Gauss points per element and axis added to the degree for error norms.
_EXTRA_POINTS = 5

# Nodes this close below a support bound are excluded from node sampling.
_SUPPORT_SLACK = 1e-12

_MONOTONE_SLACK = 1e-10


@functools.lru_cache(maxsize=64)
def moment_functionals(dof_map: fe_basis.DofMap,
                       order: tuple[int, ...]) -> tuple[Array, ...]:
    """Returns per-axis vectors ∫ x^{k_a} φ_i of one moment."""
    if len(order) != dof_map.dim:
        raise ValueError(f'Moment order {order} on a {dof_map.dim}D mesh')
    if any(k < 0 for k in order):
        raise ValueError(f'Negative moment order {order}')
    points = fe_basis.default_points(dof_map.degree)
    out = []
    for axis, k in zip(dof_map.axes, order):
        vec = operators.weighted_vector(axis,
                                        ka.FactorProduct.of(ka.monomial(k)),
                                        points)
        vec.setflags(write=False)
        out.append(vec)
    return tuple(out)


def moment(coeffs: npt.ArrayLike, dof_map: fe_basis.DofMap,
           order: typing.Union[int, typing.Sequence[int]]) -> float:
    """Returns ∫ Π_a x_a^{k_a} u_h dx.

    A plain integer order applies to every axis.
    """
    if isinstance(order, int):
        order = (order,) * dof_map.dim
    return linalg.kron_dot(moment_functionals(dof_map, tuple(order)),
                           np.asarray(coeffs, dtype=np.float64))


class MomentSeries(typing.NamedTuple):
    """One moment along a trajectory."""
    order: tuple[int, ...]
    times: tuple[float, ...]
    values: tuple[float, ...]
    exact: typing.Optional[tuple[float, ...]] = None

    @property
    def relative_errors(self) -> typing.Optional[tuple[float, ...]]:
        if self.exact is None:
            return None
        return tuple(
            abs(want - got) / abs(want) if want else abs(got)
            for want, got in zip(self.exact, self.values))


def moment_series(
    snapshots: typing.Sequence[stepper.Snapshot],
    dof_map: fe_basis.DofMap,
    order: typing.Sequence[int],
    exact: typing.Optional[typing.Callable[[float], float]] = None
) -> MomentSeries:
    times = tuple(snap.time for snap in snapshots)
    return MomentSeries(
        tuple(order), times,
        tuple(moment(snap.alpha, dof_map, order) for snap in snapshots),
        None if exact is None else tuple(exact(t) for t in times))


class _Grid(typing.NamedTuple):
    """Tensor quadrature with per-axis basis (and derivative) matrices."""
    points: tuple[Array, ...]
    weights: tuple[Array, ...]
    values: tuple[scipy.sparse.csr_matrix, ...]
    slopes: tuple[scipy.sparse.csr_matrix, ...]


def _axis_rule(axis: fe_basis.AxisDofMap, points: int,
               upper: typing.Optional[float]) -> fe_basis.QuadratureRule:
    breaks = axis.axis.nodes
    if upper is not None and upper < axis.axis.x_max:
        breaks = np.append(breaks[breaks < upper], upper)
    return operators.panel_quadrature(breaks, fe_basis.QuadraturePolicy(points))


def _grid(dof_map: fe_basis.DofMap,
          support: typing.Optional[typing.Sequence[float]]) -> _Grid:
    points = dof_map.degree + _EXTRA_POINTS
    basis = fe_basis.reference_basis(dof_map.degree)
    out: tuple[list[typing.Any], ...] = ([], [], [], [])
    for index, axis in enumerate(dof_map.axes):
        rule = _axis_rule(axis, points, None if support is None else
                          support[index])
        elements = axis.axis.locate(rule.points)
        lo = axis.axis.nodes[elements]
        width = axis.axis.nodes[elements + 1] - lo
        xi = (rule.points - lo) / width
        rows = np.repeat(np.arange(len(rule.points)), dof_map.degree + 1)
        cols = axis.element_dofs[elements].ravel()
        shape = (len(rule.points), axis.size)
        out[0].append(rule.points)
        out[1].append(rule.weights)
        out[2].append(
            scipy.sparse.csr_matrix((basis.values(xi).ravel(), (rows, cols)),
                                    shape=shape))
        out[3].append(
            scipy.sparse.csr_matrix(
                ((basis.derivatives(xi) / width[:, None]).ravel(),
                 (rows, cols)),
                shape=shape))
    return _Grid(*(tuple(part) for part in out))


def _apply_axes(mats: typing.Sequence[typing.Any], tensor: Array) -> Array:
    """Applies one (sparse) matrix per axis of a tensor."""
    for axis, mat in enumerate(mats):
        moved = np.moveaxis(tensor, axis, 0)
        flat = mat @ moved.reshape(moved.shape[0], -1)
        tensor = np.moveaxis(flat.reshape((mat.shape[0],) + moved.shape[1:]),
                             0, axis)
    return tensor


def _mesh_points(axes: typing.Sequence[Array]) -> Array:
    grids = np.meshgrid(*axes, indexing='ij')
    return np.stack(grids, axis=-1)


def norm_error(coeffs: npt.ArrayLike,
               dof_map: fe_basis.DofMap,
               exact: PointFn,
               norm: str,
               gradient: typing.Optional[PointFn] = None,
               support: typing.Optional[typing.Sequence[float]] = None) -> float:
    """Returns the error of u_h against an exact solution in one norm.

    Args:
        coeffs: DOF vector of u_h.
        dof_map: The DOF map.
        exact: Exact solution on points of shape (…, d).
        norm: One of NORMS.  ‘Linf’ and ‘RelLinf’ sample the global nodes.
        gradient: Exact gradient with the axis index last; needed for ‘H1’.
        support: Optional per-axis upper bounds to which the comparison is
            restricted; nodes on or above a bound are not sampled.
    Raises:
        ValueError: on an unknown norm or a missing gradient.
    """
    if norm not in NORMS:
        raise ValueError(f'Unknown norm ‘{norm}’')
    alpha = np.asarray(coeffs, dtype=np.float64).reshape(dof_map.shape)
    if norm in ('Linf', 'RelLinf'):
        keep = []
        for index, axis in enumerate(dof_map.axes):
            mask = np.ones(axis.size, dtype=bool)
            if support is not None:
                mask = axis.coordinates < support[index] - _SUPPORT_SLACK
            keep.append(np.flatnonzero(mask))
        nodes = _mesh_points(
            [axis.coordinates[idx] for axis, idx in zip(dof_map.axes, keep)])
        want = exact(nodes)
        err = float(np.max(np.abs(alpha[np.ix_(*keep)] - want)))
        if norm == 'Linf':
            return err
        return err / float(np.max(np.abs(want)))

    grid = _grid(dof_map, support)
    points = _mesh_points(grid.points)
    weights = functools.reduce(np.multiply.outer, grid.weights)
    diff = _apply_axes(grid.values, alpha) - exact(points)
    if norm == 'L1':
        return float(np.sum(weights * np.abs(diff)))
    total = float(np.sum(weights * diff * diff))
    if norm == 'H1':
        if gradient is None:
            raise ValueError('H1 error needs the exact gradient')
        want = gradient(points)
        for axis in range(dof_map.dim):
            mats = list(grid.values)
            mats[axis] = grid.slopes[axis]
            slope = _apply_axes(mats, alpha) - want[..., axis]
            total += float(np.sum(weights * slope * slope))
    return math.sqrt(total)


def eoc(errors: typing.Sequence[float],
        hs: typing.Sequence[float]) -> list[typing.Optional[float]]:
    """Returns ln(E_k/E_{k+1})/ln(h_k/h_{k+1}) for consecutive meshes.

    Entries involving a zero error are None.

    Raises:
        ValueError: on mismatched or too short inputs or non-positive sizes.
    """
    if len(errors) != len(hs):
        raise ValueError(f'Got {len(errors)} errors for {len(hs)} mesh sizes')
    if len(errors) < 2:
        raise ValueError('EOC needs at least two meshes')
    if any(not h > 0 for h in hs):
        raise ValueError('Mesh sizes must be positive')
    out: list[typing.Optional[float]] = []
    for (err, h), (next_err, next_h) in zip(zip(errors, hs),
                                            zip(errors[1:], hs[1:])):
        if err == 0 or next_err == 0:
            out.append(None)
        else:
            out.append(math.log(err / next_err) / math.log(h / next_h))
    return out


class MeshErrors(typing.NamedTuple):
    """Errors on one mesh of a refinement study."""
    elements: int
    h: float
    dofs: int
    errors: dict[str, float]


class ErrorReport(typing.NamedTuple):
    degree: int
    entries: tuple[MeshErrors, ...]

    def orders(self, norm: str) -> list[typing.Optional[float]]:
        """EOC per entry; the first entry has none."""
        if len(self.entries) < 2:
            return [None] * len(self.entries)
        return [None] + eoc([entry.errors[norm] for entry in self.entries],
                            [entry.h for entry in self.entries])


class ConservationReport(typing.NamedTuple):
    """Diagnostics of a trajectory.

    Attributes:
        times: Time of every record.
        drift: |H(t) − H(0)|/|H(0)| of the hypervolume functional H (absolute
            when H(0) = 0).
        number_monotone: Whether the number functional never decreased by
            more than 1e-10.
        min_value: Smallest nodal value seen.
    """
    times: tuple[float, ...]
    drift: tuple[float, ...]
    number_monotone: bool
    min_value: float

    @property
    def max_drift(self) -> float:
        return max(self.drift, default=0.0)


def conservation_report(
        records: typing.Sequence[stepper.StepRecord]) -> ConservationReport:
    """Summarizes the per-step records of a trajectory.

    Raises:
        ValueError: if there are no records.
    """
    if not records:
        raise ValueError('Empty trajectory')
    volumes = np.array([record.hypervolume for record in records])
    numbers = np.array([record.number for record in records])
    scale = abs(volumes[0]) or 1.0
    return ConservationReport(
        times=tuple(record.time for record in records),
        drift=tuple((np.abs(volumes - volumes[0]) / scale).tolist()),
        number_monotone=bool(np.all(np.diff(numbers) >= -_MONOTONE_SLACK)),
        min_value=min(record.min_value for record in records))


def atom_weight(coeffs: npt.ArrayLike, dof_map: fe_basis.DofMap,
                location: float) -> float:
    """Estimates the weight of a point mass at an inner node of a 1D solution.

    The load (u_h, φ_j) at the node is compared with the smooth density
    (u_h, φ_i)/∫φ_i of its two neighbours.  This is a heuristic, not an
    exact weight: it assumes the density around the node is smooth and close
    to the mean of the neighbouring values, so curvature of the continuous
    part at the node leaks into the estimate.

    Raises:
        ValueError: if the mesh is not 1D or location is not an inner node.
    """
    if dof_map.dim != 1:
        raise ValueError('Atom weight is only defined for 1D meshes')
    axis = dof_map.axes[0]
    index = int(np.argmin(np.abs(axis.coordinates - location)))
    if not math.isclose(axis.coordinates[index], location, abs_tol=1e-9) or (
            not 0 < index < axis.size - 1):
        raise ValueError(f'No inner node at ‘{location:g}’')
    points = fe_basis.default_points(axis.degree)
    unit = ka.FactorProduct.of()
    load = operators.weighted_matrix(axis, unit, points) @ np.asarray(
        coeffs, dtype=np.float64)
    number = operators.weighted_vector(axis, unit, points)
    density = (load[index - 1] / number[index - 1] +
               load[index + 1] / number[index + 1]) / 2
    return float(load[index] - density * number[index])
