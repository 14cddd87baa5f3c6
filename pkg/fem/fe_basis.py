"""Lagrange bases, Gauss quadrature and degree-of-freedom maps."""

import dataclasses
import functools
import math
import typing

import numpy as np
import numpy.typing as npt

from . import mesh as meshlib

Array = npt.NDArray[np.float64]

SUPPORTED_DEGREES = (1, 2, 3)
MAX_GAUSS_POINTS = 32

# Geometric grading used next to integrable singularities at the origin.
_GRADING = 0.15
_MAX_GRADED_LEVELS = 40


def _check_degree(degree: int) -> None:
    if degree not in SUPPORTED_DEGREES:
        raise ValueError(f'Unsupported degree ‘{degree}’')


@dataclasses.dataclass(frozen=True, eq=False)
class ReferenceBasis:
    """Equispaced Lagrange basis ψ_0, …, ψ_r on the reference interval [0, 1].

    Attributes:
        degree: Polynomial degree r.
        nodes: Reference nodes ξ_k = k/r.
    """
    degree: int
    nodes: Array = dataclasses.field(init=False)

    def __post_init__(self) -> None:
        _check_degree(self.degree)
        nodes = np.arange(self.degree + 1) / self.degree
        nodes.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)

    def values(self, xi: npt.ArrayLike) -> Array:
        """Returns ψ_k(ξ) for all k as an array of shape ξ.shape + (r + 1,)."""
        xi = np.asarray(xi, dtype=np.float64)[..., None]
        out = np.ones(xi.shape[:-1] + (self.degree + 1,))
        for k, node in enumerate(self.nodes):
            for m, other in enumerate(self.nodes):
                if m != k:
                    out[..., k] *= (xi[..., 0] - other) / (node - other)
        return out

    def derivatives(self, xi: npt.ArrayLike) -> Array:
        """Returns ψ'_k(ξ) for all k as an array of shape ξ.shape + (r + 1,)."""
        xi = np.asarray(xi, dtype=np.float64)
        out = np.zeros(xi.shape + (self.degree + 1,))
        for k, node in enumerate(self.nodes):
            others = [other for m, other in enumerate(self.nodes) if m != k]
            denom = math.prod(node - other for other in others)
            for skip in range(len(others)):
                term = np.ones_like(xi)
                for m, other in enumerate(others):
                    if m != skip:
                        term = term * (xi - other)
                out[..., k] += term
            out[..., k] /= denom
        return out


@functools.lru_cache(maxsize=None)
def reference_basis(degree: int) -> ReferenceBasis:
    return ReferenceBasis(degree)


def lagrange_eval(degree: int, k: int, xi: npt.ArrayLike) -> Array:
    """Evaluates the k-th reference Lagrange function of given degree.

    Raises:
        ValueError: if degree is unsupported or k is not in [0, degree].
    """
    _check_degree(degree)
    if not 0 <= k <= degree:
        raise ValueError(f'Invalid basis index ‘{k}’ for degree {degree}')
    return reference_basis(degree).values(xi)[..., k]


def lagrange_grad(degree: int, k: int, xi: npt.ArrayLike) -> Array:
    """Evaluates the derivative of the k-th reference Lagrange function.

    Raises:
        ValueError: if degree is unsupported or k is not in [0, degree].
    """
    _check_degree(degree)
    if not 0 <= k <= degree:
        raise ValueError(f'Invalid basis index ‘{k}’ for degree {degree}')
    return reference_basis(degree).derivatives(xi)[..., k]


class QuadratureRule(typing.NamedTuple):
    """Quadrature points and weights on an interval.

    Reference rules live on [0, 1] and their weights sum to one.
    """
    points: Array
    weights: Array

    def mapped(self, lo: float, hi: float) -> 'QuadratureRule':
        """Returns the rule affinely mapped onto [lo, hi]."""
        return QuadratureRule(lo + (hi - lo) * self.points,
                              (hi - lo) * self.weights)


@functools.lru_cache(maxsize=None)
def gauss_rule(num: int) -> QuadratureRule:
    """Returns the `num`-point Gauss–Legendre rule on [0, 1].

    The rule integrates polynomials of degree up to 2·num − 1 exactly.

    Raises:
        ValueError: if num is not in [1, 32].
    """
    if not 1 <= num <= MAX_GAUSS_POINTS:
        raise ValueError(f'Unsupported number of Gauss points ‘{num}’')
    points, weights = np.polynomial.legendre.leggauss(num)
    points = (points + 1.0) / 2.0
    weights = weights / 2.0
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points, weights)


def points_for_degree(degree: int) -> int:
    """Returns the smallest Gauss rule exact for polynomials of given degree."""
    return max(1, math.ceil((degree + 1) / 2))


def graded_rule(lo: float, hi: float, num: int) -> QuadratureRule:
    """Returns a composite Gauss rule on [lo, hi] graded towards the origin.

    Sub-panels shrink geometrically towards `lo` until they are no wider than
    `lo` itself, which resolves integrands like x^p (p > −1) whose singularity
    sits at x = 0 ≤ lo.  Each sub-panel uses the `num`-point Gauss rule.
    """
    width = hi - lo
    if width <= 0:
        return QuadratureRule(np.zeros(0), np.zeros(0))
    if lo > 0:
        levels = math.ceil(math.log(lo / width) / math.log(_GRADING))
        levels = min(max(levels, 0), _MAX_GRADED_LEVELS)
    else:
        levels = _MAX_GRADED_LEVELS
    if not levels:
        return gauss_rule(num).mapped(lo, hi)
    breaks = lo + width * _GRADING**np.arange(levels + 1)
    breaks = np.concatenate(([lo], breaks[::-1]))
    rule = gauss_rule(num)
    points = []
    weights = []
    for left, right in zip(breaks, breaks[1:]):
        part = rule.mapped(left, right)
        points.append(part.points)
        weights.append(part.weights)
    return QuadratureRule(np.concatenate(points), np.concatenate(weights))


class QuadraturePolicy(typing.NamedTuple):
    """How to integrate over an element or a panel.

    Attributes:
        points: Number of Gauss points per (sub-)panel.
        singular: Whether the integrand may have an integrable singularity at
            the origin, in which case panels close to it use `graded_rule`.
    """
    points: int
    singular: bool = False

    def rule(self, lo: float, hi: float) -> QuadratureRule:
        if self.singular and lo < hi - lo:
            return graded_rule(lo, hi, self.points)
        return gauss_rule(self.points).mapped(lo, hi)


def default_points(degree: int) -> int:
    """Default number of Gauss points per element and axis, r + 3."""
    return degree + 3


@dataclasses.dataclass(frozen=True, eq=False)
class AxisDofMap:
    """Global numbering of the degree-r Lagrange nodes of one axis.

    Element e owns the global indices e·r, …, e·r + r so that nodes shared by
    neighbouring elements have a single index.

    Attributes:
        axis: The partition.
        degree: Polynomial degree r.
        element_dofs: Array of shape (N, r + 1) of global indices.
        coordinates: Coordinates of all rN + 1 global nodes.
    """
    axis: meshlib.Axis1D
    degree: int
    element_dofs: npt.NDArray[np.int64] = dataclasses.field(init=False)
    coordinates: Array = dataclasses.field(init=False)

    def __post_init__(self) -> None:
        _check_degree(self.degree)
        r = self.degree
        num = self.axis.num_elements
        dofs = np.arange(num)[:, None] * r + np.arange(r + 1)[None, :]
        lo = self.axis.nodes[:-1, None]
        coords = np.empty(num * r + 1)
        coords[dofs] = lo + np.diff(self.axis.nodes)[:, None] * (
            np.arange(r + 1) / r)[None, :]
        coords[-1] = self.axis.x_max
        coords[::r] = self.axis.nodes
        object.__setattr__(self, 'element_dofs', dofs)
        object.__setattr__(self, 'coordinates', coords)

    @property
    def size(self) -> int:
        return self.axis.num_elements * self.degree + 1

    def basis_values(self, x: npt.ArrayLike) -> tuple[npt.NDArray[np.int64],
                                                       Array]:
        """Returns containing elements and values of their local basis at x.

        Returns:
            A pair of element indices (shape x.shape) and basis values (shape
            x.shape + (r + 1,)).
        """
        xs = np.asarray(x, dtype=np.float64)
        elements = self.axis.locate(xs)
        lo = self.axis.nodes[elements]
        xi = (xs - lo) / (self.axis.nodes[elements + 1] - lo)
        return elements, reference_basis(self.degree).values(xi)

    def basis_vector(self, x: float) -> Array:
        """Returns the vector (φ_j(x))_j over all global indices."""
        element, values = self.basis_values(x)
        out = np.zeros(self.size)
        out[self.element_dofs[int(element)]] = values
        return out


@dataclasses.dataclass(frozen=True, eq=False)
class DofMap:
    """Lexicographic tensor product of per-axis maps (first axis slowest)."""
    mesh: meshlib.TensorMesh
    degree: int
    axes: tuple[AxisDofMap, ...] = dataclasses.field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, 'axes',
            tuple(AxisDofMap(axis, self.degree) for axis in self.mesh.axes))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(axis.size for axis in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def nodal_coordinates(self) -> list[Array]:
        """Returns per-axis node coordinates shaped for broadcasting.

        Entry a has shape (1, …, n_a, …, 1) so that the arrays broadcast to the
        DOF array shape.
        """
        out = []
        for index, axis in enumerate(self.axes):
            shape = [1] * self.dim
            shape[index] = axis.size
            out.append(axis.coordinates.reshape(shape))
        return out


def build_dof_map(mesh: meshlib.TensorMesh, degree: int) -> DofMap:
    """Returns the global DOF map of the degree-r conforming space on mesh."""
    return DofMap(mesh, degree)


def eval_fe_function(coeffs: npt.ArrayLike, dof_map: DofMap,
                     x: npt.ArrayLike) -> Array:
    """Evaluates u_h = Σ α_i φ_i at one or more points.

    Args:
        coeffs: DOF vector of length dof_map.size.
        dof_map: The DOF map.
        x: A point of shape (d,) or an array of points of shape (…, d).  In 1D a
            scalar or an array of coordinates is also accepted.
    Returns:
        Values at the points.
    Raises:
        ValueError: if coefficient count does not match or a point lies
            outside of the domain.
    """
    alpha = np.asarray(coeffs, dtype=np.float64)
    if alpha.size != dof_map.size:
        raise ValueError(f'Expected {dof_map.size} coefficients, got '
                         f'{alpha.size}')
    points = np.asarray(x, dtype=np.float64)
    if dof_map.dim == 1 and points.ndim <= 1:
        points = points[..., None]
    if points.shape[-1] != dof_map.dim:
        raise ValueError(f'Expected points of dimension {dof_map.dim}')
    batch = points.shape[:-1]
    flat = points.reshape(-1, dof_map.dim)
    tensor = alpha.reshape(dof_map.shape)
    dim = dof_map.dim
    width = dof_map.degree + 1
    index = []
    weight = np.ones((len(flat),) + (width,) * dim)
    for a, axis in enumerate(dof_map.axes):
        elements, values = axis.basis_values(flat[:, a])
        shape = [len(flat)] + [1] * dim
        shape[a + 1] = width
        index.append(axis.element_dofs[elements].reshape(shape))
        weight = weight * values.reshape(shape)
    local = tensor[tuple(index)]
    result = (local * weight).reshape(len(flat), -1).sum(axis=1)
    return result.reshape(batch)
