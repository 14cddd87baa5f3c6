"""Factorized Galerkin operators of the collisional breakage equation.

For a separable collision kernel Γ = Σ_t c_t Π_a g_{t,a}(y_a) h_{t,a}(z_a) the
weak loss and gain forms tested against φ_j collapse into a sum of
interaction terms

    N(α) = Σ_k coef_k · (⊗_a L_{k,a}) α · ((⊗_a v_{k,a}) · α)

where v_{t,a}[i] = ∫ h_{t,a} φ_i and L is either the weighted Gram matrix
W_{t,a}[j,i] = ∫ g_{t,a} φ_j φ_i (loss, coef = c_t) or the gain matrix
Ĝ[j,i] = ∫ φ_j(x) f(x) ∫_x^{x_max} q(y) g(y) φ_i(y) dy dx (coef = −b_s c_t).
Only per-axis factors are stored; multidimensional products are applied
axis by axis.
"""

import concurrent.futures
import dataclasses
import functools
import json
import logging
import math
import pathlib
import typing

import numpy as np
import numpy.typing as npt

from . import fe_basis
from . import kernel_algebra as ka
from . import linalg

Array = npt.NDArray[np.float64]

_LOGGER = logging.getLogger('ncbe.operators')

NONLINEARITIES = ('consistent', 'hadamard')

# Gauss points per (sub-)panel for non-polynomial integrands.
_SMOOTH_POINTS = 10
_SINGULAR_POINTS = 20

_DUMP_FORMAT = 'ncbe-operators-1'


def _policy(product: ka.FactorProduct, extra_degree: int,
            base: int) -> fe_basis.QuadraturePolicy:
    """Chooses a quadrature for product · (polynomial of extra_degree)."""
    degree = product.polynomial_degree
    if degree is not None:
        return fe_basis.QuadraturePolicy(
            max(base, fe_basis.points_for_degree(degree + extra_degree)))
    points = _SINGULAR_POINTS if product.singular else _SMOOTH_POINTS
    return fe_basis.QuadraturePolicy(max(base, points),
                                     singular=product.singular)


def panel_quadrature(breaks: npt.ArrayLike,
                     policy: fe_basis.QuadraturePolicy) -> fe_basis.QuadratureRule:
    """Composite rule over consecutive panels [breaks[k], breaks[k + 1]]."""
    edges = np.asarray(breaks, dtype=np.float64)
    lo = edges[:-1]
    hi = edges[1:]
    graded = policy.singular & (lo < hi - lo)
    ref = fe_basis.gauss_rule(policy.points)
    width = (hi - lo)[~graded]
    points = [(lo[~graded][:, None] + width[:, None] * ref.points).ravel()]
    weights = [(width[:, None] * ref.weights).ravel()]
    for left, right in zip(lo[graded], hi[graded]):
        rule = policy.rule(left, right)
        points.append(rule.points)
        weights.append(rule.weights)
    return fe_basis.QuadratureRule(np.concatenate(points),
                                   np.concatenate(weights))


def _accumulate(size: int, rows: npt.NDArray[np.int64],
                cols: npt.NDArray[np.int64], left: Array, right: Array,
                weights: Array) -> Array:
    """Returns Σ_p weights[p] · left[p]ᵀ right[p] scattered into a matrix."""
    out = np.zeros((size, size))
    np.add.at(out, (rows[:, :, None], cols[:, None, :]),
              weights[:, None, None] * left[:, :, None] * right[:, None, :])
    return out


def weighted_matrix(axis: fe_basis.AxisDofMap, weight: ka.FactorProduct,
                    base_points: int) -> Array:
    """Returns the Gram matrix ∫ weight φ_j φ_i over one axis."""
    rule = panel_quadrature(axis.axis.nodes,
                            _policy(weight, 2 * axis.degree, base_points))
    elements, values = axis.basis_values(rule.points)
    dofs = axis.element_dofs[elements]
    return _accumulate(axis.size, dofs, dofs, values, values,
                       rule.weights * weight(rule.points))


def weighted_vector(axis: fe_basis.AxisDofMap, weight: ka.FactorProduct,
                    base_points: int) -> Array:
    """Returns the functional ∫ weight φ_i over one axis."""
    rule = panel_quadrature(axis.axis.nodes,
                            _policy(weight, axis.degree, base_points))
    elements, values = axis.basis_values(rule.points)
    out = np.zeros(axis.size)
    np.add.at(out, axis.element_dofs[elements],
              (rule.weights * weight(rule.points))[:, None] * values)
    return out


def function_vector(axis: fe_basis.AxisDofMap,
                    fn: typing.Callable[[Array], Array],
                    points: int = _SMOOTH_POINTS) -> Array:
    """Returns ∫ fn φ_i over one axis for a smooth callable `fn`."""
    rule = panel_quadrature(axis.axis.nodes, fe_basis.QuadraturePolicy(points))
    elements, values = axis.basis_values(rule.points)
    out = np.zeros(axis.size)
    np.add.at(out, axis.element_dofs[elements],
              (rule.weights * fn(rule.points))[:, None] * values)
    return out


def _partial_integrals(axis: fe_basis.AxisDofMap, inner: ka.FactorProduct,
                       policy: fe_basis.QuadraturePolicy, xs: Array,
                       elements: npt.NDArray[np.int64]) -> Array:
    """Returns ∫_x^{b_e} inner(y) ψ_i(y) dy for each x in its element e."""
    nodes = axis.axis.nodes
    basis = fe_basis.reference_basis(axis.degree)
    lo = nodes[elements]
    hi = nodes[elements + 1]
    out = np.zeros((len(xs), axis.degree + 1))
    graded = policy.singular & (xs < hi - xs)
    plain = ~graded
    ref = fe_basis.gauss_rule(policy.points)
    width = (hi - xs)[plain]
    ys = xs[plain][:, None] + width[:, None] * ref.points
    ws = width[:, None] * ref.weights * inner(ys)
    xi = (ys - lo[plain][:, None]) / (hi - lo)[plain][:, None]
    out[plain] = np.einsum('pm,pmi->pi', ws, basis.values(xi))
    for index in np.flatnonzero(graded):
        rule = policy.rule(xs[index], hi[index])
        xi = (rule.points - lo[index]) / (hi[index] - lo[index])
        out[index] = (rule.weights * inner(rule.points)) @ basis.values(xi)
    return out


def gain_matrix(axis: fe_basis.AxisDofMap, outer: ka.FactorProduct,
                inner: ka.FactorProduct, base_points: int) -> Array:
    """Returns Ĝ[j,i] = ∫ φ_j(x) outer(x) ∫_x^{x_max} inner(y) φ_i(y) dy dx.

    The inner integral is split at the mesh nodes: whole elements to the right
    of x contribute through suffix sums of per-element integrals, the element
    containing x through a mapped rule on [x, b_e].
    """
    r = axis.degree
    num = axis.axis.num_elements
    inner_policy = _policy(inner, r, base_points)
    rule = panel_quadrature(axis.axis.nodes, inner_policy)
    elements, values = axis.basis_values(rule.points)
    per_element = np.zeros((num, axis.size))
    np.add.at(per_element,
              (elements[:, None], axis.element_dofs[elements]),
              (rule.weights * inner(rule.points))[:, None] * values)
    suffix = np.zeros((num, axis.size))
    suffix[:-1] = np.cumsum(per_element[::-1], axis=0)[::-1][1:]

    outer_degree = outer.polynomial_degree
    inner_degree = inner.polynomial_degree
    if outer_degree is not None and inner_degree is not None:
        outer_policy = fe_basis.QuadraturePolicy(
            max(base_points,
                fe_basis.points_for_degree(outer_degree + inner_degree +
                                           2 * r + 1)))
    else:
        singular = outer.singular or inner.singular
        outer_policy = fe_basis.QuadraturePolicy(
            max(base_points, _SINGULAR_POINTS if singular else _SMOOTH_POINTS),
            singular=singular)
    rule = panel_quadrature(axis.axis.nodes, outer_policy)
    elements, values = axis.basis_values(rule.points)
    weighted = (rule.weights * outer(rule.points))[:, None] * values

    out = np.zeros((axis.size, axis.size))
    per_row = np.zeros((num, r + 1))
    np.add.at(per_row, elements, weighted)
    for local in range(r + 1):
        out[axis.element_dofs[:, local]] += per_row[:, local, None] * suffix
    partial = _partial_integrals(axis, inner, inner_policy, rule.points,
                                 elements)
    dofs = axis.element_dofs[elements]
    np.add.at(out, (dofs[:, :, None], dofs[:, None, :]),
              weighted[:, :, None] * partial[:, None, :])
    return out


def dirac_gain_matrix(axis: fe_basis.AxisDofMap,
                      atoms: typing.Sequence[tuple[float, float]],
                      inner: ka.FactorProduct, base_points: int) -> Array:
    """Returns Σ_m ∫ φ_j(x) (w_m/a_m) inner(x/a_m) φ_i(x/a_m) dx.

    Each atom only reaches x ≤ a_m·x_max; the integral is split at the mesh
    nodes and their images a_m·x_k so that every panel sees polynomial
    pieces of both basis functions.
    """
    policy = _policy(inner, 2 * axis.degree, base_points)
    nodes = axis.axis.nodes
    out = np.zeros((axis.size, axis.size))
    for ratio, weight in atoms:
        upper = ratio * axis.axis.x_max
        if upper <= axis.axis.x_min:
            continue
        breaks = np.unique(np.concatenate((nodes, ratio * nodes)))
        breaks = breaks[(breaks >= axis.axis.x_min) & (breaks <= upper)]
        if breaks[-1] < upper:
            breaks = np.append(breaks, upper)
        rule = panel_quadrature(breaks, policy)
        parents = rule.points / ratio
        rows, left = axis.basis_values(rule.points)
        cols, right = axis.basis_values(parents)
        out += _accumulate(axis.size, axis.element_dofs[rows],
                           axis.element_dofs[cols], left, right,
                           rule.weights * weight / ratio * inner(parents))
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class MassMatrix:
    """Per-axis factors M_a of M = M_1 ⊗ … ⊗ M_d."""
    axes: tuple[Array, ...]

    def apply(self, vec: Array) -> Array:
        return linalg.kron_apply(self.axes, vec)

    def dense(self) -> Array:
        return linalg.kron_dense(self.axes)


@dataclasses.dataclass(frozen=True, eq=False)
class FactorizedTerm:
    """coef · (⊗ left) α · ((⊗ right) · α)."""
    coef: float
    left: tuple[Array, ...]
    right: tuple[Array, ...]


@dataclasses.dataclass(frozen=True, eq=False)
class LossOperator:
    terms: tuple[FactorizedTerm, ...]


@dataclasses.dataclass(frozen=True, eq=False)
class GainOperator:
    """Gain terms; coefficients are the positive products b_s·c_t."""
    terms: tuple[FactorizedTerm, ...]


class _AxisCache:
    """Memoizes per-axis matrices so equal axes are assembled once."""

    def __init__(self) -> None:
        self._store: dict[tuple[typing.Any, ...], Array] = {}

    def get(self, kind: str, axis: fe_basis.AxisDofMap,
            params: tuple[typing.Any, ...],
            build: typing.Callable[[], Array]) -> Array:
        key = (kind, axis.axis.nodes.tobytes(), axis.degree) + params
        if (value := self._store.get(key)) is None:
            value = build()
            value.setflags(write=False)
            self._store[key] = value
        return value


def _product_key(product: ka.FactorProduct) -> tuple[typing.Any, ...]:
    return (product.coef, product.power, product.rest)


def assemble_mass(dof_map: fe_basis.DofMap,
                  quad_points: typing.Optional[int] = None) -> MassMatrix:
    """Assembles the exact Gram matrix of the basis per axis."""
    points = quad_points or fe_basis.default_points(dof_map.degree)
    unit = ka.FactorProduct.of()
    return MassMatrix(
        tuple(weighted_matrix(axis, unit, points) for axis in dof_map.axes))


def _collision_vectors(dof_map: fe_basis.DofMap,
                       term: ka.SeparableTerm, points: int,
                       cache: _AxisCache) -> tuple[Array, ...]:
    vectors = []
    for axis, factor in zip(dof_map.axes, term.second):
        product = ka.FactorProduct.of(factor)
        vectors.append(
            cache.get('vector', axis, (_product_key(product), points),
                      functools.partial(weighted_vector, axis, product,
                                        points)))
    return tuple(vectors)


def assemble_loss(dof_map: fe_basis.DofMap,
                  collision: ka.CollisionKernel,
                  quad_points: typing.Optional[int] = None,
                  cache: typing.Optional[_AxisCache] = None) -> LossOperator:
    """Assembles W_t and v_t for every collision term."""
    _check_dim(dof_map, collision.dim)
    points = quad_points or fe_basis.default_points(dof_map.degree)
    cache = cache or _AxisCache()
    terms = []
    for term in collision.terms:
        mats = []
        for axis, factor in zip(dof_map.axes, term.first):
            product = ka.FactorProduct.of(factor)
            mats.append(
                cache.get('gram', axis, (_product_key(product), points),
                          functools.partial(weighted_matrix, axis, product,
                                            points)))
        terms.append(
            FactorizedTerm(term.coef, tuple(mats),
                           _collision_vectors(dof_map, term, points, cache)))
    return LossOperator(tuple(terms))


def assemble_gain(dof_map: fe_basis.DofMap,
                  breakage: ka.BreakageKernel,
                  collision: ka.CollisionKernel,
                  quad_points: typing.Optional[int] = None,
                  cache: typing.Optional[_AxisCache] = None,
                  jobs: int = 1) -> GainOperator:
    """Assembles the gain matrices for every (breakage, collision) term pair.

    Raises:
        ValueError: if kernel dimensions do not match the mesh.
    """
    _check_dim(dof_map, collision.dim)
    _check_dim(dof_map, breakage.dim)
    points = quad_points or fe_basis.default_points(dof_map.degree)
    cache = cache or _AxisCache()

    tasks: list[tuple[float, list[typing.Callable[[], Array]],
                      ka.SeparableTerm]] = []
    for cterm in collision.terms:
        if isinstance(breakage, ka.DiracBreakage):
            builders = []
            for axis, factor in zip(dof_map.axes, cterm.first):
                inner = ka.FactorProduct.of(factor)
                builders.append(
                    functools.partial(
                        cache.get, 'dirac', axis,
                        (breakage.atoms, _product_key(inner), points),
                        functools.partial(dirac_gain_matrix, axis,
                                          breakage.atoms, inner, points)))
            tasks.append((cterm.coef, builders, cterm))
            continue
        for bterm in breakage.terms:
            builders = []
            for axis, fragment, parent, rate in zip(dof_map.axes, bterm.first,
                                                    bterm.second, cterm.first):
                outer = ka.FactorProduct.of(fragment)
                inner = ka.FactorProduct.of(parent, rate)
                builders.append(
                    functools.partial(
                        cache.get, 'gain', axis,
                        (_product_key(outer), _product_key(inner), points),
                        functools.partial(gain_matrix, axis, outer, inner,
                                          points)))
            tasks.append((bterm.coef * cterm.coef, builders, cterm))

    def build(task: tuple[float, list[typing.Callable[[], Array]],
                          ka.SeparableTerm]) -> FactorizedTerm:
        coef, builders, cterm = task
        return FactorizedTerm(
            coef, tuple(builder() for builder in builders),
            _collision_vectors(dof_map, cterm, points, cache))

    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            return GainOperator(tuple(pool.map(build, tasks)))
    return GainOperator(tuple(build(task) for task in tasks))


def _check_dim(dof_map: fe_basis.DofMap, dim: int) -> None:
    if dof_map.dim != dim:
        raise ValueError(f'Kernel of dimension {dim} on a {dof_map.dim}D mesh')


@dataclasses.dataclass(frozen=True, eq=False)
class OperatorSet:
    """Everything the time stepper needs, all factors per axis.

    Attributes:
        shape: Number of DOFs along each axis.
        mass: Mass matrix factors.
        terms: Interaction terms, loss with positive and gain with negative
            coefficients.
        number: Per-axis factors of w⁽⁰⁾_j = ∫φ_j.
        hypervolume: Per-axis factors of w⁽¹⁾_j = ∫(Πx_a)φ_j.
        nonlinearity: ‘consistent’ for the full bilinear contraction or
            ‘hadamard’ for the diagonal contraction Σ_i A(φ_i,φ_i;φ_j)α_i².
    """
    shape: tuple[int, ...]
    mass: MassMatrix
    terms: tuple[FactorizedTerm, ...]
    number: tuple[Array, ...]
    hypervolume: tuple[Array, ...]
    nonlinearity: str = 'consistent'

    def __post_init__(self) -> None:
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f'Invalid nonlinearity ‘{self.nonlinearity}’')

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @functools.cached_property
    def number_functional(self) -> Array:
        return linalg.kron_vector(self.number)

    @functools.cached_property
    def hypervolume_functional(self) -> Array:
        return linalg.kron_vector(self.hypervolume)

    @functools.cached_property
    def mass_dense(self) -> Array:
        return self.mass.dense()

    @functools.cached_property
    def diagonal_terms(self) -> tuple[tuple[float, tuple[Array, ...]], ...]:
        """(coef, L_a·diag(v_a)) pairs used by the Hadamard contraction."""
        return tuple((term.coef,
                      tuple(left * right[None, :]
                            for left, right in zip(term.left, term.right)))
                     for term in self.terms)


def kronecker_compose(dof_map: fe_basis.DofMap,
                      mass: MassMatrix,
                      loss: LossOperator,
                      gain: GainOperator,
                      nonlinearity: str = 'consistent',
                      quad_points: typing.Optional[int] = None) -> OperatorSet:
    """Combines per-axis operators into the tensor-product operator set."""
    points = quad_points or fe_basis.default_points(dof_map.degree)
    unit = ka.FactorProduct.of()
    identity = ka.FactorProduct.of(ka.monomial(1))
    terms = list(loss.terms)
    terms.extend(
        FactorizedTerm(-term.coef, term.left, term.right)
        for term in gain.terms)
    return OperatorSet(
        shape=dof_map.shape,
        mass=mass,
        terms=tuple(terms),
        number=tuple(
            weighted_vector(axis, unit, points) for axis in dof_map.axes),
        hypervolume=tuple(
            weighted_vector(axis, identity, points) for axis in dof_map.axes),
        nonlinearity=nonlinearity)


def assemble_operators(dof_map: fe_basis.DofMap,
                       collision: ka.CollisionKernel,
                       breakage: ka.BreakageKernel,
                       *,
                       nonlinearity: str = 'consistent',
                       quad_points: typing.Optional[int] = None,
                       jobs: int = 1) -> OperatorSet:
    """Assembles mass, loss and gain operators and composes them."""
    cache = _AxisCache()
    mass = assemble_mass(dof_map, quad_points)
    loss = assemble_loss(dof_map, collision, quad_points, cache)
    gain = assemble_gain(dof_map, breakage, collision, quad_points, cache,
                         jobs)
    _LOGGER.debug('Assembled %d interaction terms on %s DOFs',
                  len(loss.terms) + len(gain.terms), dof_map.shape)
    return kronecker_compose(dof_map, mass, loss, gain, nonlinearity,
                             quad_points)


def nonlinear_residual(ops: OperatorSet, coeffs: npt.ArrayLike) -> Array:
    """Returns N(α) = loss(α) − gain(α)."""
    alpha = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros(ops.size)
    if ops.nonlinearity == 'hadamard':
        square = alpha * alpha
        for coef, scaled in ops.diagonal_terms:
            out += coef * linalg.kron_apply(scaled, square)
        return out
    for term in ops.terms:
        out += term.coef * linalg.kron_dot(
            term.right, alpha) * linalg.kron_apply(term.left, alpha)
    return out


class JacobianAction(typing.NamedTuple):
    """Matrix-free ∂N/∂α at a fixed α.

    Attributes:
        scales: v_k·α per term (consistent mode only).
        images: coef_k·(⊗L_k)α per term (consistent mode only).
    """
    ops: OperatorSet
    alpha: Array
    scales: tuple[float, ...]
    images: tuple[Array, ...]

    def apply(self, direction: Array) -> Array:
        ops = self.ops
        out = np.zeros(ops.size)
        if ops.nonlinearity == 'hadamard':
            scaled = 2 * self.alpha * direction
            for coef, mats in ops.diagonal_terms:
                out += coef * linalg.kron_apply(mats, scaled)
            return out
        for term, scale, image in zip(ops.terms, self.scales, self.images):
            out += term.coef * scale * linalg.kron_apply(term.left, direction)
            out += image * linalg.kron_dot(term.right, direction)
        return out


def jacobian_action(ops: OperatorSet, coeffs: npt.ArrayLike) -> JacobianAction:
    alpha = np.asarray(coeffs, dtype=np.float64)
    if ops.nonlinearity == 'hadamard':
        return JacobianAction(ops, alpha, (), ())
    scales = tuple(linalg.kron_dot(term.right, alpha) for term in ops.terms)
    images = tuple(term.coef * linalg.kron_apply(term.left, alpha)
                   for term in ops.terms)
    return JacobianAction(ops, alpha, scales, images)


def nonlinear_jacobian(ops: OperatorSet, coeffs: npt.ArrayLike) -> Array:
    """Returns the dense Jacobian Σ coef[(v·α)L + (Lα)vᵀ]."""
    alpha = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros((ops.size, ops.size))
    if ops.nonlinearity == 'hadamard':
        for coef, mats in ops.diagonal_terms:
            out += coef * linalg.kron_dense(mats) * (2 * alpha)[None, :]
        return out
    action = jacobian_action(ops, alpha)
    for term, scale, image in zip(ops.terms, action.scales, action.images):
        out += term.coef * scale * linalg.kron_dense(term.left)
        out += np.outer(image, linalg.kron_vector(term.right))
    return out


def _blocks(ops: OperatorSet) -> list[Array]:
    blocks = list(ops.mass.axes) + list(ops.number) + list(ops.hypervolume)
    for term in ops.terms:
        blocks.extend(term.left)
        blocks.extend(term.right)
    return blocks


def save_operators(ops: OperatorSet, path: pathlib.Path,
                   key: dict[str, typing.Any]) -> None:
    """Writes operators as a JSON header line followed by float64 blocks.

    Args:
        ops: Operators to dump.
        path: Destination file.
        key: Identification (case, kernel expressions, degree, …) which
            `load_operators` compares before reusing the file.
    """
    blocks = _blocks(ops)
    header = {
        'format': _DUMP_FORMAT,
        'key': key,
        'shape': list(ops.shape),
        'nonlinearity': ops.nonlinearity,
        'coefs': [term.coef for term in ops.terms],
        'blocks': [list(block.shape) for block in blocks],
    }
    tmp = path.with_suffix(path.suffix + '.tmp')
    with open(tmp, 'wb') as wr:
        wr.write(json.dumps(header, sort_keys=True).encode('utf-8') + b'\n')
        for block in blocks:
            wr.write(np.ascontiguousarray(block, dtype='<f8').tobytes())
    tmp.replace(path)


def load_operators(path: pathlib.Path,
                   key: dict[str, typing.Any]) -> typing.Optional[OperatorSet]:
    """Reads operators written by `save_operators`.

    Returns:
        The operators or None if the file is missing or was written for
        a different key.
    """
    try:
        with open(path, 'rb') as rd:
            header = json.loads(rd.readline().decode('utf-8'))
            payload = rd.read()
    except FileNotFoundError:
        return None
    except (OSError, ValueError) as ex:
        _LOGGER.warning('%s: ignoring unreadable operator dump: %s', path, ex)
        return None
    if header.get('format') != _DUMP_FORMAT or header.get('key') != json.loads(
            json.dumps(key)):
        _LOGGER.info('%s: operator dump key mismatch; reassembling', path)
        return None
    shapes = [tuple(shape) for shape in header['blocks']]
    sizes = [math.prod(shape) for shape in shapes]
    if sum(sizes) * 8 != len(payload):
        _LOGGER.warning('%s: truncated operator dump; reassembling', path)
        return None
    flat = np.frombuffer(payload, dtype='<f8')
    offsets = np.cumsum([0] + sizes)
    blocks = [
        flat[start:end].reshape(shape).astype(np.float64)
        for start, end, shape in zip(offsets, offsets[1:], shapes)
    ]
    dim = len(header['shape'])
    mass = MassMatrix(tuple(blocks[:dim]))
    number = tuple(blocks[dim:2 * dim])
    hypervolume = tuple(blocks[2 * dim:3 * dim])
    rest = blocks[3 * dim:]
    terms = []
    for index, coef in enumerate(header['coefs']):
        chunk = rest[2 * dim * index:2 * dim * (index + 1)]
        terms.append(FactorizedTerm(coef, tuple(chunk[:dim]),
                                    tuple(chunk[dim:])))
    return OperatorSet(shape=tuple(header['shape']),
                       mass=mass,
                       terms=tuple(terms),
                       number=number,
                       hypervolume=hypervolume,
                       nonlinearity=header['nonlinearity'])
