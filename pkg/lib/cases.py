"""Registry of the breakage experiments.

Every case names its kernels by expressions of the kernel grammar (see
lib.kernelspec) so that they can be written to output headers as is.  Cases
‘m1’ to ‘m6’ compare moments with closed-form (or previously reported)
moment laws; cases ‘c1’ to ‘c4’ have an exact solution and are used for
refinement studies.
"""

import dataclasses
import math
import typing

import numpy as np
import numpy.typing as npt
import scipy.integrate

from fem import kernel_algebra as ka
from fem import source
from fem import stepper

from . import kernelspec

Array = npt.NDArray[np.float64]
MomentLaw = typing.Callable[[float], float]
Order = tuple[int, ...]

# Lower bound of every truncated domain; keeps 2/y and similar kernels finite.
X_MIN = 1e-9

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=200)


def _box(upper: float, dim: int) -> tuple[tuple[float, float], ...]:
    return ((X_MIN, upper),) * dim


def _exp_datum(dim: int) -> stepper.SmoothDatum:
    return stepper.SmoothDatum((lambda x: np.exp(-x),) * dim)


def _constant(value: float) -> MomentLaw:
    return lambda t: value


def _linear(rate: float) -> MomentLaw:
    return lambda t: 1 + rate * t


# Last time ‘m4’ runs to on every registry mesh; reported tables go to t = 5.
M4_HORIZON = 2.0

_M1_NOTE = ('Moment errors come from truncating the initial datum to the '
            'domain only: with the product kernel the consistent scheme '
            'conserves M1 and reproduces dM0/dt = M1^2 exactly, so the '
            'errors do not change with N.')
_M4_NOTE = (f'Horizon capped at t = {M4_HORIZON:g} instead of 5: the number '
            'of particles grows faster than linearly (shattering towards the '
            'lower domain bound), nodal values turn negative and Newton fails '
            'near t = 3.1 to 3.6 for N = 40 to 160.  Reported M0 values '
            'follow 1 + t, the law of the product kernel.')


class AtomicSolution:
    """Solution of the product/binary problem started from δ(x − 1).

    u(x, t) = e^{−tx}(2t + t²(1 − x)) on (0, 1) plus the atom e^{−t}δ(x − 1).
    Calls return the smooth branch only; the atom is queried separately.
    """
    dim = 1
    atom_location = 1.0

    @staticmethod
    def _points(x: npt.ArrayLike) -> Array:
        points = np.asarray(x, dtype=np.float64)
        if points.ndim and points.shape[-1] == 1:
            points = points[..., 0]
        return points

    def __call__(self, x: npt.ArrayLike, t: float) -> Array:
        xs = self._points(x)
        value = np.exp(-t * xs) * (2 * t + t * t * (1 - xs))
        return np.where(xs < self.atom_location, value, 0.0)

    def gradient(self, x: npt.ArrayLike, t: float) -> Array:
        xs = self._points(x)
        value = -t * np.exp(-t * xs) * (2 * t + t * t * (1 - xs)) - (
            t * t * np.exp(-t * xs))
        return np.where(xs < self.atom_location, value, 0.0)[..., None]

    @staticmethod
    def atom_weight(t: float) -> float:
        return math.exp(-t)

    def moment(self, order: typing.Sequence[int], t: float) -> float:
        (k,) = order
        smooth = scipy.integrate.quad(
            lambda x: x**k * float(self(x, t)), 0, self.atom_location,
            **_QUAD_OPTS)[0]
        return smooth + self.atom_weight(t) * self.atom_location**k


ExactSolution = typing.Union[source.ExponentialSolution, AtomicSolution]


class Variant(typing.NamedTuple):
    """Alternative breakage kernel of a case and what it changes.

    Attributes:
        breakage: Breakage kernel expression.
        moments: Moment laws replacing those of the case.
        conserving: Whether the kernel conserves hypervolume.
    """
    breakage: str
    moments: dict[Order, MomentLaw]
    conserving: bool = True


@dataclasses.dataclass(frozen=True, eq=False)
class TestCase:
    """One experiment.

    Attributes:
        id: Identifier used on the command line.
        title: Short description.
        dim: Number of property coordinates.
        collision: Collision kernel expression.
        breakage: Breakage kernel expression of the default variant.
        initial: Initial datum.
        bounds: Per-axis (x_min, x_max) of the truncated domain.
        final_time: Time horizon.
        snapshots: Reporting times.
        moments: Moment laws by multi-index.
        tau: Default time step.
        grids: Default numbers of elements per axis of a refinement sweep.
        degrees: Default polynomial degrees.
        exact: Exact solution if one is known.
        variants: Alternative breakage kernels by name; the default variant
            is named ‘default’ unless listed here.
        default_variant: Name of the variant used when none is requested.
        conserving: Whether the default breakage conserves hypervolume.
        manufactured: Whether a manufactured source is added by default.
        probes: Points at which solution values are reported.
        derived_rate: Initial growth rate of M₀ computed directly from the
            kernels when it disagrees with the moment law.
        notes: Known limitations of the case; written to the provenance of
            every run and to the discrepancy report.
    """
    id: str
    title: str
    dim: int
    collision: str
    breakage: str
    initial: stepper.InitialDatum
    bounds: tuple[tuple[float, float], ...]
    final_time: float
    snapshots: tuple[float, ...]
    moments: dict[Order, MomentLaw]
    tau: float
    grids: tuple[int, ...]
    degrees: tuple[int, ...] = (1,)
    exact: typing.Optional[ExactSolution] = None
    variants: dict[str, Variant] = dataclasses.field(default_factory=dict)
    default_variant: str = 'default'
    conserving: bool = True
    manufactured: bool = False
    probes: tuple[float, ...] = ()
    derived_rate: typing.Optional[float] = None
    notes: tuple[str, ...] = ()

    def variant(self, name: typing.Optional[str] = None) -> Variant:
        """Returns the named variant.

        Raises:
            ValueError: if the case has no such variant.
        """
        name = name or self.default_variant
        if name in self.variants:
            return self.variants[name]
        if name == 'default':
            return Variant(self.breakage, self.moments, self.conserving)
        raise ValueError(f'Unknown variant ‘{name}’ of case ‘{self.id}’')

    def collision_kernel(self) -> ka.CollisionKernel:
        return kernelspec.parse_collision(self.collision, self.dim)

    def breakage_kernel(self,
                        variant: typing.Optional[str] = None
                       ) -> ka.BreakageKernel:
        return kernelspec.parse_breakage(self.variant(variant).breakage,
                                         self.dim)


def _exponential_moments(solution: ExactSolution,
                         orders: typing.Sequence[Order]
                        ) -> dict[Order, MomentLaw]:
    return {
        order: (lambda t, order=order: solution.moment(order, t))
        for order in orders
    }


def _build_registry() -> tuple[TestCase, ...]:
    line = _exp_datum(1)
    m3_literal = Variant('tc3_literal', {
        (0,): _linear(1),
        (1,): _constant(1)
    },
                         conserving=False)
    c1_exact = source.ExponentialSolution(1)
    c2_exact = AtomicSolution()
    c3_exact = source.ExponentialSolution(2)
    c4_exact = source.ExponentialSolution(3)
    # yapf: disable
    return (
        TestCase('m1', 'product kernel, binary breakage', 1,
                 'product', 'binary_uniform', line, _box(10.0, 1),
                 10.0, (2.0, 4.0, 6.0, 8.0, 10.0),
                 {(0,): _linear(1), (1,): _constant(1)},
                 tau=1e-3, grids=(80, 160, 320),
                 notes=(_M1_NOTE,)),
        TestCase('m2', 'constant kernel, two-atom breakage', 1,
                 'constant', 'dirac(0.4:1,0.6:1)', line, _box(5.0, 1),
                 0.75, (0.15, 0.3, 0.45, 0.6, 0.75),
                 {(0,): lambda t: 1 / (1 - t), (1,): _constant(1)},
                 tau=1e-3, grids=(80, 160, 320)),
        TestCase('m3', 'product kernel, ternary breakage', 1,
                 'product', m3_literal.breakage, line, _box(10.0, 1),
                 5.0, (1.0, 2.0, 3.0, 4.0, 5.0),
                 m3_literal.moments,
                 tau=1e-3, grids=(80, 160, 320),
                 variants={
                     'literal': m3_literal,
                     'normalized': Variant('tc3_normalized', {
                         (0,): _linear(2 / 3), (1,): _constant(1)}),
                     'ternary': Variant('tc3_ternary', {
                         (0,): _linear(2), (1,): _constant(1)}),
                 },
                 default_variant='literal', conserving=False),
        TestCase('m4', 'cube-root kernel, binary breakage', 1,
                 'poly(0)', 'binary_uniform', line, _box(10.0, 1),
                 M4_HORIZON, (0.5, 1.0, 1.5, 2.0),
                 {(0,): _linear(49 / 50), (1,): _constant(1)},
                 tau=1e-3, grids=(80, 160, 320),
                 derived_rate=ka.growth_rate_factor(1 / 3),
                 notes=(_M4_NOTE,)),
        TestCase('m5', 'product kernel, 2D uniform breakage', 2,
                 'product', 'multi_uniform(2)',
                 stepper.DiracDatum((1.0, 1.0)), _box(2.0, 2),
                 3.0, (0.6, 1.2, 1.8, 2.4, 3.0),
                 {(0, 0): _linear(3), (1, 1): _constant(1)},
                 tau=1e-3, grids=(80, 120, 160)),
        TestCase('m6', 'product kernel, 3D shattering', 3,
                 'product', 'multi_uniform(3)',
                 stepper.DiracDatum((1.0, 1.0, 1.0)), _box(2.0, 3),
                 2.0, (0.4, 0.8, 1.2, 1.6, 2.0),
                 {(0, 0, 0): _linear(7), (1, 1, 1): _constant(1)},
                 tau=1e-3, grids=(15, 20, 25)),
        TestCase('c1', 'exponential solution', 1,
                 'product', 'binary_uniform', line, _box(5.0, 1),
                 1.0, (0.3, 0.6, 0.9, 1.0),
                 _exponential_moments(c1_exact, [(0,), (1,)]),
                 tau=1e-4, grids=(20, 40, 80, 160, 320),
                 exact=c1_exact, manufactured=True, probes=(5.0,)),
        TestCase('c2', 'mono-disperse start', 1,
                 'product', 'binary_uniform', stepper.DiracDatum((1.0,)),
                 _box(5.0, 1), 1.0, (0.25, 0.5, 1.0),
                 {(0,): _linear(1), (1,): _constant(1)},
                 tau=1e-4, grids=(80, 160, 320, 640, 1280),
                 exact=c2_exact),
        TestCase('c3', '2D exponential solution', 2,
                 'product', 'multi_uniform(2)', _exp_datum(2), _box(2.0, 2),
                 0.5, (0.5,),
                 _exponential_moments(c3_exact, [(0, 0), (1, 1)]),
                 tau=1e-3, grids=(2, 4, 8, 16, 32), degrees=(1, 2, 3),
                 exact=c3_exact, manufactured=True),
        TestCase('c4', '3D exponential solution', 3,
                 'product', 'multi_uniform(3)', _exp_datum(3), _box(2.0, 3),
                 0.5, (0.5,),
                 _exponential_moments(c4_exact, [(0, 0, 0), (1, 1, 1)]),
                 tau=1e-3, grids=(1, 2, 4, 8), degrees=(1, 2, 3),
                 exact=c4_exact, manufactured=True),
    )
    # yapf: enable


_REGISTRY = _build_registry()


def registry() -> tuple[TestCase, ...]:
    return _REGISTRY


def get(case_id: str) -> TestCase:
    """Returns case with given identifier.

    Raises:
        ValueError: if there is no such case.
    """
    for case in _REGISTRY:
        if case.id == case_id:
            return case
    known = ', '.join(case.id for case in _REGISTRY)
    raise ValueError(f'Unknown case ‘{case_id}’; expected one of: {known}')


def _order(case: TestCase, k: typing.Union[int, typing.Sequence[int]]) -> Order:
    if isinstance(k, int):
        return (k,) * case.dim
    return tuple(k)


def exact_moment(case: TestCase,
                 k: typing.Union[int, typing.Sequence[int]],
                 t: float,
                 variant: typing.Optional[str] = None) -> float:
    """Evaluates the moment law of given multi-index.

    A plain integer applies to every axis.

    Raises:
        ValueError: if the case has no law for the multi-index.
    """
    order = _order(case, k)
    law = case.variant(variant).moments.get(order)
    if law is None:
        if case.exact is not None and len(order) == case.dim:
            return case.exact.moment(order, t)
        raise ValueError(f'No moment law for order {order} of case '
                         f'‘{case.id}’')
    return law(t)


def _exact(case: TestCase) -> ExactSolution:
    if case.exact is None:
        raise ValueError(f'Case ‘{case.id}’ has no exact solution')
    return case.exact


def exact_solution(case: TestCase, x: npt.ArrayLike, t: float) -> Array:
    """Evaluates the exact solution; the smooth branch for atomic solutions.

    Raises:
        ValueError: if the case has no exact solution.
    """
    return _exact(case)(x, t)


def exact_gradient(case: TestCase, x: npt.ArrayLike, t: float) -> Array:
    return _exact(case).gradient(x, t)


def exact_atom(case: TestCase,
               t: float) -> typing.Optional[tuple[float, float]]:
    """Returns (location, weight) of the point mass of the exact solution."""
    exact = _exact(case)
    if isinstance(exact, AtomicSolution):
        return exact.atom_location, exact.atom_weight(t)
    return None


def support(case: TestCase) -> typing.Optional[tuple[float, ...]]:
    """Per-axis upper bounds of the smooth part of the exact solution."""
    if isinstance(case.exact, AtomicSolution):
        return (case.exact.atom_location,)
    return None


def initial_value(case: TestCase, x: npt.ArrayLike) -> Array:
    """Evaluates a smooth initial datum at points of shape (…, d)."""
    datum = case.initial
    if not isinstance(datum, stepper.SmoothDatum):
        raise ValueError(f'Case ‘{case.id}’ starts from a point mass')
    points = np.asarray(x, dtype=np.float64)
    if case.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
        points = points[..., None]
    value = np.full(points.shape[:-1], datum.scale)
    for axis, factor in enumerate(datum.factors):
        value = value * factor(points[..., axis])
    return value


class GrowthCheck(typing.NamedTuple):
    """Initial growth rate of the number of particles, two ways.

    Attributes:
        closure: dM₀/dt at t = 0 of the moment law.
        quadrature: ∬ Γ(y, z)(ν(y) − 1) u₀(y) u₀(z) computed from the kernels.
    """
    closure: float
    quadrature: float

    @property
    def consistent(self) -> bool:
        return math.isclose(self.closure, self.quadrature, rel_tol=1e-6)


def _closure_rate(case: TestCase, variant: typing.Optional[str]) -> float:
    law = case.variant(variant).moments[(0,) * case.dim]
    step = 1e-5
    return (law(step) - law(-step)) / (2 * step)


def _kernel_rate(case: TestCase, variant: typing.Optional[str]) -> float:
    collision = case.collision_kernel()
    breakage = case.breakage_kernel(variant)
    datum = case.initial

    def rate(y: Array, z: Array) -> float:
        gamma = ka.eval_collision(collision, y, z)
        fragments = ka.multiplicity(breakage, y)
        return float(np.sum(gamma * (fragments - 1)))

    if isinstance(datum, stepper.DiracDatum):
        location = np.array(datum.location)
        return datum.weight**2 * rate(location, location)
    if case.dim == 1:
        return scipy.integrate.dblquad(
            lambda z, y: rate(np.array([y]), np.array([z])) * float(
                initial_value(case, y) * initial_value(case, z)), 0, math.inf,
            0, math.inf, **{
                'epsabs': 1e-11,
                'epsrel': 1e-10
            })[0]
    # Separable exponential data: the integrals factor per axis as long as the
    # number of fragments does not depend on the parent.
    fragments = ka.multiplicity(breakage, np.ones(case.dim))
    if not math.isclose(float(fragments),
                        float(ka.multiplicity(breakage, np.full(case.dim, 2.0))),
                        rel_tol=1e-12):
        raise ValueError(f'Parent-dependent fragment count in case '
                         f'‘{case.id}’')
    total = 0.0
    for term in collision.terms:
        value = term.coef
        for axis, (first, second) in enumerate(zip(term.first, term.second)):
            factor = datum.factors[axis]
            value *= scipy.integrate.quad(
                lambda y, f=first, g=factor: float(f(y) * g(y)), 0, math.inf,
                **_QUAD_OPTS)[0]
            value *= scipy.integrate.quad(
                lambda z, f=second, g=factor: float(f(z) * g(z)), 0, math.inf,
                **_QUAD_OPTS)[0]
        total += value
    return datum.scale**2 * (float(fragments) - 1) * total


def growth_check(case: TestCase,
                 variant: typing.Optional[str] = None) -> GrowthCheck:
    return GrowthCheck(_closure_rate(case, variant),
                       _kernel_rate(case, variant))


def mass_truncation(case: TestCase) -> float:
    """Relative hypervolume of the initial datum lying outside the domain.

    This is the deviation of M₁…₁ every discretisation of the truncated
    problem starts with, whatever the mesh.
    """
    datum = case.initial
    if isinstance(datum, stepper.DiracDatum):
        return 0.0
    kept = 1.0
    for factor, (lo, hi) in zip(datum.factors, case.bounds):
        inside = scipy.integrate.quad(lambda x, f=factor: x * float(f(x)), lo,
                                      hi, **_QUAD_OPTS)[0]
        full = scipy.integrate.quad(lambda x, f=factor: x * float(f(x)), 0,
                                    math.inf, **_QUAD_OPTS)[0]
        kept *= inside / full
    return 1 - kept


class Discrepancy(typing.NamedTuple):
    """One row of the consistency report of a case variant."""
    case: str
    variant: str
    closure_rate: float
    kernel_rate: float
    hypervolume_defect: float
    fragments: float
    mass_truncation: float
    status: str
    note: str


def discrepancies() -> list[Discrepancy]:
    """Checks moment laws and kernels of every case and variant.

    The hypervolume defect and fragment count are taken at the parent
    y = (1, …, 1).  A row is a ‘MISMATCH’ when the growth rates disagree or
    the kernel loses hypervolume.  Notes of the case are carried along.
    """
    out = []
    for case in _REGISTRY:
        names = list(case.variants) or ['default']
        truncation = mass_truncation(case)
        note = ' '.join(case.notes)
        for name in names:
            kernel = case.breakage_kernel(name)
            parent = np.ones(case.dim)
            check = growth_check(case, name)
            defect = ka.check_hypervolume_conservation(kernel, parent).defect
            fragments = float(ka.multiplicity(kernel, parent))
            status = 'OK'
            if not check.consistent or abs(defect) > 1e-12:
                status = 'MISMATCH'
            out.append(
                Discrepancy(case.id, name, check.closure, check.quadrature,
                            defect, fragments, truncation, status, note))
    return out
