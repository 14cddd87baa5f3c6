"""Time integration: L² projection, backward Euler and BDF2 with Newton."""

import dataclasses
import logging
import math
import time as timelib
import typing

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse.linalg

from . import fe_basis
from . import linalg
from . import operators

Array = npt.NDArray[np.float64]
AxisFn = typing.Callable[[Array], Array]
SourceFn = typing.Callable[[float], Array]

_LOGGER = logging.getLogger('ncbe.stepper')

SCHEMES = ('bdf2', 'backward_euler')

# Relative floor of the Newton tolerance; residuals cannot drop below the
# rounding error of the terms they are made of.
_ROUNDING_FLOOR = 1e-13
_GMRES_RESTART = 60


class NewtonFailure(RuntimeError):
    """Newton iteration did not reach the tolerance.

    Attributes:
        history: Scaled residual norms, one per iterate.
        time: Time level being solved for or NaN if unknown.
        step: Step index being solved for or -1 if unknown.
    """

    def __init__(self,
                 message: str,
                 history: typing.Sequence[float],
                 time: float = math.nan,
                 step: int = -1) -> None:
        super().__init__(message)
        self.history = tuple(history)
        self.time = time
        self.step = step


@dataclasses.dataclass(frozen=True)
class StepperConfig:
    """Time stepping parameters.

    Attributes:
        tau: Time step.
        final_time: End of the time interval; rounded to a whole number of
            steps.
        newton_tol: Tolerance on ‖F‖₂/√n.
        max_newton_iters: Newton iterations allowed per step.
        scheme: ‘bdf2’ (backward Euler start) or ‘backward_euler’.
        max_halvings: How many times a Newton update may be halved when it
            increases the residual.
        dense_limit: Largest system solved with a dense factorization; larger
            ones use preconditioned GMRES.
    """
    tau: float
    final_time: float
    newton_tol: float = 1e-11
    max_newton_iters: int = 25
    scheme: str = 'bdf2'
    max_halvings: int = 5
    dense_limit: int = 4096

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValueError(f'Invalid time step ‘{self.tau}’')
        if not self.final_time >= self.tau:
            raise ValueError(f'Final time ‘{self.final_time}’ shorter than '
                             f'time step ‘{self.tau}’')
        if not self.newton_tol > 0:
            raise ValueError(f'Invalid Newton tolerance ‘{self.newton_tol}’')
        if self.max_newton_iters < 1:
            raise ValueError(
                f'Invalid Newton iteration limit ‘{self.max_newton_iters}’')
        if self.scheme not in SCHEMES:
            raise ValueError(f'Invalid time stepping scheme ‘{self.scheme}’')
        if self.max_halvings < 0:
            raise ValueError(
                f'Invalid number of halvings ‘{self.max_halvings}’')

    @property
    def num_steps(self) -> int:
        return max(1, round(self.final_time / self.tau))


@dataclasses.dataclass(frozen=True, eq=False)
class SolverState:
    """The rolling pair of time levels.

    Attributes:
        alpha: α^n.
        previous: α^{n−1} or None at the first level.
        step: n.
        time: t^n = n·τ.
        iterations: Newton iterations spent on the last step.
        residual: Final scaled residual norm of the last step.
    """
    alpha: Array
    previous: typing.Optional[Array]
    step: int
    time: float
    iterations: int = 0
    residual: float = 0.0


@dataclasses.dataclass(frozen=True)
class SmoothDatum:
    """u₀(x) = scale · Π_a factors[a](x_a)."""
    factors: tuple[AxisFn, ...]
    scale: float = 1.0


@dataclasses.dataclass(frozen=True)
class DiracDatum:
    """u₀ = weight · δ(x − location)."""
    location: tuple[float, ...]
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.weight > 0:
            raise ValueError(f'Non-positive Dirac weight ‘{self.weight:g}’')


InitialDatum = typing.Union[SmoothDatum, DiracDatum]


def project_initial(datum: InitialDatum,
                    ops: operators.OperatorSet,
                    dof_map: fe_basis.DofMap,
                    quad_points: typing.Optional[int] = None) -> Array:
    """Returns α⁰ of the L² projection of the initial datum.

    Raises:
        ValueError: if the datum does not match the mesh.
    """
    if isinstance(datum, DiracDatum):
        if len(datum.location) != dof_map.dim:
            raise ValueError(f'Atom location of dimension '
                             f'{len(datum.location)} on a {dof_map.dim}D mesh')
        parts = []
        for x0, axis in zip(datum.location, dof_map.axes):
            if not axis.axis.x_min <= x0 <= axis.axis.x_max:
                raise ValueError(f'Atom location ‘{x0:g}’ outside of the '
                                 f'domain [{axis.axis.x_min:g}, '
                                 f'{axis.axis.x_max:g}]')
            parts.append(axis.basis_vector(x0))
        load = datum.weight * linalg.kron_vector(parts)
    else:
        if len(datum.factors) != dof_map.dim:
            raise ValueError(f'Initial datum of dimension {len(datum.factors)} '
                             f'on a {dof_map.dim}D mesh')
        points = max(quad_points or 0, 10)
        load = datum.scale * linalg.kron_vector([
            operators.function_vector(axis, factor, points)
            for axis, factor in zip(dof_map.axes, datum.factors)
        ])
    return linalg.KronCholesky(ops.mass.axes).solve(load)


class NewtonResult(typing.NamedTuple):
    solution: Array
    iterations: int
    history: tuple[float, ...]


class LinearSolver(typing.Protocol):

    def solve(self, rhs: Array) -> Array:
        ...


def _norm(vec: Array) -> float:
    return float(np.linalg.norm(vec)) / math.sqrt(max(len(vec), 1))


def newton_solve(residual: typing.Callable[[Array], Array],
                 jacobian: typing.Callable[[Array], LinearSolver],
                 guess: Array,
                 cfg: StepperConfig,
                 reference: float = 0.0) -> NewtonResult:
    """Solves residual(x) = 0 by Newton's method.

    Args:
        residual: The nonlinear function.
        jacobian: Returns a solver for the Jacobian at a given point.
        guess: Starting point.
        cfg: Tolerance, iteration and damping limits.
        reference: Scaled magnitude of the terms making up the residual;
            the tolerance is never tighter than rounding relative to it.
    Returns:
        Solution, number of iterations and scaled residual norms.
    Raises:
        NewtonFailure: if the tolerance is not reached.
    """
    threshold = max(cfg.newton_tol, _ROUNDING_FLOOR * reference)
    x = np.array(guess, dtype=np.float64)
    value = residual(x)
    norm = _norm(value)
    history = [norm]
    iteration = 0
    while norm > threshold:
        if iteration == cfg.max_newton_iters:
            raise NewtonFailure(
                f'Newton did not converge in {iteration} iterations; '
                f'residual {norm:.3e} > {threshold:.3e}', history)
        iteration += 1
        update = jacobian(x).solve(value)
        step = 1.0
        trial = x - update
        trial_value = residual(trial)
        trial_norm = _norm(trial_value)
        halvings = 0
        while not trial_norm < norm and halvings < cfg.max_halvings:
            halvings += 1
            step /= 2
            trial = x - step * update
            trial_value = residual(trial)
            trial_norm = _norm(trial_value)
        if halvings:
            _LOGGER.warning('Newton step damped by %g at iteration %d '
                            '(residual %.3e → %.3e)', step, iteration, norm,
                            trial_norm)
        if not np.all(np.isfinite(trial_value)):
            raise NewtonFailure(
                f'Non-finite residual at Newton iteration {iteration}',
                history)
        x, value, norm = trial, trial_value, trial_norm
        history.append(norm)
    return NewtonResult(x, iteration, tuple(history))


class DenseSolver:
    """LU factorization of shift·M + ∂N(α)."""

    def __init__(self, ops: operators.OperatorSet, shift: float,
                 alpha: Array) -> None:
        mat = shift * ops.mass_dense + operators.nonlinear_jacobian(ops, alpha)
        self.factor = scipy.linalg.lu_factor(mat, check_finite=False)

    def solve(self, rhs: Array) -> Array:
        return scipy.linalg.lu_solve(self.factor, rhs, check_finite=False)


class KroneckerSolver:
    """GMRES on shift·M + ∂N(α).

    The preconditioner inverts shift·M + U Vᵀ, the mass part plus the rank-K
    outer products (coef_k ⊗L_k α)(⊗v_k)ᵀ of the consistent Jacobian, with the
    Woodbury identity; mass solves go axis by axis.
    """

    def __init__(self,
                 ops: operators.OperatorSet,
                 shift: float,
                 alpha: Array,
                 rtol: float = 1e-12) -> None:
        self.ops = ops
        self.shift = shift
        self.rtol = rtol
        self.action = operators.jacobian_action(ops, alpha)
        self.mass = linalg.KronCholesky(ops.mass.axes)
        if ops.nonlinearity == 'consistent' and ops.terms:
            self.left = np.stack(
                [self.mass.solve(image, shift) for image in self.action.images],
                axis=1)
            self.right = np.stack(
                [linalg.kron_vector(term.right) for term in ops.terms], axis=1)
            capacitance = np.eye(len(ops.terms)) + self.right.T @ self.left
            self.capacitance: typing.Optional[tuple[Array, Array]] = (
                scipy.linalg.lu_factor(capacitance))
        else:
            self.capacitance = None

    def _precondition(self, vec: Array) -> Array:
        out = self.mass.solve(vec, self.shift)
        if self.capacitance is not None:
            out -= self.left @ scipy.linalg.lu_solve(self.capacitance,
                                                     self.right.T @ out)
        return out

    def _apply(self, vec: Array) -> Array:
        return self.shift * self.ops.mass.apply(vec) + self.action.apply(vec)

    def solve(self, rhs: Array) -> Array:
        size = self.ops.size
        system = scipy.sparse.linalg.LinearOperator((size, size),
                                                    matvec=self._apply,
                                                    dtype=np.float64)
        precond = scipy.sparse.linalg.LinearOperator((size, size),
                                                     matvec=self._precondition,
                                                     dtype=np.float64)
        solution, info = scipy.sparse.linalg.gmres(system,
                                                   rhs,
                                                   x0=self._precondition(rhs),
                                                   rtol=self.rtol,
                                                   atol=0.0,
                                                   restart=_GMRES_RESTART,
                                                   maxiter=20,
                                                   M=precond)
        if info:
            _LOGGER.debug('GMRES stopped early (info=%d)', info)
        return typing.cast(Array, solution)


def _linear_solver(ops: operators.OperatorSet, shift: float, alpha: Array,
                   cfg: StepperConfig) -> LinearSolver:
    if ops.size <= cfg.dense_limit:
        return DenseSolver(ops, shift, alpha)
    return KroneckerSolver(ops, shift, alpha)


def _implicit_step(ops: operators.OperatorSet, cfg: StepperConfig,
                   state: SolverState, shift: float, history: Array,
                   guess: Array, source: typing.Optional[SourceFn],
                   scheme: str) -> SolverState:
    """Solves M(shift·x − history) + N(x) = s(t^{n+1})."""
    step = state.step + 1
    time = step * cfg.tau
    rhs = ops.mass.apply(history)
    if source is not None:
        rhs = rhs + source(time)

    def residual(x: Array) -> Array:
        return shift * ops.mass.apply(x) + operators.nonlinear_residual(
            ops, x) - rhs

    def jacobian(x: Array) -> LinearSolver:
        return _linear_solver(ops, shift, x, cfg)

    reference = max(_norm(shift * ops.mass.apply(guess)), _norm(rhs))
    try:
        result = newton_solve(residual, jacobian, guess, cfg, reference)
    except NewtonFailure as ex:
        raise NewtonFailure(f'{scheme} step {step} at t={time:g}: {ex}',
                            ex.history,
                            time=time,
                            step=step) from ex
    return SolverState(result.solution, state.alpha, step, time,
                       result.iterations, result.history[-1])


def be_step(state: SolverState,
            ops: operators.OperatorSet,
            cfg: StepperConfig,
            source: typing.Optional[SourceFn] = None) -> SolverState:
    """Advances by M(α^{n+1} − α^n)/τ + N(α^{n+1}) = s(t^{n+1})."""
    shift = 1 / cfg.tau
    return _implicit_step(ops, cfg, state, shift, state.alpha * shift,
                          state.alpha, source, 'backward Euler')


def bdf2_step(state: SolverState,
              ops: operators.OperatorSet,
              cfg: StepperConfig,
              source: typing.Optional[SourceFn] = None) -> SolverState:
    """Advances by M(3α^{n+1} − 4α^n + α^{n−1})/(2τ) + N(α^{n+1}) = s.

    Raises:
        ValueError: at the first time level, which has no α^{n−1}.
    """
    if state.previous is None:
        raise ValueError('BDF2 step needs two time levels')
    shift = 3 / (2 * cfg.tau)
    history = (4 * state.alpha - state.previous) / (2 * cfg.tau)
    guess = 2 * state.alpha - state.previous
    return _implicit_step(ops, cfg, state, shift, history, guess, source,
                          'BDF2')


class StepRecord(typing.NamedTuple):
    """Diagnostics of one time level."""
    step: int
    time: float
    iterations: int
    residual: float
    number: float
    hypervolume: float
    min_value: float


class Snapshot(typing.NamedTuple):
    time: float
    step: int
    alpha: Array


class Trajectory(typing.NamedTuple):
    snapshots: tuple[Snapshot, ...]
    records: tuple[StepRecord, ...]


def snapshot_steps(times: typing.Iterable[float],
                   cfg: StepperConfig) -> set[int]:
    """Maps requested snapshot times to step indices.

    Times which are not a multiple of τ are moved to the nearest step with a
    warning.

    Raises:
        ValueError: if a time lies outside of [0, T].
    """
    final = cfg.num_steps * cfg.tau
    out: set[int] = set()
    for when in times:
        if not -1e-12 <= when <= final * (1 + 1e-12):
            raise ValueError(f'Snapshot time ‘{when:g}’ outside of '
                             f'[0, {final:g}]')
        step = round(when / cfg.tau)
        if abs(step * cfg.tau - when) > 1e-9 * max(1.0, when):
            _LOGGER.warning('Snapshot t=%g moved to step %d (t=%g)', when,
                            step, step * cfg.tau)
        out.add(step)
    return out


def _record(ops: operators.OperatorSet, state: SolverState) -> StepRecord:
    return StepRecord(step=state.step,
                      time=state.time,
                      iterations=state.iterations,
                      residual=state.residual,
                      number=float(ops.number_functional @ state.alpha),
                      hypervolume=float(ops.hypervolume_functional @
                                        state.alpha),
                      min_value=float(np.min(state.alpha)))


def run(ops: operators.OperatorSet,
        alpha0: npt.ArrayLike,
        cfg: StepperConfig,
        snapshots: typing.Iterable[float] = (),
        *,
        source: typing.Optional[SourceFn] = None,
        stability: typing.Optional[float] = None,
        observer: typing.Optional[typing.Callable[[StepRecord, float],
                                                  None]] = None) -> Trajectory:
    """Marches from t = 0 to T.

    Args:
        ops: Assembled operators.
        alpha0: Initial coefficients.
        cfg: Time stepping parameters.
        snapshots: Times at which to keep the coefficient vector.
        source: Optional t ↦ s(t) added to the right-hand side.
        stability: Stability constant K; a warning is logged when
            τ ≥ 1/(4K).
        observer: Called with the record and wall time of every step.
    Returns:
        Snapshots in time order and one record per time level, t = 0
        included.
    Raises:
        NewtonFailure: if a step does not converge.
    """
    if stability and cfg.tau >= 1 / (4 * stability):
        _LOGGER.warning('Time step %g is not below the stability bound '
                        '1/(4K) = %.3e', cfg.tau, 1 / (4 * stability))
    wanted = snapshot_steps(snapshots, cfg)
    state = SolverState(np.array(alpha0, dtype=np.float64), None, 0, 0.0)
    if state.alpha.shape != (ops.size,):
        raise ValueError(f'Expected {ops.size} coefficients, got '
                         f'{state.alpha.size}')
    kept = []
    records = [_record(ops, state)]
    if 0 in wanted:
        kept.append(Snapshot(0.0, 0, state.alpha.copy()))
    for _ in range(cfg.num_steps):
        started = timelib.monotonic()
        if cfg.scheme == 'backward_euler' or state.previous is None:
            state = be_step(state, ops, cfg, source)
        else:
            state = bdf2_step(state, ops, cfg, source)
        record = _record(ops, state)
        records.append(record)
        if observer is not None:
            observer(record, timelib.monotonic() - started)
        _LOGGER.debug('step %d t=%g: %d Newton iterations, residual %.2e',
                      state.step, state.time, state.iterations,
                      state.residual)
        if state.step in wanted:
            kept.append(
                Snapshot(state.time, state.step, state.alpha.copy()))
    return Trajectory(tuple(kept), tuple(records))
