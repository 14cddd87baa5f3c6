"""Command line interface of the breakage solver.

Usage:

    python -m runner.cli run --case m1 --n 320 --tau 1e-3 --T 10
    python -m runner.cli moments --case m2
    python -m runner.cli convergence --case c3 --degree 1,2,3
    python -m runner.cli list-cases
    python -m runner.cli discrepancies

Settings may also come from a flat TOML file given with --config; command
line flags win.  Outputs go to ‘$NCBE_OUTPUT_ROOT/<case>-<command>’ unless
--output-dir is given.
"""

import argparse
import concurrent.futures
import functools
import logging
import math
import pathlib
import sys
import threading
import time
import typing

import numpy as np
import numpy.typing as npt

from fem import fe_basis
from fem import kernel_algebra as ka
from fem import linalg
from fem import mesh as meshlib
from fem import observables
from fem import operators
from fem import source
from fem import stepper
from lib import cases
from lib import config
from lib import kernelspec
from lib import published

from . import metrics as metricslib
from . import output
from . import utils

_LOGGER = logging.getLogger('ncbe.cli')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_INTERRUPTED = 130

_FAILURE_FILE = 'failure.txt'
_FAILURE_LOCK = threading.Lock()

Array = npt.NDArray[np.float64]
Row = list[output.Cell]


class Job(typing.NamedTuple):
    """One entry of a sweep."""
    elements: int
    degree: int

    def label(self, case: str) -> str:
        return f'{case} N={self.elements} r={self.degree}'


class Solution(typing.NamedTuple):
    job: Job
    dof_map: fe_basis.DofMap
    trajectory: stepper.Trajectory
    conservation: observables.ConservationReport
    seconds: float


class Session:
    """State shared by the jobs of one command.

    Attributes:
        cfg: Resolved configuration.
        case: The case being run.
        collision: Parsed collision kernel.
        breakage: Parsed breakage kernel.
        laws_apply: Whether the kernels are those of the case variant, i.e.
            whether its moment laws, exact solution and published values
            describe the run.
        published: Whether published values of the case describe the run.
        stability: Stability constant K or None when it is unbounded.
        metrics: Metrics of the invocation.
    """

    def __init__(self, cfg: config.RunConfig) -> None:
        self.cfg = cfg
        self.case = cfg.test_case
        self.collision = kernelspec.parse_collision(cfg.collision,
                                                    self.case.dim)
        self.breakage = kernelspec.parse_breakage(cfg.breakage, self.case.dim)
        variant = self.case.variant(cfg.variant)
        self.laws_apply = (cfg.collision == self.case.collision and
                           cfg.breakage == variant.breakage)
        if not self.laws_apply:
            _LOGGER.warning(
                'Kernels differ from those of case %s; exact values are '
                'not reported', self.case.id)
        self.published = self.laws_apply and (cfg.variant
                                              == self.case.default_variant)
        self.metrics = metricslib.RunMetrics()
        bound = ka.stability_constant(self.collision, self.breakage,
                                      self.case.bounds)
        self.stability = bound if math.isfinite(bound) else None

    def exact_moment(self, order: tuple[int, ...],
                     t: float) -> typing.Optional[float]:
        if not self.laws_apply:
            return None
        try:
            return cases.exact_moment(self.case, order, t, self.cfg.variant)
        except ValueError:
            return None

    def has_exact_solution(self) -> bool:
        return self.laws_apply and self.case.exact is not None


def _operators(session: Session, dof_map: fe_basis.DofMap, job: Job,
               jobs: int) -> operators.OperatorSet:
    """Assembles operators or loads them from the cache directory."""
    cfg = session.cfg
    path = None
    key = {
        'case': cfg.case,
        'collision': cfg.collision,
        'breakage': cfg.breakage,
        'bounds': [list(bound) for bound in session.case.bounds],
        'elements': job.elements,
        'degree': job.degree,
        'grid': cfg.grid,
        'ratio': cfg.ratio,
        'seed': cfg.seed,
        'quad_points': cfg.quad_points,
        'nonlinearity': cfg.nonlinearity,
    }
    if cfg.cache_dir is not None:
        utils.directory(cfg.cache_dir)
        path = cfg.cache_dir / (f'{cfg.case}-{cfg.grid}-N{job.elements}-'
                                f'r{job.degree}-{cfg.nonlinearity}.ops')
        ops = operators.load_operators(path, key)
        if ops is not None:
            _LOGGER.debug('%s: reusing operators', path)
            return ops
    ops = operators.assemble_operators(dof_map,
                                       session.collision,
                                       session.breakage,
                                       nonlinearity=cfg.nonlinearity,
                                       quad_points=cfg.quad_points,
                                       jobs=jobs)
    if path is not None:
        operators.save_operators(ops, path, key)
    return ops


def _manufactured_source(
        session: Session, dof_map: fe_basis.DofMap
) -> typing.Optional[typing.Callable[[float], Array]]:
    if not session.cfg.manufactured:
        return None
    exact = session.case.exact
    breakage = session.breakage
    assert isinstance(exact, source.ExponentialSolution)
    assert isinstance(breakage, ka.SmoothBreakage)
    return source.ManufacturedSource(exact, session.collision, breakage,
                                     session.case.bounds).bind(dof_map)


def solve(session: Session, job: Job, jobs: int = 1) -> Solution:
    """Builds the discretisation of one sweep entry and marches it to T.

    Args:
        session: Command state.
        job: Number of elements and degree.
        jobs: Threads the operator assembly may use.
    Raises:
        stepper.NewtonFailure: if a time step does not converge; the failure
            is also appended to failure.txt in the output directory.
    """
    cfg = session.cfg
    case = session.case
    label = job.label(case.id)
    _LOGGER.info('[RUNNING] %s', label)
    started = time.monotonic()
    mesh = meshlib.build_mesh(case.bounds,
                              job.elements,
                              cfg.grid,
                              seed=cfg.seed,
                              ratio=cfg.ratio)
    dof_map = fe_basis.DofMap(mesh, job.degree)
    ops = _operators(session, dof_map, job, jobs)
    session.metrics.set_assembly(case.id, job.elements, job.degree,
                                 time.monotonic() - started, dof_map.size)
    alpha0 = stepper.project_initial(case.initial, ops, dof_map,
                                     cfg.quad_points)
    try:
        trajectory = stepper.run(ops,
                                 alpha0,
                                 cfg.stepper_config(),
                                 cfg.snapshots,
                                 source=_manufactured_source(session, dof_map),
                                 stability=session.stability,
                                 observer=session.metrics.observer(
                                     case.id, job.elements, job.degree))
    except stepper.NewtonFailure as ex:
        _LOGGER.info('[FAILED ] %s', label)
        session.metrics.count_failure(case.id)
        with _FAILURE_LOCK:
            output.write_failure(cfg.output_dir / _FAILURE_FILE, label, ex)
        raise
    report = observables.conservation_report(trajectory.records)
    session.metrics.set_drift(case.id, job.elements, job.degree,
                              report.max_drift)
    seconds = time.monotonic() - started
    _LOGGER.info('[DONE   ] %s in %s; hypervolume drift %.2e', label,
                 utils.format_elapsed(seconds), report.max_drift)
    if not report.number_monotone:
        _LOGGER.warning('%s: number of particles decreased', label)
    return Solution(job, dof_map, trajectory, report, seconds)


def sweep(session: Session, jobs: typing.Sequence[Job]) -> list[Solution]:
    """Solves all jobs, in parallel when there is more than one.

    Results are in the order of `jobs` whatever the order of completion.
    """
    workers = min(len(jobs), session.cfg.jobs or utils.cpu_count())
    if workers <= 1:
        threads = session.cfg.jobs or utils.cpu_count()
        return [solve(session, job, threads) for job in jobs]
    executor = concurrent.futures.ThreadPoolExecutor(workers)
    try:
        return list(executor.map(lambda job: solve(session, job), jobs))
    finally:
        executor.shutdown(wait=True, cancel_futures=True)


def _order_name(order: typing.Sequence[int]) -> str:
    return 'M' + ''.join(str(k) for k in order)


def point_value(alpha: Array, dof_map: fe_basis.DofMap,
                point: typing.Sequence[float]) -> float:
    """Evaluates u_h at a point."""
    return linalg.kron_dot(
        [axis.basis_vector(x) for axis, x in zip(dof_map.axes, point)], alpha)


def errors_at(session: Session, dof_map: fe_basis.DofMap, alpha: Array,
              t: float, norms: typing.Sequence[str]) -> dict[str, float]:
    """Errors against the exact solution in given norms.

    ‘RelL2’ is the L² error over the L² norm of the exact solution; the
    other names are those of observables.NORMS.
    """
    case = session.case
    exact = functools.partial(cases.exact_solution, case, t=t)
    gradient = functools.partial(cases.exact_gradient, case, t=t)
    support = cases.support(case)

    def error(coeffs: Array, norm: str) -> float:
        return observables.norm_error(coeffs,
                                      dof_map,
                                      exact,
                                      norm,
                                      gradient=gradient,
                                      support=support)

    out = {}
    for norm in norms:
        if norm == 'RelL2':
            l2 = out.get('L2')
            if l2 is None:
                l2 = error(alpha, 'L2')
            out[norm] = l2 / error(np.zeros(dof_map.size), 'L2')
        else:
            out[norm] = error(alpha, norm)
    return out


def _prepare(session: Session) -> None:
    utils.directory(session.cfg.output_dir)
    (session.cfg.output_dir / _FAILURE_FILE).unlink(missing_ok=True)


def _finish(session: Session, notes: typing.Sequence[str] = ()) -> None:
    cfg = session.cfg
    notes = list(session.case.notes) + list(notes)
    output.write_provenance(cfg.output_dir / 'provenance.txt', cfg, notes)
    session.metrics.write(cfg.output_dir / 'metrics.prom')
    _LOGGER.info('Results written to %s', cfg.output_dir)


def _trajectory_rows(session: Session,
                     sol: Solution) -> tuple[list[str], list[Row]]:
    """Snapshot table of a run: moments, conservation and errors."""
    case = session.case
    orders = list(case.variant(session.cfg.variant).moments)
    header = ['t', 'step']
    for order in orders:
        name = _order_name(order)
        header += [name, f'{name}_exact', f'{name}_relerr']
    header += [
        'number', 'hypervolume', 'hypervolume_drift', 'iterations', 'residual'
    ]
    with_errors = session.has_exact_solution()
    atom = with_errors and cases.exact_atom(case, 0.0) is not None
    if with_errors:
        header += ['L2', 'RelL2']
    if atom:
        header += ['atom_weight', 'atom_weight_exact']

    rows = []
    for snap in sol.trajectory.snapshots:
        record = sol.trajectory.records[snap.step]
        row: Row = [snap.time, snap.step]
        for order in orders:
            value = observables.moment(snap.alpha, sol.dof_map, order)
            want = session.exact_moment(order, snap.time)
            relerr = None if not want else abs(value - want) / abs(want)
            row += [value, want, relerr]
        row += [
            record.number, record.hypervolume,
            sol.conservation.drift[snap.step], record.iterations,
            record.residual
        ]
        if with_errors:
            errors = errors_at(session, sol.dof_map, snap.alpha, snap.time,
                               ('L2', 'RelL2'))
            row += [errors['L2'], errors['RelL2']]
        if atom:
            location, weight = cases.exact_atom(case, snap.time) or (0.0, 0.0)
            try:
                estimate: typing.Optional[float] = observables.atom_weight(
                    snap.alpha, sol.dof_map, location)
            except ValueError as ex:
                _LOGGER.debug('No atom weight estimate: %s', ex)
                estimate = None
            row += [estimate, weight]
        rows.append(row)
    return header, rows


def _point_rows(session: Session,
                solutions: typing.Sequence[Solution]) -> list[Row]:
    """Solution values at the probe points of the case."""
    case = session.case
    rows = []
    for sol in solutions:
        for x in case.probes:
            table = published.point_values(case.id, x)
            for snap in sol.trajectory.snapshots:
                exact = float(cases.exact_solution(case, x, snap.time))
                value = point_value(snap.alpha, sol.dof_map, (x,))
                row: Row = [
                    sol.job.degree, sol.job.elements, snap.time, x, exact,
                    value,
                    abs(value - exact)
                ]
                index = None if table is None else table.row(snap.time)
                for method in _POINT_METHODS:
                    errors = None if table is None else table.errors.get(
                        method)
                    row.append(None if errors is None or index is None else
                               errors[index])
                rows.append(row)
    return rows


_POINT_METHODS = ('VIM', 'MVIM', 'FVM', 'FEM')
_POINT_HEADER = ['degree', 'n', 't', 'x', 'exact', 'value', 'abs_error'
                ] + [f'{method}_published' for method in _POINT_METHODS]


def _write_points(session: Session,
                  solutions: typing.Sequence[Solution]) -> None:
    if not session.case.probes or not session.has_exact_solution():
        return
    output.write_csv(session.cfg.output_dir / 'points.csv', _POINT_HEADER,
                     _point_rows(session, solutions))


def _write_coefficients(session: Session, sol: Solution) -> None:
    dim = sol.dof_map.dim
    header = [f'x{axis + 1}' for axis in range(dim)] + ['value']
    grids = np.meshgrid(*[axis.coordinates for axis in sol.dof_map.axes],
                        indexing='ij')
    coords = [grid.ravel() for grid in grids]
    for index, snap in enumerate(sol.trajectory.snapshots):
        rows = [[float(coord[node])
                 for coord in coords] + [float(snap.alpha[node])]
                for node in range(sol.dof_map.size)]
        output.write_csv(
            session.cfg.output_dir / f'coefficients-{index}.csv', header,
            typing.cast(list[Row], rows))


def _write_methods(session: Session, rows: typing.Sequence[Row],
                   header: typing.Sequence[str]) -> None:
    """Relative L² errors next to the reported errors of other methods."""
    if not session.published or session.case.id != published.METHOD_CASE:
        return
    t_col = header.index('t')
    rel_col = header.index('RelL2')
    out = []
    for t in published.METHOD_TIMES:
        found = [row for row in rows if math.isclose(
            typing.cast(float, row[t_col]), t, rel_tol=1e-9)]
        if not found:
            continue
        index = published.METHOD_TIMES.index(t)
        out.append([t, found[0][rel_col]] +
                   [method.errors[index] for method in published.METHOD_ERRORS])
    if out:
        output.write_csv(
            session.cfg.output_dir / 'methods.csv', ['t', 'RelL2'] +
            [f'{method.method}_published' for method in published.METHOD_ERRORS],
            out)


def cmd_run(cfg: config.RunConfig) -> None:
    """Solves one case on one mesh and writes the trajectory."""
    session = Session(cfg)
    _prepare(session)
    job = Job(cfg.n[0], cfg.degrees[0])
    sol = solve(session, job, cfg.jobs or utils.cpu_count())
    out = cfg.output_dir
    meshlib.dump_csv(sol.dof_map.mesh, out / 'mesh.csv')
    output.write_csv(out / 'steps.csv', stepper.StepRecord._fields,
                     [list(record) for record in sol.trajectory.records])
    header, rows = _trajectory_rows(session, sol)
    output.write_csv(out / 'trajectory.csv', header, rows)
    _write_points(session, [sol])
    _write_methods(session, rows, header)
    if cfg.save_coefficients:
        _write_coefficients(session, sol)
    _finish(session, [
        f'{job.label(cfg.case)}: {sol.dof_map.size} unknowns, maximum '
        f'hypervolume drift {sol.conservation.max_drift!r}'
    ])


def _moment_rows(session: Session, solutions: typing.Sequence[Solution],
                 order: tuple[int, ...]) -> tuple[list[str], list[Row]]:
    """Moment table: rows are times, a column group per mesh."""
    header = ['t', 'exact']
    for sol in solutions:
        name = f'N{sol.job.elements}'
        header += [
            name, f'{name}_4sig', f'{name}_relerr', f'{name}_relerr_4sig',
            f'{name}_published', f'{name}_published_relerr'
        ]
    table = published.moment_table(session.case.id,
                                   order) if session.published else None
    times = [snap.time for snap in solutions[0].trajectory.snapshots]
    rows = []
    for index, t in enumerate(times):
        want = session.exact_moment(order, t)
        row: Row = [t, want]
        for sol in solutions:
            value = observables.moment(sol.trajectory.snapshots[index].alpha,
                                       sol.dof_map, order)
            relerr = None if not want else abs(value - want) / abs(want)
            found = None if table is None else table.lookup(
                t, sol.job.elements)
            row += [
                value,
                output.presentation(value), relerr,
                output.presentation(relerr)
            ]
            row += [None, None] if found is None else list(found)
        rows.append(row)
    return header, rows


def cmd_moments(cfg: config.RunConfig) -> None:
    """Compares moments on a sequence of meshes with the moment laws."""
    session = Session(cfg)
    _prepare(session)
    jobs = [Job(n, cfg.degrees[0]) for n in cfg.n]
    solutions = sweep(session, jobs)
    orders = list(session.case.variant(cfg.variant).moments)
    for order in orders:
        header, rows = _moment_rows(session, solutions, order)
        output.write_csv(
            cfg.output_dir / f'moments-{_order_name(order)}.csv', header,
            rows)
    output.write_csv(cfg.output_dir / 'conservation.csv',
                     ['n', 'max_drift', 'number_monotone', 'min_value'],
                     [[
                         sol.job.elements, sol.conservation.max_drift,
                         sol.conservation.number_monotone,
                         sol.conservation.min_value
                     ] for sol in solutions])
    _finish(session)


def convergence_norms(session: Session) -> tuple[str, ...]:
    """Norms of a refinement study, following the reported tables."""
    if session.case.dim > 1:
        return ('L2', 'H1', 'RelL2')
    norms: tuple[str, ...] = ('L2', 'RelLinf', 'H1')
    if session.cfg.grid != 'uniform':
        norms = ('L1',) + norms
    return norms


def _grid_reference(session: Session, method: str, norm: str,
                    elements: int) -> typing.Optional[float]:
    cfg = session.cfg
    table = published.GRID_ERRORS
    if (norm != 'L1' or not session.published or cfg.case != table.case or
            not math.isclose(cfg.final_time, table.time)):
        return None
    return table.lookup(method, cfg.grid, elements)


def convergence_report(
        session: Session, solutions: typing.Sequence[Solution]
) -> tuple[list[str], list[Row], list[observables.ErrorReport]]:
    """Terminal errors and orders per degree and mesh."""
    norms = convergence_norms(session)
    reports = []
    for degree in session.cfg.degrees:
        entries = []
        for sol in solutions:
            if sol.job.degree != degree:
                continue
            snap = sol.trajectory.snapshots[-1]
            entries.append(
                observables.MeshErrors(
                    sol.job.elements,
                    meshlib.mesh_size(sol.dof_map.mesh), sol.dof_map.size,
                    errors_at(session, sol.dof_map, snap.alpha, snap.time,
                              norms)))
        reports.append(observables.ErrorReport(degree, tuple(entries)))

    header = ['degree', 'n', 'h', 'dofs']
    for norm in norms:
        header += [norm, f'{norm}_4sig', f'{norm}_eoc', f'{norm}_published']
        if norm == 'L1':
            header.append('L1_existing_published')
    rows = []
    for report in reports:
        table = published.error_table(
            session.case.id, report.degree) if session.published else None
        orders = {norm: report.orders(norm) for norm in norms}
        for index, entry in enumerate(report.entries):
            row: Row = [report.degree, entry.elements, entry.h, entry.dofs]
            for norm in norms:
                value = entry.errors[norm]
                reference = None if table is None else table.lookup(
                    norm, entry.elements)
                if reference is None:
                    reference = _grid_reference(session, 'FEM', norm,
                                                entry.elements)
                row += [
                    value,
                    output.presentation(value), orders[norm][index], reference
                ]
                if norm == 'L1':
                    row.append(
                        _grid_reference(session, 'existing', norm,
                                        entry.elements))
            rows.append(row)
    return header, rows, reports


def cmd_convergence(cfg: config.RunConfig) -> None:
    """Refinement study against the exact solution of the case."""
    session = Session(cfg)
    if not session.has_exact_solution():
        raise config.ConfigError(
            f'--case: Case ‘{cfg.case}’ has no exact solution for the '
            'configured kernels')
    _prepare(session)
    jobs = [Job(n, degree) for degree in cfg.degrees for n in cfg.n]
    solutions = sweep(session, jobs)
    header, rows, reports = convergence_report(session, solutions)
    output.write_csv(cfg.output_dir / 'convergence.csv', header, rows)
    _write_points(session, solutions)
    notes = []
    for report in reports:
        for norm in convergence_norms(session):
            finest = report.orders(norm)[-1]
            if finest is not None:
                notes.append(f'r={report.degree} {norm} EOC at the finest '
                             f'mesh: {finest:.3f}')
    for note in notes:
        _LOGGER.info('%s', note)
    _finish(session, notes)


def cmd_list_cases() -> None:
    """Prints the case registry."""
    for case in cases.registry():
        exact = 'exact' if case.exact is not None else 'laws'
        grids = ','.join(str(n) for n in case.grids)
        print(f'{case.id:<3} {case.dim}D  T={case.final_time:<4g} '
              f'N={grids:<16} {exact:<5} {case.collision} / {case.breakage}  '
              f'{case.title}')


def cmd_discrepancies(output_dir: typing.Optional[pathlib.Path]) -> None:
    """Writes the consistency report of moment laws and kernels."""
    out = output_dir or config.output_root() / 'discrepancies'
    utils.directory(out)
    rows = cases.discrepancies()
    output.write_csv(out / 'discrepancies.csv', cases.Discrepancy._fields,
                     [list(row) for row in rows])
    for row in rows:
        if row.status != 'OK':
            _LOGGER.info(
                '[%s] %s/%s: closure rate %.6g, kernel rate %.6g, '
                'hypervolume defect %.3g', row.status, row.case,
                row.variant, row.closure_rate, row.kernel_rate,
                row.hypervolume_defect)
    for case in cases.registry():
        for note in case.notes:
            _LOGGER.info('[NOTE] %s: %s', case.id, note)
    _LOGGER.info('Results written to %s', out)


_COMMANDS: dict[str, typing.Callable[[config.RunConfig], None]] = {
    'run': cmd_run,
    'moments': cmd_moments,
    'convergence': cmd_convergence,
}


def _add_settings(parser: argparse.ArgumentParser) -> None:
    """Adds a flag for every configuration key."""
    parser.add_argument('--config',
                        type=pathlib.Path,
                        help='flat TOML file with settings')
    flag = parser.add_argument
    flag('--case', help='case identifier (see list-cases)')
    flag('--n', help='number of elements per axis; a list for sweeps')
    flag('--degree', help='polynomial degree; a list for convergence')
    flag('--tau', help='time step')
    flag('--T', dest='T', help='final time')
    flag('--snapshots', help='comma separated reporting times')
    flag('--nonlinearity', help='consistent or hadamard')
    flag('--scheme', help='bdf2 or backward_euler')
    flag('--grid', help='uniform, geometric or random')
    flag('--ratio', help='grading ratio of geometric grids')
    flag('--seed', help='seed of random grids')
    flag('--variant', help='breakage variant of the case')
    flag('--collision', help='collision kernel expression')
    flag('--breakage', help='breakage kernel expression')
    flag('--manufactured',
         action=argparse.BooleanOptionalAction,
         default=None,
         help='add the manufactured source of the exact solution')
    flag('--newton-tol', dest='newton_tol', help='Newton tolerance')
    flag('--max-newton-iters',
         dest='max_newton_iters',
         help='Newton iteration limit')
    flag('--quad-points',
         dest='quad_points',
         help='Gauss points per panel of the assembly')
    flag('--jobs', help='worker threads')
    flag('--output-dir', dest='output_dir', help='output directory')
    flag('--cache-dir', dest='cache_dir', help='operator cache directory')
    flag('--save-coefficients',
         dest='save_coefficients',
         action=argparse.BooleanOptionalAction,
         default=None,
         help='write DOF vectors of the snapshots')


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ncbe', description='Solves the collisional breakage equation.')
    parser.add_argument('-v',
                        '--verbose',
                        action='store_true',
                        help='log debug messages')
    commands = parser.add_subparsers(dest='command', required=True)
    for name, func in _COMMANDS.items():
        _add_settings(commands.add_parser(name, help=func.__doc__))
    commands.add_parser('list-cases', help=cmd_list_cases.__doc__)
    disc = commands.add_parser('discrepancies', help=cmd_discrepancies.__doc__)
    disc.add_argument('--output-dir', dest='output_dir', type=pathlib.Path)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, typing.Any]:
    return {key: getattr(args, key) for key in config.KEYS}


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr)
    try:
        if args.command == 'list-cases':
            cmd_list_cases()
        elif args.command == 'discrepancies':
            cmd_discrepancies(args.output_dir)
        else:
            file = config.load(args.config) if args.config else None
            cfg = config.resolve(args.command, _overrides(args), file)
            _COMMANDS[args.command](cfg)
    except config.ConfigError as ex:
        _LOGGER.error('%s', ex)
        return EXIT_CONFIG
    except stepper.NewtonFailure as ex:
        _LOGGER.error('%s (details in %s)', ex, _FAILURE_FILE)
        return EXIT_SOLVER
    except OSError as ex:
        _LOGGER.error('%s', ex)
        return EXIT_IO
    except KeyboardInterrupt:
        print('Got SIGINT; terminating', file=sys.stderr)
        return EXIT_INTERRUPTED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
