import dataclasses
import os
import pathlib
import typing

import toml

from fem import fe_basis
from fem import kernel_algebra as ka
from fem import operators
from fem import source
from fem import stepper

from . import cases
from . import kernelspec

_T = typing.TypeVar('_T')

OUTPUT_ROOT_ENV = 'NCBE_OUTPUT_ROOT'
DEFAULT_OUTPUT_ROOT = 'ncbe-out'

COMMANDS = ('run', 'moments', 'convergence')
GRID_MODES = ('uniform', 'geometric', 'random')


class ConfigError(Exception):
    """Malformed or missing configuration."""


def output_root() -> pathlib.Path:
    """Returns the directory command outputs go to by default."""
    return pathlib.Path(os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT)


def _identity(obj: _T) -> _T:
    """Returns its argument."""
    return obj


class Config(dict[str, typing.Any]):
    """A wrapper for configuration read from a file or the command line.

    The take method behaves like pop except that it converts the value and
    throws ConfigError naming where the value came from if it is malformed.

    Attributes:
        path: Path to the file the configuration was loaded from or None for
            command line overrides.
    """

    def __init__(self,
                 data: dict[str, typing.Any],
                 path: typing.Optional[pathlib.Path] = None) -> None:
        super().__init__(data)
        self.path = path

    def where(self, key: str) -> str:
        """Names the origin of a key for error messages."""
        if self.path is not None:
            return f'{self.path}: {key}'
        return '--' + key.replace('_', '-')

    def take(
        self,
        key: str,
        conv: typing.Callable[[typing.Any], _T] = _identity
    ) -> typing.Optional[_T]:
        """Removes given key from the mapping and returns its converted value.

        Args:
            key: Key to look for the value under.
            conv: Function to convert the read value into value to return.
        Returns:
            The converted value or None if the key is missing or holds None.
        Raises:
            ConfigError: if conv function raises an exception.
        """
        value = self.pop(key, None)
        if value is None:
            return None
        try:
            return conv(value)
        except (ValueError, TypeError) as ex:
            raise ConfigError(f'{self.where(key)}: {ex}') from ex


def load(path: pathlib.Path) -> Config:
    """Loads a flat TOML table from given file.

    Raises:
        ConfigError: if file could not be opened, contains malformed TOML or
            contains nested tables.
    """
    try:
        with open(path, encoding='utf-8') as rd:
            value = toml.load(rd)
    except OSError as ex:
        raise ConfigError(f'{path}: {ex.strerror}') from ex
    except toml.TomlDecodeError as ex:
        raise ConfigError(f'{path}:{ex.lineno}:{ex.colno}: malformed TOML: '
                          f'{ex.msg}') from ex
    for key, item in value.items():
        if isinstance(item, dict):
            raise ConfigError(f'{path}: {key}: nested tables are not allowed')
    return Config(value, path)


def _as_list(value: typing.Any) -> list[typing.Any]:
    if isinstance(value, str):
        return [word for word in value.replace(' ', '').split(',') if word]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _int(value: typing.Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f'Invalid integer ‘{value}’')
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f'Invalid integer ‘{value:g}’')
        return int(value)
    try:
        return int(value)
    except ValueError:
        raise ValueError(f'Invalid integer ‘{value}’') from None


def _float(value: typing.Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f'Invalid number ‘{value}’')
    try:
        return float(value)
    except ValueError:
        raise ValueError(f'Invalid number ‘{value}’') from None


def _positive(conv: typing.Callable[[typing.Any], _T],
              what: str) -> typing.Callable[[typing.Any], _T]:

    def check(value: typing.Any) -> _T:
        result = conv(value)
        if not result > 0:  # type: ignore[operator]
            raise ValueError(f'Invalid {what} ‘{value}’')
        return result

    return check


def _elements(value: typing.Any) -> tuple[int, ...]:
    check = _positive(_int, 'number of elements')
    out = tuple(check(item) for item in _as_list(value))
    if not out:
        raise ValueError('Empty list of element numbers')
    if any(a >= b for a, b in zip(out, out[1:])):
        raise ValueError('Element numbers must be strictly ascending')
    return out


def _degrees(value: typing.Any) -> tuple[int, ...]:
    out = []
    for item in _as_list(value):
        degree = _int(item)
        if degree not in fe_basis.SUPPORTED_DEGREES:
            raise ValueError(f'Unsupported degree ‘{item}’')
        out.append(degree)
    if not out:
        raise ValueError('Empty list of degrees')
    return tuple(sorted(set(out)))


def _quad_points(value: typing.Any) -> int:
    points = _int(value)
    if not 1 <= points <= fe_basis.MAX_GAUSS_POINTS:
        raise ValueError(f'Unsupported number of quadrature points ‘{value}’; '
                         f'expected 1 to {fe_basis.MAX_GAUSS_POINTS}')
    return points


def _times(value: typing.Any) -> tuple[float, ...]:
    out = tuple(_float(item) for item in _as_list(value))
    if any(t < 0 for t in out):
        raise ValueError('Negative snapshot time')
    return tuple(sorted(set(out)))


def _choice(options: typing.Sequence[str],
            what: str) -> typing.Callable[[typing.Any], str]:

    def check(value: typing.Any) -> str:
        if value not in options:
            raise ValueError(f'Invalid {what} ‘{value}’; expected one of: '
                             f'{", ".join(options)}')
        return str(value)

    return check


def _bool(value: typing.Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f'Invalid boolean ‘{value}’')


def _path(value: typing.Any) -> pathlib.Path:
    if not str(value):
        raise ValueError('Empty path')
    return pathlib.Path(str(value))


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command.

    Attributes:
        command: The command the configuration is for.
        case: Case identifier.
        n: Numbers of elements per axis; a single entry for ‘run’.
        degrees: Polynomial degrees; a single entry unless ‘convergence’.
        tau: Time step.
        final_time: Time horizon.
        snapshots: Reporting times, the horizon included.
        nonlinearity: Discrete nonlinearity (see fem.operators).
        scheme: Time stepping scheme.
        grid: Grid mode.
        ratio: Grading ratio of geometric grids.
        seed: Seed of random grids.
        variant: Breakage variant of the case.
        collision: Collision kernel expression.
        breakage: Breakage kernel expression.
        manufactured: Whether the manufactured source is added.
        newton_tol: Newton tolerance.
        max_newton_iters: Newton iteration limit.
        quad_points: Gauss points per panel or None for automatic choice.
        jobs: Worker threads or None for the CPUs available.
        output_dir: Directory the outputs are written to.
        cache_dir: Directory of the operator cache or None.
        save_coefficients: Whether DOF vectors of snapshots are written.
        provenance: (key, value, origin) of every setting; origin is
            ‘default’, ‘case’, ‘command line’ or the configuration file.
    """
    command: str
    case: str
    n: tuple[int, ...]
    degrees: tuple[int, ...]
    tau: float
    final_time: float
    snapshots: tuple[float, ...]
    nonlinearity: str = 'consistent'
    scheme: str = 'bdf2'
    grid: str = 'uniform'
    ratio: float = 2.0
    seed: int = 0
    variant: str = 'default'
    collision: str = ''
    breakage: str = ''
    manufactured: bool = False
    newton_tol: float = 1e-11
    max_newton_iters: int = 25
    quad_points: typing.Optional[int] = None
    jobs: typing.Optional[int] = None
    output_dir: pathlib.Path = pathlib.Path(DEFAULT_OUTPUT_ROOT)
    cache_dir: typing.Optional[pathlib.Path] = None
    save_coefficients: bool = False
    provenance: tuple[tuple[str, str, str], ...] = ()

    @property
    def test_case(self) -> cases.TestCase:
        return cases.get(self.case)

    def stepper_config(self) -> stepper.StepperConfig:
        return stepper.StepperConfig(tau=self.tau,
                                     final_time=self.final_time,
                                     newton_tol=self.newton_tol,
                                     max_newton_iters=self.max_newton_iters,
                                     scheme=self.scheme)


_CONVERTERS: dict[str, typing.Callable[[typing.Any], typing.Any]] = {
    'case': str,
    'n': _elements,
    'degree': _degrees,
    'tau': _positive(_float, 'time step'),
    'T': _positive(_float, 'final time'),
    'snapshots': _times,
    'nonlinearity': _choice(operators.NONLINEARITIES, 'nonlinearity'),
    'scheme': _choice(stepper.SCHEMES, 'scheme'),
    'grid': _choice(GRID_MODES, 'grid mode'),
    'ratio': _positive(_float, 'grading ratio'),
    'seed': _int,
    'variant': str,
    'collision': str,
    'breakage': str,
    'manufactured': _bool,
    'newton_tol': _positive(_float, 'Newton tolerance'),
    'max_newton_iters': _positive(_int, 'Newton iteration limit'),
    'quad_points': _quad_points,
    'jobs': _positive(_int, 'number of jobs'),
    'output_dir': _path,
    'cache_dir': _path,
    'save_coefficients': _bool,
}

KEYS = tuple(_CONVERTERS)


class _Resolver:
    """Takes settings from the command line first, then from the file."""

    def __init__(self, overrides: Config,
                 file: typing.Optional[Config]) -> None:
        self.sources = [overrides] + ([file] if file is not None else [])
        self.provenance: list[tuple[str, str, str]] = []
        self.where: dict[str, str] = {}

    def take(self, key: str) -> typing.Any:
        """Returns the first value given for key or None."""
        found = None
        for cfg in self.sources:
            value = cfg.take(key, _CONVERTERS[key])
            if value is not None and found is None:
                found = value
                self.where[key] = cfg.where(key)
                origin = ('command line'
                          if cfg.path is None else str(cfg.path))
                self.provenance.append((key, _show(value), origin))
        return found

    def default(self, key: str, value: typing.Any, origin: str) -> typing.Any:
        self.provenance.append((key, _show(value), origin))
        return value

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(f'{self.where.get(key, "--" + key)}: {message}')


def _show(value: typing.Any) -> str:
    if isinstance(value, (tuple, list)):
        return ','.join(_show(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolve(command: str,
            overrides: dict[str, typing.Any],
            file: typing.Optional[Config] = None) -> RunConfig:
    """Combines command line overrides, a configuration file and case defaults.

    Args:
        command: One of COMMANDS.
        overrides: Values given on the command line; None values are ignored.
        file: Configuration loaded with `load`.
    Returns:
        The resolved configuration.
    Raises:
        ConfigError: on unknown keys, malformed values or values which do not
            fit the case or command.
    """
    if command not in COMMANDS:
        raise ConfigError(f'Unknown command ‘{command}’')
    cli = Config({k: v for k, v in overrides.items() if v is not None})
    resolver = _Resolver(cli, file)

    case_id = resolver.take('case')
    if case_id is None:
        raise ConfigError('--case: missing case')
    try:
        case = cases.get(case_id)
    except ValueError as ex:
        raise resolver.error('case', str(ex)) from ex

    n = resolver.take('n')
    if n is None:
        grids = case.grids if command != 'run' else case.grids[-1:]
        n = resolver.default('n', grids, 'case')
    elif command == 'run' and len(n) != 1:
        raise resolver.error('n', 'run takes a single number of elements')

    degrees = resolver.take('degree')
    if degrees is None:
        wanted = case.degrees if command == 'convergence' else case.degrees[:1]
        degrees = resolver.default('degree', wanted, 'case')
    elif command != 'convergence' and len(degrees) != 1:
        raise resolver.error('degree', f'{command} takes a single degree')

    tau = resolver.take('tau')
    if tau is None:
        tau = resolver.default('tau', case.tau, 'case')
    final_time = resolver.take('T')
    if final_time is None:
        final_time = resolver.default('T', case.final_time, 'case')
    if final_time < tau:
        raise resolver.error(
            'T', f'Final time ‘{final_time:g}’ shorter than time step '
            f'‘{tau:g}’')
    snapshots = resolver.take('snapshots')
    if snapshots is None:
        snapshots = tuple(t for t in case.snapshots if t < final_time)
    elif snapshots and snapshots[-1] > final_time:
        raise resolver.error(
            'snapshots', f'Snapshot time ‘{snapshots[-1]:g}’ after the final '
            f'time ‘{final_time:g}’')
    snapshots = tuple(sorted(set(snapshots) | {final_time}))

    variant = resolver.take('variant')
    if variant is None:
        variant = case.default_variant
    try:
        breakage_default = case.variant(variant).breakage
    except ValueError as ex:
        raise resolver.error('variant', str(ex)) from ex

    collision = resolver.take('collision')
    if collision is None:
        collision = case.collision
    breakage = resolver.take('breakage')
    if breakage is None:
        breakage = breakage_default
    try:
        kernelspec.parse_collision(collision, case.dim)
    except ValueError as ex:
        raise resolver.error('collision', str(ex)) from ex
    try:
        breakage_kernel = kernelspec.parse_breakage(breakage, case.dim)
    except ValueError as ex:
        raise resolver.error('breakage', str(ex)) from ex

    manufactured = resolver.take('manufactured')
    if manufactured is None:
        manufactured = resolver.default('manufactured', case.manufactured,
                                        'case')
    if manufactured:
        if not isinstance(case.exact, source.ExponentialSolution):
            raise resolver.error(
                'manufactured',
                f'Case ‘{case.id}’ has no exponential exact solution')
        if isinstance(breakage_kernel, ka.DiracBreakage):
            raise resolver.error(
                'manufactured', 'Manufactured source needs a smooth breakage '
                f'kernel, got ‘{breakage}’')

    def setting(key: str, default: typing.Any) -> typing.Any:
        value = resolver.take(key)
        if value is None:
            return resolver.default(key, default, 'default')
        return value

    nonlinearity = setting('nonlinearity', 'consistent')
    scheme = setting('scheme', 'bdf2')
    grid = setting('grid', 'uniform')
    ratio = setting('ratio', 2.0)
    seed = setting('seed', 0)
    newton_tol = setting('newton_tol', 1e-11)
    max_newton_iters = setting('max_newton_iters', 25)
    quad_points = resolver.take('quad_points')
    if quad_points is None:
        resolver.default('quad_points', 'automatic', 'default')
    jobs = resolver.take('jobs')
    output_dir = resolver.take('output_dir')
    if output_dir is None:
        output_dir = output_root() / f'{case.id}-{command}'
    cache_dir = resolver.take('cache_dir')
    save_coefficients = bool(resolver.take('save_coefficients'))

    for cfg in resolver.sources:
        if cfg:
            key = sorted(cfg)[0]
            raise ConfigError(f'{cfg.where(key)}: unknown key')

    return RunConfig(command=command,
                     case=case.id,
                     n=n,
                     degrees=degrees,
                     tau=tau,
                     final_time=final_time,
                     snapshots=snapshots,
                     nonlinearity=nonlinearity,
                     scheme=scheme,
                     grid=grid,
                     ratio=ratio,
                     seed=seed,
                     variant=variant,
                     collision=collision,
                     breakage=breakage,
                     manufactured=manufactured,
                     newton_tol=newton_tol,
                     max_newton_iters=max_newton_iters,
                     quad_points=quad_points,
                     jobs=jobs,
                     output_dir=output_dir,
                     cache_dir=cache_dir,
                     save_coefficients=save_coefficients,
                     provenance=tuple(resolver.provenance))
