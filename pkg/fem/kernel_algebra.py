"""Separable collision and breakage kernels.

A collision kernel is Γ(y, z) = Σ_t c_t Π_a g_{t,a}(y_a) h_{t,a}(z_a) and a
smooth breakage kernel is β(x, y) = Σ_s b_s Π_a f_{s,a}(x_a) q_{s,a}(y_a) for
x ≤ y (componentwise) and zero otherwise.  A Dirac-comb breakage kernel puts
fragments at fixed ratios of the parent: Π_a Σ_m w_m δ(x_a − a_m y_a).
"""

import dataclasses
import functools
import math
import typing

import numpy as np
import numpy.typing as npt
import scipy.integrate
import scipy.special

Array = npt.NDArray[np.float64]
Bounds = typing.Sequence[tuple[float, float]]

_KINDS = ('constant', 'monomial', 'shifted_power', 'exponential')


def _is_whole(value: float) -> bool:
    return float(value).is_integer()


@dataclasses.dataclass(frozen=True)
class UnivariateFactor:
    """One factor of a separable kernel term.

    Attributes:
        kind: ‘constant’ (value), ‘monomial’ x^power, ‘shifted_power’
            (x + shift)^power or ‘exponential’ e^{−rate·x}.
    """
    kind: str
    value: float = 1.0
    power: float = 0.0
    shift: float = 0.0
    rate: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f'Invalid factor kind ‘{self.kind}’')
        if self.kind == 'shifted_power' and self.shift < 0:
            raise ValueError(f'Negative shift ‘{self.shift}’')

    def __call__(self, x: npt.ArrayLike) -> Array:
        xs = np.asarray(x, dtype=np.float64)
        if self.kind == 'constant':
            return np.full_like(xs, self.value)
        if self.kind == 'monomial':
            return np.power(xs, self.power)
        if self.kind == 'shifted_power':
            return np.power(xs + self.shift, self.power)
        return np.exp(-self.rate * xs)

    def __str__(self) -> str:
        if self.kind == 'constant':
            return f'{self.value:g}'
        if self.kind == 'monomial':
            return f'x^{self.power:g}'
        if self.kind == 'shifted_power':
            return f'(x+{self.shift:g})^{self.power:g}'
        return f'exp(-{self.rate:g}x)'

    @property
    def polynomial_degree(self) -> typing.Optional[int]:
        """Degree if the factor is a polynomial, None otherwise."""
        if self.kind == 'constant':
            return 0
        if self.kind in ('monomial', 'shifted_power'):
            if self.power >= 0 and _is_whole(self.power):
                return int(self.power)
        return None

    @property
    def singular(self) -> bool:
        """Whether the factor is not smooth at the origin."""
        if self.polynomial_degree is not None or self.kind == 'exponential':
            return False
        return self.kind == 'monomial' or self.shift == 0

    def max_abs(self, lo: float, hi: float) -> float:
        """Returns sup |f| over [lo, hi] (infinite if unbounded)."""
        if self.kind == 'constant':
            return abs(self.value)
        if self.kind == 'exponential':
            return float(max(np.exp(-self.rate * lo), np.exp(-self.rate * hi)))
        base = lo + self.shift if self.kind == 'shifted_power' else lo
        top = hi + self.shift if self.kind == 'shifted_power' else hi
        if base == 0 and self.power < 0:
            return math.inf
        return float(max(base**self.power, top**self.power))

    def moment_integral(self, order: int, upper: npt.ArrayLike) -> Array:
        """Returns ∫_0^upper x^order f(x) dx in closed form.

        Raises:
            ValueError: if the integral diverges at the origin.
        """
        y = np.asarray(upper, dtype=np.float64)
        if self.kind == 'constant':
            return self.value * y**(order + 1) / (order + 1)
        if self.kind == 'monomial':
            exponent = order + self.power + 1
            if exponent <= 0:
                raise ValueError(f'Non-integrable factor ‘{self}’ against '
                                 f'x^{order}')
            return y**exponent / exponent
        if self.kind == 'exponential':
            if self.rate == 0:
                return y**(order + 1) / (order + 1)
            return (math.gamma(order + 1) *
                    scipy.special.gammainc(order + 1, self.rate * y) /
                    self.rate**(order + 1))
        # x^m = Σ_k C(m, k) (x + c)^k (−c)^{m−k}
        c = self.shift
        if c == 0:
            return UnivariateFactor('monomial',
                                    power=self.power).moment_integral(
                                        order, y)
        total = np.zeros_like(y)
        for k in range(order + 1):
            exponent = k + self.power + 1
            scale = math.comb(order, k) * (-c)**(order - k)
            if exponent == 0:
                total = total + scale * (np.log(y + c) - math.log(c))
            else:
                total = total + scale * ((y + c)**exponent -
                                         c**exponent) / exponent
        return total


def constant(value: float = 1.0) -> UnivariateFactor:
    return UnivariateFactor('constant', value=value)


def monomial(power: float) -> UnivariateFactor:
    if power == 0:
        return constant()
    return UnivariateFactor('monomial', power=power)


def shifted_power(shift: float, power: float) -> UnivariateFactor:
    if shift == 0:
        return monomial(power)
    return UnivariateFactor('shifted_power', shift=shift, power=power)


def exponential(rate: float) -> UnivariateFactor:
    return UnivariateFactor('exponential', rate=rate)


@dataclasses.dataclass(frozen=True)
class FactorProduct:
    """Product coef·x^power·Π rest of univariate factors.

    Monomials and constants are merged into `coef` and `power`; other factors
    are kept as they are.
    """
    coef: float
    power: float
    rest: tuple[UnivariateFactor, ...]

    @classmethod
    def of(cls, *factors: UnivariateFactor) -> 'FactorProduct':
        coef = 1.0
        power = 0.0
        rest = []
        for factor in factors:
            if factor.kind == 'constant':
                coef *= factor.value
            elif factor.kind == 'monomial':
                power += factor.power
            else:
                rest.append(factor)
        return cls(coef, power, tuple(rest))

    def __call__(self, x: npt.ArrayLike) -> Array:
        xs = np.asarray(x, dtype=np.float64)
        out = self.coef * np.power(xs, self.power)
        for factor in self.rest:
            out = out * factor(xs)
        return out

    @property
    def polynomial_degree(self) -> typing.Optional[int]:
        if self.power < 0 or not _is_whole(self.power):
            return None
        degree = int(self.power)
        for factor in self.rest:
            if (part := factor.polynomial_degree) is None:
                return None
            degree += part
        return degree

    @property
    def singular(self) -> bool:
        if self.polynomial_degree is not None:
            return False
        if self.power < 0 or not _is_whole(self.power):
            return True
        return any(factor.singular for factor in self.rest)

    def exp_integral(self, rate: float, lo: npt.ArrayLike,
                     hi: npt.ArrayLike) -> Array:
        """Returns ∫_lo^hi self(y)·e^{−rate·y} dy elementwise.

        Closed form (regularized incomplete gamma) for pure monomials with
        power > −1, adaptive quadrature otherwise.  `hi` may be infinite.
        """
        lo_arr, hi_arr = np.broadcast_arrays(
            np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64))
        if not self.rest and self.power > -1:
            shape = self.power + 1
            if rate == 0:
                if np.any(np.isinf(hi_arr)):
                    raise ValueError('Divergent integral')
                return self.coef * (hi_arr**shape - lo_arr**shape) / shape
            scale = self.coef * math.gamma(shape) / rate**shape
            upper = scipy.special.gammaincc(shape, rate * lo_arr)
            lower = np.where(np.isinf(hi_arr), 0.0,
                             scipy.special.gammaincc(shape, rate * hi_arr))
            return scale * (upper - lower)

        def integrand(y: float) -> float:
            return float(self(y)) * math.exp(-rate * y)

        out = np.empty(lo_arr.shape)
        for index in np.ndindex(lo_arr.shape):
            out[index] = scipy.integrate.quad(integrand,
                                              lo_arr[index],
                                              hi_arr[index],
                                              epsabs=0,
                                              epsrel=1e-13,
                                              limit=200)[0]
        return out


@dataclasses.dataclass(frozen=True)
class SeparableTerm:
    """coef · Π_a first[a](first argument) · second[a](second argument)."""
    coef: float
    first: tuple[UnivariateFactor, ...]
    second: tuple[UnivariateFactor, ...]

    def __post_init__(self) -> None:
        if len(self.first) != len(self.second):
            raise ValueError('Mismatched number of axes in kernel term')


@dataclasses.dataclass(frozen=True)
class CollisionKernel:
    """Γ(y, z) as a sum of separable terms (first = y factors g, second = h)."""
    name: str
    dim: int
    terms: tuple[SeparableTerm, ...]

    def __post_init__(self) -> None:
        _check_terms(self.dim, self.terms)


@dataclasses.dataclass(frozen=True)
class SmoothBreakage:
    """β(x, y) as a sum of separable terms (first = x factors f, second = q)."""
    name: str
    dim: int
    terms: tuple[SeparableTerm, ...]

    def __post_init__(self) -> None:
        _check_terms(self.dim, self.terms)


@dataclasses.dataclass(frozen=True)
class DiracBreakage:
    """Π_a Σ_m w_m δ(x_a − a_m y_a) with atoms (a_m, w_m) shared by all axes."""
    name: str
    dim: int
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError('Dirac breakage needs at least one atom')
        for ratio, weight in self.atoms:
            if not 0 < ratio < 1:
                raise ValueError(f'Atom ratio ‘{ratio:g}’ not in (0, 1)')
            if weight <= 0:
                raise ValueError(f'Non-positive atom weight ‘{weight:g}’')


BreakageKernel = typing.Union[SmoothBreakage, DiracBreakage]


def _check_terms(dim: int, terms: typing.Sequence[SeparableTerm]) -> None:
    for term in terms:
        if len(term.first) != dim:
            raise ValueError(f'Kernel term has {len(term.first)} axes, '
                             f'expected {dim}')


def _as_points(value: npt.ArrayLike, dim: int) -> Array:
    points = np.asarray(value, dtype=np.float64)
    if dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
        points = points[..., None]
    if points.shape[-1] != dim:
        raise ValueError(f'Expected points of dimension {dim}')
    return points


def _eval_terms(terms: typing.Sequence[SeparableTerm], first: Array,
                second: Array) -> Array:
    shape = np.broadcast_shapes(first.shape[:-1], second.shape[:-1])
    out = np.zeros(shape)
    for term in terms:
        value = np.full(shape, term.coef)
        for a, (left, right) in enumerate(zip(term.first, term.second)):
            value = value * left(first[..., a]) * right(second[..., a])
        out = out + value
    return out


def eval_collision(kernel: CollisionKernel, y: npt.ArrayLike,
                   z: npt.ArrayLike) -> Array:
    """Evaluates Γ(y, z); points broadcast against each other."""
    return _eval_terms(kernel.terms, _as_points(y, kernel.dim),
                       _as_points(z, kernel.dim))


def eval_breakage(kernel: BreakageKernel, x: npt.ArrayLike,
                  y: npt.ArrayLike) -> Array:
    """Evaluates a smooth β(x, y), zero unless x ≤ y componentwise.

    Raises:
        ValueError: for Dirac-comb kernels which have no pointwise values.
    """
    if isinstance(kernel, DiracBreakage):
        raise ValueError(f'Kernel ‘{kernel.name}’ has no pointwise values')
    xs = _as_points(x, kernel.dim)
    ys = _as_points(y, kernel.dim)
    inside = np.all(xs <= ys, axis=-1)
    return np.where(inside, _eval_terms(kernel.terms, xs, ys), 0.0)


def _integrated(kernel: BreakageKernel, order: int,
                y: npt.ArrayLike) -> Array:
    """Returns ∫_0^y Π x_a^order β(x, y) dx."""
    ys = _as_points(y, kernel.dim)
    if isinstance(kernel, DiracBreakage):
        per_axis = sum(weight * ratio**order for ratio, weight in kernel.atoms)
        return per_axis**kernel.dim * np.prod(ys**order, axis=-1)
    out = np.zeros(ys.shape[:-1])
    for term in kernel.terms:
        value = np.full(ys.shape[:-1], term.coef)
        for a, (outer, inner) in enumerate(zip(term.first, term.second)):
            value = value * inner(ys[..., a]) * outer.moment_integral(
                order, ys[..., a])
        out = out + value
    return out


def multiplicity(kernel: BreakageKernel, y: npt.ArrayLike) -> Array:
    """Returns ν(y) = ∫_0^y β(x, y) dx, the mean number of fragments."""
    return _integrated(kernel, 0, y)


class HypervolumeCheck(typing.NamedTuple):
    passed: bool
    defect: float


def check_hypervolume_conservation(kernel: BreakageKernel,
                                   y: npt.ArrayLike,
                                   tol: float = 1e-12) -> HypervolumeCheck:
    """Checks ∫_0^y (Π x_a) β(x, y) dx = Π y_a at a parent point y.

    Returns:
        Whether |defect| ≤ tol·Π y_a together with the defect.
    """
    ys = _as_points(y, kernel.dim)
    volume = float(np.prod(ys))
    defect = float(_integrated(kernel, 1, ys).sum()) - volume
    return HypervolumeCheck(abs(defect) <= tol * abs(volume), defect)


def conserves_hypervolume(kernel: BreakageKernel,
                          bounds: Bounds,
                          tol: float = 1e-12) -> bool:
    """Checks hypervolume conservation at a few parents inside `bounds`."""
    for fraction in (0.25, 0.5, 1.0):
        y = [lo + fraction * (hi - lo) for lo, hi in bounds]
        if not check_hypervolume_conservation(kernel, y, tol).passed:
            return False
    return True


def symmetry_defect(kernel: CollisionKernel,
                    bounds: Bounds,
                    samples: int = 200,
                    seed: int = 0) -> float:
    """Returns max |Γ(y,z) − Γ(z,y)| / max(1, |Γ(y,z)|) over random pairs."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    y = rng.uniform(lo, hi, (samples, len(lo)))
    z = rng.uniform(lo, hi, (samples, len(lo)))
    forward = eval_collision(kernel, y, z)
    backward = eval_collision(kernel, z, y)
    return float(
        np.max(np.abs(forward - backward) / np.maximum(1, np.abs(forward))))


def _terms_bound(terms: typing.Sequence[SeparableTerm],
                 bounds: Bounds) -> float:
    total = 0.0
    for term in terms:
        value = abs(term.coef)
        for (lo, hi), left, right in zip(bounds, term.first, term.second):
            value *= left.max_abs(lo, hi) * right.max_abs(lo, hi)
        total += value
    return total


def collision_bound(kernel: CollisionKernel, bounds: Bounds) -> float:
    """Returns C₀ ≥ sup Γ over the truncated domain."""
    return _terms_bound(kernel.terms, bounds)


def breakage_bound(kernel: BreakageKernel, bounds: Bounds) -> float:
    """Returns b₀ ≥ sup β over the truncated domain (∞ for Dirac combs)."""
    if isinstance(kernel, DiracBreakage):
        return math.inf
    return _terms_bound(kernel.terms, bounds)


def stability_constant(collision: CollisionKernel, breakage: BreakageKernel,
                       bounds: Bounds) -> float:
    """Returns K = C₀b₀|𝒟|^{3/2} + C₀|𝒟|^{1/2}."""
    c0 = collision_bound(collision, bounds)
    b0 = breakage_bound(breakage, bounds)
    volume = math.prod(hi - lo for lo, hi in bounds)
    if c0 == 0:
        return 0.0
    return c0 * b0 * volume**1.5 + c0 * volume**0.5


@functools.lru_cache(maxsize=None)
def growth_rate_factor(power: float) -> float:
    """Returns (∫_0^∞ y^power e^{−y} dy)² = Γ(power + 1)²."""
    return math.gamma(power + 1)**2
