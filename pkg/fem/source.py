"""Exponential closed-form solutions and their manufactured source terms.

The convergence cases prescribe u(x, t) = k^{2d} Π_a e^{−k x_a} with
k = 1 + t.  On a truncated box, or for kernels for which u is not a solution
at all, the residual

    S = ∂_t u − gain[u] + loss[u]

is added to the right-hand side so that u solves the discrete problem up to
discretization error.  For separable kernels S is a finite sum of separable
products; every per-axis factor is evaluated in closed form.
"""

import dataclasses
import functools
import logging
import math
import typing

import numpy as np
import numpy.typing as npt

from . import fe_basis
from . import kernel_algebra as ka
from . import linalg
from . import operators

Array = npt.NDArray[np.float64]
AxisFn = typing.Callable[[Array], Array]

_LOGGER = logging.getLogger('ncbe.source')

# Gauss points per element used to project source terms.
_PROJECTION_POINTS = 12


@dataclasses.dataclass(frozen=True)
class ExponentialSolution:
    """u(x, t) = (1 + t)^{2d} Π_a e^{−(1 + t) x_a}."""
    dim: int

    @staticmethod
    def rate(t: float) -> float:
        return 1.0 + t

    def amplitude(self, t: float) -> float:
        return self.rate(t)**(2 * self.dim)

    def __call__(self, x: npt.ArrayLike, t: float) -> Array:
        points = np.asarray(x, dtype=np.float64)
        if self.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
            points = points[..., None]
        return self.amplitude(t) * np.exp(-self.rate(t) * points.sum(axis=-1))

    def gradient(self, x: npt.ArrayLike, t: float) -> Array:
        """Returns ∇u with the axis index last."""
        value = self(x, t)
        return -self.rate(t) * value[..., None] * np.ones(self.dim)

    def axis_factor(self, t: float) -> AxisFn:
        """The factor e^{−k x} shared by every axis."""
        rate = self.rate(t)
        return lambda x: np.exp(-rate * x)

    def moment(self, order: typing.Sequence[int], t: float) -> float:
        """Returns ∫_{ℝ₊^d} Π x_a^{k_a} u dx = A Π k_a!/rate^{k_a+1}."""
        rate = self.rate(t)
        out = self.amplitude(t)
        for k in order:
            out *= math.factorial(k) / rate**(k + 1)
        return out


class SourceTerm(typing.NamedTuple):
    """coef · Π_a factors[a](x_a)."""
    coef: float
    factors: tuple[AxisFn, ...]


def _times(first: AxisFn, second: AxisFn) -> AxisFn:
    return lambda x: first(x) * second(x)


def _tail(weight: ka.FactorProduct, rate: float, upper: float) -> AxisFn:
    """x ↦ ∫_x^upper weight(y) e^{−rate·y} dy."""
    return lambda x: weight.exp_integral(rate, x, upper)


@dataclasses.dataclass(frozen=True, eq=False)
class ManufacturedSource:
    """Residual of an exponential solution for given kernels on a box.

    Attributes:
        solution: The prescribed solution.
        collision: Collision kernel.
        breakage: Smooth breakage kernel.
        bounds: Per-axis (x_min, x_max) of the computational box; x_max may be
            infinite.
    """
    solution: ExponentialSolution
    collision: ka.CollisionKernel
    breakage: ka.SmoothBreakage
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not isinstance(self.breakage, ka.SmoothBreakage):
            raise ValueError(
                f'Manufactured source needs a smooth breakage kernel, got '
                f'‘{self.breakage.name}’')
        dim = self.solution.dim
        if self.collision.dim != dim or self.breakage.dim != dim or len(
                self.bounds) != dim:
            raise ValueError(f'Dimension mismatch in manufactured source for '
                             f'{dim}D solution')

    def terms(self, t: float) -> list[SourceTerm]:
        """Returns the separable terms of S(·, t)."""
        sol = self.solution
        dim = sol.dim
        rate = sol.rate(t)
        amp = sol.amplitude(t)
        decay = sol.axis_factor(t)

        # ∂_t u = (2d/k − Σ_a x_a) u
        out = [SourceTerm(2 * dim / rate * amp, (decay,) * dim)]
        for axis in range(dim):
            factors = [decay] * dim
            factors[axis] = _times(lambda x: x, decay)
            out.append(SourceTerm(-amp, tuple(factors)))

        for cterm in self.collision.terms:
            # ∫ h(z) u(z) dz over the box, per axis
            partner = amp * cterm.coef * float(
                np.prod([
                    ka.FactorProduct.of(factor).exp_integral(rate, lo, hi)
                    for factor, (lo, hi) in zip(cterm.second, self.bounds)
                ]))
            out.append(
                SourceTerm(
                    amp * partner,
                    tuple(
                        _times(ka.FactorProduct.of(factor), decay)
                        for factor in cterm.first)))
            for bterm in self.breakage.terms:
                factors = tuple(
                    _times(
                        ka.FactorProduct.of(fragment),
                        _tail(ka.FactorProduct.of(parent, rated), rate, hi))
                    for fragment, parent, rated, (_, hi) in zip(
                        bterm.first, bterm.second, cterm.first, self.bounds))
                out.append(SourceTerm(-bterm.coef * amp * partner, factors))
        return out

    def __call__(self, x: npt.ArrayLike, t: float) -> Array:
        """Evaluates S at points of shape (…, d)."""
        points = np.asarray(x, dtype=np.float64)
        if self.solution.dim == 1 and (points.ndim == 0 or
                                       points.shape[-1] != 1):
            points = points[..., None]
        out = np.zeros(points.shape[:-1])
        for term in self.terms(t):
            value = np.full(points.shape[:-1], term.coef)
            for axis, factor in enumerate(term.factors):
                value = value * factor(points[..., axis])
            out += value
        return out

    def load_vector(self, dof_map: fe_basis.DofMap, t: float) -> Array:
        """Returns s_j(t) = ∫ S(x, t) φ_j(x) dx."""
        out = np.zeros(dof_map.size)
        for term in self.terms(t):
            out += term.coef * linalg.kron_vector([
                operators.function_vector(axis, factor, _PROJECTION_POINTS)
                for axis, factor in zip(dof_map.axes, term.factors)
            ])
        return out

    def bind(self, dof_map: fe_basis.DofMap) -> typing.Callable[[float], Array]:
        """Returns t ↦ load_vector(dof_map, t) for the time stepper."""
        _LOGGER.debug('Manufactured source for %s/%s on %s DOFs',
                      self.collision.name, self.breakage.name, dof_map.shape)
        return functools.partial(self.load_vector, dof_map)
