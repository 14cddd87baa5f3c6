"""Partitions of the truncated property domain.

A mesh is a tuple of one-dimensional axes; multidimensional meshes are
rectilinear tensor products of their axes.
"""

import csv
import dataclasses
import math
import pathlib
import typing

import numpy as np
import numpy.typing as npt

Array = npt.NDArray[np.float64]

_MAX_DRAWS = 16


@dataclasses.dataclass(frozen=True, eq=False)
class Axis1D:
    """Partition x_min = x_0 < x_1 < … < x_N = x_max of one property axis.

    Attributes:
        nodes: Strictly increasing node coordinates.  The array is made
            read-only on construction.
    """
    nodes: Array

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ValueError('Axis needs at least one element')
        if not np.all(np.isfinite(nodes)):
            raise ValueError('Axis nodes must be finite')
        if nodes[0] < 0:
            raise ValueError(f'Negative lower bound ‘{nodes[0]}’')
        if not np.all(np.diff(nodes) > 0):
            raise ValueError('Axis nodes must be strictly increasing')
        nodes.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)

    @property
    def num_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def x_min(self) -> float:
        return float(self.nodes[0])

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def sizes(self) -> Array:
        """Element sizes h_i = x_i − x_{i−1}."""
        return np.diff(self.nodes)

    @property
    def max_size(self) -> float:
        return float(self.sizes.max())

    def locate(self, x: npt.ArrayLike) -> npt.NDArray[np.int64]:
        """Returns index of the element containing each coordinate.

        Coordinates on an interior node belong to the element on their right,
        except for x_max which belongs to the last element.

        Raises:
            ValueError: if any coordinate lies outside [x_min, x_max].
        """
        xs = np.asarray(x, dtype=np.float64)
        if np.any(xs < self.nodes[0]) or np.any(xs > self.nodes[-1]):
            raise ValueError(
                f'Point outside of the domain [{self.x_min}, {self.x_max}]')
        index = np.searchsorted(self.nodes, xs, side='right') - 1
        return np.clip(index, 0, self.num_elements - 1)


@dataclasses.dataclass(frozen=True, eq=False)
class TensorMesh:
    """Rectilinear tensor-product mesh over d ∈ {1, 2, 3} axes."""
    axes: tuple[Axis1D, ...]

    def __post_init__(self) -> None:
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError(f'Unsupported dimension ‘{len(axes)}’')
        object.__setattr__(self, 'axes', axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        """Number of elements along each axis."""
        return tuple(axis.num_elements for axis in self.axes)

    @property
    def volume(self) -> float:
        """Measure |𝒟| of the truncated domain."""
        return math.prod(axis.x_max - axis.x_min for axis in self.axes)


def uniform_axis(x_min: float, x_max: float, num: int) -> Axis1D:
    """Returns an axis with `num` equal elements spanning [x_min, x_max].

    Raises:
        ValueError: if the span is not positive, x_min is negative or num < 1.
    """
    _check_span(x_min, x_max, num)
    nodes = x_min + (x_max - x_min) * np.arange(num + 1) / num
    nodes[-1] = x_max
    return Axis1D(nodes)


def nonuniform_axis(x_min: float,
                    x_max: float,
                    num: int,
                    mode: str,
                    *,
                    seed: int = 0,
                    ratio: float = 2.0) -> Axis1D:
    """Returns a graded or random axis with `num` elements.

    Args:
        x_min: Lower bound of the axis.
        x_max: Upper bound of the axis.
        num: Number of elements.
        mode: ‘geometric’ for element sizes growing by a constant factor so that
            the last element is `ratio` times the first one, or ‘random’ for
            interior nodes drawn uniformly from (x_min, x_max) and sorted.
        seed: Seed of the generator used by the ‘random’ mode.
        ratio: Size ratio of the last element to the first in ‘geometric’ mode.
    Returns:
        The axis.
    Raises:
        ValueError: if the arguments are invalid or no valid random draw was
            found after a bounded number of attempts.
    """
    _check_span(x_min, x_max, num)
    if mode == 'geometric':
        if ratio <= 0:
            raise ValueError(f'Invalid grading ratio ‘{ratio}’')
        if num == 1:
            return uniform_axis(x_min, x_max, 1)
        growth = ratio**(1 / (num - 1))
        sizes = growth**np.arange(num)
        nodes = x_min + (x_max - x_min) * np.concatenate(
            ([0.0], np.cumsum(sizes))) / sizes.sum()
        nodes[-1] = x_max
        return Axis1D(nodes)
    if mode == 'random':
        rng = np.random.default_rng(seed)
        for _ in range(_MAX_DRAWS):
            interior = np.sort(rng.uniform(x_min, x_max, num - 1))
            nodes = np.concatenate(([x_min], interior, [x_max]))
            if np.all(np.diff(nodes) > 0):
                return Axis1D(nodes)
        raise ValueError(f'No strictly increasing draw after {_MAX_DRAWS} '
                         f'attempts with seed ‘{seed}’')
    raise ValueError(f'Invalid grid mode ‘{mode}’')


def _check_span(x_min: float, x_max: float, num: int) -> None:
    if num < 1:
        raise ValueError(f'Invalid number of elements ‘{num}’')
    if not 0 <= x_min < x_max:
        raise ValueError(f'Invalid domain [{x_min}, {x_max}]')


def mesh_size(mesh: TensorMesh) -> float:
    """Returns the global mesh parameter h.

    In 1D this is the largest element size; for tensor cells it is the
    largest cell diameter √(Σ h_axis²).
    """
    return math.sqrt(sum(axis.max_size**2 for axis in mesh.axes))


def build_mesh(bounds: typing.Sequence[tuple[float, float]],
               num: int,
               mode: str = 'uniform',
               *,
               seed: int = 0,
               ratio: float = 2.0) -> TensorMesh:
    """Builds a mesh with `num` elements along every axis.

    Random axes of a multidimensional mesh use consecutive seeds so that the
    axes differ but the whole mesh stays reproducible.
    """
    axes = []
    for index, (lo, hi) in enumerate(bounds):
        if mode == 'uniform':
            axes.append(uniform_axis(lo, hi, num))
        else:
            axes.append(
                nonuniform_axis(lo, hi, num, mode, seed=seed + index,
                                ratio=ratio))
    return TensorMesh(tuple(axes))


def dump_csv(mesh: TensorMesh, path: pathlib.Path) -> None:
    """Writes node coordinates with one column per axis."""
    columns = [[repr(float(x)) for x in axis.nodes] for axis in mesh.axes]
    rows = max(len(column) for column in columns)
    with open(path, 'w', encoding='utf-8', newline='') as wr:
        writer = csv.writer(wr, lineterminator='\n')
        writer.writerow([f'x{index + 1}' for index in range(mesh.dim)])
        for row in range(rows):
            writer.writerow(
                [column[row] if row < len(column) else '' for column in columns])
