"""Kronecker products applied axis by axis and banded SPD solves."""

import functools
import typing

import numpy as np
import numpy.typing as npt
import scipy.linalg

Array = npt.NDArray[np.float64]


def kron_apply(mats: typing.Sequence[Array], vec: Array) -> Array:
    """Returns (A_1 ⊗ … ⊗ A_d) vec without forming the product.

    The vector is interpreted lexicographically with the first axis slowest,
    matching `np.kron` ordering.  Matrices may be rectangular.
    """
    shape = tuple(mat.shape[1] for mat in mats)
    tensor = np.asarray(vec, dtype=np.float64).reshape(shape)
    for axis, mat in enumerate(mats):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=(1, axis)), 0,
                             axis)
    return tensor.ravel()


def kron_dense(mats: typing.Sequence[Array]) -> Array:
    """Materializes A_1 ⊗ … ⊗ A_d."""
    return functools.reduce(np.kron, mats)


def kron_vector(vecs: typing.Sequence[Array]) -> Array:
    """Returns v_1 ⊗ … ⊗ v_d as a flat vector."""
    return functools.reduce(np.kron, vecs)


def kron_dot(vecs: typing.Sequence[Array], vec: Array) -> float:
    """Returns (v_1 ⊗ … ⊗ v_d) · vec without forming the product."""
    return float(kron_apply([v[None, :] for v in vecs], vec)[0])


def bandwidth(mat: Array, tol: float = 0.0) -> int:
    """Returns the number of super-diagonals holding entries above `tol`."""
    rows, cols = np.nonzero(np.abs(mat) > tol)
    if not len(rows):
        return 0
    return int(np.max(np.abs(cols - rows)))


def to_upper_banded(mat: Array, width: int) -> Array:
    """Converts a symmetric matrix to LAPACK upper banded storage.

    Entry (i, j) with i ≤ j ≤ i + width ends up in row width + i − j, column j,
    which is the layout `scipy.linalg.cholesky_banded` expects.
    """
    size = mat.shape[0]
    banded = np.zeros((width + 1, size))
    for offset in range(width + 1):
        banded[width - offset, offset:] = np.diagonal(mat, offset)
    return banded


class BandedCholesky:
    """Cholesky factor of a symmetric positive definite banded matrix."""

    def __init__(self, mat: Array) -> None:
        self.size = mat.shape[0]
        self.width = bandwidth(mat)
        self.factor = scipy.linalg.cholesky_banded(
            to_upper_banded(mat, self.width))

    def solve(self, rhs: Array) -> Array:
        """Solves A x = rhs; rhs may have extra trailing columns."""
        return scipy.linalg.cho_solve_banded((self.factor, False), rhs)


class KronCholesky:
    """Solver for (c·A_1 ⊗ … ⊗ A_d) x = b from per-axis banded factors."""

    def __init__(self, mats: typing.Sequence[Array]) -> None:
        self.factors = [BandedCholesky(mat) for mat in mats]
        self.shape = tuple(factor.size for factor in self.factors)

    def solve(self, rhs: Array, scale: float = 1.0) -> Array:
        tensor = np.asarray(rhs, dtype=np.float64).reshape(self.shape)
        for axis, factor in enumerate(self.factors):
            moved = np.moveaxis(tensor, axis, 0)
            solved = factor.solve(moved.reshape(moved.shape[0], -1))
            tensor = np.moveaxis(solved.reshape(moved.shape), 0, axis)
        return tensor.ravel() / scale
