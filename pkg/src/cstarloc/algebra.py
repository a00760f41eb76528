"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

An algebra ``M_{n_1} ⊕ ... ⊕ M_{n_k}`` is described by its block sizes.
Elements are tuples of square complex blocks.  The canonical C-basis is
the list of matrix units ordered by block index, then row-major, and
``AlgebraElement.vec`` gives coordinates in exactly that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, ShapeError


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CStarAlgebra:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise InvalidArgument("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise InvalidArgument(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def total_dim(self):
        return sum(d * d for d in self.block_dims)

    @property
    def hilbert_dim(self):
        """Dimension of the defining representation on ⊕ C^{n_k}."""
        return sum(self.block_dims)

    @cached_property
    def offsets(self):
        """Start index of each block inside the coordinate vector."""
        out, pos = [], 0
        for d in self.block_dims:
            out.append(pos)
            pos += d * d
        return tuple(out)

    @cached_property
    def hilbert_offsets(self):
        out, pos = [], 0
        for d in self.block_dims:
            out.append(pos)
            pos += d
        return tuple(out)

    def element(self, blocks):
        return AlgebraElement(self, tuple(blocks))

    def from_vec(self, vec):
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.total_dim,):
            raise ShapeError(f"expected {self.total_dim} coordinates, got shape {vec.shape}")
        return AlgebraElement(
            self,
            tuple(vec[o:o + d * d].reshape(d, d) for o, d in zip(self.offsets, self.block_dims)),
        )

    def zero(self):
        return self.element(np.zeros((d, d), complex) for d in self.block_dims)

    def unit(self):
        return self.element(np.eye(d, dtype=complex) for d in self.block_dims)

    def random_element(self, rng):
        return self.element(
            rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for d in self.block_dims
        )

    @cached_property
    def left_regular(self):
        """Array ``L`` with ``L[c] @ b.vec == (e_c b).vec`` for every basis element e_c."""
        n = self.total_dim
        out = np.zeros((n, n, n), dtype=complex)
        for k, d in enumerate(self.block_dims):
            off = self.offsets[k]
            for r in range(d):
                for s in range(d):
                    c = off + r * d + s
                    # E_rs E_st = E_rt
                    for t in range(d):
                        out[c, off + r * d + t, off + s * d + t] = 1.0
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: CStarAlgebra
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(_frozen(b) for b in self.blocks)
        if len(blocks) != len(self.algebra.block_dims):
            raise ShapeError(
                f"expected {len(self.algebra.block_dims)} blocks, got {len(blocks)}"
            )
        for b, d in zip(blocks, self.algebra.block_dims):
            if b.shape != (d, d):
                raise ShapeError(f"block of shape {b.shape} where ({d}, {d}) was expected")
        object.__setattr__(self, "blocks", blocks)

    @property
    def vec(self):
        return np.concatenate([b.ravel() for b in self.blocks])

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise ShapeError("elements belong to different algebras")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.blocks))

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(scalar * a for a in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return mul(self, other)

    def adjoint(self):
        return adjoint(self)

    def allclose(self, other, atol=1e-12):
        self._check(other)
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def __repr__(self):
        return f"AlgebraElement(dims={self.algebra.block_dims}, blocks={[b.tolist() for b in self.blocks]})"


def algebra_new(block_dims):
    return CStarAlgebra(tuple(block_dims))


def mul(a, b):
    if a.algebra != b.algebra:
        raise ShapeError("cannot multiply elements of different algebras")
    return AlgebraElement(a.algebra, tuple(x @ y for x, y in zip(a.blocks, b.blocks)))


def adjoint(a):
    return AlgebraElement(a.algebra, tuple(x.conj().T for x in a.blocks))


def operator_norm(a):
    """C*-norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in a.blocks)


def is_positive(a, tol=1e-9):
    """Blockwise Hermitian within tolerance and spectrum above ``-tol*max(1, ||a||)``."""
    if tol < 0:
        raise InvalidArgument("tolerance must be non-negative")
    bound = tol * max(1.0, operator_norm(a))
    for b in a.blocks:
        if np.max(np.abs(b - b.conj().T), initial=0.0) > bound:
            return False
        if np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0] < -bound:
            return False
    return True


def basis(A):
    """Matrix units e_rs of every block, block by block, row-major inside a block."""
    eye = np.eye(A.total_dim, dtype=complex)
    return [A.from_vec(eye[i]) for i in range(A.total_dim)]


def trace_pairing(a, b):
    """Hilbert-Schmidt pairing ``sum_k tr(a_k^* b_k)``; the basis is orthonormal for it."""
    return complex(np.vdot(a.vec, b.vec))
