"""Standard Hilbert modules E = A^n, submodules, complements and self-duality.

Convention: the A-valued inner product ``<x, y> = sum_i x_i^* y_i`` is
conjugate-linear in the first slot and A-linear in the second, so
``<x, y a> = <x, y> a``.

Module elements are vectorized component by component, each component in
the algebra's matrix-unit order.  The resulting C-coordinates are
orthonormal for the Hilbert-Schmidt pairing ``tr <x, y>`` (unnormalized
trace summed over blocks).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg
from .algebra import AlgebraElement, CStarAlgebra, adjoint, operator_norm
from .algebra import basis as algebra_basis
from .errors import InvalidArgument, InvalidFunctional, ShapeError

CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class HilbertModule:
    algebra: CStarAlgebra
    rank: int

    def __post_init__(self):
        if int(self.rank) < 1:
            raise InvalidArgument(f"module rank must be >= 1, got {self.rank}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def ambient_dim(self):
        return self.rank * self.algebra.total_dim

    def element(self, components):
        return ModuleElement(self, tuple(components))

    def from_vec(self, vec):
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.ambient_dim,):
            raise ShapeError(f"expected {self.ambient_dim} coordinates, got shape {vec.shape}")
        D = self.algebra.total_dim
        return self.element(self.algebra.from_vec(vec[i * D:(i + 1) * D]) for i in range(self.rank))

    def zero(self):
        return self.from_vec(np.zeros(self.ambient_dim, dtype=complex))

    def unit_vector(self, i):
        """The element with the algebra unit in slot i and zero elsewhere."""
        comps = [self.algebra.zero() for _ in range(self.rank)]
        comps[i] = self.algebra.unit()
        return self.element(comps)

    def random_element(self, rng):
        return self.element(self.algebra.random_element(rng) for _ in range(self.rank))

    def basis(self):
        eye = np.eye(self.ambient_dim, dtype=complex)
        return [self.from_vec(eye[a]) for a in range(self.ambient_dim)]

    @cached_property
    def unit_actions(self):
        """For each algebra basis element e_c: index arrays (dst, src) with (x e_c)[dst] = x[src]."""
        A = self.algebra
        D = A.total_dim
        out = []
        for k, d in enumerate(A.block_dims):
            off = A.offsets[k]
            for s in range(d):
                for t in range(d):
                    # X E_st moves column s of X into column t
                    dst, src = [], []
                    for i in range(self.rank):
                        for r in range(d):
                            dst.append(i * D + off + r * d + t)
                            src.append(i * D + off + r * d + s)
                    out.append((np.array(dst), np.array(src)))
        return tuple(out)

    def right_action_matrix(self, a):
        """Matrix of ``x -> x a`` on coordinates."""
        A = self.algebra
        D = A.total_dim
        one = np.zeros((D, D), dtype=complex)
        for off, d, blk in zip(A.offsets, A.block_dims, a.blocks):
            one[off:off + d * d, off:off + d * d] = np.kron(np.eye(d), blk.T)
        return np.kron(np.eye(self.rank), one)

    def inner_matrix(self, x):
        """Matrix C with ``C @ y.vec == <x, y>.vec``."""
        A = self.algebra
        D = A.total_dim
        out = np.zeros((D, self.ambient_dim), dtype=complex)
        for i, comp in enumerate(x.components):
            for off, d, blk in zip(A.offsets, A.block_dims, comp.blocks):
                out[off:off + d * d, i * D + off:i * D + off + d * d] = np.kron(blk.conj().T, np.eye(d))
        return out

    def ambient_gram(self, omega):
        """``G`` with ``omega<x, y> = x.vec^H G y.vec``."""
        if omega.algebra != self.algebra:
            raise ShapeError("functional lives over a different algebra")
        return np.kron(np.eye(self.rank), omega.gram_block())


@dataclass(frozen=True, eq=False)
class ModuleElement:
    module: HilbertModule
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.module.rank:
            raise ShapeError(f"expected {self.module.rank} components, got {len(comps)}")
        if any(c.algebra != self.module.algebra for c in comps):
            raise ShapeError("component from a different algebra")
        object.__setattr__(self, "components", comps)

    @property
    def vec(self):
        return np.concatenate([c.vec for c in self.components])

    def _same(self, other):
        if other.module != self.module:
            raise ShapeError("elements belong to different modules")

    def __add__(self, other):
        self._same(other)
        return ModuleElement(self.module, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        self._same(other)
        return ModuleElement(self.module, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return ModuleElement(self.module, tuple(-a for a in self.components))

    def __mul__(self, scalar):
        return ModuleElement(self.module, tuple(scalar * a for a in self.components))

    __rmul__ = __mul__

    def __matmul__(self, a):
        """Right action x·a."""
        if not isinstance(a, AlgebraElement):
            return NotImplemented
        return ModuleElement(self.module, tuple(c @ a for c in self.components))

    def norm(self):
        return module_norm(self)


def standard_module(A, n):
    return HilbertModule(A, n)


def module_inner(x, y):
    if x.module != y.module:
        raise ShapeError("inner product of elements from different modules")
    out = x.module.algebra.zero()
    for a, b in zip(x.components, y.components):
        out = out + adjoint(a) @ b
    return out


def module_norm(x):
    return float(np.sqrt(operator_norm(module_inner(x, x))))


@dataclass(frozen=True, eq=False)
class LinearSubspace:
    """C-linear subspace of E; `cbasis` holds an orthonormal C-basis as columns.

    Not necessarily closed under the right action; see `Submodule`.
    """

    module: HilbertModule
    generators: tuple
    cbasis: np.ndarray

    @property
    def dim(self):
        return self.cbasis.shape[1]

    @property
    def projector(self):
        return linalg.projector(self.cbasis)

    def contains(self, x, tol=1e-9):
        return linalg.residual_norm(x.vec, self.cbasis) <= tol * max(1.0, float(np.linalg.norm(x.vec)))

    def closure_residual(self):
        """Largest distance from ``v e_c`` to the span, over basis vectors v and algebra units e_c."""
        Q = self.cbasis
        if Q.shape[1] == 0:
            return 0.0
        worst = 0.0
        for dst, src in self.module.unit_actions:
            moved = np.zeros_like(Q)
            moved[dst] = Q[src]
            resid = moved - Q @ (Q.conj().T @ moved)
            worst = max(worst, float(np.max(np.abs(resid))))
        return worst

    def elements(self):
        return [self.module.from_vec(self.cbasis[:, j]) for j in range(self.dim)]

    def equals(self, other, tol=linalg.SUBSPACE_TOL):
        return linalg.subspaces_equal(self.cbasis, other.cbasis, tol)


class Submodule(LinearSubspace):
    """Closed submodule: the span is invariant under ``x -> x a`` for every a in A."""


def linear_span(gens):
    """C-span of the given elements (a closed convex subset, generally not a submodule)."""
    gens = list(gens)
    if not gens:
        raise InvalidArgument("need at least one generator")
    module = gens[0].module
    if any(g.module != module for g in gens):
        raise ShapeError("generators from different modules")
    Q = linalg.orth(np.column_stack([g.vec for g in gens]))
    return LinearSubspace(module, tuple(gens), Q)


def _span_of_generators(module, vecs):
    if not vecs:
        return np.zeros((module.ambient_dim, 0), dtype=complex)
    cols = []
    for v in vecs:
        for dst, src in module.unit_actions:
            col = np.zeros(module.ambient_dim, dtype=complex)
            col[dst] = v[src]
            cols.append(col)
    return linalg.orth(np.column_stack(cols))


def _assert_closed(sub):
    resid = sub.closure_residual()
    if resid > CLOSURE_TOL:
        raise AssertionError(f"span is not closed under the right action (residual {resid:.3e})")
    return sub


def submodule_from_generators(gens):
    gens = list(gens)
    if not gens:
        raise InvalidArgument("need at least one generator")
    module = gens[0].module
    if any(g.module != module for g in gens):
        raise ShapeError("generators from different modules")
    Q = _span_of_generators(module, [g.vec for g in gens])
    return _assert_closed(Submodule(module, tuple(gens), Q))


def submodule_from_basis(module, Q):
    """Wrap an orthonormal basis that is already closed under the right action."""
    Q = np.asarray(Q, dtype=complex)
    gens = tuple(module.from_vec(Q[:, j]) for j in range(Q.shape[1])) or (module.zero(),)
    return _assert_closed(Submodule(module, gens, Q))


def zero_submodule(module):
    return submodule_from_generators([module.zero()])


def whole_module(module):
    return submodule_from_generators([module.unit_vector(i) for i in range(module.rank)])


def orthogonal_complement(L):
    """``{y : <g, y> = 0 for every generator g}`` as the kernel of the stacked system."""
    module = L.module
    system = np.vstack([module.inner_matrix(g) for g in L.generators])
    Q = linalg.null_space(system)
    # <g, y a> = <g, y> a, so the kernel is closed under the right action without checking
    gens = tuple(module.from_vec(Q[:, j]) for j in range(Q.shape[1])) or (module.zero(),)
    return Submodule(module, gens, Q)


def intersect(H, K):
    if H.module != K.module:
        raise ShapeError("submodules of different modules")
    return submodule_from_basis(H.module, linalg.intersect(H.cbasis, K.cbasis))


def submodule_sum(H, K):
    if H.module != K.module:
        raise ShapeError("submodules of different modules")
    return submodule_from_basis(H.module, linalg.span_sum(H.cbasis, K.cbasis))


def is_orthogonally_complemented(L, tol=1e-9):
    perp = orthogonal_complement(L)
    if L.dim + perp.dim != L.module.ambient_dim:
        return False
    if L.dim == 0 or perp.dim == 0:
        return True
    # largest cosine between L and L^perp must vanish
    overlap = float(np.linalg.norm(L.cbasis.conj().T @ perp.cbasis, 2))
    return overlap <= tol and linalg.intersect(L.cbasis, perp.cbasis).shape[1] == 0


def riesz_representation(module, values, tol=1e-9):
    """Find y with ``<y, x> = tau(x)`` given ``values[a] = tau(e_a)`` on the ambient basis.

    `tau` is extended C-linearly; it must be A-linear, i.e. ``tau(x b) = tau(x) b``.
    """
    A = module.algebra
    values = list(values)
    if len(values) != module.ambient_dim:
        raise ShapeError(f"expected {module.ambient_dim} values, got {len(values)}")
    T = np.array([v.vec for v in values]).T  # tau(x).vec == T @ x.vec
    scale = max(1.0, float(np.max(np.abs(T), initial=0.0)))
    for b in algebra_basis(A):
        R = module.right_action_matrix(b)
        lhs = T @ R
        rhs = np.column_stack([(v @ b).vec for v in values])
        if np.max(np.abs(lhs - rhs), initial=0.0) > tol * scale:
            raise InvalidFunctional("map is not A-linear")
    # <x, y> = tau(x)^*, which is linear in y
    rows, rhs = [], []
    for a, x in enumerate(module.basis()):
        rows.append(module.inner_matrix(x))
        rhs.append(adjoint(values[a]).vec)
    system = np.vstack(rows)
    target = np.concatenate(rhs)
    y, *_ = np.linalg.lstsq(system, target, rcond=None)
    if np.max(np.abs(system @ y - target), initial=0.0) > 1e-8 * scale:
        raise InvalidFunctional("no representing element; map is not of the form <y, .>")
    return module.from_vec(y)


def cauchy_schwarz_gap(x, y):
    """Smallest eigenvalue of ``||y||^2 <x, x> - <x, y><y, x>`` (non-negative up to rounding)."""
    xy = module_inner(x, y)
    gap = module_norm(y) ** 2 * module_inner(x, x) - xy @ adjoint(xy)
    return min(float(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0]) for b in gap.blocks)
