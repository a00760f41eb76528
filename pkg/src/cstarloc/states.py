"""Positive functionals, states, convex decompositions and the GNS construction.

A positive functional is stored as a tuple of block density operators and
acts by the trace pairing ``omega(a) = sum_k tr(rho_k a_k)``.  In finite
dimension every state is normal and the weak* and norm topologies agree,
so no separate notion of normality is modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .algebra import AlgebraElement, CStarAlgebra, operator_norm
from .errors import DegenerateInput, InvalidArgument, PositivityError, ShapeError, UnsupportedRule

PSD_TOL = 1e-9
STATE_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12


def _check_density_shapes(A, density):
    if len(density) != len(A.block_dims):
        raise ShapeError(f"expected {len(A.block_dims)} density blocks, got {len(density)}")
    for rho, d in zip(density, A.block_dims):
        if rho.shape != (d, d):
            raise ShapeError(f"density block of shape {rho.shape} where ({d}, {d}) was expected")


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    algebra: CStarAlgebra
    density: tuple

    def __post_init__(self):
        blocks = []
        for rho in self.density:
            rho = np.array(rho, dtype=complex)
            rho.setflags(write=False)
            blocks.append(rho)
        _check_density_shapes(self.algebra, blocks)
        object.__setattr__(self, "density", tuple(blocks))

    @property
    def mass(self):
        return float(sum(np.trace(r).real for r in self.density))

    @property
    def is_state(self):
        return abs(self.mass - 1.0) <= STATE_TOL

    @property
    def norm(self):
        # a positive functional attains its norm at the unit
        return self.mass

    def __call__(self, a):
        return evaluate(self, a)

    @cached_property
    def _gram_block(self):
        mats = [np.kron(np.eye(d), rho.T) for rho, d in zip(self.density, self.algebra.block_dims)]
        n = self.algebra.total_dim
        out = np.zeros((n, n), dtype=complex)
        for off, m in zip(self.algebra.offsets, mats):
            out[off:off + m.shape[0], off:off + m.shape[0]] = m
        out.flags.writeable = False
        return out

    def gram_block(self):
        """Matrix ``G`` with ``omega(x^* y) = x.vec^H G y.vec`` on the algebra."""
        return self._gram_block


# states are positive functionals of mass one; no separate runtime type
State = PositiveFunctional


def functional_from_density(A, rho):
    """Build the functional ``a -> sum_k tr(rho_k a_k)``; each block must be Hermitian PSD."""
    blocks = [np.asarray(r, dtype=complex) for r in rho]
    _check_density_shapes(A, blocks)
    for k, r in enumerate(blocks):
        scale = max(1.0, float(np.linalg.norm(r, 2))) if r.size else 1.0
        if np.max(np.abs(r - r.conj().T), initial=0.0) > PSD_TOL * scale:
            raise PositivityError(f"density block {k} is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0] < -PSD_TOL * scale:
            raise PositivityError(f"density block {k} has a negative eigenvalue")
    return PositiveFunctional(A, tuple(0.5 * (r + r.conj().T) for r in blocks))


def evaluate(omega, a):
    if a.algebra != omega.algebra:
        raise ShapeError("functional and element belong to different algebras")
    return complex(sum(np.sum(rho.T * blk) for rho, blk in zip(omega.density, a.blocks)))


def trace_state(A):
    """The normalized trace; faithful, so its null space is trivial."""
    n = A.hilbert_dim
    return PositiveFunctional(A, tuple(np.eye(d) / n for d in A.block_dims))


def vector_state(A, h):
    """The state ``v -> <v h, h>`` for a unit vector h in ⊕ C^{n_k}."""
    h = np.asarray(h, dtype=complex).ravel()
    if h.shape != (A.hilbert_dim,):
        raise ShapeError(f"vector must have length {A.hilbert_dim}")
    if abs(np.linalg.norm(h) - 1.0) > 1e-12:
        raise InvalidArgument(f"vector state needs a unit vector, norm is {np.linalg.norm(h)!r}")
    parts = [h[o:o + d] for o, d in zip(A.hilbert_offsets, A.block_dims)]
    return PositiveFunctional(A, tuple(np.outer(p, p.conj()) for p in parts))


@dataclass(frozen=True, eq=False)
class ConvexDecomposition:
    """``sum_j weights[j] * parts[j]`` plus a certified remainder of total weight `tail_bound`."""

    weights: tuple
    parts: tuple
    tail_bound: float = 0.0

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        parts = tuple(self.parts)
        if len(weights) != len(parts):
            raise InvalidArgument("weights and parts differ in length")
        if not parts:
            raise InvalidArgument("a decomposition needs at least one part")
        if any(not w > 0 for w in weights):
            raise InvalidArgument(f"weights must be strictly positive, got {weights}")
        if self.tail_bound < 0:
            raise InvalidArgument("tail bound must be non-negative")
        algebras = {p.algebra for p in parts}
        if len(algebras) != 1:
            raise ShapeError("parts live over different algebras")
        if abs(math.fsum(weights) + self.tail_bound - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgument(
                f"weights sum to {math.fsum(weights)!r} with tail {self.tail_bound!r}; expected 1"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "parts", parts)

    @property
    def algebra(self):
        return self.parts[0].algebra

    def __len__(self):
        return len(self.parts)


def convex_combine(decomp, truncated=False):
    """Blockwise weighted sum of densities.

    Certified sigma-convex truncations (``tail_bound > 0``) are combined
    only when `truncated` is set; the result then has mass ``1 - tail``.
    """
    if decomp.tail_bound > 0 and not truncated:
        raise InvalidArgument("decomposition has a nonzero tail; pass truncated=True to combine it")
    A = decomp.algebra
    dens = [np.zeros((d, d), dtype=complex) for d in A.block_dims]
    for w, part in zip(decomp.weights, decomp.parts):
        for k, rho in enumerate(part.density):
            dens[k] += w * rho
    return PositiveFunctional(A, tuple(dens))


@dataclass(frozen=True)
class GeometricRule:
    """``lambda_j = (1 - q) q^(j-1)`` for j >= 1; ratio 1/2 gives ``2^-j``."""

    ratio: float

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise InvalidArgument("geometric ratio must lie in (0, 1)")

    def __call__(self, j):
        return (1.0 - self.ratio) * self.ratio ** (j - 1)

    def tail(self, n):
        return self.ratio ** n

    def to_json(self):
        return {"rule": "geometric", "ratio": self.ratio}


@dataclass(frozen=True)
class FiniteRule:
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise InvalidArgument("weights must be non-negative")

    def __call__(self, j):
        return self.weights[j - 1] if j <= len(self.weights) else 0.0

    def tail(self, n):
        return max(0.0, 1.0 - math.fsum(self.weights[:n]))

    def to_json(self):
        return {"rule": "finite", "weights": list(self.weights)}


def rule_from_json(obj):
    kind = obj.get("rule")
    if kind == "geometric":
        return GeometricRule(float(obj["ratio"]))
    if kind == "finite":
        return FiniteRule(tuple(obj["weights"]))
    raise UnsupportedRule(f"unknown sigma rule {kind!r}")


def sigma_convex_truncate(weight_rule, parts_rule, N):
    """First `N` terms of a countable convex combination, with the exact remaining weight.

    `weight_rule` must expose ``tail(N)`` giving ``1 - sum_{j<=N} lambda_j``
    in closed form; `parts_rule` maps j (1-based) to a state.  Zero weights
    are dropped.
    """
    if not hasattr(weight_rule, "tail"):
        raise UnsupportedRule("weight rule has no closed-form tail")
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    weights, parts = [], []
    for j in range(1, N + 1):
        w = float(weight_rule(j))
        if w > 0:
            weights.append(w)
            parts.append(parts_rule(j) if callable(parts_rule) else parts_rule[j - 1])
    tail = float(weight_rule.tail(N))
    return ConvexDecomposition(tuple(weights), tuple(parts), tail)


def linf_sum_evaluate(decomp, elements, m):
    """Evaluate ``sum_j lambda_j omega_j(a_j)`` on a bounded tuple.

    Returns ``(value, error_bound)`` where the bound ``m * tail * sup ||a_j||``
    covers the discarded tail of the decomposition.
    """
    if len(elements) < len(decomp.parts):
        raise InvalidArgument(
            f"tuple has {len(elements)} entries but the decomposition retains {len(decomp.parts)}"
        )
    if any(p.norm > m * (1 + 1e-12) for p in decomp.parts):
        raise InvalidArgument("a part exceeds the norm bound m")
    value = sum(w * evaluate(p, a) for w, p, a in zip(decomp.weights, decomp.parts, elements))
    sup = max(operator_norm(a) for a in elements)
    return complex(value), m * decomp.tail_bound * sup


def decompose_into_vector_states(omega):
    """Spectral decomposition of a state into vector states of density eigenvectors.

    Eigenvalues below ``1e-9 * max eigenvalue`` are discarded; their total
    mass becomes the decomposition's tail bound.  Under degenerate spectra
    the eigenbasis is whatever the eigensolver returns.
    """
    if not omega.is_state:
        raise InvalidArgument(f"expected a state, mass is {omega.mass!r}")
    A = omega.algebra
    evals = [np.linalg.eigh(0.5 * (r + r.conj().T)) for r in omega.density]
    top = max(float(w[-1]) for w, _ in evals)
    weights, parts = [], []
    for k, (w, v) in enumerate(evals):
        for idx in range(len(w) - 1, -1, -1):
            if w[idx] > linalg.RANK_RTOL * top:
                h = np.zeros(A.hilbert_dim, dtype=complex)
                o = A.hilbert_offsets[k]
                h[o:o + A.block_dims[k]] = v[:, idx]
                h /= np.linalg.norm(h)
                weights.append(float(w[idx]))
                parts.append(vector_state(A, h))
    total = math.fsum(weights)
    if total > 1.0:
        weights = [w / total for w in weights]
        tail = 0.0
    else:
        tail = 1.0 - total
    return ConvexDecomposition(tuple(weights), tuple(parts), tail)


@dataclass(frozen=True, eq=False)
class GnsRepresentation:
    """GNS triple for a positive functional.

    ``rep_matrices[c]`` represents basis element e_c; ``embed`` maps algebra
    coordinates onto H_pi (the quotient map a -> [a]).  The cyclic vector is
    the class of the unit, of norm ``sqrt(mass)``.
    """

    functional: PositiveFunctional
    dim: int
    rep_matrices: np.ndarray
    cyclic_vector: np.ndarray
    embed: np.ndarray
    lift: np.ndarray = field(repr=False)

    def pi(self, a):
        return np.tensordot(a.vec, self.rep_matrices, axes=1) if self.dim else np.zeros((0, 0))

    def homomorphism_residual(self):
        """Max deviation of ``pi(e_a e_b) - pi(e_a) pi(e_b)`` and ``pi(e_a^*) - pi(e_a)^*``."""
        A = self.functional.algebra
        R = self.rep_matrices
        if self.dim == 0:
            return 0.0
        worst = 0.0
        L = A.left_regular
        for c in range(A.total_dim):
            # pi(e_c e_b) = sum_t L[c][t, b] pi(e_t)
            lhs = np.tensordot(L[c].T, R, axes=1)
            rhs = R[c] @ R
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        adj_idx = _adjoint_permutation(A)
        worst = max(worst, float(np.max(np.abs(R[adj_idx] - R.conj().transpose(0, 2, 1)))))
        return worst

    def cyclic_residual(self):
        """Max deviation of ``<pi(a) xi, pi(b) xi> - omega(a^* b)`` over basis pairs."""
        if self.dim == 0:
            return 0.0
        vecs = self.rep_matrices @ self.cyclic_vector
        lhs = vecs.conj() @ vecs.T
        rhs = self.functional.gram_block()
        return float(np.max(np.abs(lhs - rhs)))


def _adjoint_permutation(A):
    """Index map with e_{perm[c]} = e_c^*."""
    perm = []
    for k, d in enumerate(A.block_dims):
        off = A.offsets[k]
        for r in range(d):
            for s in range(d):
                perm.append(off + s * d + r)
    return np.array(perm)


def gns(omega):
    if omega.mass <= 0:
        raise DegenerateInput("GNS needs a nonzero functional")
    A = omega.algebra
    w, v, _ = linalg.psd_eig(omega.gram_block())
    embed = np.sqrt(w)[:, None] * v.conj().T
    lift = v / np.sqrt(w)[None, :]
    L = A.left_regular
    reps = embed @ L @ lift
    cyclic = embed @ A.unit().vec
    reps.setflags(write=False)
    return GnsRepresentation(omega, len(w), reps, cyclic, embed, lift)
