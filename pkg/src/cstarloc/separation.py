"""Constructive separation: states omega with x0 + N_omega outside iota_omega(L).

In finite dimension every state is normal and the complement of a proper
closed subspace is open in every reasonable topology, so the interior
hypotheses of the infinite-dimensional statements hold automatically.
Every witness carries a distance that can be recomputed from
``(state, L, x0)`` alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import NoSeparation, SearchInconclusive
from .localization import localize, localized_submodule
from .module import module_inner
from .states import ConvexDecomposition, PositiveFunctional, convex_combine, trace_state, vector_state

log = logging.getLogger(__name__)

SEPARATION_TOL = 1e-7
MIN_DISTANCE = 10 * SEPARATION_TOL
CERTIFICATE_TOL = 1e-8
DEFAULT_BUDGET = 48

KINDS = ("faithful", "vector", "pure", "convex-of-vector", "hahn-banach")


def separation_certificate(omega, L, x0):
    """Distance from ``iota_omega(x0)`` to ``iota_omega(L)`` in E_omega."""
    if isinstance(omega, ConvexDecomposition):
        omega = convex_combine(omega, truncated=True)
    loc = localize(L.module, omega)
    if loc.dim == 0:
        return 0.0
    return linalg.residual_norm(loc.iota(x0), localized_submodule(loc, L))


def _require_outside(L, x0):
    dist = linalg.residual_norm(x0.vec, L.cbasis)
    if dist <= 1e-9 * max(1.0, float(np.linalg.norm(x0.vec))):
        raise NoSeparation("x0 lies in L; nothing to separate")
    return dist


@dataclass(frozen=True, eq=False)
class SeparationWitness:
    state: PositiveFunctional
    kind: str
    distance: float
    x0: object
    subspace: object = field(repr=False)
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def recertify(self):
        return separation_certificate(self.state, self.subspace, self.x0)

    def is_sound(self, tol=1e-9):
        again = self.recertify()
        return abs(again - self.distance) <= tol and self.distance > MIN_DISTANCE


def _witness(state, kind, L, x0, seed=None, **details):
    dist = separation_certificate(state, L, x0)
    return SeparationWitness(state, kind, dist, x0, L, seed, details)


def separating_state_faithful(E, L, x0):
    """The normalized trace state; faithful, so any x0 outside L is separated."""
    ambient = _require_outside(L, x0)
    w = _witness(trace_state(E.algebra), "faithful", L, x0, ambient_distance=ambient)
    if w.distance <= MIN_DISTANCE:
        # faithful states have trivial null space, so this means x0 is numerically in L
        raise NoSeparation(f"faithful state gives distance {w.distance:.3e}")
    return w


class _VectorObjective:
    """Distance for the vector state of h via the realization x -> (x_ik h_k)_{i,k}."""

    def __init__(self, E, L, x0):
        self.A = E.algebra
        self.E = E
        self.Q = L.cbasis
        self.x0 = x0.vec
        self.calls = 0
        D = self.A.total_dim
        self.slices = []
        for i in range(E.rank):
            for k, d in enumerate(self.A.block_dims):
                start = i * D + self.A.offsets[k]
                self.slices.append((start, d, self.A.hilbert_offsets[k]))

    def _apply(self, vecs, h):
        out = []
        for start, d, ho in self.slices:
            mats = vecs[start:start + d * d].reshape(d, d, -1)
            out.append(np.einsum("rsj,s->rj", mats, h[ho:ho + d]))
        return np.concatenate(out, axis=0)

    def __call__(self, h):
        self.calls += 1
        img = self._apply(np.column_stack([self.x0, self.Q]), h)
        v, M = img[:, 0], img[:, 1:]
        if M.shape[1] == 0:
            return float(np.linalg.norm(v))
        basis = linalg.orth(M, scale=float(np.linalg.norm(h)) * max(1.0, float(np.linalg.norm(M, 2))))
        return linalg.residual_norm(v, basis)


def _random_unit(rng, A, block=None):
    n = A.hilbert_dim
    h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if block is not None:
        mask = np.zeros(n, dtype=bool)
        o = A.hilbert_offsets[block]
        mask[o:o + A.block_dims[block]] = True
        h[~mask] = 0
    return h / np.linalg.norm(h)


def _support_blocks(A, h, tol=1e-12):
    return [k for k, (o, d) in enumerate(zip(A.hilbert_offsets, A.block_dims))
            if np.linalg.norm(h[o:o + d]) > tol]


def find_separating_vector_state(E, L, x0, budget=DEFAULT_BUDGET, seed=0, min_distance=MIN_DISTANCE,
                                 max_parts=None):
    """Search unit vectors h for a vector state separating x0 from L.

    Half the budget goes to random starts (alternating block-supported
    vectors, which give pure states, with full-support ones); the rest
    refines the best start by random coordinate perturbations that keep
    its block support.  If no single vector state certifies, convex
    combinations of up to `max_parts` of the best vectors are tried.
    Raises `SearchInconclusive` when nothing certifies; that is not a
    statement about existence.
    """
    _require_outside(L, x0)
    A = E.algebra
    rng = np.random.default_rng(seed)
    objective = _VectorObjective(E, L, x0)
    starts = max(1, budget // 2)
    nblocks = len(A.block_dims)
    pool = []
    for s in range(starts):
        block = (s // 2) % nblocks if s % 2 == 0 else None
        h = _random_unit(rng, A, block)
        pool.append((objective(h), s, h))
    pool.sort(key=lambda t: (-t[0], t[1]))
    best_val, _, best = pool[0]
    step = 0.5
    while objective.calls < budget:
        support = _support_blocks(A, best)
        idx = rng.integers(A.hilbert_dim)
        owner = next(k for k, o in enumerate(A.hilbert_offsets) if o <= idx < o + A.block_dims[k])
        if owner not in support:
            continue
        trial = best.copy()
        trial[idx] += step * (rng.standard_normal() + 1j * rng.standard_normal())
        trial /= np.linalg.norm(trial)
        val = objective(trial)
        if val > best_val:
            best_val, best = val, trial
        else:
            step *= 0.8
    if best_val > min_distance:
        state = vector_state(A, best)
        kind = "pure" if len(_support_blocks(A, best)) == 1 else "vector"
        w = _witness(state, kind, L, x0, seed, evaluations=objective.calls)
        if w.distance > min_distance:
            return w
    # convex combinations of the best few vector states
    max_parts = max_parts or min(len(pool), max(2, E.rank))
    for n_parts in range(2, max_parts + 1):
        parts = [vector_state(A, h) for _, _, h in pool[:n_parts]]
        decomp = ConvexDecomposition(tuple([1.0 / n_parts] * n_parts), tuple(parts))
        w = _witness(convex_combine(decomp), "convex-of-vector", L, x0, seed,
                     evaluations=objective.calls, parts=n_parts)
        if w.distance > min_distance:
            return w
    log.info("vector-state search inconclusive: best distance %.3e after %d evaluations",
             best_val, objective.calls)
    raise SearchInconclusive("no certified vector-state witness within budget", best_val, objective.calls)


@dataclass(frozen=True, eq=False)
class HahnBanachCertificate:
    """Decomposition ``g(x) = sum_j lambda_j tau_j<x, y_j>`` of a functional killing L with g(x0) = 1.

    `pairs` holds ``(lambda_j, density_j, y_j)``; the densities are general
    (not Hermitian) block matrices of trace norm one, and ``y_j`` has norm one.
    """

    pairs: tuple
    positive_part: PositiveFunctional

    def value(self, x):
        total = 0j
        for lam, dens, y in self.pairs:
            a = module_inner(x, y)
            total += lam * sum(np.sum(rho.T * blk) for rho, blk in zip(dens, a.blocks))
        return complex(total)

    def identity_residual(self, L, x0, rng, samples=10):
        """Max ``|sum_j lambda_j tau_j<x0 - l, y_j> - 1|`` over random l in L (l = 0 included)."""
        worst = abs(self.value(x0) - 1.0)
        for _ in range(samples):
            coeffs = rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim)
            l = L.module.from_vec(L.cbasis @ coeffs) if L.dim else L.module.zero()
            worst = max(worst, abs(self.value(x0 - l) - 1.0))
        return worst


def _positive_part(h):
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def jordan_parts(density):
    """Split ``tau = tau_1 - tau_2 + i (tau_3 - tau_4)`` into four positive densities."""
    parts = ([], [], [], [])
    for rho in density:
        re = 0.5 * (rho + rho.conj().T)
        im = (rho - rho.conj().T) / 2j
        parts[0].append(_positive_part(re))
        parts[1].append(_positive_part(-re))
        parts[2].append(_positive_part(im))
        parts[3].append(_positive_part(-im))
    return tuple(tuple(p) for p in parts)


def hahn_banach_witness(E, L, x0, seed=0):
    """Separate x0 from L by mirroring the duality argument.

    1. ``r = x0 - P_L x0`` gives ``g(x) = tr<x, r> / ||r||_F^2``, zero on L, ``g(x0) = 1``.
    2. One pair per algebra matrix unit: ``y = r E_st``, ``tau(a) = a_st / n_k``.
    3. Each tau is split into Jordan parts.
    4. ``sum_j lambda_j tau_{1,j}``, normalized, is the candidate state; if it
       does not certify, the faithful trace state is used instead.

    Returns ``(certificate, witness)``; ``witness.details["path"]`` names the
    route that certified.
    """
    _require_outside(L, x0)
    A = E.algebra
    Q = L.cbasis
    r_vec = x0.vec - Q @ (Q.conj().T @ x0.vec)
    r = E.from_vec(r_vec)
    r_sq = float(np.vdot(r_vec, r_vec).real)
    pairs = []
    for k, d in enumerate(A.block_dims):
        for s in range(d):
            for t in range(d):
                unit = [np.zeros((m, m), complex) for m in A.block_dims]
                unit[k][s, t] = 1.0
                y = r @ A.element(unit)
                y_norm = y.norm()
                if y_norm <= 1e-14 * np.sqrt(r_sq):
                    continue
                dens = [np.zeros((m, m), complex) for m in A.block_dims]
                dens[k][t, s] = 1.0  # trace norm one; tau = dens / n_k
                lam = y_norm / (d * r_sq)
                pairs.append((lam, tuple(dens), y * (1.0 / y_norm)))
    positive = [np.zeros((m, m), complex) for m in A.block_dims]
    for lam, dens, _ in pairs:
        tau1 = jordan_parts(dens)[0]
        for k in range(len(positive)):
            positive[k] += lam * tau1[k]
    pos = PositiveFunctional(A, tuple(positive))
    cert = HahnBanachCertificate(tuple(pairs), pos)
    residual = cert.identity_residual(L, x0, np.random.default_rng(seed))
    if pos.mass > 0:
        candidate = PositiveFunctional(A, tuple(p / pos.mass for p in positive))
        w = _witness(candidate, "hahn-banach", L, x0, seed, path="positive-part",
                     identity_residual=residual, pairs=len(pairs))
        if w.distance > MIN_DISTANCE and residual <= CERTIFICATE_TOL:
            return cert, w
    log.info("positive-part candidate did not certify; using the faithful trace state")
    fallback = separating_state_faithful(E, L, x0)
    w = SeparationWitness(fallback.state, "faithful", fallback.distance, x0, L, seed,
                          {**fallback.details, "path": "faithful-fallback", "identity_residual": residual})
    return cert, w
