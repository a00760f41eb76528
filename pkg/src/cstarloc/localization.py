"""Localization of a Hilbert module at a positive functional.

For a positive functional omega on A the space ``E_omega`` is ``E / N_omega``
with inner product ``omega<x, y>``; in finite dimension the completion step
is vacuous and closures of subspaces are the subspaces themselves.

Coordinates: ``E_omega`` is realized as C^dim through
``iota = Lambda^{1/2} V^*`` built from the kept eigenpairs of the ambient
Gram matrix ``G_ab = omega<e_a, e_b>``.  Every contract below is invariant
under a unitary change of that basis.

Sigma-convex decompositions enter through certified truncations; the
bounded-sequence condition of the countable case is automatic here, so
the countable closure check reduces to the finite one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .errors import InvalidArgument, ShapeError
from .module import HilbertModule, intersect, is_orthogonally_complemented, module_inner, orthogonal_complement
from .states import ConvexDecomposition, PositiveFunctional, convex_combine, gns

ISOMETRY_TOL = 1e-8
POLARIZATION_TOL = 1e-9
NORM_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one executable property; truthy iff the verdict is ``"pass"``."""

    name: str
    verdict: str
    residual: float
    tolerance: float
    tail_bound: float = 0.0
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict == "pass"

    @classmethod
    def compare(cls, name, residual, tolerance, tail_bound=0.0, **details):
        verdict = "pass" if residual <= tolerance else "fail"
        return cls(name, verdict, float(residual), tolerance, tail_bound, details)


@dataclass(frozen=True, eq=False)
class LocalizedSpace:
    module: HilbertModule
    functional: PositiveFunctional
    gram: np.ndarray
    iota_matrix: np.ndarray
    lift: np.ndarray
    null_basis: np.ndarray
    decomposition: ConvexDecomposition | None = None

    @property
    def dim(self):
        return self.iota_matrix.shape[0]

    @property
    def null_dim(self):
        return self.null_basis.shape[1]

    @cached_property
    def iota_norm(self):
        return float(np.linalg.norm(self.iota_matrix, 2)) if self.dim else 0.0

    def iota(self, x):
        return self.iota_matrix @ x.vec

    def inner(self, u, v):
        """``(u, v)_omega`` on E_omega coordinates, conjugate-linear in u."""
        return complex(np.vdot(u, v))

    def polarization_residual(self):
        """Max over basis pairs of ``|(iota e_a, iota e_b) - omega<e_a, e_b>|``."""
        return float(np.max(np.abs(self.iota_matrix.conj().T @ self.iota_matrix - self.gram), initial=0.0))


def _as_functional(omega):
    if isinstance(omega, ConvexDecomposition):
        return convex_combine(omega, truncated=True), omega
    return omega, None


def null_space(E, omega):
    """C-basis (columns) of ``N_omega = {x : omega<x, x> = 0}``."""
    omega, _ = _as_functional(omega)
    _, _, null = linalg.psd_eig(E.ambient_gram(omega))
    return null


def localize(E, omega, decomposition=None):
    """Build E_omega.

    `omega` may be a functional or a `ConvexDecomposition`; in the latter
    case the functional is the (possibly truncated) combination and the
    decomposition is kept for comparison maps.
    """
    omega, decomp = _as_functional(omega)
    if decomposition is not None:
        decomp = decomposition
    if decomp is not None and decomp.algebra != omega.algebra:
        raise ShapeError("decomposition lives over a different algebra")
    gram = E.ambient_gram(omega)
    w, v, null = linalg.psd_eig(gram)
    iota = np.sqrt(w)[:, None] * v.conj().T
    lift = v / np.sqrt(w)[None, :]
    return LocalizedSpace(E, omega, gram, iota, lift, null, decomp)


@dataclass(frozen=True, eq=False)
class ComparisonMap:
    """``phi_j : E_omega -> E_{omega_j}``, ``x + N_omega -> x + N_{omega_j}``."""

    source: LocalizedSpace
    target: LocalizedSpace
    weight: float
    matrix: np.ndarray

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0

    @property
    def norm_bound(self):
        return self.weight ** -0.5

    def intertwining_residual(self):
        """Max entry of ``phi_j iota_omega - iota_{omega_j}`` on the ambient basis."""
        diff = self.matrix @ self.source.iota_matrix - self.target.iota_matrix
        return float(np.max(np.abs(diff), initial=0.0))


def comparison_map(loc, j):
    """Comparison map for part `j` (0-based) of the decomposition carried by `loc`."""
    decomp = loc.decomposition
    if decomp is None:
        raise InvalidArgument("localized space carries no convex decomposition")
    if not 0 <= j < len(decomp):
        raise InvalidArgument(f"part index {j} out of range for {len(decomp)} parts")
    weight = decomp.weights[j]
    if weight <= 0:
        raise InvalidArgument("comparison maps need a positive weight")
    target = localize(loc.module, decomp.parts[j])
    # well defined because N_omega is the intersection of the N_{omega_j}
    return ComparisonMap(loc, target, weight, target.iota_matrix @ loc.lift)


@dataclass(frozen=True, eq=False)
class DirectSumEmbedding:
    """``Psi(u) = (sqrt(lambda_j) phi_j(u))_j`` into the direct sum of the E_{omega_j}."""

    source: LocalizedSpace
    maps: tuple
    matrix: np.ndarray
    tail_bound: float

    @property
    def targets(self):
        return [(m.weight, m.target) for m in self.maps]

    def isometry_residual(self):
        n = self.source.dim
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(n)))


def direct_sum_embedding(loc, accept_truncation=False):
    decomp = loc.decomposition
    if decomp is None:
        raise InvalidArgument("localized space carries no convex decomposition")
    if decomp.tail_bound > 0 and not accept_truncation:
        raise InvalidArgument(
            "decomposition is a truncated sigma-convex sum; pass accept_truncation=True"
        )
    maps = tuple(comparison_map(loc, j) for j in range(len(decomp)))
    blocks = [np.sqrt(m.weight) * m.matrix for m in maps]
    mat = np.vstack(blocks) if blocks else np.zeros((0, loc.dim))
    return DirectSumEmbedding(loc, maps, mat, decomp.tail_bound)


def localized_submodule(loc, L):
    """Orthonormal basis of ``iota_omega(L)`` inside E_omega (closure equals image here)."""
    if L.module != loc.module:
        raise ShapeError("submodule lives in a different module")
    if loc.dim == 0:
        return np.zeros((0, 0), dtype=complex)
    return linalg.orth(loc.iota_matrix @ L.cbasis, scale=loc.iota_norm)


def localized_complement(loc, L):
    return linalg.complement(localized_submodule(loc, L), loc.dim)


def intrinsic_localized_dim(loc, L):
    """dim L_omega computed by localizing L on its own: rank of omega restricted to L."""
    if L.dim == 0:
        return 0
    sub_gram = L.cbasis.conj().T @ loc.gram @ L.cbasis
    top = float(np.max(np.abs(np.linalg.eigvalsh(loc.gram)), initial=0.0))
    w, _, _ = linalg.psd_eig(sub_gram, scale=top)
    return len(w)


def localized_image_dim_check(loc, L):
    """L_omega and the image iota_omega(L) have the same dimension."""
    via_image = localized_submodule(loc, L).shape[1]
    intrinsic = intrinsic_localized_dim(loc, L)
    return CheckResult.compare(
        "localized-image-dim", abs(via_image - intrinsic), 0, image_dim=via_image, intrinsic_dim=intrinsic
    )


def null_intersection_check(E, decomp):
    """N_omega equals the intersection of the N_{omega_j}."""
    null = null_space(E, decomp)
    inter = None
    n = E.ambient_dim
    for part in decomp.parts:
        nj = null_space(E, part)
        inter = nj if inter is None else linalg.intersect(inter, nj)
    if inter is None:
        inter = np.zeros((n, 0))
    dist = linalg.subspace_distance(null, inter)
    return CheckResult.compare(
        "null-intersection", dist, linalg.SUBSPACE_TOL, decomp.tail_bound,
        null_dim=null.shape[1], intersection_dim=inter.shape[1],
    )


def comparison_bound_check(loc):
    """Every phi_j satisfies ``||phi_j|| <= lambda_j^{-1/2}`` and ``phi_j iota_omega = iota_{omega_j}``."""
    excess, intertwine, dims = -np.inf, 0.0, []
    for j in range(len(loc.decomposition)):
        phi = comparison_map(loc, j)
        excess = max(excess, phi.norm - phi.norm_bound)
        intertwine = max(intertwine, phi.intertwining_residual())
        dims.append(phi.target.dim)
    ok = excess <= NORM_BOUND_TOL and intertwine <= POLARIZATION_TOL
    return CheckResult(
        "comparison-bound", "pass" if ok else "fail", max(float(excess), 0.0), NORM_BOUND_TOL,
        loc.decomposition.tail_bound,
        {"norm_excess": float(excess), "intertwining_residual": intertwine, "part_dims": dims},
    )


def isometry_check(loc, accept_truncation=False):
    psi = direct_sum_embedding(loc, accept_truncation)
    total = sum(m.target.dim for m in psi.maps)
    resid = psi.isometry_residual()
    return CheckResult.compare(
        "psi-isometry", resid, ISOMETRY_TOL, psi.tail_bound,
        source_dim=loc.dim, sum_part_dims=total, monotone=loc.dim <= total,
    )


def mesland_check(E, L, omega, perp=None):
    """``(L_omega)^perp == (L^perp)_omega`` inside E_omega; pass `perp` to reuse ``L^perp``."""
    loc = omega if isinstance(omega, LocalizedSpace) else localize(E, omega)
    lhs = localized_complement(loc, L)
    rhs = localized_submodule(loc, orthogonal_complement(L) if perp is None else perp)
    if loc.dim == 0:
        return CheckResult.compare("mesland", 0.0, linalg.SUBSPACE_TOL, lhs_dim=0, rhs_dim=0)
    dist = linalg.subspace_distance(lhs, rhs)
    return CheckResult.compare(
        "mesland", dist, linalg.SUBSPACE_TOL, lhs_dim=lhs.shape[1], rhs_dim=rhs.shape[1]
    )


def _joint_map(loc):
    maps = [comparison_map(loc, j) for j in range(len(loc.decomposition))]
    return maps, np.vstack([m.matrix for m in maps])


def componentwise_set(loc, L, maps=None):
    """``{z : phi_j(z) in iota_{omega_j}(L) for every j}``; may strictly contain iota_omega(L)."""
    if maps is None:
        maps, _ = _joint_map(loc)
    rows = []
    for m in maps:
        img = localized_submodule(m.target, L)
        rows.append(m.matrix - img @ (img.conj().T @ m.matrix))
    return linalg.null_space(np.vstack(rows), scale=1.0)


def closure_characterization_check(loc, L):
    """``iota_omega(L)`` equals the preimage of the joint image ``{(iota_{omega_j} x)_j : x in L}``.

    One sequence must approximate in every E_{omega_j} at once; in finite
    dimension that is membership of ``(phi_j z)_j`` in the joint image.
    """
    if loc.decomposition is None:
        raise InvalidArgument("closure check needs a convex decomposition")
    image = localized_submodule(loc, L)
    maps, joint = _joint_map(loc)
    # joint image computed from each iota_{omega_j} directly, not through phi_j
    joint_image = linalg.orth(
        np.vstack([m.target.iota_matrix @ L.cbasis for m in maps]),
        scale=max(m.target.iota_norm for m in maps),
    )
    resid = joint - joint_image @ (joint_image.conj().T @ joint)
    preimage = linalg.null_space(resid, scale=max(1.0, float(np.linalg.norm(joint, 2))))
    dist = linalg.subspace_distance(image, preimage)
    componentwise = componentwise_set(loc, L, maps)
    return CheckResult.compare(
        "closure", dist, linalg.SUBSPACE_TOL, loc.decomposition.tail_bound,
        image_dim=image.shape[1], preimage_dim=preimage.shape[1],
        componentwise_dim=componentwise.shape[1],
    )


def _localized_intersection_gap(loc, H, K, HK):
    lhs = localized_submodule(loc, HK)
    rhs = linalg.intersect(localized_submodule(loc, H), localized_submodule(loc, K))
    if loc.dim == 0:
        return 0.0, 0, 0
    return linalg.subspace_distance(lhs, rhs), lhs.shape[1], rhs.shape[1]


def intersection_localization_check(H, K, decomp):
    """``(H ∩ K)_omega == H_omega ∩ K_omega`` for omega the combination of `decomp`.

    The hypotheses (H ∩ K complemented, and the equality for every part)
    are verified first; if one fails the verdict is ``"hypothesis-failure"``
    rather than a failure of the conclusion.
    """
    if H.module != K.module:
        raise ShapeError("submodules of different modules")
    E = H.module
    HK = intersect(H, K)
    details = {"intersection_dim": HK.dim}
    if not is_orthogonally_complemented(HK):
        return CheckResult("intersection", "hypothesis-failure", 0.0, linalg.SUBSPACE_TOL,
                           decomp.tail_bound, {**details, "reason": "H∩K not complemented"})
    for j, part in enumerate(decomp.parts):
        gap, _, _ = _localized_intersection_gap(localize(E, part), H, K, HK)
        if gap > linalg.SUBSPACE_TOL:
            return CheckResult("intersection", "hypothesis-failure", gap, linalg.SUBSPACE_TOL,
                               decomp.tail_bound, {**details, "reason": f"part {j} fails", "part": j})
    loc = localize(E, decomp)
    gap, lhs_dim, rhs_dim = _localized_intersection_gap(loc, H, K, HK)
    return CheckResult.compare(
        "intersection", gap, linalg.SUBSPACE_TOL, decomp.tail_bound,
        **details, lhs_dim=lhs_dim, rhs_dim=rhs_dim,
    )


@dataclass(frozen=True, eq=False)
class TensorLocalization:
    """``E ⊗_A H_pi`` as a quotient of a spanning family, with the unitary onto E_omega."""

    dim: int
    coords: np.ndarray
    gram: np.ndarray
    unitary: np.ndarray
    targets: np.ndarray
    localized: LocalizedSpace
    balancing_residual: float

    def unitarity_residual(self):
        if self.dim != self.localized.dim:
            return float("inf")
        U = self.unitary
        return float(np.linalg.norm(U.conj().T @ U - np.eye(self.dim)))

    def intertwining_residual(self):
        return float(np.max(np.abs(self.unitary @ self.coords - self.targets), initial=0.0))

    def inner_product_residual(self):
        """Max deviation between tensor inner products and E_omega inner products of the images."""
        return float(np.max(np.abs(self.targets.conj().T @ self.targets - self.gram), initial=0.0))


def _tensor_inner(E, rep, x, h, x2, h2):
    """``<x ⊗ h, x2 ⊗ h2> = <h, pi(<x, x2>) h2>`` evaluated literally."""
    return complex(np.vdot(h, rep.pi(module_inner(x, x2)) @ h2))


def gns_tensor_localization(E, omega, rng=None, balance_samples=8):
    """Build ``E ⊗_A H_pi`` and the unitary ``x ⊗ pi(a) xi -> iota_omega(x a)``.

    The spanning family is ``{u_i ⊗ h_m}`` (slot units against a basis of
    H_pi) together with ``{e_a ⊗ xi}`` (every ambient basis vector against
    the cyclic vector); its Gram matrix has a nontrivial kernel, which is
    quotiented out.
    """
    omega, _ = _as_functional(omega)
    rep = gns(omega)
    loc = localize(E, omega)
    A = E.algebra
    D = A.total_dim
    n = E.rank
    d = rep.dim
    R = rep.rep_matrices
    # F(x ⊗ h) = (pi(x_i) h)_i; then <s, t> = F(s)^H F(t) by expanding <x, x'> = sum x_i^* x'_i
    feats, targets = [], []
    for i in range(n):
        for m in range(d):
            f = np.zeros(n * d, dtype=complex)
            f[i * d + m] = 1.0
            feats.append(f)
            coeff = np.zeros(E.ambient_dim, dtype=complex)
            coeff[i * D:(i + 1) * D] = rep.lift[:, m]
            targets.append(loc.iota_matrix @ coeff)
    for a in range(E.ambient_dim):
        i, c = divmod(a, D)
        f = np.zeros(n * d, dtype=complex)
        f[i * d:(i + 1) * d] = R[c] @ rep.cyclic_vector
        feats.append(f)
        targets.append(loc.iota_matrix[:, a])
    F = np.column_stack(feats)
    gram = F.conj().T @ F
    w, v, _ = linalg.psd_eig(gram)
    coords = np.sqrt(w)[:, None] * v.conj().T
    targets = np.column_stack(targets) if loc.dim else np.zeros((0, len(feats)))
    unitary = targets @ (v / np.sqrt(w)[None, :])

    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(balance_samples):
        # spot-check the Gram formula and the balancing x a ⊗ h = x ⊗ pi(a) h
        x = E.random_element(rng)
        a = A.random_element(rng)
        h = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        xa = x @ a
        pah = rep.pi(a) @ h
        sq = (_tensor_inner(E, rep, xa, h, xa, h) - _tensor_inner(E, rep, xa, h, x, pah)
              - _tensor_inner(E, rep, x, pah, xa, h) + _tensor_inner(E, rep, x, pah, x, pah))
        scale = max(1.0, abs(_tensor_inner(E, rep, xa, h, xa, h)))
        worst = max(worst, abs(sq) / scale)
    return TensorLocalization(len(w), coords, gram, unitary, targets, loc, worst)


def gns_tensor_check(E, omega):
    t = gns_tensor_localization(E, omega)
    resid = max(t.unitarity_residual(), t.intertwining_residual(), t.inner_product_residual(),
                t.balancing_residual)
    return CheckResult.compare(
        "gns-tensor", resid, ISOMETRY_TOL, tensor_dim=t.dim, localized_dim=t.localized.dim,
    )


def semi_inner_convexity_check(ys, z, x0, weights, tol=1e-9):
    """Jensen-type inequality for the semi-inner products ``sigma_y(u, v) = <y, u><v, y>``.

    Checks that ``sum_i w_i sigma(z_i - x0) - sigma(sum_i w_i z_i - x0)`` is
    positive in A for every parameter y; the residual is the worst negative
    eigenvalue relative to the size of the left-hand side.
    """
    weights = [float(w) for w in weights]
    if len(weights) != len(z):
        raise InvalidArgument("one weight per point is required")
    if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise InvalidArgument("weights must be positive and sum to 1")
    mean = z[0] * weights[0]
    for w, zi in zip(weights[1:], z[1:]):
        mean = mean + w * zi
    worst = 0.0
    for y in ys:
        def sigma(u):
            yu = module_inner(y, u)
            return yu @ module_inner(u, y)

        lhs = None
        for w, zi in zip(weights, z):
            term = w * sigma(zi - x0)
            lhs = term if lhs is None else lhs + term
        diff = lhs - sigma(mean - x0)
        scale = max(1.0, max(float(np.linalg.norm(b, 2)) for b in lhs.blocks))
        low = min(float(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0]) for b in diff.blocks)
        worst = max(worst, -low / scale)
    return CheckResult.compare("semi-inner-convexity", worst, tol)
