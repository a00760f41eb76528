"""Rank, span and subspace utilities with one tolerance policy.

All rank decisions use singular values (or eigenvalues for PSD matrices)
with the relative threshold ``RANK_RTOL * max(sigma_max, scale)``.
Subspaces are carried as matrices with orthonormal columns and compared
through their orthogonal projectors.
"""

from __future__ import annotations

import numpy as np

RANK_RTOL = 1e-9
SUBSPACE_TOL = 1e-8


def _threshold(top, scale):
    return RANK_RTOL * max(float(top), float(scale))


def orth(mat, scale=0.0):
    """Orthonormal basis (as columns) for the column span of `mat`.

    `scale` is a floor for the rank threshold; pass the norm of the map
    that produced `mat` when its columns may all be numerically zero.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.size == 0 or mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    return u[:, s > _threshold(s[0], scale)]


def null_space(mat, scale=0.0):
    """Orthonormal basis of the kernel of `mat` (columns)."""
    mat = np.asarray(mat, dtype=complex)
    ncols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    top = s[0] if s.size else 0.0
    if top == 0.0:
        return np.eye(ncols, dtype=complex)
    rank = int(np.sum(s > _threshold(top, scale)))
    return vh[rank:].conj().T


def psd_eig(mat, scale=0.0):
    """Eigendecomposition of a Hermitian PSD matrix, split at the rank threshold.

    Returns ``(values, vectors, null_vectors)`` where `values` are the kept
    eigenvalues in descending order.
    """
    mat = np.asarray(mat, dtype=complex)
    mat = 0.5 * (mat + mat.conj().T)
    if mat.shape[0] == 0:
        return np.zeros(0), mat, mat
    w, v = np.linalg.eigh(mat)
    w, v = w[::-1], v[:, ::-1]
    top = w[0]
    if top <= 0.0:
        return w[:0], v[:, :0], v
    keep = w > _threshold(top, scale)
    return w[keep], v[:, keep], v[:, ~keep]


def projector(basis):
    basis = np.asarray(basis, dtype=complex)
    return basis @ basis.conj().T


def subspace_distance(q1, q2):
    """Frobenius distance between the orthogonal projectors onto two spans."""
    q1 = np.asarray(q1, dtype=complex)
    q2 = np.asarray(q2, dtype=complex)
    if q1.shape[0] != q2.shape[0]:
        raise ValueError("subspaces live in different ambient spaces")
    return float(np.linalg.norm(projector(q1) - projector(q2)))


def subspaces_equal(q1, q2, tol=SUBSPACE_TOL):
    return subspace_distance(q1, q2) <= tol


def complement(q, dim=None):
    """Orthonormal basis of the orthogonal complement of span(q)."""
    q = np.asarray(q, dtype=complex)
    n = q.shape[0] if dim is None else dim
    if q.shape[1] == 0:
        return np.eye(n, dtype=complex)
    return null_space(q.conj().T, scale=1.0)


def intersect(q1, q2):
    """Orthonormal basis of span(q1) ∩ span(q2) for orthonormal inputs."""
    q1 = np.asarray(q1, dtype=complex)
    q2 = np.asarray(q2, dtype=complex)
    n = q1.shape[0]
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    # sines of principal angles are bounded by 1, so the floor scale is 1
    resid = q2 - q1 @ (q1.conj().T @ q2)
    coeffs = null_space(resid, scale=1.0)
    return orth(q2 @ coeffs, scale=1.0)


def span_sum(*qs):
    mats = [np.asarray(q, dtype=complex) for q in qs]
    return orth(np.hstack(mats), scale=1.0)


def residual_norm(v, q):
    """Distance from vector `v` to span(q), q orthonormal."""
    v = np.asarray(v, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if q.shape[1] == 0:
        return float(np.linalg.norm(v))
    return float(np.linalg.norm(v - q @ (q.conj().T @ v)))
