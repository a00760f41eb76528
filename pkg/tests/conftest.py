import numpy as np
import pytest
from hypothesis import settings, strategies as st

from cstarloc.algebra import CStarAlgebra

settings.register_profile("ci", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("ci")

block_dims = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)
ranks = st.integers(1, 2)
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(rng, A, full=False):
    """PSD blocks of total trace one; `full` forces full rank in every block."""
    blocks = []
    for d in A.block_dims:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        r = d if full else int(rng.integers(0, d + 1))
        z[:, r:] = 0
        blocks.append(z @ z.conj().T + (0.1 * np.eye(d) if full else 0))
    if all(np.trace(b).real == 0 for b in blocks):
        blocks[0] = np.eye(A.block_dims[0])
    total = sum(np.trace(b).real for b in blocks)
    return tuple(b / total for b in blocks)


def block_stack(x, k):
    """Block-k part of a module element as an (n*d_k) x d_k matrix."""
    return np.vstack([c.blocks[k] for c in x.components])


def column_space(L, k):
    """V_k: the span of the columns of the block-k stacks of L (submodules only)."""
    cols = np.hstack([block_stack(g, k) for g in L.elements()]) if L.dim else None
    A = L.module.algebra
    n = L.module.rank * A.block_dims[k]
    if cols is None or not cols.size:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(cols)
    r = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    return u[:, :r]


def sqrtm_psd(rho):
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def oracle_distance(L, x0, density):
    """Distance from iota(x0) to iota(L) through the realization X_k -> X_k rho_k^(1/2)."""
    total = 0.0
    for k, rho in enumerate(density):
        V = column_space(L, k)
        X = block_stack(x0, k)
        R = X - V @ (V.conj().T @ X)
        total += np.linalg.norm(R @ sqrtm_psd(rho), "fro") ** 2
    return float(np.sqrt(total))


def small_algebra(dims):
    return CStarAlgebra(tuple(dims))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(text)
