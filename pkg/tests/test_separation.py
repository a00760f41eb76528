import numpy as np
import pytest
from hypothesis import given

from cstarloc.algebra import CStarAlgebra, algebra_new
from cstarloc.errors import NoSeparation, SearchInconclusive
from cstarloc.instances import c2_example, generate_instance
from cstarloc.module import standard_module, submodule_from_generators
from cstarloc.separation import (
    MIN_DISTANCE,
    find_separating_vector_state,
    hahn_banach_witness,
    jordan_parts,
    separating_state_faithful,
    separation_certificate,
)
from cstarloc.states import vector_state

from conftest import block_dims, block_stack, column_space, oracle_distance, ranks, seeds


def proper_instance(dims, n, seed):
    A = CStarAlgebra(dims)
    E = standard_module(A, n)
    rng = np.random.default_rng(seed)
    blocks = [b.copy() for b in A.random_element(rng).blocks]
    blocks[0][:, 0] = 0
    L = submodule_from_generators([E.random_element(rng) @ A.element(blocks)])
    return E, L, E.random_element(rng)


def pure_optimum(L, x0):
    """Best vector-state distance: max_k sigma_max((I - P_{V_k}) X_k)."""
    best = 0.0
    for k in range(len(L.module.algebra.block_dims)):
        V = column_space(L, k)
        X = block_stack(x0, k)
        best = max(best, np.linalg.norm(X - V @ (V.conj().T @ X), 2))
    return best


@given(block_dims, ranks, seeds)
def test_faithful_witness(dims, n, seed):
    E, L, x0 = proper_instance(dims, n, seed)
    w = separating_state_faithful(E, L, x0)
    assert w.kind == "faithful" and w.distance > MIN_DISTANCE and w.is_sound()
    # trace state rho_k = I/N scales the ambient distance by N^(-1/2)
    N = E.algebra.hilbert_dim
    assert np.isclose(w.distance, w.details["ambient_distance"] / np.sqrt(N))
    assert np.isclose(w.distance, oracle_distance(L, x0, w.state.density))


@given(block_dims, ranks, seeds)
def test_vector_witness_bounded_by_analytic_optimum(dims, n, seed):
    E, L, x0 = proper_instance(dims, n, seed)
    w = find_separating_vector_state(E, L, x0, seed=seed % 1000)
    assert w.is_sound()
    assert np.isclose(w.distance, oracle_distance(L, x0, w.state.density), atol=1e-9)
    assert w.distance <= pure_optimum(L, x0) + 1e-9


def test_vector_search_approaches_optimum():
    E, L, x0 = proper_instance((2, 3), 2, 7)
    w = find_separating_vector_state(E, L, x0, budget=2000, seed=1)
    assert w.distance >= 0.95 * pure_optimum(L, x0)


def test_vector_state_at_top_singular_vector_is_optimal():
    E, L, x0 = proper_instance((3,), 2, 11)
    V = column_space(L, 0)
    X = block_stack(x0, 0)
    _, s, vh = np.linalg.svd(X - V @ (V.conj().T @ X))
    state = vector_state(E.algebra, vh[0].conj())
    assert np.isclose(separation_certificate(state, L, x0), s[0])


def test_two_point_fixture_witnesses():
    inst = c2_example()
    E, L, x0 = inst.module, inst.L, inst.x0
    f = separating_state_faithful(E, L, x0)
    assert np.isclose(f.distance, 1.0) and np.isclose(f.details["ambient_distance"], np.sqrt(2))
    # x0 = p1: the trace-form distance is sqrt(2)/2; the normalized trace state scales it by 2^(-1/2)
    p1 = E.from_vec(np.array([1, 0], dtype=complex))
    f1 = separating_state_faithful(E, L, p1)
    assert np.isclose(f1.details["ambient_distance"], np.sqrt(2) / 2)
    assert np.isclose(f1.distance, 0.5)
    # pure states see L as everything; h = (a, b) gives distance^2 = 1 - (|a|^2 - |b|^2)^2
    for part in inst.decomposition.parts:
        assert separation_certificate(part, L, x0) <= 1e-12
    v = find_separating_vector_state(E, L, x0, budget=400)
    assert v.kind == "vector" and 0.99 <= v.distance <= 1.0 + 1e-12
    balanced = vector_state(E.algebra, np.array([1, 1j]) / np.sqrt(2))
    assert np.isclose(separation_certificate(balanced, L, x0), 1.0)
    cert, hb = hahn_banach_witness(E, L, x0)
    assert hb.details["path"] == "positive-part" and np.isclose(hb.distance, 1.0)
    assert cert.identity_residual(L, x0, np.random.default_rng(0)) <= 1e-12


def test_no_separation_inside_L():
    E, L, _ = proper_instance((2,), 1, 3)
    x = L.elements()[0]
    with pytest.raises(NoSeparation):
        separating_state_faithful(E, L, x)
    with pytest.raises(NoSeparation):
        find_separating_vector_state(E, L, x)
    with pytest.raises(NoSeparation):
        hahn_banach_witness(E, L, x)


def test_search_inconclusive_reports_best():
    E, L, x0 = proper_instance((2,), 1, 5)
    with pytest.raises(SearchInconclusive) as info:
        find_separating_vector_state(E, L, x0, budget=4, min_distance=1e6)
    assert info.value.evaluations == 4 and info.value.best_distance > 0


@given(block_dims, ranks, seeds)
def test_hahn_banach_certificate(dims, n, seed):
    E, L, x0 = proper_instance(dims, n, seed)
    cert, w = hahn_banach_witness(E, L, x0, seed=0)
    rng = np.random.default_rng(1)
    assert cert.identity_residual(L, x0, rng) <= 1e-8
    for l in L.elements():
        assert abs(cert.value(l)) <= 1e-9
    assert w.is_sound()
    for _, dens, y in cert.pairs:
        assert np.isclose(sum(np.abs(np.linalg.svd(d, compute_uv=False)).sum() for d in dens), 1.0)
        assert np.isclose(y.norm(), 1.0)


def test_jordan_parts_recombine():
    rng = np.random.default_rng(0)
    rho = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))]
    p = jordan_parts(rho)
    back = p[0][0] - p[1][0] + 1j * (p[2][0] - p[3][0])
    assert np.allclose(back, rho[0])
    for part in p:
        assert np.linalg.eigvalsh(part[0]).min() >= -1e-12


def test_generated_instances_separate():
    for seed in range(5):
        inst = generate_instance(seed, "small")
        w = separating_state_faithful(inst.module, inst.L, inst.x0)
        assert w.is_sound()
