import numpy as np
import pytest
from hypothesis import given, strategies as st

from cstarloc import linalg
from cstarloc.algebra import CStarAlgebra, algebra_new
from cstarloc.errors import InvalidArgument
from cstarloc.instances import c2_example
from cstarloc.localization import (
    closure_characterization_check,
    comparison_bound_check,
    comparison_map,
    componentwise_set,
    direct_sum_embedding,
    gns_tensor_check,
    gns_tensor_localization,
    intersection_localization_check,
    isometry_check,
    localize,
    localized_complement,
    localized_image_dim_check,
    localized_submodule,
    mesland_check,
    null_intersection_check,
    null_space,
    semi_inner_convexity_check,
)
from cstarloc.module import module_inner, standard_module, submodule_from_generators
from cstarloc.separation import separation_certificate
from cstarloc.states import ConvexDecomposition, GeometricRule, PositiveFunctional, evaluate, sigma_convex_truncate

from conftest import block_dims, oracle_distance, random_density, ranks, seeds


def setup(dims, n, seed, parts=2):
    A = CStarAlgebra(dims)
    E = standard_module(A, n)
    rng = np.random.default_rng(seed)
    states = tuple(PositiveFunctional(A, random_density(rng, A)) for _ in range(parts))
    raw = rng.uniform(0.2, 1.0, size=parts)
    return E, ConvexDecomposition(tuple(raw / raw.sum()), states), rng


@given(block_dims, ranks, seeds)
def test_dimension_oracle_and_polarization(dims, n, seed):
    E, decomp, rng = setup(dims, n, seed)
    omega = decomp.parts[0]
    loc = localize(E, omega)
    # oracle: x -> (x_i rho^(1/2)) has rank n * sum_k n_k rank(rho_k)
    expected = n * sum(d * np.linalg.matrix_rank(r, tol=1e-9) for d, r in zip(dims, omega.density))
    assert loc.dim == expected
    assert loc.dim + loc.null_dim == E.ambient_dim
    assert loc.polarization_residual() <= 1e-9
    x, y = E.random_element(rng), E.random_element(rng)
    assert np.isclose(loc.inner(loc.iota(x), loc.iota(y)), evaluate(omega, module_inner(x, y)), atol=1e-9)


@given(block_dims, ranks, seeds)
def test_null_space_is_kernel(dims, n, seed):
    E, decomp, _ = setup(dims, n, seed)
    omega = decomp.parts[0]
    N = null_space(E, omega)
    for j in range(N.shape[1]):
        x = E.from_vec(N[:, j])
        assert abs(evaluate(omega, module_inner(x, x))) <= 1e-9


@given(block_dims, ranks, seeds, st.integers(1, 4))
def test_decomposition_checks(dims, n, seed, parts):
    E, decomp, _ = setup(dims, n, seed, parts)
    loc = localize(E, decomp)
    assert null_intersection_check(E, decomp)
    assert comparison_bound_check(loc)
    iso = isometry_check(loc)
    assert iso and iso.details["monotone"]


def test_comparison_map_bound_is_attained_on_pure_part():
    # omega = (omega_1 + omega_2)/2 on C^2: phi_1 has norm sqrt(2) = lambda^(-1/2)
    inst = c2_example()
    loc = localize(inst.module, inst.decomposition)
    phi = comparison_map(loc, 0)
    assert np.isclose(phi.norm, np.sqrt(2)) and np.isclose(phi.norm_bound, np.sqrt(2))
    with pytest.raises(InvalidArgument):
        comparison_map(loc, 2)
    with pytest.raises(InvalidArgument):
        comparison_map(localize(inst.module, inst.decomposition.parts[0]), 0)


def test_truncated_embedding_needs_opt_in():
    A = algebra_new([2])
    E = standard_module(A, 1)
    tau = PositiveFunctional(A, (np.eye(2) / 2,))
    d = sigma_convex_truncate(GeometricRule(0.5), lambda j: tau, 10)
    loc = localize(E, d)
    with pytest.raises(InvalidArgument):
        direct_sum_embedding(loc)
    res = isometry_check(loc, accept_truncation=True)
    assert res and res.tail_bound == 2.0 ** -10


def test_two_point_fixture():
    inst = c2_example()
    E, L = inst.module, inst.L
    loc = localize(E, inst.decomposition)
    assert loc.dim == 2 and loc.null_dim == 0
    x = loc.iota(inst.x0)
    assert abs(np.vdot(x, x).real - 1.0) <= 1e-12
    for part in inst.decomposition.parts:
        p = localize(E, part)
        assert p.dim == 1 and localized_submodule(p, L).shape[1] == 1
    perp = localized_complement(loc, L)
    assert linalg.residual_norm(x, perp) <= 1e-12
    assert localized_submodule(loc, L).shape[1] == 1
    assert componentwise_set(loc, L).shape[1] == 2
    res = closure_characterization_check(loc, L)
    assert res and res.details["componentwise_dim"] == 2 and res.details["image_dim"] == 1


def test_phi_sends_p2_to_its_negative_image():
    # phi_2 iota(p1 - p2) = -iota_2(p2)
    inst = c2_example()
    E = inst.module
    loc = localize(E, inst.decomposition)
    phi = comparison_map(loc, 1)
    p2 = E.from_vec(np.array([0, 1], dtype=complex))
    assert np.allclose(phi.matrix @ loc.iota(inst.x0), -phi.target.iota(p2))


def random_submodule(E, rng, gens=1):
    A = E.algebra
    out = []
    for _ in range(gens):
        x = E.random_element(rng)
        # kill one column direction so the span is usually proper
        blocks = [b.copy() for b in A.random_element(rng).blocks]
        blocks[0][:, 0] = 0
        out.append(x @ A.element(blocks))
    return submodule_from_generators(out)


@given(block_dims, ranks, seeds)
def test_submodule_checks(dims, n, seed):
    E, decomp, rng = setup(dims, n, seed)
    L = random_submodule(E, rng)
    loc = localize(E, decomp)
    assert localized_image_dim_check(loc, L)
    assert closure_characterization_check(loc, L)
    assert mesland_check(E, L, decomp.parts[0])
    assert mesland_check(E, L, loc)


@given(block_dims, ranks, seeds)
def test_distance_matches_realization_oracle(dims, n, seed):
    E, decomp, rng = setup(dims, n, seed)
    L = random_submodule(E, rng)
    x0 = E.random_element(rng)
    for omega in decomp.parts:
        assert np.isclose(separation_certificate(omega, L, x0), oracle_distance(L, x0, omega.density), atol=1e-9)


@given(block_dims, ranks, seeds)
def test_intersection_with_common_core(dims, n, seed):
    E, decomp, rng = setup(dims, n, seed)
    core = E.random_element(rng)
    H = submodule_from_generators([core, E.random_element(rng) @ E.algebra.random_element(rng)])
    K = submodule_from_generators([core])
    res = intersection_localization_check(H, K, decomp)
    assert res.verdict == "pass"
    assert res.details["intersection_dim"] == K.dim


@given(block_dims, ranks, seeds)
def test_gns_tensor(dims, n, seed):
    E, decomp, _ = setup(dims, n, seed)
    omega = decomp.parts[0]
    t = gns_tensor_localization(E, omega)
    assert t.dim == localize(E, omega).dim
    assert t.unitarity_residual() <= 1e-8
    assert t.inner_product_residual() <= 1e-8
    assert t.balancing_residual <= 1e-9
    assert gns_tensor_check(E, omega)


@given(block_dims, ranks, seeds, st.integers(1, 4))
def test_semi_inner_convexity(dims, n, seed, m):
    E = standard_module(CStarAlgebra(dims), n)
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.1, 1.0, size=m)
    res = semi_inner_convexity_check(
        [E.random_element(rng) for _ in range(3)], [E.random_element(rng) for _ in range(m)],
        E.random_element(rng), list(raw / raw.sum()),
    )
    assert res


def test_semi_inner_convexity_validates_weights():
    E = standard_module(algebra_new([1]), 1)
    z = [E.unit_vector(0)] * 2
    with pytest.raises(InvalidArgument):
        semi_inner_convexity_check([E.unit_vector(0)], z, E.zero(), [0.5, 0.6])
    with pytest.raises(InvalidArgument):
        semi_inner_convexity_check([E.unit_vector(0)], z, E.zero(), [1.0])
