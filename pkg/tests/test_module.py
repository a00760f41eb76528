import numpy as np
import pytest
from hypothesis import given

from cstarloc.algebra import CStarAlgebra, adjoint, algebra_new, is_positive
from cstarloc.errors import InvalidArgument, InvalidFunctional, ShapeError
from cstarloc.module import (
    HilbertModule,
    cauchy_schwarz_gap,
    intersect,
    is_orthogonally_complemented,
    linear_span,
    module_inner,
    module_norm,
    orthogonal_complement,
    riesz_representation,
    standard_module,
    submodule_from_generators,
    submodule_sum,
    whole_module,
    zero_submodule,
)
from cstarloc.states import PositiveFunctional, evaluate

from conftest import block_dims, random_density, ranks, seeds


def brute_inner(x, y):
    return [sum(c.blocks[k].conj().T @ d.blocks[k] for c, d in zip(x.components, y.components))
            for k in range(len(x.module.algebra.block_dims))]


@given(block_dims, ranks, seeds)
def test_inner_product_formula(dims, n, seed):
    E = standard_module(CStarAlgebra(dims), n)
    rng = np.random.default_rng(seed)
    x, y = E.random_element(rng), E.random_element(rng)
    got = module_inner(x, y)
    for blk, ref in zip(got.blocks, brute_inner(x, y)):
        assert np.allclose(blk, ref)
    assert np.allclose(E.inner_matrix(x) @ y.vec, got.vec)


@given(block_dims, ranks, seeds)
def test_inner_product_axioms(dims, n, seed):
    A = CStarAlgebra(dims)
    E = standard_module(A, n)
    rng = np.random.default_rng(seed)
    x, y = E.random_element(rng), E.random_element(rng)
    a = A.random_element(rng)
    assert is_positive(module_inner(x, x))
    assert module_inner(y, x).allclose(adjoint(module_inner(x, y)), atol=1e-10)
    assert module_inner(x, y @ a).allclose(module_inner(x, y) @ a, atol=1e-10)
    assert np.allclose(E.right_action_matrix(a) @ x.vec, (x @ a).vec)


@given(block_dims, ranks, seeds)
def test_cauchy_schwarz(dims, n, seed):
    E = standard_module(CStarAlgebra(dims), n)
    rng = np.random.default_rng(seed)
    x, y = E.random_element(rng), E.random_element(rng)
    scale = 1 + module_norm(x) ** 2 * module_norm(y) ** 2
    assert cauchy_schwarz_gap(x, y) >= -1e-10 * scale


@given(block_dims, ranks, seeds)
def test_ambient_gram_oracle(dims, n, seed):
    A = CStarAlgebra(dims)
    E = standard_module(A, n)
    rng = np.random.default_rng(seed)
    omega = PositiveFunctional(A, random_density(rng, A))
    G = E.ambient_gram(omega)
    x, y = E.random_element(rng), E.random_element(rng)
    assert np.isclose(x.vec.conj() @ G @ y.vec, evaluate(omega, module_inner(x, y)), atol=1e-10)


def test_module_rank_validated():
    with pytest.raises(InvalidArgument):
        HilbertModule(algebra_new([2]), 0)
    E = standard_module(algebra_new([2]), 2)
    with pytest.raises(ShapeError):
        E.from_vec(np.zeros(3))


@given(block_dims, ranks, seeds)
def test_submodule_is_closed_and_complemented(dims, n, seed):
    A = CStarAlgebra(dims)
    E = standard_module(A, n)
    rng = np.random.default_rng(seed)
    L = submodule_from_generators([E.random_element(rng) @ A.random_element(rng)])
    assert L.closure_residual() <= 1e-9
    perp = orthogonal_complement(L)
    assert L.dim + perp.dim == E.ambient_dim
    assert is_orthogonally_complemented(L)
    assert orthogonal_complement(perp).equals(L)
    for g in L.elements():
        for h in perp.elements():
            assert np.max(np.abs(module_inner(g, h).vec)) <= 1e-9


def test_rank_one_submodule_dimension():
    # x A for x = (E_11, 0) in M_2 ⊕ M_2 is the matrices with rows in the first row: dim 2
    A = algebra_new([2])
    E = standard_module(A, 2)
    e11 = A.element([np.diag([1.0, 0.0])])
    L = submodule_from_generators([E.element([e11, A.zero()])])
    assert L.dim == 2
    assert whole_module(E).dim == 8 and zero_submodule(E).dim == 0


def test_linear_span_is_not_a_submodule():
    A = algebra_new([1, 1])
    E = standard_module(A, 1)
    L = linear_span([E.unit_vector(0)])
    assert L.dim == 1 and L.closure_residual() > 0.1
    assert submodule_from_generators([E.unit_vector(0)]).dim == 2


def test_intersection_and_sum():
    A = algebra_new([1, 1])
    E = standard_module(A, 2)
    p1 = A.element([np.eye(1), np.zeros((1, 1))])
    H = submodule_from_generators([E.element([p1, A.zero()])])
    K = submodule_from_generators([E.element([p1, p1])])
    assert intersect(H, K).dim == 0
    assert submodule_sum(H, K).dim == 2


@given(block_dims, ranks, seeds)
def test_riesz_round_trip(dims, n, seed):
    E = standard_module(CStarAlgebra(dims), n)
    rng = np.random.default_rng(seed)
    y0 = E.random_element(rng)
    y = riesz_representation(E, [module_inner(y0, e) for e in E.basis()])
    assert np.allclose(y.vec, y0.vec, atol=1e-9)


def test_riesz_rejects_non_module_map():
    A = algebra_new([2])
    E = standard_module(A, 1)
    # x -> x_11 * 1 is C-linear but not A-linear
    values = [A.unit() * e.components[0].blocks[0][0, 0] for e in E.basis()]
    with pytest.raises(InvalidFunctional):
        riesz_representation(E, values)
