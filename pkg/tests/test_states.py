import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cstarloc.algebra import CStarAlgebra, adjoint, algebra_new, basis
from cstarloc.errors import DegenerateInput, InvalidArgument, PositivityError, ShapeError, UnsupportedRule
from cstarloc.states import (
    ConvexDecomposition,
    FiniteRule,
    GeometricRule,
    PositiveFunctional,
    convex_combine,
    decompose_into_vector_states,
    evaluate,
    functional_from_density,
    gns,
    linf_sum_evaluate,
    rule_from_json,
    sigma_convex_truncate,
    trace_state,
    vector_state,
)

from conftest import block_dims, random_density, seeds


def full_matrix(a):
    n = sum(b.shape[0] for b in a.blocks)
    out = np.zeros((n, n), dtype=complex)
    o = 0
    for b in a.blocks:
        out[o:o + len(b), o:o + len(b)] = b
        o += len(b)
    return out


@given(block_dims, seeds)
def test_evaluate_is_trace_pairing(dims, seed):
    A = CStarAlgebra(dims)
    rng = np.random.default_rng(seed)
    rho = random_density(rng, A)
    omega = PositiveFunctional(A, rho)
    a = A.random_element(rng)
    big = full_matrix(A.element(rho))
    assert np.isclose(evaluate(omega, a), np.trace(big @ full_matrix(a)), atol=1e-12)
    assert np.isclose(omega.mass, 1.0, atol=1e-12) and omega.is_state


@given(block_dims, seeds)
def test_vector_state_matches_inner_product(dims, seed):
    A = CStarAlgebra(dims)
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(A.hilbert_dim) + 1j * rng.standard_normal(A.hilbert_dim)
    h /= np.linalg.norm(h)
    a = A.random_element(rng)
    assert np.isclose(evaluate(vector_state(A, h), a), np.vdot(h, full_matrix(a) @ h), atol=1e-12)


def test_vector_state_needs_unit_vector():
    A = algebra_new([2])
    with pytest.raises(InvalidArgument):
        vector_state(A, [1.0, 1.0])
    with pytest.raises(ShapeError):
        vector_state(A, [1.0])


def test_density_validation():
    A = algebra_new([2])
    with pytest.raises(PositivityError):
        functional_from_density(A, [np.diag([1.0, -0.5])])
    with pytest.raises(PositivityError):
        functional_from_density(A, [np.array([[1.0, 1.0], [0.0, 1.0]])])
    with pytest.raises(ShapeError):
        functional_from_density(A, [np.eye(3)])
    assert functional_from_density(A, [np.eye(2) / 2]).is_state


def test_trace_state_is_faithful():
    A = algebra_new([2, 3])
    tau = trace_state(A)
    assert tau.is_state
    rng = np.random.default_rng(0)
    a = A.random_element(rng)
    assert evaluate(tau, adjoint(a) @ a).real > 0


def test_convex_decomposition_validation():
    A = algebra_new([1, 1])
    p = PositiveFunctional(A, (np.eye(1), np.zeros((1, 1))))
    with pytest.raises(InvalidArgument):
        ConvexDecomposition((0.5, 0.6), (p, p))
    with pytest.raises(InvalidArgument):
        ConvexDecomposition((1.0, 0.0), (p, p))
    with pytest.raises(InvalidArgument):
        ConvexDecomposition((1.0,), (p, p))
    d = ConvexDecomposition((0.5, 0.25), (p, p), tail_bound=0.25)
    with pytest.raises(InvalidArgument):
        convex_combine(d)
    assert np.isclose(convex_combine(d, truncated=True).mass, 0.75)


def test_geometric_rule_half_is_powers_of_two():
    rule = GeometricRule(0.5)
    assert [rule(j) for j in (1, 2, 3)] == [0.5, 0.25, 0.125]
    assert rule.tail(3) == 0.125


@given(st.floats(0.05, 0.95), st.integers(1, 60))
def test_geometric_tail_closes_the_sum(q, n):
    rule = GeometricRule(q)
    # long partial sum as the oracle for the remaining mass
    head = math.fsum(rule(j) for j in range(1, n + 1))
    assert abs(head + rule.tail(n) - 1.0) <= 1e-12
    far = math.fsum(rule(j) for j in range(n + 1, n + 4000))
    assert abs(far - rule.tail(n)) <= 1e-12


def test_finite_rule_and_json():
    rule = rule_from_json({"rule": "finite", "weights": [0.5, 0.3, 0.2]})
    assert isinstance(rule, FiniteRule) and rule(4) == 0.0
    assert abs(rule.tail(2) - 0.2) < 1e-15 and rule.tail(3) == 0.0
    assert rule_from_json(GeometricRule(0.3).to_json()) == GeometricRule(0.3)
    with pytest.raises(UnsupportedRule):
        rule_from_json({"rule": "harmonic"})
    with pytest.raises(InvalidArgument):
        GeometricRule(1.0)


def test_sigma_truncation_requires_tail():
    A = algebra_new([1])
    tau = trace_state(A)
    with pytest.raises(UnsupportedRule):
        sigma_convex_truncate(lambda j: 2.0 ** -j, lambda j: tau, 5)
    d = sigma_convex_truncate(GeometricRule(0.5), lambda j: tau, 20)
    assert len(d) == 20 and d.tail_bound == 2.0 ** -20


def test_alternating_geometric_sum():
    # sum_j 2^-j (-1)^j = -1/3; the reported bound must cover the truncation error
    A = algebra_new([1])
    tau = trace_state(A)
    for n in (5, 10, 30):
        d = sigma_convex_truncate(GeometricRule(0.5), lambda j: tau, n)
        elems = [A.unit() * (-1) ** j for j in range(1, n + 1)]
        value, bound = linf_sum_evaluate(d, elems, 1.0)
        assert abs(value - (-1 / 3)) <= bound + 1e-15
        assert bound == 2.0 ** -n


def test_linf_sum_checks_inputs():
    A = algebra_new([1])
    tau = trace_state(A)
    d = sigma_convex_truncate(GeometricRule(0.5), lambda j: tau, 4)
    with pytest.raises(InvalidArgument):
        linf_sum_evaluate(d, [A.unit()] * 3, 1.0)
    with pytest.raises(InvalidArgument):
        linf_sum_evaluate(d, [A.unit()] * 4, 0.5)


@given(block_dims, seeds)
def test_vector_decomposition_recombines(dims, seed):
    A = CStarAlgebra(dims)
    omega = PositiveFunctional(A, random_density(np.random.default_rng(seed), A))
    dec = decompose_into_vector_states(omega)
    back = convex_combine(dec, truncated=True)
    for e in basis(A):
        assert abs(evaluate(back, e) - evaluate(omega, e)) <= 1e-9
    # every part is a vector state: rank-one density of trace one
    for p in dec.parts:
        assert np.isclose(p.mass, 1.0)
        assert sum(np.linalg.matrix_rank(r, tol=1e-9) for r in p.density) == 1


def test_decomposition_needs_a_state():
    A = algebra_new([2])
    with pytest.raises(InvalidArgument):
        decompose_into_vector_states(PositiveFunctional(A, (np.eye(2),)))


@given(block_dims, seeds)
def test_gns_dimension_and_residuals(dims, seed):
    A = CStarAlgebra(dims)
    rho = random_density(np.random.default_rng(seed), A)
    rep = gns(PositiveFunctional(A, rho))
    # oracle: dim H_pi = sum_k n_k rank(rho_k)
    expected = sum(d * np.linalg.matrix_rank(r, tol=1e-9) for d, r in zip(dims, rho))
    assert rep.dim == expected
    assert rep.homomorphism_residual() <= 1e-9
    assert rep.cyclic_residual() <= 1e-9
    assert np.isclose(np.linalg.norm(rep.cyclic_vector) ** 2, 1.0)
    assert np.allclose(rep.pi(A.unit()), np.eye(rep.dim), atol=1e-9)


def test_gns_rejects_zero():
    A = algebra_new([2])
    with pytest.raises(DegenerateInput):
        gns(PositiveFunctional(A, (np.zeros((2, 2)),)))
