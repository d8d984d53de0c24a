import itertools
import math

import numpy as np
import pytest

from cohen_norms.operators import (
    HomogeneousPolynomial,
    LinearOperator,
    MultilinearOperator,
    adjoint,
    apply,
    compose,
    differential,
    evaluate_rows,
    fix_argument,
    functional_tensor,
    multiply_functional,
    multiply_functional_poly,
    operator_norm,
    polarization_tensor,
    polarize,
    power_times_linear,
    restrict_scalar,
)
from cohen_norms.spaces import DimensionMismatch, Functional, NormedSpace, Vector

R = NormedSpace(1, 2)
E2 = NormedSpace(2, 2)


def rand_multilinear(rng, dims, out, q=2):
    doms = [NormedSpace(d, q) for d in dims]
    return MultilinearOperator(rng.standard_normal((out, *dims)), doms, NormedSpace(out, q))


def rand_poly(rng, dim, out, n, q=2):
    return HomogeneousPolynomial(rng.standard_normal((out,) + (dim,) * n), NormedSpace(dim, q), NormedSpace(out, q))


def direct(op, xs):
    return apply(op, *xs).coords


def test_apply_examples():
    np.testing.assert_array_equal(apply(LinearOperator(np.eye(2), E2, E2), [1, 2]).coords, [1, 2])
    dot = MultilinearOperator(np.eye(2)[None], (E2, E2), R)
    assert apply(dot, [1, 0], [0, 1]).coords[0] == 0
    P = HomogeneousPolynomial([[[0, 0.5], [0.5, 0]]], E2, R)
    assert apply(P, [2, 3]).coords[0] == pytest.approx(6)
    with pytest.raises(DimensionMismatch):
        apply(dot, [1, 0])


def test_linearity_per_slot(rng):
    T = rand_multilinear(rng, (2, 3, 2), 2)
    for slot in range(3):
        xs = [rng.standard_normal(E.dim) for E in T.domains]
        y = rng.standard_normal(T.domains[slot].dim)
        a, b = rng.standard_normal(2)
        lhs_args = list(xs)
        lhs_args[slot] = a * xs[slot] + b * y
        other = list(xs)
        other[slot] = y
        np.testing.assert_allclose(direct(T, lhs_args), a * direct(T, xs) + b * direct(T, other), atol=1e-12)


def test_adjoint():
    T = LinearOperator(np.array([[1.0, 2.0], [3.0, 4.0]]), NormedSpace(2, 1), E2)
    Tt = adjoint(T)
    np.testing.assert_array_equal(Tt.matrix, T.matrix.T)
    assert Tt.domain == E2 and Tt.codomain == NormedSpace(2, math.inf)
    assert adjoint(Tt) == T
    I = LinearOperator(np.eye(2), E2, E2)
    assert adjoint(I) == I


def test_adjoint_reverses_composition(rng):
    A = LinearOperator(rng.standard_normal((2, 2)), E2, E2)
    B = LinearOperator(rng.standard_normal((2, 2)), E2, E2)
    AB = compose(A, B, [LinearOperator(np.eye(2), E2, E2)])
    BtAt = compose(adjoint(B), adjoint(A), [LinearOperator(np.eye(2), E2, E2)])
    np.testing.assert_allclose(adjoint(AB).matrix, BtAt.matrix, atol=1e-14)


def test_polarize_examples():
    P = HomogeneousPolynomial([[[1.0]]], R, R)
    np.testing.assert_allclose(polarize(P).tensor, [[[1.0]]])
    P = HomogeneousPolynomial([[[0, 1.0], [0, 0]]], E2, R)  # x1 x2 after symmetrization
    a, b = np.array([0.3, -1.2]), np.array([2.0, 0.7])
    val = apply(polarize(P), a, b).coords[0]
    assert val == pytest.approx((a[0] * b[1] + a[1] * b[0]) / 2, abs=1e-14)


def test_polarization_sum_matches_symmetric_tensor(rng):
    for n in range(1, 5):
        for dim in (1, 2, 3):
            P = rand_poly(rng, dim, 2, n)
            T = polarization_tensor(lambda X: evaluate_rows(P.tensor, [X] * n), dim, n)
            np.testing.assert_allclose(T, P.tensor, atol=1e-10)


def test_polarize_symmetric_and_diagonal(rng):
    for n in range(1, 5):
        P = rand_poly(rng, 3, 2, n)
        Pc = polarize(P)
        for perm in itertools.permutations(range(1, n + 1)):
            assert np.array_equal(Pc.tensor, np.transpose(Pc.tensor, (0, *perm)))
        for _ in range(20):
            x = rng.standard_normal(3)
            np.testing.assert_allclose(direct(Pc, [x] * n), P(x), atol=1e-10)


def test_symmetric_input_kept_exactly(rng):
    P = rand_poly(rng, 3, 2, 3)
    again = HomogeneousPolynomial(P.tensor, P.domain, P.codomain)
    assert np.array_equal(again.tensor, P.tensor)


def test_fix_argument(rng):
    dot = MultilinearOperator(np.eye(2)[None], (E2, E2), R)
    Ta = fix_argument(dot, 0, [1, 0])
    assert isinstance(Ta, LinearOperator)
    np.testing.assert_array_equal(Ta.matrix, [[1, 0]])
    T = rand_multilinear(rng, (2, 3, 2), 2)
    assert not np.any(fix_argument(T, 1, np.zeros(3)).tensor)
    a = rng.standard_normal(3)
    Ta = fix_argument(T, 1, a)
    for _ in range(20):
        x, z = rng.standard_normal(2), rng.standard_normal(2)
        np.testing.assert_allclose(direct(Ta, [x, z]), direct(T, [x, a, z]), atol=1e-12)
    with pytest.raises(IndexError):
        fix_argument(T, 3, a)
    with pytest.raises(DimensionMismatch):
        fix_argument(T, 0, a)


def test_multiply_functional(rng):
    idR = LinearOperator([[1.0]], R, R)
    g = multiply_functional(idR, Functional([1.0], R))
    assert apply(g, [2.0], [3.0]).coords[0] == 6.0
    T = rand_multilinear(rng, (2, 2), 2)
    assert not np.any(multiply_functional(T, Functional([0, 0, 0], NormedSpace(3, 2))).tensor)
    gam = Functional(rng.standard_normal(3), NormedSpace(3, 1))
    gT = multiply_functional(T, gam)
    for _ in range(20):
        x, y, z = rng.standard_normal(2), rng.standard_normal(2), rng.standard_normal(3)
        np.testing.assert_allclose(direct(gT, [x, y, z]), gam.coords @ z * direct(T, [x, y]), atol=1e-12)


def test_multiply_functional_poly(rng):
    P = HomogeneousPolynomial([[[1.0]]], R, R)
    gP = multiply_functional_poly(P, Functional([1.0], R))
    assert gP.degree == 3 and gP(np.array([2.0]))[0] == pytest.approx(8.0)
    np.testing.assert_allclose(polarize(gP).tensor, [[[[1.0]]]])
    assert not np.any(multiply_functional_poly(P, Functional([0.0], R)).tensor)
    P = rand_poly(rng, 2, 2, 2)
    gam = Functional(rng.standard_normal(2), P.domain)
    gP = multiply_functional_poly(P, gam)
    product = lambda X: (X @ gam.coords)[:, None] * evaluate_rows(P.tensor, [X, X])
    np.testing.assert_allclose(gP.tensor, polarization_tensor(product, 2, 3), atol=1e-10)


def test_compose(rng):
    T = rand_multilinear(rng, (2, 3), 2)
    I2, I3 = LinearOperator(np.eye(2), E2, E2), LinearOperator(np.eye(3), NormedSpace(3, 2), NormedSpace(3, 2))
    assert np.array_equal(compose(I2, T, [I2, I3]).tensor, T.tensor)
    zero = LinearOperator(np.zeros((2, 2)), E2, E2)
    assert not np.any(compose(zero, T, [I2, I3]).tensor)
    A = LinearOperator(rng.standard_normal((3, 2)), E2, NormedSpace(3, 1))
    A1 = LinearOperator(rng.standard_normal((2, 4)), NormedSpace(4, 2), NormedSpace(2, 2))
    A2 = LinearOperator(rng.standard_normal((3, 1)), R, NormedSpace(3, 2))
    C = compose(A, T, [A1, A2])
    for _ in range(20):
        x, y = rng.standard_normal(4), rng.standard_normal(1)
        np.testing.assert_allclose(direct(C, [x, y]), A.matrix @ direct(T, [A1.matrix @ x, A2.matrix @ y]), atol=1e-10)


def test_fix_commutes_with_compose(rng):
    T = rand_multilinear(rng, (2, 2), 2)
    A = LinearOperator(rng.standard_normal((2, 2)), E2, E2)
    B = [LinearOperator(rng.standard_normal((2, 2)), E2, E2) for _ in range(2)]
    a = rng.standard_normal(2)
    left = fix_argument(compose(A, T, B), 0, a)
    right = compose(A, fix_argument(T, 0, B[0].matrix @ a), [B[1]])
    for _ in range(20):
        x = rng.standard_normal(2)
        np.testing.assert_allclose(direct(left, [x]), direct(right, [x]), atol=1e-10)


def test_restrict_scalar(rng):
    A = MultilinearOperator([[[1.0]]], (R, R), R)
    A1 = restrict_scalar(A)
    assert isinstance(A1, LinearOperator) and A1.matrix[0, 0] == 1.0
    assert not np.any(restrict_scalar(MultilinearOperator(np.zeros((2, 2, 2, 1)), (E2, E2, R), E2)).tensor)
    A = MultilinearOperator(rng.standard_normal((2, 2, 2, 1)), (E2, E2, R), E2)
    A1 = restrict_scalar(A)
    for _ in range(20):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        np.testing.assert_allclose(direct(A1, [x, y]), direct(A, [x, y, [1.0]]), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        restrict_scalar(MultilinearOperator(np.zeros((1, 2, 2)), (E2, E2), R))


def test_functional_tensor(rng):
    idR = LinearOperator([[1.0]], R, R)
    m = functional_tensor([Functional([1.0], R)], idR)
    assert apply(m, [2.0], [5.0]).coords[0] == 10.0
    u = LinearOperator(rng.standard_normal((2, 3)), NormedSpace(3, 2), E2)
    gs = [Functional(rng.standard_normal(2), E2), Functional([0.0], R)]
    assert not np.any(functional_tensor(gs, u).tensor)
    gs = [Functional(rng.standard_normal(2), E2), Functional(rng.standard_normal(1), R)]
    T = functional_tensor(gs, u)
    for _ in range(20):
        x, y, z = rng.standard_normal(2), rng.standard_normal(1), rng.standard_normal(3)
        expected = (gs[0].coords @ x) * (gs[1].coords @ y) * (u.matrix @ z)
        np.testing.assert_allclose(direct(T, [x, y, z]), expected, atol=1e-12)


def test_differential(rng):
    P = rand_poly(rng, 2, 2, 3)
    a = rng.standard_normal(2)
    assert np.array_equal(differential(P, a, 3).tensor, P.tensor)
    D0 = differential(P, a, 0)
    assert D0.degree == 0
    np.testing.assert_allclose(D0.tensor, P(a), atol=1e-12)
    for n in range(1, 5):
        xn = HomogeneousPolynomial(np.ones((1,) + (1,) * n), R, R)
        for k in range(n + 1):
            Dk = differential(xn, [1.0], k)
            assert Dk(np.array([2.0]))[0] == pytest.approx(math.comb(n, k) * 2.0**k)
    with pytest.raises(ValueError):
        differential(P, a, 4)


def test_power_times_linear(rng):
    u = LinearOperator(rng.standard_normal((2, 2)), E2, E2)
    g = Functional(rng.standard_normal(2), E2)
    P = power_times_linear(g, u, 3)
    x = rng.standard_normal(2)
    np.testing.assert_allclose(P(x), (g.coords @ x) ** 2 * (u.matrix @ x), atol=1e-12)


def test_operator_norm_anchors(rng):
    M = rng.standard_normal((3, 3))
    T = LinearOperator(M, NormedSpace(3, 2), NormedSpace(3, 2))
    assert operator_norm(T) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-12)
    T1 = LinearOperator(M, NormedSpace(3, 1), NormedSpace(3, 2))
    assert operator_norm(T1) == pytest.approx(np.linalg.norm(M, axis=0).max(), rel=1e-12)
    dot = MultilinearOperator(np.eye(2)[None], (E2, E2), R)
    assert operator_norm(dot) == pytest.approx(1.0, abs=1e-9)
