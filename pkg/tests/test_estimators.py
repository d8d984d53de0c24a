import math

import numpy as np
import pytest

from cohen_norms.estimators import (
    BudgetExceeded,
    DiscreteMeasure,
    GridConfig,
    InconsistentRatio,
    NormBracket,
    SearchConfig,
    WitnessData,
    brute_force_oracle,
    coh_ratio,
    dp_ratio,
    dp_via_adjoint,
    form_norm,
    lower_bound_search,
    mcoh_ratio,
    pi_q_oracle,
    pietsch_upper_bound,
    poly_ratio,
    solve_domination_lp,
)
from cohen_norms.estimators.ratios import safe_ratio
from cohen_norms.operators import HomogeneousPolynomial, LinearOperator, MultilinearOperator, polarize
from cohen_norms.seqnorms import FunctionalFamily, VectorFamily
from cohen_norms.spaces import NormedSpace

R = NormedSpace(1, 2)
E2 = NormedSpace(2, 2)
ID_R = LinearOperator([[1.0]], R, R)
ID2 = LinearOperator(np.eye(2), E2, E2)
MULT = MultilinearOperator([[[1.0]]], (R, R), R)
FAST = SearchConfig(restarts=4, iters=15)
GRIDS = GridConfig(phi_grid=32, psi_grid=32, rounds=3)


def witness(xs, phis, space_x, space_f, flavor="dp"):
    fams = tuple(VectorFamily(np.atleast_2d(x), s) for x, s in zip(xs, space_x))
    return WitnessData(fams, FunctionalFamily(phis, space_f), flavor)


def test_dp_ratio_examples():
    w = witness([[[1.0]]], [[1.0]], [R], R)
    assert dp_ratio(ID_R, w, 2) == 1.0
    zero = LinearOperator(np.zeros((2, 2)), E2, E2)
    w = witness([np.eye(2)], np.eye(2), [E2], E2)
    assert dp_ratio(zero, w, 2) == 0.0
    assert dp_ratio(ID2, w, 2) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_zero_over_zero_and_inconsistency():
    assert safe_ratio(0.0, 0.0) == 0.0
    with pytest.raises(InconsistentRatio):
        safe_ratio(1.0, 0.0)


def test_coh_ratio_examples(rng):
    w = witness([[[1.0]], [[1.0]]], [[1.0]], [R, R], R, "coh")
    assert coh_ratio(MULT, w, 2, "product") == pytest.approx(1.0)
    assert coh_ratio(MULT, w, 2, "power-np") == pytest.approx(1.0)
    T = MultilinearOperator(rng.standard_normal((2, 2, 3)), (E2, NormedSpace(3, 1)), E2)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        w = witness(
            [rng.standard_normal((m, 2)), rng.standard_normal((m, 3))], rng.standard_normal((m, 2)), T.domains, E2, "coh"
        )
        assert coh_ratio(T, w, 2, "product") >= coh_ratio(T, w, 2, "power-np") * (1 - 1e-12)
    X1 = rng.standard_normal((3, 2))
    X1 /= np.linalg.norm(X1, axis=1, keepdims=True)
    X2 = rng.standard_normal((3, 3))
    X2 /= np.abs(X2).sum(axis=1, keepdims=True)
    w = witness([X1, X2], rng.standard_normal((3, 2)), T.domains, E2, "coh")
    assert coh_ratio(T, w, 2, "product") == pytest.approx(coh_ratio(T, w, 2, "power-np"), rel=1e-12)


def test_mcoh_ratio_examples(rng):
    w = witness([[[1.0], [1.0]], [[1.0], [1.0]]], np.full((2, 2, 1), 0.5), [R, R], R, "mcoh")
    assert mcoh_ratio(MULT, w, 2) == pytest.approx(1.0, abs=1e-12)
    T = LinearOperator(rng.standard_normal((2, 3)), NormedSpace(3, 1), E2)
    X, Phi = rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
    w_flat = witness([X], Phi, T.domains, E2)
    w_multi = witness([X], Phi, T.domains, E2, "mcoh")
    assert mcoh_ratio(T, w_multi, 2) == pytest.approx(dp_ratio(T, w_flat, 2), rel=1e-12)


def test_poly_ratio_examples(rng):
    P = HomogeneousPolynomial([[[1.0]]], R, R)
    assert poly_ratio(P, witness([[[1.0]]], [[1.0]], [R], R, "poly"), 2) == pytest.approx(1.0)
    for n in (1, 2, 3):
        P = HomogeneousPolynomial(rng.standard_normal((2,) + (3,) * n), NormedSpace(3, 1), E2)
        X, Phi = rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
        a = poly_ratio(P, witness([X], Phi, [P.domain], E2, "poly"), 2)
        b = coh_ratio(polarize(P), witness([X] * n, Phi, [P.domain] * n, E2, "coh"), 2, "power-np")
        assert a == pytest.approx(b, rel=1e-10)


def test_ratio_scale_properties(rng):
    T = MultilinearOperator(rng.standard_normal((2, 2, 2)), (E2, NormedSpace(2, 3)), NormedSpace(2, 1))
    X1, X2, Phi = rng.standard_normal((3, 2)), rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    base = coh_ratio(T, witness([X1, X2], Phi, T.domains, T.codomain, "coh"), 2)
    assert coh_ratio(-3.0 * T, witness([X1, X2], Phi, T.domains, T.codomain, "coh"), 2) == pytest.approx(
        3 * base, rel=1e-10
    )
    scaled = witness([2.0 * X1, 0.3 * X2], 5.0 * Phi, T.domains, T.codomain, "coh")
    assert coh_ratio(T, scaled, 2) == pytest.approx(base, rel=1e-10)


def test_witness_validation():
    with pytest.raises(ValueError):
        witness([np.eye(2)], np.eye(3)[:, :2], [E2], E2)
    with pytest.raises(ValueError):
        witness([np.eye(2), np.eye(2)], np.zeros((2, 3, 2)), [E2, E2], E2, "mcoh")


def test_search_examples():
    zero = MultilinearOperator(np.zeros((2, 2, 2)), (E2, E2), E2)
    for flavor in ("coh", "mcoh"):
        assert lower_bound_search(zero, flavor, 2, FAST).lower == 0.0
    for p in (1.5, 2, 3):
        assert lower_bound_search(ID_R, "dp", p, FAST).lower == pytest.approx(1.0, abs=1e-9)
        assert lower_bound_search(ID_R, "dp", p, FAST).lower <= 1 + 1e-9
    assert lower_bound_search(ID2, "dp", 2, FAST, m=2).lower >= 1.41


def test_domination_lp():
    lam, mu = solve_domination_lp(np.eye(2), np.ones(2))
    assert lam == pytest.approx(0.5)
    np.testing.assert_allclose(mu, [0.5, 0.5], atol=1e-9)


def test_pietsch_examples():
    for p in (1, 1.5, 2, 4):
        b = pietsch_upper_bound(ID_R, "dp", p, GRIDS)
        assert b.upper == pytest.approx(1.0, abs=1e-9)
    assert pietsch_upper_bound(LinearOperator(np.zeros((2, 2)), E2, E2), "dp", 2, GRIDS).upper == 0.0
    b = pietsch_upper_bound(ID2, "linear-Cohen", 2, GridConfig(phi_grid=64, psi_grid=64))
    assert b.upper == pytest.approx(math.sqrt(2), rel=0.05)
    assert isinstance(b.measure, DiscreteMeasure)
    assert b.measure.weights.sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        pietsch_upper_bound(MULT, "mcoh", 2, GRIDS)


def test_pi_oracle_examples():
    b = pi_q_oracle(ID_R, 2, GRIDS)
    assert b.contains(1.0, rel=1e-9)
    assert pi_q_oracle(LinearOperator(np.zeros((2, 2)), E2, E2), 2, GRIDS).upper == 0.0
    E3 = NormedSpace(3, 2)
    b = pi_q_oracle(LinearOperator(np.eye(3), E3, E3), 2, GridConfig(phi_grid=64, psi_grid=64), FAST)
    assert b.contains(math.sqrt(3), rel=0.05)
    with pytest.raises(ValueError):
        pi_q_oracle(ID_R, 1)


def test_adjoint_oracle_examples(rng):
    assert dp_via_adjoint(ID_R, 2, GRIDS).contains(1.0, rel=1e-9)
    phi, y = rng.standard_normal(2), rng.standard_normal(2)
    rank_one = LinearOperator(np.outer(y, phi), E2, E2)
    target = np.linalg.norm(phi) * np.linalg.norm(y)
    assert dp_via_adjoint(rank_one, 2, GRIDS, FAST).contains(target, rel=0.05)
    assert dp_via_adjoint(LinearOperator(np.diag([1.0, 0.0]), E2, E2), 2, GRIDS, FAST).contains(1.0, rel=0.05)


def test_brute_examples():
    assert brute_force_oracle(ID_R, "dp", 2, resolution=8) == pytest.approx(1.0)
    assert brute_force_oracle(LinearOperator(np.zeros((2, 2)), E2, E2), "dp", 2) == 0.0
    brute = brute_force_oracle(ID2, "dp", 2, resolution=64)
    search = lower_bound_search(ID2, "dp", 2, FAST, m=2).lower
    assert abs(brute - search) <= 0.02 * search
    with pytest.raises(BudgetExceeded):
        brute_force_oracle(LinearOperator(np.eye(4), NormedSpace(4, 2), NormedSpace(4, 2)), "dp", 2)


def test_bracket_inverted_flag():
    assert NormBracket(lower=2.0, upper=1.0).inverted
    assert not NormBracket(lower=1.0, upper=1.0).inverted
    merged = NormBracket(lower=1.0, upper=3.0).merge(NormBracket(lower=1.5, upper=2.0))
    assert (merged.lower, merged.upper) == (1.5, 2.0)


def test_form_norm_exact_cases(rng):
    A = rng.standard_normal((1, 3, 3))
    vals, _ = form_norm(A, (NormedSpace(3, 2), NormedSpace(3, 2)))
    assert vals[0] == pytest.approx(np.linalg.svd(A[0], compute_uv=False)[0], rel=1e-10)
    vals, _ = form_norm(A, (NormedSpace(3, math.inf), NormedSpace(3, math.inf)))
    signs = np.array(np.meshgrid(*[[1, -1]] * 3)).reshape(3, -1).T
    assert vals[0] == pytest.approx(np.abs(signs @ A[0] @ signs.T).max(), rel=1e-12)


def test_brackets_deterministic(rng):
    T = LinearOperator(rng.standard_normal((3, 3)), NormedSpace(3, 2), NormedSpace(3, 2))
    a = lower_bound_search(T, "dp", 2, FAST).lower, pietsch_upper_bound(T, "dp", 2, GRIDS).upper
    b = lower_bound_search(T, "dp", 2, FAST).lower, pietsch_upper_bound(T, "dp", 2, GRIDS).upper
    assert a == b
