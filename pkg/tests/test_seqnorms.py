import math

import numpy as np
import pytest

from cohen_norms.estimators import brute_force_cohen_seq
from cohen_norms.seqnorms import (
    FunctionalFamily,
    VectorFamily,
    cohen_seq_estimate,
    cohen_seq_norm,
    duality_witness,
    strong_lp_norm,
    weak_lp_norm,
)
from cohen_norms.spaces import NormedSpace, lq_norm

E2 = NormedSpace(2, 2)
BASIS = VectorFamily(np.eye(2), E2)


def test_strong_examples():
    assert strong_lp_norm(BASIS, 2) == pytest.approx(math.sqrt(2))
    assert strong_lp_norm(BASIS, math.inf) == 1
    single = VectorFamily([[3.0, 4.0]], E2)
    for p in (1, 1.5, 2, math.inf):
        assert strong_lp_norm(single, p) == pytest.approx(5.0)


def test_weak_examples():
    assert weak_lp_norm(FunctionalFamily(np.eye(2), E2), 2) == pytest.approx(1.0)
    assert weak_lp_norm(FunctionalFamily([[1, 0], [1, 0]], E2), 2) == pytest.approx(math.sqrt(2))
    for q in (1, 1.5, 2, math.inf):
        E = NormedSpace(3, q)
        phi = np.array([[0.3, -1.0, 2.0]])
        expected = lq_norm(phi[0], E.dual().q)
        for p in (1.5, 2, 3, math.inf):
            assert weak_lp_norm(FunctionalFamily(phi, E), p) == pytest.approx(expected, rel=1e-6)


def test_cohen_examples():
    fam = VectorFamily([[1.0, -2.0], [0.5, 0.0], [0.0, 3.0]], NormedSpace(2, 3))
    assert cohen_seq_norm(fam, 1) == pytest.approx(strong_lp_norm(fam, 1), abs=1e-9)
    single = VectorFamily([[3.0, 4.0]], E2)
    for p in (1, 1.5, 2, 3):
        assert cohen_seq_norm(single, p) == pytest.approx(5.0, rel=1e-9)
    est = cohen_seq_norm(BASIS, 2, seed=1)
    assert math.sqrt(2) - 1e-9 <= est <= 2 + 1e-9
    oracle = brute_force_cohen_seq(BASIS, 2, resolution=64)
    assert est >= oracle * 0.98
    assert oracle <= est * 1.02


def test_cohen_zero_family():
    assert cohen_seq_norm(VectorFamily(np.zeros((3, 2)), E2), 2) == 0.0


def test_duality_witness_is_admissible(rng):
    for q in (1, 2, math.inf, 3):
        E = NormedSpace(3, q)
        X = rng.standard_normal((4, 3))
        for p in (1.5, 2, 3):
            phi = duality_witness(X, q, p)
            pstar = p / (p - 1)
            assert lq_norm(lq_norm(phi, E.dual().q), pstar) == pytest.approx(1.0, rel=1e-12)
            assert np.abs(np.einsum("id,id->i", phi, X)).sum() == pytest.approx(
                strong_lp_norm(VectorFamily(X, E), p), rel=1e-12
            )


def test_inclusion_chain_random(rng):
    for _ in range(200):
        d, m = int(rng.integers(1, 6)), int(rng.integers(1, 7))
        E = NormedSpace(d, [1, 2, math.inf][rng.integers(3)])
        p = [1.5, 2, 3][rng.integers(3)]
        fam = VectorFamily(rng.standard_normal((m, d)), E)
        weak = weak_lp_norm(fam.as_functionals(), p)
        strong = strong_lp_norm(fam, p)
        assert weak <= strong + 1e-9
        assert strong <= cohen_seq_norm(fam, p, restarts=1, iters=5) + 1e-9


def test_homogeneity_and_permutation(rng):
    fam = VectorFamily(rng.standard_normal((4, 3)), NormedSpace(3, 1))
    lam = -2.5
    scaled = fam.scaled(lam)
    perm = VectorFamily(fam.members[::-1], fam.space)
    p = 2
    assert strong_lp_norm(scaled, p) == pytest.approx(abs(lam) * strong_lp_norm(fam, p), rel=1e-10)
    assert weak_lp_norm(scaled.as_functionals(), p) == pytest.approx(
        abs(lam) * weak_lp_norm(fam.as_functionals(), p), rel=1e-10
    )
    assert cohen_seq_norm(scaled, p) == pytest.approx(abs(lam) * cohen_seq_norm(fam, p), rel=1e-10)
    assert strong_lp_norm(perm, p) == pytest.approx(strong_lp_norm(fam, p), abs=1e-12)
    assert weak_lp_norm(perm.as_functionals(), p) == pytest.approx(weak_lp_norm(fam.as_functionals(), p), abs=1e-12)


def test_p_infinity_strong_equals_weak(rng):
    for _ in range(20):
        fam = VectorFamily(rng.standard_normal((4, 3)), NormedSpace(3, 2))
        assert weak_lp_norm(fam.as_functionals(), math.inf) == pytest.approx(strong_lp_norm(fam, math.inf), abs=1e-9)


def test_cohen_monotone_in_restarts(rng):
    fam = VectorFamily(rng.standard_normal((3, 2)), NormedSpace(2, 3))
    values = [cohen_seq_estimate(fam, 2, restarts=r, seed=4).value for r in (1, 2, 4, 8)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_family_validation():
    with pytest.raises(ValueError):
        VectorFamily(np.zeros((2, 3)), E2)
    with pytest.raises(ValueError):
        FunctionalFamily(np.zeros((2, 3)), E2)
    fam = FunctionalFamily(np.zeros((2, 2, 2)), E2)
    assert fam.shape == (2, 2) and fam.flat.shape == (4, 2)
