"""Summing-inequality ratios evaluated at explicit witnesses.

Every ratio is numerator / denominator of one defining inequality, so any
witness value is a lower bound for the corresponding norm. 0/0 is 0.
"""

from __future__ import annotations

import numpy as np

from ..operators import HomogeneousPolynomial, evaluate_grid, evaluate_rows
from ..seqnorms import WEAK_RESTARTS, weak_norm_array
from ..spaces import Exponent, conjugate_exponent, lq_norm
from .types import InconsistentRatio, WitnessData

__all__ = [
    "safe_ratio",
    "functional_weak_norm",
    "dp_ratio",
    "coh_ratio",
    "mcoh_ratio",
    "poly_ratio",
    "gamma_ratio",
    "pi_ratio",
    "padded_multi_index",
]

ZERO_TOL = 1e-300


def safe_ratio(num: float, den: float) -> float:
    if den <= ZERO_TOL:
        if num <= ZERO_TOL:
            return 0.0
        raise InconsistentRatio(f"numerator {num!r} over a zero denominator")
    return float(num / den)


def functional_weak_norm(phis: np.ndarray, space, pstar, restarts: int = WEAK_RESTARTS, seed: int = 0) -> float:
    """||(phi_i)||_{w,p*} with y ranging over the unit ball of ``space``."""
    return weak_norm_array(np.reshape(phis, (-1, space.dim)), space.q, pstar, restarts=restarts, seed=seed).value


def _pstar(p) -> Exponent:
    return conjugate_exponent(Exponent(p))


def _flat_numerator(op_tensor, w: WitnessData) -> float:
    xs = [f.members for f in w.vector_families]
    vals = evaluate_rows(op_tensor, xs)
    return float(np.abs(np.einsum("if,if->i", w.functional_family.flat, vals)).sum())


def _weak(w: WitnessData, codomain, p) -> float:
    return functional_weak_norm(w.functional_family.flat, codomain, _pstar(p))


def dp_ratio(T, w: WitnessData, p) -> float:
    """sum |phi_i(T x_i)| / (||(x_i)||_p ||(phi_i)||_{w,p*})."""
    if w.degree != 1:
        raise ValueError("the linear ratio takes a single vector family")
    fam = w.vector_families[0]
    num = _flat_numerator(T.tensor, w)
    strong = float(lq_norm(lq_norm(fam.members, fam.space.q), Exponent(p)))
    return safe_ratio(num, strong * _weak(w, T.codomain, p))


def coh_ratio(T, w: WitnessData, p, form: str = "product") -> float:
    """Multilinear ratio; ``form`` selects the product or the power-np denominator."""
    if w.degree != T.degree:
        raise ValueError(f"witness has {w.degree} slots, operator degree is {T.degree}")
    p = Exponent(p)
    n = T.degree
    num = _flat_numerator(T.tensor, w)
    norms = np.stack([lq_norm(f.members, f.space.q) for f in w.vector_families])  # (n, m)
    if form == "product":
        xden = float(lq_norm(np.prod(norms, axis=0), p))
    elif form in ("power-np", "power"):
        xden = float(np.prod([lq_norm(row, n * p) for row in norms]))
    else:
        raise ValueError(f"unknown form {form!r}")
    return safe_ratio(num, xden * _weak(w, T.codomain, p))


def mcoh_ratio(T, w: WitnessData, p) -> float:
    """Multi-indexed ratio: all index tuples (j_1..j_n) against a shaped functional family."""
    if w.degree != T.degree:
        raise ValueError(f"witness has {w.degree} slots, operator degree is {T.degree}")
    p = Exponent(p)
    xs = [f.members for f in w.vector_families]
    vals = evaluate_grid(T.tensor, xs)  # (m, ..., m, dim F)
    num = float(np.abs((vals * w.functional_family.coeffs).sum(axis=-1)).sum())
    xden = float(np.prod([lq_norm(lq_norm(f.members, f.space.q), p) for f in w.vector_families]))
    return safe_ratio(num, xden * _weak(w, T.codomain, p))


def poly_ratio(P: HomogeneousPolynomial, w: WitnessData, p) -> float:
    """sum |phi_i(P x_i)| / ((sum ||x_i||^{np})^{1/p} ||(phi_i)||_{w,p*})."""
    p = Exponent(p)
    fam = w.vector_families[0]
    n = P.degree
    vals = evaluate_rows(P.tensor, [fam.members] * n)
    num = float(np.abs(np.einsum("if,if->i", w.functional_family.flat, vals)).sum())
    norms = lq_norm(fam.members, fam.space.q)
    xden = float(lq_norm(norms, n * p)) ** n
    return safe_ratio(num, xden * _weak(w, P.codomain, p))


def gamma_ratio(T, w: WitnessData, pstar, r, q) -> float:
    """(sum |phi_i(T x_i)|^r)^{1/r} / (||(x_i)||_q ||(phi_i)||_{w,p*})."""
    fam = w.vector_families[0]
    vals = evaluate_rows(T.tensor, [fam.members])
    terms = np.abs(np.einsum("if,if->i", w.functional_family.flat, vals))
    num = float(lq_norm(terms, Exponent(r)))
    xden = float(lq_norm(lq_norm(fam.members, fam.space.q), Exponent(q)))
    weak = functional_weak_norm(w.functional_family.flat, T.codomain, Exponent(pstar))
    return safe_ratio(num, xden * weak)


def pi_ratio(S, xs: np.ndarray, q, restarts: int = WEAK_RESTARTS, seed: int = 0) -> float:
    """(sum ||S x_i||^q)^{1/q} / ||(x_i)||_{w,q} (absolutely q-summing ratio)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    q = Exponent(q)
    images = xs @ S.matrix.T
    num = float(lq_norm(lq_norm(images, S.codomain.q), q))
    weak = weak_norm_array(xs, S.domain.dual().q, q, restarts=restarts, seed=seed).value
    return safe_ratio(num, weak)


def padded_multi_index(phis: np.ndarray, extra: int) -> np.ndarray:
    """Embed a shaped family (m,)*n + (d,) as index 0 of a new trailing axis of length ``extra``."""
    phis = np.asarray(phis, dtype=float)
    shape = phis.shape[:-1] + (extra,) + phis.shape[-1:]
    out = np.zeros(shape)
    out[..., 0, :] = phis
    return out
