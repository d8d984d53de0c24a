"""Suprema of scalar multilinear and homogeneous forms over unit balls.

These are the inner problems of every estimator: for a functional phi on F,
s(phi) = sup |phi(T(x_1, ..., x_n))| over unit vectors x_j. All routines are
batched over K forms and return maximisers, which double as the Danskin
subgradient data for the outer ascent.
"""

from __future__ import annotations

import math
import string
from typing import Sequence

import numpy as np

from ..sampling import ball_vertices, sphere_points
from ..spaces import NormedSpace, conjugate_exponent, lq_norm, norming_array
from ..seqnorms import weak_norm_array

__all__ = ["form_norm", "poly_form_norm", "support_values"]

_L = string.ascii_lowercase
MAX_ENUMERATED = 64


def _dual(q) -> float:
    return float(conjugate_exponent(q))


def form_norm(
    tensors: np.ndarray,
    spaces: Sequence[NormedSpace],
    restarts: int = 8,
    iters: int = 100,
    seed: int = 0,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """sup over x_j in the unit ball of ``spaces[j]`` of |T_k(x_1, ..., x_n)|.

    ``tensors`` has shape (K, d_1, ..., d_n). Returns the K values and, per
    slot, a (K, d_j) array of maximisers. Exact for n <= 1, for n = 2 when
    either slot is a polytope or both are Euclidean, and for n >= 3 whenever
    enough slots are small polytopes; otherwise alternating maximisation.
    """
    T = np.asarray(tensors, dtype=float)
    spaces = list(spaces)
    n = len(spaces)
    K = T.shape[0]
    if n == 0:
        return np.abs(T).reshape(K), []
    if n == 1:
        qd = _dual(spaces[0].q)
        return lq_norm(T, qd), [norming_array(T, qd)]
    if n == 2:
        return _bilinear_norm(T, spaces, restarts, seed)
    # enumerate the vertices of one polytope slot, recurse on the rest
    for j, sp in enumerate(spaces):
        verts = ball_vertices(sp)
        if verts is not None and len(verts) <= MAX_ENUMERATED:
            verts = verts / lq_norm(verts, sp.q)[:, None]
            best = np.full(K, -1.0)
            best_x = [np.zeros((K, s.dim)) for s in spaces]
            rest = spaces[:j] + spaces[j + 1 :]
            for v in verts:
                sub = np.tensordot(T, v, axes=([j + 1], [0]))
                vals, xs = form_norm(sub, rest, restarts, iters, seed)
                better = vals > best
                best = np.where(better, vals, best)
                for i, x in enumerate(xs):
                    slot = i if i < j else i + 1
                    best_x[slot][better] = x[better]
                best_x[j][better] = v
            return best, best_x
    return _alternating(T, spaces, restarts, iters, seed)


def _bilinear_norm(T, spaces, restarts, seed):
    """sup |x^T M y| = ||M: E_2 -> E_1'||, choosing an exact orientation when one exists."""
    e1, e2 = spaces
    K = T.shape[0]
    exact_direct = ball_vertices(e2) is not None or e1.q == 1.0 or (e1.q == 2.0 and e2.q == 2.0)
    exact_swapped = ball_vertices(e1) is not None or e2.q == 1.0
    swap = not exact_direct and exact_swapped
    vals = np.zeros(K)
    xs = [np.zeros((K, e1.dim)), np.zeros((K, e2.dim))]
    for k in range(K):
        M = T[k].T if swap else T[k]
        inner, outer = (e1, e2) if swap else (e2, e1)
        wn = weak_norm_array(M, inner.q, _dual(outer.q), restarts=restarts, seed=seed)
        y = wn.argmax
        x = norming_array(M @ y, _dual(outer.q))
        vals[k] = wn.value
        if swap:
            xs[0][k], xs[1][k] = y, x
        else:
            xs[0][k], xs[1][k] = x, y
    return vals, xs


def _contract_except(T, xs, j):
    """T_k(x_1, ..., [slot j free], ..., x_n) for batched xs[i] of shape (K, R, d_i)."""
    n = len(xs)
    slots = _L[:n]
    ops = ["k" + slots]
    args = [T]
    for i in range(n):
        if i != j:
            ops.append("kr" + slots[i])
            args.append(xs[i])
    subs = ",".join(ops) + "->kr" + slots[j]
    return np.einsum(subs, *args, optimize=True)


def _alternating(T, spaces, restarts, iters, seed):
    n = len(spaces)
    K = T.shape[0]
    rng = np.random.default_rng(seed)
    R = max(1, restarts) + 1
    xs = []
    for sp in spaces:
        start = rng.standard_normal((K, R, sp.dim))
        start[:, 0, :] = 1.0  # a deterministic all-ones start
        xs.append(start / lq_norm(start, sp.q)[..., None])
    vals = np.zeros((K, R))
    for _ in range(iters):
        prev = vals
        for j, sp in enumerate(spaces):
            g = _contract_except(T, xs, j)
            xs[j] = norming_array(g, _dual(sp.q))
            vals = lq_norm(g, _dual(sp.q))
        if np.all(vals <= prev * (1 + 1e-13) + 1e-300):
            break
    best = np.argmax(vals, axis=1)
    idx = np.arange(K)
    return vals[idx, best], [x[idx, best] for x in xs]


def _poly_eval(S, X):
    """Values and n * S(x^{n-1}) gradients for batched symmetric forms S (K, d^n), X (K, R, d)."""
    n = S.ndim - 1
    g = S
    # contract all but one slot; the first contraction keeps the restart axis
    g = np.einsum("k...a,kra->kr...", g, X)
    for _ in range(n - 2):
        g = np.einsum("kr...a,kra->kr...", g, X)
    vals = np.einsum("kra,kra->kr", g, X)
    return vals, n * g


def poly_form_norm(
    tensors: np.ndarray,
    space: NormedSpace,
    restarts: int = 8,
    iters: int = 100,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """sup over the unit ball of |S_k(x, ..., x)| for symmetric tensors (K, d, ..., d).

    Exact for degree <= 1, for degree 2 on Euclidean spaces (largest
    eigenvalue modulus) and for d = 1; otherwise projected ascent seeded from a
    sphere point set plus random starts.
    """
    S = np.asarray(tensors, dtype=float)
    K = S.shape[0]
    n = S.ndim - 1
    d = space.dim
    q = float(space.q)
    if n == 0:
        return np.abs(S).reshape(K), np.zeros((K, d))
    if n == 1:
        return lq_norm(S, _dual(q)), norming_array(S, _dual(q))
    if d == 1:
        return np.abs(S.reshape(K)), np.ones((K, 1))
    if n == 2 and q == 2.0:
        w, v = np.linalg.eigh(S)
        k_idx = np.argmax(np.abs(w), axis=1)
        idx = np.arange(K)
        return np.abs(w[idx, k_idx]), v[idx, :, k_idx]
    base = sphere_points(space, 32, seed=seed)
    verts = ball_vertices(space)
    if verts is not None:
        base = np.vstack([base, verts / lq_norm(verts, q)[:, None]])
    rng = np.random.default_rng(seed)
    rand = rng.standard_normal((K, max(0, restarts), d))
    X = np.concatenate([np.broadcast_to(base, (K,) + base.shape), rand], axis=1)
    X = X / lq_norm(X, q)[..., None]
    vals, grad = _poly_eval(S, X)
    absval = np.abs(vals)
    step = np.full(absval.shape, 0.5)
    qd = _dual(q)
    for _ in range(iters):
        sgn = np.where(vals >= 0, 1.0, -1.0)[..., None]
        g = sgn * grad
        # power-type candidate and a radially projected gradient step
        c1 = norming_array(g, qd)
        gn = lq_norm(g, qd)[..., None]
        gn = np.where(gn > 0, gn, 1.0)
        c2 = X + step[..., None] * g / gn
        c2 = c2 / np.where(lq_norm(c2, q) > 0, lq_norm(c2, q), 1.0)[..., None]
        v1, g1 = _poly_eval(S, c1)
        v2, g2 = _poly_eval(S, c2)
        a1, a2 = np.abs(v1), np.abs(v2)
        use1 = (a1 >= a2) & (a1 > absval * (1 + 1e-14))
        use2 = ~use1 & (a2 > absval * (1 + 1e-14))
        if not np.any(use1 | use2):
            break
        X = np.where(use1[..., None], c1, np.where(use2[..., None], c2, X))
        vals = np.where(use1, v1, np.where(use2, v2, vals))
        grad = np.where(use1[..., None], g1, np.where(use2[..., None], g2, grad))
        absval = np.abs(vals)
        step = np.where(use2, np.minimum(step * 1.5, 2.0), np.where(use1, step, step * 0.5))
    best = np.argmax(absval, axis=1)
    idx = np.arange(K)
    return absval[idx, best], X[idx, best]


def support_values(op, phis: np.ndarray, restarts: int = 8, iters: int = 100, seed: int = 0):
    """s(phi) = sup |phi(op(x...))| over unit arguments, with maximisers.

    Returns (values (K,), maximisers): for linear/multilinear maps a list with
    one (K, d_j) array per slot, for polynomials a single (K, d) array.
    Maximisers are signed so that phi(op(x...)) >= 0.
    """
    from ..operators import HomogeneousPolynomial

    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    if isinstance(op, HomogeneousPolynomial):
        S = np.tensordot(phis, op.tensor, axes=([1], [0]))
        if op.degree == 0:
            return np.abs(S), np.zeros((len(phis), op.domain.dim))
        vals, X = poly_form_norm(S, op.domain, restarts=restarts, iters=iters, seed=seed)
        if op.degree % 2 == 1:
            prod = (S * _outer_power(X, op.degree)).reshape(len(S), -1).sum(axis=1)
            sign = np.sign(prod)
            X = X * np.where(sign >= 0, 1.0, -1.0)[:, None]
        return vals, X
    T = np.tensordot(phis, op.tensor, axes=([1], [0]))
    if op.degree == 1:
        qd = _dual(op.domain.q)
        return lq_norm(T, qd), [norming_array(T, qd)]
    vals, xs = form_norm(T, op.domains, restarts=restarts, iters=iters, seed=seed)
    # fix the sign on the first slot
    slots = _L[: op.degree]
    subs = "k" + slots + "," + ",".join("k" + s for s in slots) + "->k"
    sign = np.sign(np.einsum(subs, T, *xs, optimize=True))
    xs[0] = xs[0] * np.where(sign >= 0, 1.0, -1.0)[:, None]
    return vals, xs


def _outer_power(X, n):
    out = X
    for _ in range(n - 1):
        out = np.einsum("k...,ka->k...a", out, X)
    return out
