"""Lower-bound search: alternating maximisation of summing ratios.

For the flat flavors (linear, multilinear, polynomial, Gamma-type) the vector
block has a closed form once the functionals are fixed: each x_i points along
a maximiser of |phi_i(T(...))| and the magnitudes follow the Hölder equality
case. The functional block is the ascent in :func:`ascend_functionals`. The
multiple flavor alternates slot by slot. Every reported value is a ratio
evaluated at an explicit witness, hence a genuine lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..operators import HomogeneousPolynomial, LinearOperator, evaluate_grid, evaluate_rows, polarize
from ..sampling import ball_vertices
from ..seqnorms import FunctionalFamily, VectorFamily, ascend_functionals, weak_norm_array, weak_norm_gradient
from ..spaces import Exponent, conjugate_exponent, lq_norm, norming_array
from .forms import support_values
from .ratios import coh_ratio, dp_ratio, gamma_ratio, mcoh_ratio, pi_ratio, poly_ratio
from .types import NormBracket, WitnessData

__all__ = ["SearchConfig", "lower_bound_search", "FLAVORS"]

FLAVORS = ("dp", "coh", "mcoh", "poly", "pi", "gamma")
MAX_VERTEX_SCAN = 64


@dataclass(frozen=True)
class SearchConfig:
    m: int | None = None  # family length; default depends on the operator
    restarts: int = 8
    iters: int = 30
    seed: int = 0
    inner_restarts: int = 4  # restarts for the inner form suprema


def _default_m(op, flavor) -> int:
    if flavor == "pi":
        return max(2, op.domain.dim)
    if flavor == "mcoh":
        return 2
    return max(2, op.codomain.dim)


def _restart_seeds(seed: int, restarts: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]


def _holder_weights(s: np.ndarray, pstar: float, qx: float) -> np.ndarray:
    """Magnitudes t >= 0 with ||t||_qx = 1 maximising ||(t_i s_i)||_r (1/r = 1/qx + 1/pstar)."""
    if not np.any(s > 0):
        return np.zeros_like(s)
    if math.isinf(pstar):
        t = np.zeros_like(s)
        t[int(np.argmax(s))] = 1.0
        return t
    t = s ** (pstar / qx)
    return t / lq_norm(t, qx)


def _images(op, X) -> np.ndarray:
    if isinstance(op, HomogeneousPolynomial):
        return evaluate_rows(op.tensor, [X] * op.degree)
    return evaluate_rows(op.tensor, X)


def _flat_value(op, phis, pstar, cfg, seed):
    s, X = support_values(op, phis, restarts=cfg.inner_restarts, seed=seed)
    wn = weak_norm_array(phis, op.codomain.q, pstar, restarts=cfg.inner_restarts, seed=seed)
    if wn.value == 0:
        return 0.0, s, X
    return float(lq_norm(s, pstar)) / wn.value, s, X


def _flat_witness(op, flavor, phis, s, X, pstar, qx):
    t = _holder_weights(s, pstar, qx)
    F = op.codomain
    funcs = FunctionalFamily(phis, F)
    if isinstance(op, HomogeneousPolynomial):
        x = X * (t ** (1.0 / op.degree))[:, None]
        return WitnessData((VectorFamily(x, op.domain),), funcs, flavor)
    xs = [X[0] * t[:, None]] + list(X[1:])
    fams = tuple(VectorFamily(x, E) for x, E in zip(xs, op.domains))
    return WitnessData(fams, funcs, flavor)


def _flat_search(op, flavor, p, cfg: SearchConfig, r: float = 1.0, qx=None):
    """Search over functional families for the flat flavors."""
    p = Exponent(p)
    pstar = float(conjugate_exponent(p))
    qx = float(p) if qx is None else float(qx)
    F = op.codomain
    m = cfg.m or _default_m(op, flavor)
    best = (-1.0, None)
    for k, rng in enumerate(_restart_seeds(cfg.seed, cfg.restarts)):
        if k == 0:
            phis = np.zeros((m, F.dim))
            for i in range(m):
                phis[i, i % F.dim] = 1.0
        else:
            phis = rng.standard_normal((m, F.dim))
        inner_seed = int(rng.integers(2**31))
        val, s, X = _flat_value(op, phis, pstar, cfg, inner_seed)
        for _ in range(cfg.iters):
            t = _holder_weights(s, pstar, qx)
            Y = _images(op, X) * t[:, None]
            cand, _ = ascend_functionals(
                Y, F.q, pstar, r=r, inits=[phis], iters=20, weak_restarts=cfg.inner_restarts, seed=inner_seed
            )
            cval, cs, cX = _flat_value(op, cand, pstar, cfg, inner_seed)
            if cval <= val * (1 + 1e-10):
                break
            phis, val, s, X = cand, cval, cs, cX
        if val > best[0]:
            best = (val, (phis, s, X))
    phis, s, X = best[1]
    return _flat_witness(op, flavor, phis, s, X, pstar, qx)


def _slot_maximise(G: np.ndarray, space, start: np.ndarray, iters: int = 50):
    """max over unit u of sum_l |<G_l, u>| for a batch G (m, L, d); returns (values, u)."""
    qd = float(conjugate_exponent(space.q))
    verts = ball_vertices(space)
    if verts is not None and len(verts) <= MAX_VERTEX_SCAN:
        verts = verts / lq_norm(verts, space.q)[:, None]
        vals = np.abs(np.einsum("mld,vd->mvl", G, verts)).sum(axis=2)
        k = np.argmax(vals, axis=1)
        return vals[np.arange(len(G)), k], verts[k]
    u = start / np.where(lq_norm(start, space.q) > 0, lq_norm(start, space.q), 1.0)[:, None]
    vals = np.abs(np.einsum("mld,md->ml", G, u)).sum(axis=1)
    for _ in range(iters):
        sgn = np.where(np.einsum("mld,md->ml", G, u) >= 0, 1.0, -1.0)
        g = np.einsum("ml,mld->md", sgn, G)
        cand = norming_array(g, qd)
        cvals = np.abs(np.einsum("mld,md->ml", G, cand)).sum(axis=1)
        better = cvals > vals * (1 + 1e-14)
        if not np.any(better):
            break
        u = np.where(better[:, None], cand, u)
        vals = np.where(better, cvals, vals)
    return vals, u


def _mcoh_search(T, p, cfg: SearchConfig) -> WitnessData:
    p = Exponent(p)
    pstar = float(conjugate_exponent(p))
    n = T.degree
    F = T.codomain
    m = cfg.m or _default_m(T, "mcoh")
    best = (-1.0, None)
    for k, rng in enumerate(_restart_seeds(cfg.seed, cfg.restarts)):
        if k == 0:
            xs = [np.eye(E.dim)[np.arange(m) % E.dim] for E in T.domains]
        else:
            xs = [rng.standard_normal((m, E.dim)) for E in T.domains]
        xs = [x / lq_norm(lq_norm(x, E.q), p) for x, E in zip(xs, T.domains)]
        inner_seed = int(rng.integers(2**31))
        phis = None
        val, kept = -1.0, None
        for _ in range(cfg.iters):
            Y = evaluate_grid(T.tensor, xs).reshape(-1, F.dim)
            inits = None if phis is None else [phis.reshape(-1, F.dim)]
            flat, _ = ascend_functionals(
                Y, F.q, pstar, inits=inits, iters=20, weak_restarts=cfg.inner_restarts, seed=inner_seed
            )
            phis = flat.reshape((m,) * n + (F.dim,))
            wn = weak_norm_array(flat, F.q, pstar, restarts=cfg.inner_restarts, seed=inner_seed).value
            if wn == 0:
                # zero operator: every ratio vanishes
                w = WitnessData(
                    tuple(VectorFamily(x, E) for x, E in zip(xs, T.domains)), FunctionalFamily(phis, F), "mcoh"
                )
                val = max(val, 0.0)
                break
            phis = phis / wn
            for j, E in enumerate(T.domains):
                G = _contract_others(T.tensor, phis, xs, j)
                vals, u = _slot_maximise(G, E, xs[j])
                t = _holder_weights(vals, pstar, float(p))
                xs[j] = u * t[:, None]
            w = WitnessData(
                tuple(VectorFamily(x, E) for x, E in zip(xs, T.domains)), FunctionalFamily(phis, F), "mcoh"
            )
            cval = mcoh_ratio(T, w, p)
            if cval <= val * (1 + 1e-10):
                break
            val, kept = cval, w
        if val > best[0]:
            best = (val, kept if kept is not None else w)
    return best[1]


def _contract_others(tensor, phis, xs, j):
    """G[a, rest..., d] = sum_z phi_{J}(z) T(z, ..., d at slot j, ...) with x's elsewhere.

    Returns shape (m, m^(n-1), d_j) with the slot-j index first.
    """
    n = tensor.ndim - 1
    slot = "abcdefgh"[:n]  # tensor domain indices
    idx = "ijklmnop"[:n]  # family indices
    ops = ["z" + slot, idx + "z"]
    args = [tensor, phis]
    for i in range(n):
        if i != j:
            ops.append(idx[i] + slot[i])
            args.append(xs[i])
    others = "".join(idx[i] for i in range(n) if i != j)
    out = np.einsum(",".join(ops) + "->" + idx[j] + others + slot[j], *args, optimize=True)
    m = out.shape[0]
    return out.reshape(m, -1, out.shape[-1])


def _pi_search(S: LinearOperator, q, cfg: SearchConfig) -> np.ndarray:
    """Gradient ascent on log((sum ||S x_i||^q)^(1/q) / ||(x_i)||_{w,q}); returns the best family."""
    q = float(Exponent(q))
    E, F = S.domain, S.codomain
    qE_dual = E.dual().q
    m = cfg.m or _default_m(S, "pi")
    M = S.matrix

    def value(X, warm=None, seed=0):
        wn = weak_norm_array(X, qE_dual, q, restarts=cfg.inner_restarts, seed=seed, warm=warm)
        if wn.value == 0:
            return 0.0, wn
        num = float(lq_norm(lq_norm(X @ M.T, F.q), q))
        return num / wn.value, wn

    best = (-1.0, None)
    for k, rng in enumerate(_restart_seeds(cfg.seed, cfg.restarts)):
        X = np.eye(E.dim)[np.arange(m) % E.dim] if k == 0 else rng.standard_normal((m, E.dim))
        inner_seed = int(rng.integers(2**31))
        val, wn = value(X, seed=inner_seed)
        step = 0.3
        for _ in range(cfg.iters * 4):
            images = X @ M.T
            a = lq_norm(images, F.q)
            N = float(lq_norm(a, q))
            if N == 0 or wn.value == 0:
                break
            coef = (a / N) ** (q - 1.0) / N
            gnum = coef[:, None] * (norming_array(images, F.q) @ M)
            grad = gnum - weak_norm_gradient(X, wn, q) / wn.value
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                break
            grad *= np.linalg.norm(X) / gn
            moved = False
            while step > 1e-7:
                cand = X + step * grad
                cval, cwn = value(cand, warm=wn.argmax, seed=inner_seed)
                if cval > val * (1 + 1e-13):
                    X, val, wn = cand, cval, cwn
                    step = min(step * 1.5, 2.0)
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
        if val > best[0]:
            best = (val, X)
    return best[1]


def lower_bound_search(op, flavor: str, p, config: SearchConfig | None = None, **overrides) -> NormBracket:
    """Best witness ratio found for ``flavor`` of ``op``.

    flavor: "dp" (linear Cohen), "coh" (multilinear Cohen), "poly"
    (polynomial Cohen), "mcoh" (multiple Cohen; polynomials use their polar),
    "pi" (absolutely p-summing, with p the summing exponent) or "gamma"
    (requires ``pair=(r, q)``; p is the exponent whose conjugate sits in the
    weak norm).
    """
    cfg = config or SearchConfig()
    pair = overrides.pop("pair", None)
    if overrides:
        cfg = replace(cfg, **overrides)
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    diag = {"flavor": flavor, "restarts": cfg.restarts, "iters": cfg.iters, "seed": cfg.seed}
    if flavor == "pi":
        X = _pi_search(op, p, cfg)
        lower = pi_ratio(op, X, p)
        w = WitnessData(
            (VectorFamily(X, op.domain),), FunctionalFamily(np.zeros((len(X), op.codomain.dim)), op.codomain), "pi"
        )
        return NormBracket(lower=lower, witness=w, diagnostics={**diag, "m": len(X)})
    if flavor == "mcoh":
        T = polarize(op) if isinstance(op, HomogeneousPolynomial) else op
        if T.degree == 1:
            w = _flat_search(T, "dp", p, cfg)
            lower = dp_ratio(T, w, p)
            w = WitnessData(w.vector_families, w.functional_family, "mcoh")
            return NormBracket(lower=lower, witness=w, diagnostics={**diag, "m": len(w.vector_families[0])})
        w = _mcoh_search(T, p, cfg)
        return NormBracket(lower=mcoh_ratio(T, w, p), witness=w, diagnostics={**diag, "m": len(w.vector_families[0])})
    if flavor == "poly":
        if not isinstance(op, HomogeneousPolynomial):
            raise ValueError("the polynomial flavor needs a HomogeneousPolynomial")
        if op.degree == 0:
            raise ValueError("constants have no summing norm")
        w = _flat_search(op, "poly", p, cfg)
        return NormBracket(lower=poly_ratio(op, w, p), witness=w, diagnostics={**diag, "m": len(w.vector_families[0])})
    if isinstance(op, HomogeneousPolynomial):
        raise ValueError(f"flavor {flavor!r} takes a linear or multilinear operator")
    if flavor == "gamma":
        if pair is None:
            raise ValueError("the gamma flavor needs pair=(r, q)")
        r, q = float(Exponent(pair[0])), float(Exponent(pair[1]))
        w = _flat_search(op, "gamma", p, cfg, r=r, qx=q)
        lower = gamma_ratio(op, w, conjugate_exponent(p), r, q)
        return NormBracket(lower=lower, witness=w, diagnostics={**diag, "m": len(w.vector_families[0]), "pair": [r, q]})
    if flavor == "dp" and op.degree != 1:
        raise ValueError("the dp flavor needs a linear operator")
    w = _flat_search(op, flavor, p, cfg)
    lower = dp_ratio(op, w, p) if op.degree == 1 else coh_ratio(op, w, p, "product")
    return NormBracket(lower=lower, witness=w, diagnostics={**diag, "m": len(w.vector_families[0])})
