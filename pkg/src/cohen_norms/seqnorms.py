"""Strong, weak and Cohen norms of finite vector / functional families."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import ball_vertices
from .spaces import Exponent, NormedSpace, conjugate_exponent, lq_norm, norming_array

__all__ = [
    "VectorFamily",
    "FunctionalFamily",
    "WeakNorm",
    "CohenEstimate",
    "strong_lp_norm",
    "weak_lp_norm",
    "weak_norm_array",
    "weak_norm_gradient",
    "duality_witness",
    "ascend_functionals",
    "cohen_seq_estimate",
    "cohen_seq_norm",
]

WEAK_RESTARTS = 32


@dataclass(frozen=True, eq=False)
class VectorFamily:
    """m vectors of a common space, stored as rows of ``members`` (m, dim)."""

    members: np.ndarray
    space: NormedSpace

    def __post_init__(self):
        arr = np.array(self.members, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] != self.space.dim:
            raise ValueError(f"members must have shape (m >= 1, {self.space.dim}), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "members", arr)

    def __len__(self) -> int:
        return self.members.shape[0]

    def scaled(self, lam: float) -> "VectorFamily":
        return VectorFamily(self.members * lam, self.space)

    def as_functionals(self) -> "FunctionalFamily":
        """The same family read as functionals on the dual space (canonical embedding)."""
        return FunctionalFamily(self.members, self.space.dual())


@dataclass(frozen=True, eq=False)
class FunctionalFamily:
    """Functionals on ``space`` (the predual); coefficients have shape shape + (dim,).

    A multi-indexed family (m, ..., m, dim) is flattened row-major for every
    norm computation; the shape only matters for ratio bookkeeping.
    """

    coeffs: np.ndarray
    space: NormedSpace

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.shape[-1] != self.space.dim:
            raise ValueError(f"functionals must have {self.space.dim} coefficients, got {arr.shape[-1]}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1, self.space.dim)


def strong_lp_norm(fam: VectorFamily, p) -> float:
    """(sum ||x_i||^p)^(1/p), or max ||x_i|| for p = inf."""
    norms = lq_norm(fam.members, fam.space.q)
    return float(lq_norm(norms, Exponent(p)))


@dataclass(frozen=True)
class WeakNorm:
    value: float
    argmax: np.ndarray  # unit vector of the predual attaining the sup
    method: str  # "vertices" | "svd" | "dual-norm" | "ascent"


def weak_norm_array(
    phi: np.ndarray,
    q,
    s,
    restarts: int = WEAK_RESTARTS,
    seed: int = 0,
    warm: np.ndarray | None = None,
    iters: int = 200,
) -> WeakNorm:
    """sup over ||y||_q <= 1 of ||phi @ y||_s for a family phi of shape (m, d).

    Exact for polytope balls (vertex enumeration), for s = inf, and for
    q = s = 2 (largest singular value). Otherwise a power-type ascent with
    ``restarts`` seeded starts; then the value is a lower approximation.
    """
    phi = np.asarray(phi, dtype=float).reshape(-1, np.shape(phi)[-1])
    q, s = float(q), float(s)
    m, d = phi.shape
    if not np.any(phi):
        return WeakNorm(0.0, _unit(d, q), "zero")
    if math.isinf(s):
        row_norms = lq_norm(phi, conjugate_exponent(q))
        i = int(np.argmax(row_norms))
        return WeakNorm(float(row_norms[i]), norming_array(phi[i], conjugate_exponent(q)), "dual-norm")
    verts = ball_vertices(NormedSpace(d, q))
    if verts is not None:
        verts = verts / lq_norm(verts, q)[:, None]
        vals = lq_norm(verts @ phi.T, s)
        k = int(np.argmax(vals))
        return WeakNorm(float(vals[k]), verts[k], "vertices")
    if q == 2.0 and s == 2.0:
        _, sv, vt = np.linalg.svd(phi, full_matrices=False)
        return WeakNorm(float(sv[0]), vt[0], "svd")
    return _weak_ascent(phi, q, s, restarts, seed, warm, iters)


def _unit(d: int, q: float) -> np.ndarray:
    e = np.zeros(d)
    e[0] = 1.0
    return e


def _weak_ascent(phi, q, s, restarts, seed, warm, iters) -> WeakNorm:
    m, d = phi.shape
    qs = conjugate_exponent(q)
    starts = [np.eye(d), norming_array(phi, qs)]
    if warm is not None:
        starts.append(np.atleast_2d(warm))
    if restarts > 0:
        rng = np.random.default_rng(seed)
        starts.append(rng.standard_normal((restarts, d)))
    Y = np.vstack(starts)
    nrm = lq_norm(Y, q)
    Y = Y[nrm > 0] / nrm[nrm > 0][:, None]
    vals = lq_norm(Y @ phi.T, s)
    for _ in range(iters):
        z = Y @ phi.T
        g = (np.abs(z) ** (s - 1.0) * np.where(z >= 0, 1.0, -1.0)) @ phi
        Y_new = norming_array(g, qs)
        new_vals = lq_norm(Y_new @ phi.T, s)
        better = new_vals > vals
        if not np.any(new_vals > vals * (1 + 1e-14)):
            Y = np.where(better[:, None], Y_new, Y)
            vals = np.maximum(vals, new_vals)
            break
        Y = np.where(better[:, None], Y_new, Y)
        vals = np.maximum(vals, new_vals)
    k = int(np.argmax(vals))
    return WeakNorm(float(vals[k]), Y[k], "ascent")


def weak_norm_gradient(phi: np.ndarray, wn: WeakNorm, s) -> np.ndarray:
    """Gradient of phi -> ||phi @ y*||_s at the maximiser y* (Danskin)."""
    s = float(s)
    z = phi @ wn.argmax
    if wn.value == 0:
        return np.zeros_like(phi)
    if math.isinf(s):
        w = np.zeros_like(z)
        i = int(np.argmax(np.abs(z)))
        w[i] = 1.0 if z[i] >= 0 else -1.0
    else:
        w = np.abs(z / wn.value) ** (s - 1.0) * np.where(z >= 0, 1.0, -1.0)
    return np.outer(w, wn.argmax)


def _weak_gradients(phi, wn: WeakNorm, s, verts):
    """Ascent directions for the weak norm: Danskin first, then vertex-averaged ones.

    On polytope balls the weak norm has kinks where several vertices tie; a
    softmax average of the vertex gradients steps along the kink instead of
    across it.
    """
    yield weak_norm_gradient(phi, wn, s)
    if verts is None or math.isinf(float(s)) or wn.value == 0:
        return
    s = float(s)
    V = verts  # already unit vectors of the ball
    Z = phi @ V.T  # (m, nv)
    vals = lq_norm(Z, s, axis=0)
    top = vals.max()
    for tau in (0.02, 0.002):
        weights = np.exp((vals - top) / (tau * top))
        weights /= weights.sum()
        W = np.abs(Z / np.where(vals > 0, vals, 1.0)) ** (s - 1.0) * np.where(Z >= 0, 1.0, -1.0)
        yield (W * weights) @ V


def weak_lp_norm(fam: FunctionalFamily, p, restarts: int = WEAK_RESTARTS, seed: int = 0) -> float:
    """sup over the unit ball of the predual of (sum |phi_i(y)|^p)^(1/p)."""
    return weak_norm_array(fam.flat, fam.space.q, Exponent(p), restarts=restarts, seed=seed).value


def duality_witness(Y: np.ndarray, q, p) -> np.ndarray:
    """phi_i = ||y_i||^{p-1} norming(y_i) / ||(y_i)||_p^{p-1}; strong p*-norm exactly 1."""
    p = float(p)
    norms = lq_norm(Y, q)
    total = float(lq_norm(norms, p))
    if total == 0:
        return np.zeros_like(Y)
    weights = (norms / total) ** (p - 1.0) if p > 1 else np.ones_like(norms)
    return weights[:, None] * norming_array(Y, q)


def _numerator(phi, Y, r):
    a = np.abs(np.einsum("id,id->i", phi, Y))
    return float(lq_norm(a, r))


def ascend_functionals(
    Y: np.ndarray,
    q,
    pstar,
    r: float = 1.0,
    inits: list[np.ndarray] | None = None,
    iters: int = 40,
    weak_restarts: int = 4,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Maximise (sum |phi_i(y_i)|^r)^(1/r) / ||(phi_i)||_{w,pstar} over phi.

    ``Y`` holds the vectors y_i (rows) of a space with exponent ``q``; the
    weak norm is the sup over its unit ball. Candidates are the duality
    witness, the polar factor of Y and ``inits``; the best one is refined by
    backtracking gradient ascent on the log-ratio. Never decreases.
    """
    Y = np.asarray(Y, dtype=float)
    if not np.any(Y):
        return np.zeros_like(Y), 0.0
    q, pstar = float(q), float(pstar)
    p = float(conjugate_exponent(pstar))
    cands = [duality_witness(Y, q, p)]
    u, _, vt = np.linalg.svd(Y, full_matrices=False)
    cands.append(u @ vt)
    if inits:
        cands.extend(np.asarray(c, dtype=float).reshape(Y.shape) for c in inits)

    def evaluate(phi, warm=None):
        wn = weak_norm_array(phi, q, pstar, restarts=weak_restarts, seed=seed, warm=warm)
        if wn.value == 0:
            return 0.0, wn
        return _numerator(phi, Y, r) / wn.value, wn

    best_val, best_phi, best_wn = -1.0, None, None
    for c in cands:
        val, wn = evaluate(c)
        if val > best_val:
            best_val, best_phi, best_wn = val, c, wn
    phi, val, wn = best_phi, best_val, best_wn
    verts = ball_vertices(NormedSpace(Y.shape[1], q))
    for _ in range(iters):
        a = np.einsum("id,id->i", phi, Y)
        num = float(lq_norm(a, r))
        if num == 0:
            break
        ga = np.abs(a / num) ** (r - 1.0) * np.where(a >= 0, 1.0, -1.0) / num
        improved = False
        for gw in _weak_gradients(phi, wn, pstar, verts):
            grad = ga[:, None] * Y - gw / wn.value
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                continue
            grad *= np.linalg.norm(phi) / gn
            step = 0.5
            while step > 1e-6:
                cand = phi + step * grad
                cval, cwn = evaluate(cand, warm=wn.argmax)
                if cval > val * (1 + 1e-13):
                    # rescale to unit weak norm; the maximiser is unchanged
                    phi, val, wn = cand / cwn.value, cval, WeakNorm(1.0, cwn.argmax, cwn.method)
                    improved = True
                    break
                step *= 0.5
            if improved:
                break
        if not improved:
            break
    return phi, max(val, 0.0)


@dataclass(frozen=True)
class CohenEstimate:
    value: float
    witness: FunctionalFamily
    restarts: int

    def __float__(self) -> float:
        return self.value


def cohen_seq_estimate(
    fam: VectorFamily,
    p,
    restarts: int = 8,
    iters: int = 40,
    seed: int = 0,
    weak_restarts: int = WEAK_RESTARTS,
) -> CohenEstimate:
    """Lower estimate of ||(x_i)||_{C,p} with the functional family attaining it.

    The search always includes the duality witness, so the estimate is at
    least the strong l_p norm. Restart r uses the r-th spawned seed, so more
    restarts never lower the result.
    """
    p = Exponent(p)
    if p.is_inf:
        raise ValueError("the Cohen norm is defined here for p in [1, inf)")
    space = fam.space
    X = fam.members
    pstar = conjugate_exponent(p)
    dual = space.dual()
    if not np.any(X):
        return CohenEstimate(0.0, FunctionalFamily(np.zeros_like(X), dual), restarts)
    children = np.random.SeedSequence(seed).spawn(restarts + 1)
    results = []
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        inits = None if r == 0 else [rng.standard_normal(X.shape)]
        phi, _ = ascend_functionals(X, space.q, pstar, inits=inits, iters=iters, seed=int(child.generate_state(1)[0]))
        if r == 0:
            # the plain duality witness competes on its own as well
            results.append(_final_ratio(duality_witness(X, space.q, p), X, space, pstar, weak_restarts, seed))
        results.append(_final_ratio(phi, X, space, pstar, weak_restarts, seed))
    k = int(np.argmax([v for v, _ in results]))
    value, phi = results[k]
    return CohenEstimate(value, FunctionalFamily(phi, space), restarts)


def _final_ratio(phi, X, space, pstar, weak_restarts, seed):
    wn = weak_norm_array(phi, space.q, pstar, restarts=weak_restarts, seed=seed)
    if wn.value == 0:
        return 0.0, phi
    return _numerator(phi, X, 1.0) / wn.value, phi


def cohen_seq_norm(fam: VectorFamily, p, restarts: int = 8, iters: int = 40, seed: int = 0) -> float:
    return cohen_seq_estimate(fam, p, restarts=restarts, iters=iters, seed=seed).value
