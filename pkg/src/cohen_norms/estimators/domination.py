"""Upper bounds from discretised domination measures.

A constant C and a probability measure mu on the unit ball of the bidual
satisfy the domination inequality when, for every point phi,

    value(phi) <= C * (sum_k mu_k |psi_k(phi)|^power)^(1/power).

For a fixed set of atoms psi_k and a grid of points phi this is the linear
program: maximise lam subject to M mu >= lam b, mu in the simplex, with
M[phi, k] = |psi_k(phi)|^power and b[phi] = value(phi)^power; then
C = lam^(-1/power). The grid restricts the points, so the program value can
undershoot; cutting-plane rounds search for the worst point under the current
measure, add it, and re-solve. The reported upper bound is the worst ratio
seen over every evaluated point under the final measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..operators import HomogeneousPolynomial, LinearOperator, adjoint, evaluate_rows
from ..sampling import ball_vertices, sphere_points
from ..spaces import Exponent, NormedSpace, conjugate_exponent, lq_norm, norming_array
from .forms import support_values
from .search import SearchConfig, lower_bound_search
from .types import DegenerateGrid, DiscreteMeasure, NormBracket

__all__ = ["GridConfig", "solve_domination_lp", "pietsch_upper_bound", "pi_q_oracle", "dp_via_adjoint"]

FLAVOR_ALIASES = {
    "linear-Cohen": "dp",
    "linear": "dp",
    "dp": "dp",
    "multilinear-Cohen": "coh",
    "multilinear": "coh",
    "coh": "coh",
    "polynomial": "poly",
    "poly": "poly",
}


@dataclass(frozen=True)
class GridConfig:
    phi_grid: int = 64
    psi_grid: int = 64
    rounds: int = 4
    ascent_starts: int = 8
    ascent_iters: int = 30
    inner_restarts: int = 4
    seed: int = 0
    lp_tol: float = 1e-9


def solve_domination_lp(M: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """max lam s.t. M mu >= lam b, mu >= 0, sum mu = 1. Rows with b = 0 are vacuous."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    K = M.shape[1]
    keep = b > 0
    if not np.any(keep):
        mu = np.zeros(K)
        mu[0] = 1.0
        return math.inf, mu
    A = M[keep] / b[keep][:, None]
    scale = A.max()
    if scale <= 0:
        raise DegenerateGrid("every atom annihilates every grid point with a positive value")
    A = A / scale
    c = np.zeros(K + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A, np.ones((A.shape[0], 1))])
    A_eq = np.hstack([np.ones((1, K)), np.zeros((1, 1))])
    bounds = [(0, None)] * K + [(None, None)]
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(A.shape[0]),
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": tol, "dual_feasibility_tolerance": tol},
    )
    if res.status != 0:
        raise DegenerateGrid(f"domination program failed: {res.message}")
    lam = -res.fun * scale
    if lam <= 0:
        raise DegenerateGrid("domination program value is not positive; some grid point is annihilated by all atoms")
    mu = np.clip(res.x[:K], 0.0, None)
    return float(lam), mu / mu.sum()


def _extreme_points(space: NormedSpace, count: int, seed: int) -> tuple[np.ndarray, bool]:
    """Vertices of the unit ball when it is a small polytope (exact), else a sphere point set."""
    verts = ball_vertices(space)
    if verts is not None:
        return verts / lq_norm(verts, space.q)[:, None], True
    return sphere_points(space, count, seed=seed), False


class _Domination:
    """Shared cutting-plane machinery; ``value_grad`` maps points (K, d) to values and gradients."""

    def __init__(self, value_grad, point_space: NormedSpace, power: float, cfg: GridConfig):
        self.value_grad = value_grad
        self.space = point_space
        self.power = power
        self.cfg = cfg

    def denominators(self, pts, atoms, mu):
        a = np.abs(pts @ atoms.T)
        return (a**self.power @ mu) ** (1.0 / self.power)

    def ratios(self, vals, pts, atoms, mu):
        den = self.denominators(pts, atoms, mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, vals / np.where(den > 0, den, 1.0), np.where(vals > 0, np.inf, 0.0))
        return r

    def ascend(self, starts, atoms, mu):
        """Batched backtracking ascent on log(value / denominator); returns visited points and values."""
        P = self.power
        X = starts / lq_norm(starts, self.space.q)[:, None]
        vals, grads = self.value_grad(X)
        cur = self.ratios(vals, X, atoms, mu)
        step = np.full(len(X), 0.3)
        seen_x, seen_v = [X], [vals]
        for _ in range(self.cfg.ascent_iters):
            a = X @ atoms.T
            den = self.denominators(X, atoms, mu)
            safe_v = np.where(vals > 0, vals, 1.0)[:, None]
            safe_d = np.where(den > 0, den, 1.0)[:, None]
            gden = ((np.abs(a) ** (P - 1.0) * np.where(a >= 0, 1.0, -1.0)) * mu) @ atoms / safe_d**P
            g = grads / safe_v - gden
            gn = np.linalg.norm(g, axis=1, keepdims=True)
            g = g / np.where(gn > 0, gn, 1.0)
            cand = X + step[:, None] * g
            cand = cand / np.where(lq_norm(cand, self.space.q) > 0, lq_norm(cand, self.space.q), 1.0)[:, None]
            cvals, cgrads = self.value_grad(cand)
            cr = self.ratios(cvals, cand, atoms, mu)
            seen_x.append(cand)
            seen_v.append(cvals)
            better = cr > cur * (1 + 1e-13)
            X = np.where(better[:, None], cand, X)
            vals = np.where(better, cvals, vals)
            grads = np.where(better[:, None], cgrads, grads)
            cur = np.where(better, cr, cur)
            step = np.where(better, np.minimum(step * 1.5, 1.0), step * 0.5)
            if np.all(step < 1e-6):
                break
        return np.vstack(seen_x), np.concatenate(seen_v)

    def run(self, grid: np.ndarray, atoms: np.ndarray, atoms_exact: bool):
        cfg = self.cfg
        rng = np.random.default_rng(cfg.seed)
        vals, _ = self.value_grad(grid)
        pts = grid
        if not np.any(vals > 0):
            mu = np.zeros(len(atoms))
            mu[0] = 1.0
            return 0.0, 0.0, atoms, mu, {"points": int(len(pts)), "atoms": int(len(atoms)), "rounds": 0}
        if math.isinf(self.power):
            return self._run_sup(pts, vals, atoms, rng)
        lam, mu = solve_domination_lp(np.abs(pts @ atoms.T) ** self.power, vals**self.power, cfg.lp_tol)
        for _ in range(cfg.rounds):
            r = self.ratios(vals, pts, atoms, mu)
            order = np.argsort(-r, kind="stable")[: cfg.ascent_starts]
            starts = np.vstack([pts[order], rng.standard_normal((2, pts.shape[1]))])
            new_x, new_v = self.ascend(starts, atoms, mu)
            pts = np.vstack([pts, new_x])
            vals = np.concatenate([vals, new_v])
            if not atoms_exact:
                nr = self.ratios(new_v, new_x, atoms, mu)
                worst = new_x[np.argsort(-nr, kind="stable")[:4]]
                atoms = np.vstack([atoms, norming_array(worst, self.space.q)])
            lam, mu = solve_domination_lp(np.abs(pts @ atoms.T) ** self.power, vals**self.power, cfg.lp_tol)
        # final sweep under the final measure
        r = self.ratios(vals, pts, atoms, mu)
        order = np.argsort(-r, kind="stable")[: cfg.ascent_starts]
        new_x, new_v = self.ascend(pts[order], atoms, mu)
        pts = np.vstack([pts, new_x])
        vals = np.concatenate([vals, new_v])
        upper = float(np.max(self.ratios(vals, pts, atoms, mu)))
        lp_value = lam ** (-1.0 / self.power)
        diag = {"points": int(len(pts)), "atoms": int(len(atoms)), "rounds": cfg.rounds, "lp_value": lp_value}
        return upper, lp_value, atoms, mu, diag

    def _run_sup(self, pts, vals, atoms, rng):
        """power = inf: sup over the support is the dual norm, so C = sup value / ||point||."""
        qd = float(conjugate_exponent(self.space.q))
        best = float(np.max(vals / lq_norm(pts, self.space.q)))
        X = pts[np.argsort(-vals / lq_norm(pts, self.space.q), kind="stable")[: self.cfg.ascent_starts]]
        v, g = self.value_grad(X)
        for _ in range(self.cfg.ascent_iters):
            # values are seminorms, so moving to the norming point of the gradient never decreases them
            cand = norming_array(g, qd)
            cv, cg = self.value_grad(cand)
            better = cv > v * (1 + 1e-13)
            if not np.any(better):
                break
            X = np.where(better[:, None], cand, X)
            v = np.where(better, cv, v)
            g = np.where(better[:, None], cg, g)
            best = max(best, float(np.max(v)))
        mu = np.full(len(atoms), 1.0 / len(atoms))
        return best, best, atoms, mu, {"points": int(len(pts)), "atoms": int(len(atoms)), "rounds": 0}


def _support_value_grad(op, cfg: GridConfig):
    def value_grad(phis):
        vals, X = support_values(op, phis, restarts=cfg.inner_restarts, seed=cfg.seed)
        if isinstance(op, HomogeneousPolynomial):
            images = evaluate_rows(op.tensor, [X] * op.degree)
        else:
            images = evaluate_rows(op.tensor, X)
        sign = np.where(np.einsum("kf,kf->k", phis, images) >= 0, 1.0, -1.0)
        return vals, images * sign[:, None]

    return value_grad


def pietsch_upper_bound(op, flavor: str, p, grids: GridConfig | None = None) -> NormBracket:
    """Grid approximation of the least domination constant for the Cohen flavors.

    flavor: "linear-Cohen" (alias "dp"), "multilinear-Cohen" ("coh") or
    "polynomial" ("poly"); the point grid lives on the sphere of the
    codomain's dual, atoms in the unit ball of the codomain.
    """
    cfg = grids or GridConfig()
    try:
        kind = FLAVOR_ALIASES[flavor]
    except KeyError:
        raise ValueError(f"no domination form for flavor {flavor!r} (the multiple flavor has none)") from None
    if kind == "poly" and not isinstance(op, HomogeneousPolynomial):
        raise ValueError("the polynomial flavor needs a HomogeneousPolynomial")
    if kind != "poly" and isinstance(op, HomogeneousPolynomial):
        raise ValueError(f"flavor {flavor!r} needs a linear or multilinear operator")
    if kind == "dp" and op.degree != 1:
        raise ValueError("the linear flavor needs a linear operator")
    p = Exponent(p)
    power = float(conjugate_exponent(p))
    F = op.codomain
    Fd = F.dual()
    grid, _ = _extreme_points(Fd, cfg.phi_grid, cfg.seed)
    grid = np.vstack([grid, sphere_points(Fd, cfg.phi_grid, seed=cfg.seed)]) if ball_vertices(Fd) is not None else grid
    atoms, exact = _extreme_points(F, cfg.psi_grid, cfg.seed + 1)
    dom = _Domination(_support_value_grad(op, cfg), Fd, power, cfg)
    upper, lp_value, atoms, mu, diag = dom.run(grid, atoms, exact)
    measure = DiscreteMeasure(atoms, mu, F)
    diag = {**diag, "flavor": kind, "phi_grid": cfg.phi_grid, "psi_grid": cfg.psi_grid, "gap": upper - lp_value}
    return NormBracket(upper=upper, measure=measure, diagnostics=diag)


def pi_q_oracle(S: LinearOperator, q, grids: GridConfig | None = None, search: SearchConfig | None = None) -> NormBracket:
    """Bracket for the absolutely q-summing norm of S.

    Upper: classical domination ||Sx|| <= C (sum mu_k |psi_k(x)|^q)^(1/q) on a
    grid of x with atoms in the unit ball of the dual of the domain. Lower:
    the summing ratio maximised directly over vector families.
    """
    cfg = grids or GridConfig()
    q = Exponent(q)
    if q == 1.0 or q.is_inf:
        raise ValueError("the q-summing oracle needs q in (1, inf)")
    E, F = S.domain, S.codomain
    M = S.matrix

    def value_grad(xs):
        images = xs @ M.T
        return lq_norm(images, F.q), norming_array(images, F.q) @ M

    grid, _ = _extreme_points(E, cfg.phi_grid, cfg.seed)
    grid = np.vstack([grid, sphere_points(E, cfg.phi_grid, seed=cfg.seed)]) if ball_vertices(E) is not None else grid
    atoms, exact = _extreme_points(E.dual(), cfg.psi_grid, cfg.seed + 1)
    dom = _Domination(value_grad, E, float(q), cfg)
    upper, lp_value, atoms, mu, diag = dom.run(grid, atoms, exact)
    lower = lower_bound_search(S, "pi", q, search or SearchConfig(seed=cfg.seed))
    diag = {**diag, "flavor": "pi", "q": float(q), "gap": upper - lp_value}
    return NormBracket(
        lower=lower.lower,
        upper=upper,
        witness=lower.witness,
        measure=DiscreteMeasure(atoms, mu, E.dual()),
        diagnostics=diag,
    )


def dp_via_adjoint(T: LinearOperator, p, grids: GridConfig | None = None, search: SearchConfig | None = None) -> NormBracket:
    """The q-summing bracket of the adjoint with q = p*, an independent route to d_p(T)."""
    p = Exponent(p)
    if p == 1.0 or p.is_inf:
        raise ValueError("the adjoint route needs p in (1, inf)")
    bracket = pi_q_oracle(adjoint(T), conjugate_exponent(p), grids, search)
    return NormBracket(
        lower=bracket.lower,
        upper=bracket.upper,
        witness=bracket.witness,
        measure=bracket.measure,
        diagnostics={**bracket.diagnostics, "route": "adjoint"},
    )
