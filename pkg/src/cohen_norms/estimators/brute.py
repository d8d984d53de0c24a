"""Exhaustive grid oracle for small instances (dim <= 3, m <= 3, degree <= 2).

Functionals are drawn from a deterministic angular grid on the dual sphere
times a few magnitude levels; every multiset of m such atoms is scored. The
vector block is solved on a grid as well (grid maximum of |phi(T(x...))|)
and combined with the Hölder equality case, so no ascent code is shared with
the search routines.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..operators import HomogeneousPolynomial, evaluate_grid
from ..sampling import ball_vertices, product_grid
from ..seqnorms import VectorFamily, weak_norm_array
from ..spaces import Exponent, NormedSpace, conjugate_exponent, lq_norm

__all__ = ["BudgetExceeded", "brute_force_oracle", "brute_force_cohen_seq", "DEFAULT_BUDGET"]

DEFAULT_BUDGET = 2_000_000
DEFAULT_LEVELS = (1.0, 0.5)


class BudgetExceeded(ValueError):
    pass


def batched_weak_norm(stacks: np.ndarray, space: NormedSpace, s) -> np.ndarray:
    """Weak norms of N stacked families (N, m, d), y over the unit ball of ``space``."""
    s = float(s)
    q = float(space.q)
    if math.isinf(s):
        return lq_norm(stacks, conjugate_exponent(q)).max(axis=1)
    if q == 2.0 and s == 2.0:
        return np.linalg.norm(stacks, ord=2, axis=(1, 2))
    verts = ball_vertices(space)
    if verts is not None:
        verts = verts / lq_norm(verts, q)[:, None]
        return lq_norm(np.einsum("nmd,vd->nvm", stacks, verts), s).max(axis=1)
    return np.array([weak_norm_array(st, q, s).value for st in stacks])


def _check_size(space: NormedSpace):
    if space.dim > 3:
        raise BudgetExceeded(f"grid oracle supports dimension <= 3, got {space.dim}")


def _grid_support(op, phis: np.ndarray, resolution: int) -> np.ndarray:
    """Grid maximum of |phi(op(x...))| over unit arguments, for each phi row."""
    if isinstance(op, HomogeneousPolynomial):
        _check_size(op.domain)
        xs = product_grid(op.domain, resolution)
        images = np.stack([op(x) for x in xs])  # (X, dF)
        return np.abs(phis @ images.T).max(axis=1)
    for E in op.domains:
        _check_size(E)
    grids = [product_grid(E, resolution) for E in op.domains]
    images = evaluate_grid(op.tensor, grids).reshape(-1, op.codomain.dim)
    return np.abs(phis @ images.T).max(axis=1)


def _multisets(n_atoms: int, m: int, budget: int):
    total = sum(math.comb(n_atoms + k - 1, k) * k for k in range(1, m + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} atom evaluations exceed the budget {budget}")
    for k in range(1, m + 1):
        yield k, np.array(list(itertools.combinations_with_replacement(range(n_atoms), k)), dtype=int)


def brute_force_oracle(
    op,
    flavor: str,
    p,
    resolution: int = 64,
    m: int = 2,
    levels=DEFAULT_LEVELS,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Best ratio over all grid families of length <= m.

    flavor "dp" / "coh" / "poly" scores sup ||(s(phi_i))||_{p*} / ||(phi_i)||_{w,p*}
    (the Cohen norms after the vector block is solved); flavor "pi" scores the
    absolutely p-summing ratio over grid vector families.
    """
    p = Exponent(p)
    if m > 3 or m < 1:
        raise BudgetExceeded("grid oracle supports 1 <= m <= 3")
    if flavor == "pi":
        return _brute_pi(op, p, resolution, m, levels, budget)
    if flavor not in ("dp", "coh", "poly"):
        raise ValueError(f"grid oracle does not support flavor {flavor!r}")
    if op.degree > 2:
        raise BudgetExceeded("grid oracle supports degree <= 2")
    F = op.codomain
    _check_size(F)
    pstar = float(conjugate_exponent(p))
    dirs = product_grid(F.dual(), resolution)
    s_dir = _grid_support(op, dirs, resolution)
    lv = np.asarray(levels, dtype=float)
    atoms = (lv[:, None, None] * dirs[None]).reshape(-1, F.dim)
    s_atoms = (lv[:, None] * s_dir[None]).reshape(-1)
    if not np.any(s_atoms > 0):
        return 0.0
    best = 0.0
    for k, combos in _multisets(len(atoms), m, budget):
        num = lq_norm(s_atoms[combos], pstar)
        for chunk in np.array_split(np.arange(len(combos)), max(1, len(combos) // 20000)):
            den = batched_weak_norm(atoms[combos[chunk]], F, pstar)
            r = np.where(den > 0, num[chunk] / np.where(den > 0, den, 1.0), 0.0)
            best = max(best, float(r.max()))
    return best


def _brute_pi(S, q, resolution, m, levels, budget):
    E, F = S.domain, S.codomain
    _check_size(E)
    dirs = product_grid(E, resolution)
    lv = np.asarray(levels, dtype=float)
    atoms = (lv[:, None, None] * dirs[None]).reshape(-1, E.dim)
    img = lq_norm(atoms @ S.matrix.T, F.q)
    if not np.any(img > 0):
        return 0.0
    best = 0.0
    for k, combos in _multisets(len(atoms), m, budget):
        num = lq_norm(img[combos], q)
        for chunk in np.array_split(np.arange(len(combos)), max(1, len(combos) // 20000)):
            den = batched_weak_norm(atoms[combos[chunk]], E.dual(), q)
            r = np.where(den > 0, num[chunk] / np.where(den > 0, den, 1.0), 0.0)
            best = max(best, float(r.max()))
    return best


def brute_force_cohen_seq(
    fam: VectorFamily, p, resolution: int = 64, levels=DEFAULT_LEVELS, budget: int = DEFAULT_BUDGET
) -> float:
    """Grid maximum of sum |phi_i(x_i)| / ||(phi_i)||_{w,p*} over ordered functional tuples."""
    p = Exponent(p)
    E = fam.space
    _check_size(E)
    m = len(fam)
    pstar = float(conjugate_exponent(p))
    dirs = product_grid(E.dual(), resolution)
    lv = np.asarray(levels, dtype=float)
    atoms = (lv[:, None, None] * dirs[None]).reshape(-1, E.dim)
    total = len(atoms) ** m * m
    if total > budget:
        raise BudgetExceeded(f"{total} atom evaluations exceed the budget {budget}")
    pair = np.abs(atoms @ fam.members.T)  # (A, m)
    best = 0.0
    tuples = np.array(list(itertools.product(range(len(atoms)), repeat=m)), dtype=int)
    for chunk in np.array_split(np.arange(len(tuples)), max(1, len(tuples) // 20000)):
        t = tuples[chunk]
        num = pair[t, np.arange(m)[None, :]].sum(axis=1)
        den = batched_weak_norm(atoms[t], E, pstar)
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        best = max(best, float(r.max()))
    return best
