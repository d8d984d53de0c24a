"""Deterministic point sets on l_q unit spheres.

Low-discrepancy sets push scrambled Sobol points through the coordinate-wise
inverse CDF of the generalised normal law exp(-|t|^q) and normalise radially;
for q = inf the uniform law on [-1, 1] plays that role. Points are returned
modulo sign (every estimator here is invariant under x -> -x).
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.stats import gennorm, qmc

from .spaces import NormedSpace, lq_norm

__all__ = [
    "MAX_VERTICES",
    "ball_vertices",
    "sphere_points",
    "product_grid",
    "random_sphere",
    "canonicalize_sign",
]

MAX_VERTICES = 2**12


def canonicalize_sign(points: np.ndarray) -> np.ndarray:
    """Flip each row so its first nonzero coordinate is positive."""
    pts = np.array(points, dtype=float)
    nz = np.abs(pts) > 1e-15
    first = np.argmax(nz, axis=1)
    s = np.sign(pts[np.arange(len(pts)), first])
    s[s == 0] = 1.0
    return pts * s[:, None]


def ball_vertices(space: NormedSpace) -> np.ndarray | None:
    """Extreme points of the unit ball modulo sign, or None if not a small polytope."""
    d = space.dim
    if d == 1:
        return np.ones((1, 1))
    if space.q == 1.0:
        return np.eye(d)
    if space.q.is_inf and 2 ** (d - 1) <= MAX_VERTICES:
        tails = np.array(list(itertools.product((1.0, -1.0), repeat=d - 1)))
        return np.hstack([np.ones((len(tails), 1)), tails])
    return None


def _to_sphere(u: np.ndarray, q: float) -> np.ndarray:
    u = np.clip(u, 1e-12, 1 - 1e-12)
    if math.isinf(q):
        g = 2.0 * u - 1.0
    else:
        g = gennorm.ppf(u, q)
    nrm = lq_norm(g, q)
    g = g[nrm > 0]
    return g / lq_norm(g, q)[:, None]


def sphere_points(space: NormedSpace, count: int, seed: int = 0, include_basis: bool = True) -> np.ndarray:
    """``count`` low-discrepancy points on the unit sphere of ``space`` (mod sign)."""
    d = space.dim
    if d == 1:
        return np.ones((1, 1))
    sob = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(seed))
    m = max(1, math.ceil(math.log2(max(count, 2))))
    raw = sob.random_base2(m)[:count]
    pts = _to_sphere(raw, float(space.q))
    if include_basis:
        pts = np.vstack([np.eye(d), pts])
    return canonicalize_sign(pts)


def random_sphere(rng: np.random.Generator, space: NormedSpace, count: int) -> np.ndarray:
    g = rng.standard_normal((count, space.dim))
    nrm = lq_norm(g, space.q)
    nrm[nrm == 0] = 1.0
    return g / nrm[:, None]


def product_grid(space: NormedSpace, resolution: int) -> np.ndarray:
    """A deterministic angular product grid on the sphere (mod sign), dim <= 3.

    dim 2: ``resolution`` equally spaced angles in [0, pi).
    dim 3: a latitude/longitude grid on the upper hemisphere with roughly
    ``resolution`` points; both grids contain the coordinate axes.
    Euclidean directions are pushed radially onto the l_q sphere.
    """
    d = space.dim
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        k = max(2, 2 * (resolution // 2))
        t = np.arange(k) * math.pi / k
        pts = np.stack([np.cos(t), np.sin(t)], axis=1)
    elif d == 3:
        a = max(1, int(round((math.sqrt(1 + resolution) - 1) / 2)))
        n_lon = 4 * a
        pts = [np.array([0.0, 0.0, 1.0])]
        for i in range(1, a + 1):
            theta = i * (math.pi / 2) / a
            lons = np.arange(n_lon) * 2 * math.pi / n_lon
            if i == a:
                lons = lons[: n_lon // 2]  # equator: opposite points coincide mod sign
            for lon in lons:
                pts.append(np.array([math.sin(theta) * math.cos(lon), math.sin(theta) * math.sin(lon), math.cos(theta)]))
        pts = np.array(pts)
    else:
        raise ValueError("product grids are limited to dimension <= 3")
    pts[np.abs(pts) < 1e-15] = 0.0
    pts = pts / lq_norm(pts, space.q)[:, None]
    return canonicalize_sign(pts)
