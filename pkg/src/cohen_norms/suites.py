"""Executable checks of the summing-norm inequalities, with seeded random corpora.

A norm inequality ||derived|| <= c * ||source|| is checked by comparing a
lower estimate of the left side (an evaluated witness ratio) against an upper
estimate of the right side (a domination bound) with 5% relative slack. A
failing check is re-run once with larger grids and more restarts before it is
reported, so estimator weakness is separated from genuine violations.
"""

from __future__ import annotations

import hashlib
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .estimators import (
    GridConfig,
    SearchConfig,
    WitnessData,
    brute_force_oracle,
    coh_ratio,
    dp_via_adjoint,
    lower_bound_search,
    mcoh_ratio,
    padded_multi_index,
    pietsch_upper_bound,
    poly_ratio,
)
from .operators import (
    HomogeneousPolynomial,
    LinearOperator,
    MultilinearOperator,
    compose,
    differential,
    fix_argument,
    functional_tensor,
    multiply_functional,
    multiply_functional_poly,
    operator_norm,
    polarize,
    polynomial_slice,
    power_times_linear,
    restrict_scalar,
)
from .seqnorms import (
    FunctionalFamily,
    VectorFamily,
    cohen_seq_norm,
    strong_lp_norm,
    weak_lp_norm,
)
from .spaces import Exponent, Functional, NormedSpace, Vector, conjugate_exponent, lq_norm

__all__ = [
    "CheckResult",
    "CheckSettings",
    "CoherenceItem",
    "check_holder_chain",
    "check_inclusion_chain",
    "check_ideal_linear",
    "check_ideal_multilinear",
    "check_coherence",
    "check_compatibility",
    "check_property_B",
    "check_padded_identity",
    "check_holomorphy_bound",
    "dvoretzky_rogers_trend",
    "gamma_collapse_experiment",
    "SUITES",
    "run_suite",
    "suite_seed",
    "DEFAULT_TRIALS",
]

SLACK = 0.05


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    digest: str
    seed: int
    tolerance: float = 0.0
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "seed": self.seed,
            "digest": self.digest,
        }


@dataclass(frozen=True)
class CheckSettings:
    slack: float = SLACK
    search: SearchConfig = SearchConfig(restarts=4, iters=15)
    grids: GridConfig = GridConfig(phi_grid=32, psi_grid=32, rounds=3, ascent_iters=20)
    escalate: bool = True

    def escalated(self) -> "CheckSettings":
        s, g = self.search, self.grids
        return replace(
            self,
            search=replace(s, restarts=2 * s.restarts, iters=2 * s.iters, inner_restarts=2 * s.inner_restarts),
            grids=replace(g, phi_grid=2 * g.phi_grid, psi_grid=2 * g.psi_grid, rounds=g.rounds + 2),
            escalate=False,
        )

    def seeded(self, seed: int) -> "CheckSettings":
        return replace(self, search=replace(self.search, seed=seed), grids=replace(self.grids, seed=seed))


def digest(*parts) -> str:
    """Short stable hash of the inputs (arrays by bytes, everything else by repr)."""
    h = hashlib.sha256()
    for part in parts:
        for item in part if isinstance(part, (list, tuple)) else (part,):
            if isinstance(item, (MultilinearOperator, HomogeneousPolynomial)):
                h.update(np.ascontiguousarray(item.tensor).tobytes())
                h.update(repr(_spaces(item)).encode())
            elif isinstance(item, (Vector, Functional)):
                h.update(np.ascontiguousarray(item.coords).tobytes())
            elif isinstance(item, np.ndarray):
                h.update(np.ascontiguousarray(item, dtype=float).tobytes())
            else:
                h.update(repr(item).encode())
    return h.hexdigest()[:16]


def _spaces(op):
    if isinstance(op, HomogeneousPolynomial):
        return (op.domain, op.codomain, op.degree)
    return (op.domains, op.codomain)


def _result(name, lhs, rhs, settings: CheckSettings, dig, seed, **details) -> CheckResult:
    margin = float(rhs - lhs)
    tol = settings.slack * float(rhs)
    return CheckResult(name, margin >= -tol, margin, dig, seed, tol, {"lhs": float(lhs), "rhs": float(rhs), **details})


def _escalating(run: Callable[[CheckSettings], CheckResult], settings: CheckSettings) -> CheckResult:
    res = run(settings)
    if res.passed or not settings.escalate:
        return res
    again = run(settings.escalated())
    return replace(again, details={**again.details, "escalated": True})


# ---------------------------------------------------------------------------
# estimates shared by the checks


def _kind(op) -> str:
    if isinstance(op, HomogeneousPolynomial):
        return "poly"
    return "dp" if op.degree == 1 else "coh"


def lower_estimate(op, flavor: str, p, settings: CheckSettings) -> float:
    """Lower estimate of the Cohen ("coh") or multiple ("mcoh") norm of op."""
    if isinstance(op, HomogeneousPolynomial) and op.degree == 0:
        return float(lq_norm(op.tensor, op.codomain.q))
    if flavor == "mcoh":
        return lower_bound_search(op, "mcoh", p, settings.search).lower
    return lower_bound_search(op, _kind(op), p, settings.search).lower


def upper_estimate(op, p, settings: CheckSettings) -> float:
    """Upper estimate of the Cohen norm of op: domination bound, plus the adjoint route when linear."""
    kind = _kind(op)
    up = pietsch_upper_bound(op, kind, p, settings.grids).upper
    if kind == "dp" and 1 < float(p) < math.inf:
        up = min(up, dp_via_adjoint(op, p, settings.grids, settings.search).upper)
    return up


def mcoh_upper(op, p, settings: CheckSettings) -> float:
    """The Cohen upper bound of op (of its polar for polynomials) majorises the multiple norm."""
    T = polarize(op) if isinstance(op, HomogeneousPolynomial) else op
    return upper_estimate(T, p, settings)


# ---------------------------------------------------------------------------
# inequality checks


def check_holder_chain(w: WitnessData, p, tol: float = 1e-10, seed: int = 0) -> CheckResult:
    """(sum_i prod_j ||x_i^j||^p)^(1/p) <= prod_j (sum_i ||x_i^j||^(np))^(1/np)."""
    p = Exponent(p)
    n = w.degree
    norms = np.stack([lq_norm(f.members, f.space.q) for f in w.vector_families])
    scale = norms.max(axis=1)
    if norms.shape[1] == 1:
        # a single index: both sides are the product of the norms
        lhs = rhs = float(np.prod(scale))
    elif p.is_inf:
        lhs, rhs = float(np.prod(norms, axis=0).max()), float(np.prod(scale))
    elif not np.all(scale > 0):
        lhs = rhs = 0.0
    else:
        # compare the np-th powers of both sides after scaling each slot by its
        # largest norm, so equal-norm data give bitwise equal sides
        b = norms / scale[:, None]
        left = float(np.sum(np.prod(b**p, axis=0))) ** n
        right = float(np.prod(np.sum(b ** (n * p), axis=1)))
        c = float(np.prod(scale))
        lhs = c * left ** (1.0 / (n * p))
        rhs = lhs if left == right else c * right ** (1.0 / (n * p))
    margin = rhs - lhs
    dig = digest([f.members for f in w.vector_families], float(p))
    return CheckResult("holder", margin >= -tol, margin, dig, seed, tol, {"lhs": lhs, "rhs": rhs})


def check_inclusion_chain(
    fam: VectorFamily, p, seed: int = 0, restarts: int = 1, iters: int = 15, tol: float = 1e-9
) -> CheckResult:
    """weak_p <= strong_p <= Cohen estimate; at p = 1 strong and Cohen agree.

    The Cohen search starts from the duality witness, so a light search
    already sits above the strong norm.
    """
    p = Exponent(p)
    strong = strong_lp_norm(fam, p)
    cohen = cohen_seq_norm(fam, p, restarts=restarts, iters=iters, seed=seed)
    dig = digest(fam.members, float(p))
    if p == 1.0:
        margin = -abs(cohen - strong)
        return CheckResult("inclusion", margin >= -tol, margin, dig, seed, tol, {"strong": strong, "cohen": cohen})
    weak = weak_lp_norm(fam.as_functionals(), p)
    margin = min(strong - weak, cohen - strong)
    details = {"weak": weak, "strong": strong, "cohen": cohen}
    return CheckResult("inclusion", margin >= -tol, margin, dig, seed, tol, details)


def check_ideal_linear(A1, T, A2, p, settings: CheckSettings | None = None, seed: int = 0) -> CheckResult:
    """d_p(A2 T A1) <= ||A2|| d_p(T) ||A1||."""
    settings = (settings or CheckSettings()).seeded(seed)
    comp = compose(A2, T, [A1])
    dig = digest([A1, T, A2], float(p))

    def run(s):
        lhs = lower_estimate(comp, "coh", p, s)
        n1, n2 = operator_norm(A1), operator_norm(A2)
        rhs = n2 * upper_estimate(T, p, s) * n1 if n1 * n2 > 0 else 0.0
        return _result("ideal-linear", lhs, rhs, s, dig, seed)

    return _escalating(run, settings)


def check_ideal_multilinear(A, T, pre_maps, p, settings: CheckSettings | None = None, seed: int = 0) -> CheckResult:
    """||A T (A_1..A_n)||_mCoh <= ||A|| ||T||_mCoh prod ||A_j||, with the Cohen bound as majorant."""
    settings = (settings or CheckSettings()).seeded(seed)
    comp = compose(A, T, pre_maps)
    dig = digest([A, T, *pre_maps], float(p))

    def run(s):
        lhs = lower_estimate(comp, "mcoh", p, s)
        factor = operator_norm(A) * float(np.prod([operator_norm(Aj) for Aj in pre_maps]))
        rhs = factor * mcoh_upper(T, p, s) if factor > 0 else 0.0
        return _result("ideal-multilinear", lhs, rhs, s, dig, seed)

    return _escalating(run, settings)


@dataclass(frozen=True, eq=False)
class CoherenceItem:
    """Inputs for one coherence / compatibility check; unused fields stay None."""

    operator: MultilinearOperator | None = None
    polynomial: HomogeneousPolynomial | None = None
    vectors: tuple = ()  # a, or a_j for the fixed slots
    functionals: tuple = ()  # gamma, or gamma_j
    linear: LinearOperator | None = None  # u
    slot: int = 0  # fixed (fix-argument) or free (one-free-slot) slot, 0-based
    degree: int = 2  # n for power-times-linear
    witness: tuple | None = None  # (x family array, functional array) for the ratio identities

    def parts(self):
        return [
            x
            for x in (self.operator, self.polynomial, self.linear, *self.vectors, *self.functionals)
            if x is not None
        ] + [self.slot, self.degree]


def _vnorm(v) -> float:
    return float(lq_norm(v.coords, v.space.q))


def _fnorm(g) -> float:
    return float(lq_norm(g.coords, conjugate_exponent(g.space.q)))


def _ratio_identity(item: CoherenceItem, p, name, seed) -> CheckResult:
    """poly_ratio(P, diagonal data) equals the power-np ratio of the polar on replicated data."""
    P = item.polynomial
    X, Phi = item.witness
    fam = VectorFamily(X, P.domain)
    funcs = FunctionalFamily(Phi, P.codomain)
    w_poly = WitnessData((fam,), funcs, "poly")
    w_mult = WitnessData((fam,) * P.degree, funcs, "coh")
    a = poly_ratio(P, w_poly, p)
    b = coh_ratio(polarize(P), w_mult, p, "power-np")
    margin = 0.0 - abs(a - b) + 0.0
    tol = 1e-10 * max(1.0, abs(a))
    return CheckResult(name, margin >= -tol, margin, digest(item.parts(), X, Phi, float(p)), seed, tol, {"poly": a, "polar": b})


def check_coherence(
    item: CoherenceItem, which: str, p, flavor: str = "coh", settings: CheckSettings | None = None, seed: int = 0
) -> CheckResult:
    """Coherence checks for the Cohen ("coh") or multiple ("mcoh") flavor."""
    if flavor not in ("coh", "mcoh"):
        raise ValueError(f"flavor must be 'coh' or 'mcoh', got {flavor!r}")
    name = f"{which}/{flavor}"
    if which == "ratio-identity":
        if item.polynomial is None or item.witness is None:
            raise ValueError("ratio-identity needs a polynomial and a witness")
        return _ratio_identity(item, p, name, seed)
    settings = (settings or CheckSettings()).seeded(seed)
    dig = digest(item.parts(), which, flavor, float(p))

    if which == "fix-argument":
        T = _need(item.operator, "fix-argument needs a multilinear operator of degree >= 2")
        if T.degree < 2:
            raise ValueError("fix-argument needs degree >= 2")
        a = item.vectors[0]
        derived, source, factor = fix_argument(T, item.slot, a), T, _vnorm(a)
    elif which == "polynomial-slice":
        P = _need(item.polynomial, "polynomial-slice needs a polynomial of degree >= 2")
        if P.degree < 2:
            raise ValueError("polynomial-slice needs degree >= 2")
        a = item.vectors[0]
        derived, source, factor = polynomial_slice(P, a, 1), polarize(P), _vnorm(a)
    elif which == "functional-product":
        T = _need(item.operator, "functional-product needs an operator")
        g = item.functionals[0]
        derived, source, factor = multiply_functional(T, g), T, _fnorm(g)
    elif which == "polynomial-functional-product":
        P = _need(item.polynomial, "polynomial-functional-product needs a polynomial")
        g = item.functionals[0]
        derived, factor = multiply_functional_poly(P, g), _fnorm(g)
        source = P if flavor == "coh" else polarize(P) if P.degree > 1 else P
    else:
        raise ValueError(f"unknown coherence item {which!r}")

    def run(s):
        lhs = lower_estimate(derived, flavor, p, s)
        if factor == 0:
            return _result(name, lhs, 0.0, s, dig, seed)
        up = upper_estimate(source, p, s) if flavor == "coh" else mcoh_upper(source, p, s)
        return _result(name, lhs, up * factor, s, dig, seed)

    return _escalating(run, settings)


def _need(x, msg):
    if x is None:
        raise ValueError(msg)
    return x


def check_compatibility(
    item: CoherenceItem, which: str, p, flavor: str = "coh", settings: CheckSettings | None = None, seed: int = 0
) -> CheckResult:
    """Compatibility checks for the Cohen ("coh") or multiple ("mcoh") flavor."""
    if flavor not in ("coh", "mcoh"):
        raise ValueError(f"flavor must be 'coh' or 'mcoh', got {flavor!r}")
    name = f"{which}/{flavor}"
    if which == "polar-ratio-identity":
        if item.polynomial is None or item.witness is None:
            raise ValueError("polar-ratio-identity needs a polynomial and a witness")
        return _ratio_identity(item, p, name, seed)
    settings = (settings or CheckSettings()).seeded(seed)
    dig = digest(item.parts(), which, flavor, float(p))
    lhs_flavor = flavor

    if which == "one-free-slot":
        T = _need(item.operator, "one-free-slot needs an operator")
        derived = T
        others = [j for j in range(T.degree) if j != item.slot]
        # fix the highest slot first so lower indices stay valid
        for j, a in sorted(zip(others, item.vectors), reverse=True):
            derived = fix_argument(derived, j, a) if derived.degree > 1 else derived
        factor = float(np.prod([_vnorm(a) for a in item.vectors])) if item.vectors else 1.0
        source, lhs_flavor = T, "coh"

        def rhs_upper(s):
            return upper_estimate(source, p, s) if flavor == "coh" else mcoh_upper(source, p, s)

    elif which == "linear-slice":
        P = _need(item.polynomial, "linear-slice needs a polynomial")
        a = item.vectors[0]
        derived = polynomial_slice(P, a, P.degree - 1)
        derived = LinearOperator(derived.tensor, P.domain, P.codomain)
        factor, lhs_flavor = _vnorm(a) ** (P.degree - 1), "coh"
        source = polarize(P) if P.degree > 1 else LinearOperator(P.tensor, P.domain, P.codomain)

        def rhs_upper(s):
            return upper_estimate(source, p, s) if flavor == "coh" else mcoh_upper(source, p, s)

    elif which == "functional-tensor":
        u = _need(item.linear, "functional-tensor needs a linear map u")
        derived = functional_tensor(item.functionals, u)
        factor = float(np.prod([_fnorm(g) for g in item.functionals])) if item.functionals else 1.0

        def rhs_upper(s):
            return upper_estimate(u, p, s)

    elif which == "power-times-linear":
        u = _need(item.linear, "power-times-linear needs a linear map u")
        g = item.functionals[0]
        derived = power_times_linear(g, u, item.degree)
        factor = _fnorm(g) ** (item.degree - 1)

        def rhs_upper(s):
            return upper_estimate(u, p, s)

    else:
        raise ValueError(f"unknown compatibility item {which!r}")

    def run(s):
        lhs = lower_estimate(derived, lhs_flavor, p, s)
        if factor == 0:
            return _result(name, lhs, 0.0, s, dig, seed)
        return _result(name, lhs, rhs_upper(s) * factor, s, dig, seed)

    return _escalating(run, settings)


def _check_partial_symmetry(A: MultilinearOperator, tol: float = 1e-10):
    n = A.degree - 1
    if A.domains[-1].dim != 1:
        raise ValueError("the last domain must be the scalar field")
    if len(set(A.domains[:n])) > 1:
        raise ValueError("the first n domains must coincide")
    T = A.tensor[..., 0]
    for i in range(1, n):
        perm = list(range(T.ndim))
        perm[1], perm[i + 1] = perm[i + 1], perm[1]
        if np.max(np.abs(T - np.transpose(T, perm)), initial=0.0) > tol:
            raise ValueError("A is not symmetric in its first n variables")


def check_padded_identity(A: MultilinearOperator, w: WitnessData, p, seed: int = 0, tol: float = 1e-10) -> CheckResult:
    """Padding the functionals with zeros and adding the scalar family (1, 0, ..., 0)
    leaves the multiple ratio unchanged: ratio(A, padded) == ratio(A1, w)."""
    A1 = restrict_scalar(A)
    m = len(w.vector_families[0])
    scalar = np.zeros((m, 1))
    scalar[0, 0] = 1.0
    padded = WitnessData(
        w.vector_families + (VectorFamily(scalar, A.domains[-1]),),
        FunctionalFamily(padded_multi_index(w.functional_family.coeffs, m), A.codomain),
        "mcoh",
    )
    a = mcoh_ratio(A, padded, p)
    b = mcoh_ratio(A1, w, p)
    margin = 0.0 - abs(a - b) + 0.0
    tol = tol * max(1.0, abs(b))
    dig = digest(A, [f.members for f in w.vector_families], w.functional_family.coeffs, float(p))
    return CheckResult("property-B/identity", margin >= -tol, margin, dig, seed, tol, {"padded": a, "restricted": b})


def check_property_B(A: MultilinearOperator, p, settings: CheckSettings | None = None, seed: int = 0) -> CheckResult:
    """||A1||_mCoh <= ||A||_mCoh (constant 1), plus the padded-witness identity on the search witness."""
    _check_partial_symmetry(A)
    settings = (settings or CheckSettings()).seeded(seed)
    A1 = restrict_scalar(A)
    dig = digest(A, float(p))

    def run(s):
        low = lower_bound_search(A1, "mcoh", p, s.search)
        ident = check_padded_identity(A, low.witness, p, seed)
        res = _result("property-B", low.lower, mcoh_upper(A, p, s), s, dig, seed, identity_error=-ident.margin)
        return replace(res, passed=res.passed and ident.passed)

    return _escalating(run, settings)


def check_holomorphy_bound(
    P: HomogeneousPolynomial, a: Vector, k: int, p, flavor: str = "mcoh", settings: CheckSettings | None = None, seed: int = 0
) -> CheckResult:
    """||(1/k!) d^k P(a)|| <= 2^n ||P|| ||a||^(n-k); the right side uses the Cohen bound of the polar."""
    n = P.degree
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    settings = (settings or CheckSettings()).seeded(seed)
    D = differential(P, a, k)
    dig = digest([P, a], k, flavor, float(p))
    factor = 2.0**n * _vnorm(a) ** (n - k)

    def run(s):
        lhs = lower_estimate(D, flavor, p, s)
        if factor == 0:
            return _result(f"holomorphy/{flavor}", lhs, 0.0, s, dig, seed)
        return _result(f"holomorphy/{flavor}", lhs, factor * mcoh_upper(P, p, s), s, dig, seed, k=k)

    return _escalating(run, settings)


def dvoretzky_rogers_trend(
    p, dims, settings: CheckSettings | None = None, seed: int = 0, brute_max_dim: int = 3
) -> tuple[CheckResult, list[dict]]:
    """d_p of the identity on l_2^n for increasing n: strictly increasing lower bounds."""
    dims = list(dims)
    if dims != sorted(set(dims)) or max(dims) > 6 or min(dims) < 1:
        raise ValueError("dims must be strictly increasing integers in [1, 6]")
    settings = (settings or CheckSettings()).seeded(seed)
    rows = []
    for n in dims:
        E = NormedSpace(n, 2)
        ident = LinearOperator(np.eye(n), E, E)
        lower = lower_bound_search(ident, "dp", p, replace(settings.search, m=n)).lower
        upper = upper_estimate(ident, p, settings)
        row = {"dim": n, "lower": lower, "upper": upper}
        if n <= brute_max_dim:
            row["brute"] = brute_force_oracle(ident, "dp", p, resolution=64 if n <= 2 else 48, m=n, levels=(1.0,))
        rows.append(row)
    lowers = [r["lower"] for r in rows]
    gaps = [b - a for a, b in zip(lowers, lowers[1:])]
    margin = min(gaps) if gaps else 0.0
    res = CheckResult("dvoretzky", margin > 0, margin, digest(dims, float(p)), seed, 0.0, {"table": rows})
    return res, rows


def gamma_collapse_experiment(
    T: LinearOperator, p_star, pairs, settings: CheckSettings | None = None, seed: int = 0
) -> tuple[CheckResult, list[dict]]:
    """Constants C_{r,q} for pairs with 1/r = 1/q + 1/p*; the pair (1, p) must match d_p."""
    settings = (settings or CheckSettings()).seeded(seed)
    p_star = Exponent(p_star)
    p = conjugate_exponent(p_star)
    for r, q in pairs:
        r, q = float(Exponent(r)), float(Exponent(q))
        if abs(1.0 / r - (1.0 / q + 1.0 / float(p_star))) > 1e-12:
            raise ValueError(f"pair ({r}, {q}) violates 1/r = 1/q + 1/p*")
    dp_lower = lower_bound_search(T, "dp", p, settings.search).lower
    dp_upper = upper_estimate(T, p, settings)
    rows = []
    ok = True
    match_margin = math.inf
    for r, q in pairs:
        c = lower_bound_search(T, "gamma", p, settings.search, pair=(r, q)).lower
        rows.append({"r": float(r), "q": float(q), "constant": c})
        ok = ok and math.isfinite(c)
        if abs(float(Exponent(q)) - float(p)) < 1e-12:
            lo, hi = dp_lower * (1 - settings.slack), dp_upper * (1 + settings.slack)
            match_margin = min(c - lo, hi - c)
    passed = ok and match_margin >= 0
    details = {"table": rows, "dp_lower": dp_lower, "dp_upper": dp_upper}
    res = CheckResult("gamma", passed, match_margin if math.isfinite(match_margin) else 0.0,
                      digest(T, float(p_star), [tuple(map(float, pr)) for pr in pairs]), seed, 0.0, details)
    return res, rows


# ---------------------------------------------------------------------------
# random corpora


QS = (1.0, 2.0, math.inf)


def _space(rng, dim, q=None) -> NormedSpace:
    return NormedSpace(dim, QS[rng.integers(3)] if q is None else q)


def _vector(rng, space) -> Vector:
    return Vector(rng.standard_normal(space.dim), space)


def _functional(rng, space) -> Functional:
    return Functional(rng.standard_normal(space.dim), space)


def _linear(rng, E, F) -> LinearOperator:
    return LinearOperator(rng.standard_normal((F.dim, E.dim)), E, F)


def _multilinear(rng, domains, F) -> MultilinearOperator:
    shape = (F.dim,) + tuple(E.dim for E in domains)
    return MultilinearOperator(rng.standard_normal(shape), domains, F)


def _polynomial(rng, E, F, n) -> HomogeneousPolynomial:
    return HomogeneousPolynomial(rng.standard_normal((F.dim,) + (E.dim,) * n), E, F)


def suite_seed(master: int, suite: str, index: int) -> int:
    """Per-check seed from (master seed, suite name, index); independent of scheduling."""
    ss = np.random.SeedSequence([int(master), zlib.crc32(suite.encode()), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _euclid(dim):
    return NormedSpace(dim, 2)


def case_holder(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 4)), int(rng.integers(1, 6))
    fams = tuple(
        VectorFamily(rng.standard_normal((m, d)) * rng.exponential(1.0, (m, 1)), _space(rng, d))
        for d in rng.integers(1, 5, size=n)
    )
    F = NormedSpace(1, 2)
    w = WitnessData(fams, FunctionalFamily(np.ones((m, 1)), F), "coh")
    p = [1.5, 2.0, 3.0, 4.0][rng.integers(4)]
    return replace(check_holder_chain(w, p, seed=seed), name=f"holder/{index:04d}")


def case_inclusion(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    d, m = int(rng.integers(1, 6)), int(rng.integers(1, 7))
    fam = VectorFamily(rng.standard_normal((m, d)), _space(rng, d))
    p = [1.5, 2.0, 3.0][rng.integers(3)]
    if index % 10 == 9:
        p = 1.0
    return replace(check_inclusion_chain(fam, p, seed=seed), name=f"inclusion/{index:04d}")


def case_ideal_linear(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    E = _euclid(2)
    A1, T, A2 = (_linear(rng, E, E) for _ in range(3))
    return replace(check_ideal_linear(A1, T, A2, 2, settings, seed), name=f"ideal-linear/{index:04d}")


def case_ideal_multilinear(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    E = _euclid(2)
    T = _multilinear(rng, (E, E), E)
    A = _linear(rng, E, E)
    pre = [_linear(rng, E, E) for _ in range(2)]
    res = check_ideal_multilinear(A, T, pre, 2, settings, seed)
    return replace(res, name=f"ideal-multilinear/{index:04d}")


def case_inclusion_mcoh(seed: int, index: int, settings=None) -> CheckResult:
    """Multiple norm lower estimate below the Cohen upper bound for a random bilinear map."""
    rng = np.random.default_rng(seed)
    E = _euclid(2)
    T = _multilinear(rng, (E, E), E)
    s = (settings or CheckSettings()).seeded(seed)
    dig = digest(T, 2.0)

    def run(st):
        return _result(f"mcoh-inclusion/{index:04d}", lower_estimate(T, "mcoh", 2, st), upper_estimate(T, 2, st), st, dig, seed)

    return _escalating(run, s)


def coherence_item(which: str, rng) -> CoherenceItem:
    """A random instance for a coherence or compatibility check on 2-dimensional spaces with mixed exponents."""
    d = 2
    E, F = _space(rng, d), _space(rng, d)
    if which in ("fix-argument", "one-free-slot"):
        doms = (_space(rng, d), _space(rng, d))
        T = _multilinear(rng, doms, F)
        slot = int(rng.integers(2))
        if which == "fix-argument":
            return CoherenceItem(operator=T, vectors=(_vector(rng, doms[slot]),), slot=slot)
        other = 1 - slot
        return CoherenceItem(operator=T, vectors=(_vector(rng, doms[other]),), slot=slot)
    if which in ("polynomial-slice", "linear-slice"):
        P = _polynomial(rng, E, F, 2)
        return CoherenceItem(polynomial=P, vectors=(_vector(rng, E),))
    if which == "functional-product":
        T = _linear(rng, E, F) if rng.integers(2) == 0 else _multilinear(rng, (E, _space(rng, d)), F)
        return CoherenceItem(operator=T, functionals=(_functional(rng, _space(rng, d)),))
    if which == "polynomial-functional-product":
        n = int(rng.integers(1, 3))
        P = _polynomial(rng, E, F, n)
        return CoherenceItem(polynomial=P, functionals=(_functional(rng, E),))
    if which == "functional-tensor":
        u = _linear(rng, E, F)
        return CoherenceItem(linear=u, functionals=(_functional(rng, _space(rng, d)),), degree=2)
    if which == "power-times-linear":
        u = _linear(rng, E, F)
        return CoherenceItem(linear=u, functionals=(_functional(rng, E),), degree=2)
    if which in ("ratio-identity", "polar-ratio-identity"):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        dim = int(rng.integers(1, 4))
        E, F = _space(rng, dim), _space(rng, dim)
        P = _polynomial(rng, E, F, n)
        X = rng.standard_normal((m, dim))
        Phi = rng.standard_normal((m, dim))
        return CoherenceItem(polynomial=P, witness=(X, Phi))
    raise ValueError(f"unknown item {which!r}")


COHERENCE_CHECKS = (
    "fix-argument",
    "polynomial-slice",
    "functional-product",
    "polynomial-functional-product",
    "ratio-identity",
)
COMPATIBILITY_CHECKS = ("one-free-slot", "linear-slice", "functional-tensor", "power-times-linear", "polar-ratio-identity")


def case_coherence(which: str, flavor: str, seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    item = coherence_item(which, rng)
    p = 2.0
    fn = check_coherence if which in COHERENCE_CHECKS else check_compatibility
    res = fn(item, which, p, flavor, settings, seed)
    return replace(res, name=f"{which}/{flavor}/{index:04d}")


def case_padded_identity(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    n, d, m = int(rng.integers(1, 3)), int(rng.integers(1, 4)), int(rng.integers(1, 4))
    E, F = _space(rng, d), _space(rng, d)
    A = _property_b_operator(rng, E, F, n)
    fams = tuple(VectorFamily(rng.standard_normal((m, d)), E) for _ in range(n))
    Phi = rng.standard_normal((m,) * n + (d,))
    w = WitnessData(fams, FunctionalFamily(Phi, F), "mcoh")
    return replace(check_padded_identity(A, w, 2.0, seed), name=f"property-B/identity/{index:04d}")


def _property_b_operator(rng, E, F, n) -> MultilinearOperator:
    """A in L(^nE, K; F) symmetric in the first n variables."""
    P = _polynomial(rng, E, F, n)
    K = NormedSpace(1, 2)
    return MultilinearOperator(P.tensor[..., None] * rng.standard_normal(), (E,) * n + (K,), F)


def case_property_b(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    E, F = _space(rng, 2), _space(rng, 2)
    A = _property_b_operator(rng, E, F, int(rng.integers(1, 3)))
    return replace(check_property_B(A, 2.0, settings, seed), name=f"property-B/{index:04d}")


def case_holomorphy(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    E, F = _space(rng, 2), _space(rng, 2)
    n = int(rng.integers(1, 4))
    P = _polynomial(rng, E, F, n)
    a = _vector(rng, E)
    k = int(rng.integers(0, n + 1))
    flavor = ("coh", "mcoh")[index % 2]
    res = check_holomorphy_bound(P, a, k, 2.0, flavor, settings, seed)
    return replace(res, name=f"holomorphy/{flavor}/{index:04d}")


def case_duality(seed: int, index: int, settings=None) -> CheckResult:
    """Direct d_2 bracket and the adjoint 2-summing bracket overlap after 5% inflation."""
    rng = np.random.default_rng(seed)
    E = _euclid(3)
    T = _linear(rng, E, E)
    s = (settings or CheckSettings()).seeded(seed)
    dig = digest(T, 2.0)

    def run(st):
        lo = lower_bound_search(T, "dp", 2, st.search).lower
        up = pietsch_upper_bound(T, "dp", 2, st.grids).upper
        adj = dp_via_adjoint(T, 2, st.grids, st.search)
        # overlap of [lo, up] and [adj.lower, adj.upper] after inflating each by the slack
        hi = min(up, adj.upper) * (1 + st.slack)
        low = max(lo, adj.lower) * (1 - st.slack)
        margin = hi - low
        details = {"direct": [lo, up], "adjoint": [adj.lower, adj.upper]}
        return CheckResult(f"duality/{index:04d}", margin >= 0, margin, dig, seed, 0.0, details)

    return _escalating(run, s)


def case_gamma(seed: int, index: int, settings=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    E = _euclid(2)
    T = _linear(rng, E, E)
    res, _ = gamma_collapse_experiment(T, 2, [(1, 2), (6 / 5, 3), (4 / 3, 4)], settings, seed)
    return replace(res, name=f"gamma/{index:04d}")


def case_rank_one(seed: int, index: int, settings=None) -> CheckResult:
    """d_p of x -> phi(x) y is bracketed around ||phi|| ||y|| (5% inflation of the bracket)."""
    rng = np.random.default_rng(seed)
    E, F = _space(rng, 2), _space(rng, 2)
    phi, y = _functional(rng, E), _vector(rng, F)
    T = LinearOperator(np.outer(y.coords, phi.coords), E, F)
    target = _fnorm(phi) * _vnorm(y)
    s = (settings or CheckSettings()).seeded(seed)
    dig = digest(T, 2.0)

    def run(st):
        lo = lower_estimate(T, "coh", 2, st)
        up = upper_estimate(T, 2, st)
        margin = min(up * (1 + st.slack) - target, target - lo * (1 - st.slack))
        details = {"lower": lo, "upper": up, "target": target}
        return CheckResult(f"rank-one/{index:04d}", margin >= 0, margin, dig, seed, 0.0, details)

    return _escalating(run, s)


def case_dvoretzky(seed: int, index: int, settings=None) -> CheckResult:
    """Identity on l_2^n, n = 1..5: strictly increasing lower bounds within 10% of sqrt(n)."""
    res, rows = dvoretzky_rogers_trend(2, [1, 2, 3, 4, 5], settings, seed, brute_max_dim=0)
    closeness = min(0.10 * math.sqrt(r["dim"]) - abs(r["lower"] - math.sqrt(r["dim"])) for r in rows)
    margin = min(res.margin, closeness)
    return replace(res, name=f"dvoretzky/{index:04d}", margin=margin, passed=margin > 0)


def _coherence_cases(items):
    table = {}
    for which in items:
        for flavor in ("coh", "mcoh"):
            table[f"{which}/{flavor}"] = (
                lambda seed, index, settings=None, which=which, flavor=flavor: case_coherence(
                    which, flavor, seed, index, settings
                )
            )
    return table


# suite name -> {case name -> (seed, index, [settings]) -> CheckResult}
SUITES: dict[str, dict[str, Callable]] = {
    "holder": {"holder": case_holder},
    "inclusion": {"inclusion": case_inclusion},
    "duality": {"duality": case_duality},
    "ideal": {
        "ideal-linear": case_ideal_linear,
        "ideal-multilinear": case_ideal_multilinear,
        "rank-one": case_rank_one,
    },
    "mcoh-inclusion": {"mcoh-inclusion": case_inclusion_mcoh},
    "coherence": _coherence_cases(COHERENCE_CHECKS),
    "compatibility": _coherence_cases(COMPATIBILITY_CHECKS),
    "property-b": {"property-B/identity": case_padded_identity, "property-B": case_property_b},
    "holomorphy": {"holomorphy": case_holomorphy},
    "dvoretzky": {"dvoretzky": case_dvoretzky},
    "gamma": {"gamma": case_gamma},
}


def _run_case(args) -> CheckResult:
    suite, case, master, index, settings = args
    seed = suite_seed(master, f"{suite}/{case}", index)
    return SUITES[suite][case](seed, index, settings)


def run_suite(
    suite: str, trials: int, seed: int = 0, workers: int = 1, settings: CheckSettings | None = None
) -> list[CheckResult]:
    """Run ``trials`` instances of every case in ``suite``; results sorted by name."""
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; expected one of {sorted(SUITES)}")
    jobs = [(suite, case, seed, i, settings) for case in SUITES[suite] for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_case, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_case(j) for j in jobs]
    return sorted(results, key=lambda r: r.name)


# default corpus size per suite
DEFAULT_TRIALS = {
    "holder": 1000,
    "inclusion": 200,
    "duality": 50,
    "ideal": 50,
    "mcoh-inclusion": 30,
    "coherence": 50,
    "compatibility": 50,
    "property-b": 100,
    "holomorphy": 50,
    "dvoretzky": 1,
    "gamma": 10,
}
