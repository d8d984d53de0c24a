"""Linear, multilinear and polynomial maps between l_q spaces as dense tensors.

Tensor layout: axis 0 is the codomain index, axes 1..n are the domain slots in
order. A homogeneous polynomial of degree n on E stores the symmetric tensor of
its polar form; degree 0 polynomials are constants of shape (dim F,).
"""

from __future__ import annotations

import itertools
import math
import string
from typing import Callable, Sequence

import numpy as np

from .spaces import DimensionMismatch, Functional, NormedSpace, Vector, lq_norm, norming_array

__all__ = [
    "MultilinearOperator",
    "LinearOperator",
    "HomogeneousPolynomial",
    "apply",
    "evaluate_rows",
    "evaluate_grid",
    "adjoint",
    "symmetrize",
    "polarization_tensor",
    "polarize",
    "fix_argument",
    "multiply_functional",
    "multiply_functional_poly",
    "compose",
    "restrict_scalar",
    "functional_tensor",
    "polynomial_slice",
    "differential",
    "power_times_linear",
    "as_polynomial",
    "operator_norm",
]

_LETTERS = string.ascii_lowercase


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


class MultilinearOperator:
    """An n-linear map E_1 x ... x E_n -> F stored as a dense tensor."""

    __slots__ = ("tensor", "domains", "codomain")

    def __init__(self, tensor, domains: Sequence[NormedSpace], codomain: NormedSpace):
        tensor = _frozen(tensor)
        domains = tuple(domains)
        expected = (codomain.dim,) + tuple(d.dim for d in domains)
        if tensor.shape != expected:
            raise DimensionMismatch(f"tensor shape {tensor.shape} does not match spaces {expected}")
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "codomain", codomain)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def degree(self) -> int:
        return len(self.domains)

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearOperator)
            and self.domains == other.domains
            and self.codomain == other.codomain
            and np.array_equal(self.tensor, other.tensor)
        )

    def __hash__(self):
        return hash((self.domains, self.codomain, self.tensor.tobytes()))

    def __mul__(self, scalar: float):
        return _wrap(self.tensor * float(scalar), self.domains, self.codomain)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        doms = " x ".join(str(d) for d in self.domains)
        return f"{type(self).__name__}({doms} -> {self.codomain})"


class LinearOperator(MultilinearOperator):
    """Degree-one special case; ``matrix`` has shape (dim F, dim E)."""

    __slots__ = ()

    def __init__(self, matrix, domain: NormedSpace, codomain: NormedSpace):
        super().__init__(matrix, (domain,), codomain)

    @property
    def matrix(self) -> np.ndarray:
        return self.tensor

    @property
    def domain(self) -> NormedSpace:
        return self.domains[0]


def _wrap(tensor, domains, codomain) -> MultilinearOperator:
    if len(domains) == 1:
        return LinearOperator(tensor, domains[0], codomain)
    return MultilinearOperator(tensor, domains, codomain)


def symmetrize(tensor) -> np.ndarray:
    """Average over permutations of the domain axes (1..n).

    Entries are written from the sorted multi-index, so the result is exactly
    invariant under every permutation, not just up to rounding. Symmetric
    input is returned unchanged.
    """
    tensor = np.asarray(tensor, dtype=float)
    n = tensor.ndim - 1
    if n <= 1:
        return tensor.copy()
    perms = list(itertools.permutations(range(1, n + 1)))
    if all(np.array_equal(tensor, np.transpose(tensor, (0,) + p)) for p in perms[1:]):
        return tensor.copy()
    avg = sum(np.transpose(tensor, (0,) + p) for p in perms) / len(perms)
    idx = np.sort(np.indices(tensor.shape[1:]), axis=0)
    return avg[(slice(None),) + tuple(idx)]


class HomogeneousPolynomial:
    """An n-homogeneous polynomial E -> F, P(x) = P_check(x, ..., x)."""

    __slots__ = ("tensor", "domain", "codomain")

    def __init__(self, tensor, domain: NormedSpace, codomain: NormedSpace, degree: int | None = None):
        tensor = np.asarray(tensor, dtype=float)
        n = tensor.ndim - 1 if degree is None else int(degree)
        expected = (codomain.dim,) + (domain.dim,) * n
        if tensor.shape != expected:
            raise DimensionMismatch(f"tensor shape {tensor.shape} does not match {expected}")
        object.__setattr__(self, "tensor", _frozen(symmetrize(tensor)))
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)

    def __setattr__(self, name, value):
        raise AttributeError("HomogeneousPolynomial is immutable")

    @property
    def degree(self) -> int:
        return self.tensor.ndim - 1

    def __eq__(self, other):
        return (
            isinstance(other, HomogeneousPolynomial)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and np.array_equal(self.tensor, other.tensor)
        )

    def __hash__(self):
        return hash((self.domain, self.codomain, self.tensor.tobytes()))

    def __call__(self, x):
        x = x.coords if isinstance(x, Vector) else np.asarray(x, dtype=float)
        return evaluate_rows(self.tensor, [x[None, :]] * self.degree)[0]

    def __mul__(self, scalar: float):
        return HomogeneousPolynomial(self.tensor * float(scalar), self.domain, self.codomain)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"HomogeneousPolynomial(degree {self.degree}, {self.domain} -> {self.codomain})"


def evaluate_rows(tensor, xs: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate at m argument tuples: xs[j] has shape (m, d_j); returns (m, dim F)."""
    tensor = np.asarray(tensor)
    n = tensor.ndim - 1
    if len(xs) != n:
        raise DimensionMismatch(f"expected {n} argument families, got {len(xs)}")
    if n == 0:
        m = 1
        return np.broadcast_to(tensor, (m, tensor.shape[0])).copy()
    slots = _LETTERS[1 : n + 1]
    subs = "z" + slots + "," + ",".join("y" + s for s in slots) + "->yz"
    return np.einsum(subs, tensor, *xs, optimize=True)


def evaluate_grid(tensor, xs: Sequence[np.ndarray]) -> np.ndarray:
    """All index combinations: returns shape (m_1, ..., m_n, dim F)."""
    tensor = np.asarray(tensor)
    n = tensor.ndim - 1
    slots = _LETTERS[:n]
    rows = _LETTERS[13 : 13 + n]
    subs = "z" + slots + "," + ",".join(r + s for r, s in zip(rows, slots)) + "->" + rows + "z"
    return np.einsum(subs, tensor, *xs, optimize=True)


def contract_slots(tensor, vectors: dict[int, np.ndarray]) -> np.ndarray:
    """Contract the given domain slots (0-based) with fixed vectors."""
    out = np.asarray(tensor, dtype=float)
    for k in sorted(vectors, reverse=True):
        out = np.tensordot(out, np.asarray(vectors[k], dtype=float), axes=([k + 1], [0]))
    return out


def _coords(v, space: NormedSpace | None = None) -> np.ndarray:
    c = v.coords if isinstance(v, (Vector, Functional)) else np.asarray(v, dtype=float)
    if space is not None and c.shape != (space.dim,):
        raise DimensionMismatch(f"argument of shape {c.shape} does not live in {space}")
    return c


def apply(op, *args) -> Vector:
    """Evaluate a linear/multilinear map at (x_1, ..., x_n) or a polynomial at x."""
    # a single list of arguments (not a list of coordinates) is unpacked
    if len(args) == 1 and isinstance(args[0], (list, tuple)) and not np.isscalar(args[0][0]):
        args = tuple(args[0])
    if isinstance(op, HomogeneousPolynomial):
        if len(args) != 1:
            raise DimensionMismatch("a polynomial takes exactly one argument")
        x = _coords(args[0], op.domain)
        return Vector(op(x), op.codomain)
    if len(args) != op.degree:
        raise DimensionMismatch(f"operator of degree {op.degree} got {len(args)} arguments")
    xs = [_coords(a, d)[None, :] for a, d in zip(args, op.domains)]
    return Vector(evaluate_rows(op.tensor, xs)[0], op.codomain)


def adjoint(T: LinearOperator) -> LinearOperator:
    return LinearOperator(T.matrix.T, T.codomain.dual(), T.domain.dual())


def polarization_tensor(evaluate: Callable[[np.ndarray], np.ndarray], dim: int, degree: int) -> np.ndarray:
    """Symmetric tensor of the polar form of a homogeneous map, via the signed sum.

    ``evaluate`` maps a batch of points (k, dim) to values (k, dim F).
    P_check(x_1..x_n) = 1/(2^n n!) sum_eps eps_1...eps_n P(sum eps_i x_i).
    """
    n = degree
    if n == 0:
        return np.asarray(evaluate(np.zeros((1, dim))))[0]
    eye = np.eye(dim)
    index_tuples = list(itertools.product(range(dim), repeat=n))
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    weights = signs.prod(axis=1)
    # points[t, e] = sum_i eps_i e_{a_i} for index tuple t and sign pattern e
    idx = np.array(index_tuples)
    pts = np.einsum("en,tnd->ted", signs, eye[idx])
    vals = np.asarray(evaluate(pts.reshape(-1, dim))).reshape(len(index_tuples), len(signs), -1)
    coeffs = np.einsum("e,tef->tf", weights, vals) / (2.0**n * math.factorial(n))
    out = coeffs.T.reshape((coeffs.shape[1],) + (dim,) * n)
    return symmetrize(out)


def polarize(P: HomogeneousPolynomial) -> MultilinearOperator:
    """The symmetric n-linear map with P_check(x, ..., x) = P(x)."""
    n = P.degree
    if n == 0:
        raise ValueError("a constant has no polar form")

    def evaluate(points):
        return evaluate_rows(P.tensor, [points] * n)

    tensor = polarization_tensor(evaluate, P.domain.dim, n)
    return _wrap(tensor, (P.domain,) * n, P.codomain)


def as_polynomial(op) -> HomogeneousPolynomial:
    """View a linear map (or an already symmetric form on equal slots) as a polynomial."""
    if isinstance(op, HomogeneousPolynomial):
        return op
    if len(set(op.domains)) != 1:
        raise DimensionMismatch("all slots must share one domain space")
    return HomogeneousPolynomial(op.tensor, op.domains[0], op.codomain)


def fix_argument(T: MultilinearOperator, slot: int, a) -> MultilinearOperator:
    """T_a: contract the 0-based ``slot`` with the vector ``a`` (degree drops by one)."""
    if not 0 <= slot < T.degree:
        raise IndexError(f"slot {slot} out of range for degree {T.degree}")
    if T.degree == 1:
        raise ValueError("fixing the only argument of a linear map leaves a vector, not an operator")
    a = _coords(a, T.domains[slot])
    tensor = np.tensordot(T.tensor, a, axes=([slot + 1], [0]))
    domains = T.domains[:slot] + T.domains[slot + 1 :]
    return _wrap(tensor, domains, T.codomain)


def multiply_functional(T: MultilinearOperator, gamma: Functional) -> MultilinearOperator:
    """(gamma T)(x_1..x_{n+1}) = gamma(x_{n+1}) T(x_1..x_n)."""
    g = _coords(gamma)
    tensor = np.multiply.outer(T.tensor, g)
    return MultilinearOperator(tensor, T.domains + (gamma.space,), T.codomain)


def multiply_functional_poly(P: HomogeneousPolynomial, gamma: Functional) -> HomogeneousPolynomial:
    """(gamma P)(x) = gamma(x) P(x), built from the averaged slot-insertion formula."""
    if gamma.space.dim != P.domain.dim:
        raise DimensionMismatch("gamma must act on the polynomial's domain")
    g = _coords(gamma)
    n = P.degree
    base = np.multiply.outer(P.tensor, g)  # gamma sits in the last slot
    total = np.zeros_like(base)
    for k in range(n + 1):
        # move the gamma slot (last axis) into position k+1
        total += np.moveaxis(base, n + 1, k + 1)
    return HomogeneousPolynomial(total / (n + 1), P.domain, P.codomain)


def compose(A: LinearOperator, T: MultilinearOperator, pre_maps: Sequence[LinearOperator]) -> MultilinearOperator:
    """A o T o (A_1, ..., A_n)."""
    pre_maps = list(pre_maps)
    if len(pre_maps) != T.degree:
        raise DimensionMismatch(f"need {T.degree} pre-maps, got {len(pre_maps)}")
    if A.domain.dim != T.codomain.dim:
        raise DimensionMismatch("outer map does not accept T's values")
    for j, (Aj, Ej) in enumerate(zip(pre_maps, T.domains)):
        if Aj.codomain.dim != Ej.dim:
            raise DimensionMismatch(f"pre-map {j} lands in dimension {Aj.codomain.dim}, slot needs {Ej.dim}")
    n = T.degree
    slots = _LETTERS[1 : n + 1]
    new = _LETTERS[13 : 13 + n]
    subs = "yz,z" + slots + "," + ",".join(s + t for s, t in zip(slots, new)) + "->y" + new
    tensor = np.einsum(subs, A.matrix, T.tensor, *[Aj.matrix for Aj in pre_maps], optimize=True)
    return _wrap(tensor, tuple(Aj.domain for Aj in pre_maps), A.codomain)


def restrict_scalar(A: MultilinearOperator) -> MultilinearOperator:
    """A1(x_1..x_n) = A(x_1..x_n, 1) for A whose last slot is one-dimensional."""
    if A.degree < 2 or A.domains[-1].dim != 1:
        raise DimensionMismatch("the last domain must be one-dimensional (the scalar field)")
    return _wrap(A.tensor[..., 0], A.domains[:-1], A.codomain)


def functional_tensor(gammas: Sequence[Functional], u: LinearOperator) -> MultilinearOperator:
    """(x_1..x_n) -> gamma_1(x_1) ... gamma_{n-1}(x_{n-1}) u(x_n)."""
    factor = np.ones(())
    for g in gammas:
        factor = np.multiply.outer(factor, _coords(g))
    out = np.einsum("fb,...->f...b", u.matrix, factor)
    return _wrap(out, tuple(g.space for g in gammas) + (u.domain,), u.codomain)


def polynomial_slice(P: HomogeneousPolynomial, a, count: int) -> HomogeneousPolynomial:
    """x -> P_check(a^count, x^(n-count)) as a polynomial of degree n - count."""
    n = P.degree
    if not 0 <= count <= n:
        raise ValueError(f"count must lie in [0, {n}], got {count}")
    a = _coords(a, P.domain)
    tensor = P.tensor
    for _ in range(count):
        tensor = np.tensordot(tensor, a, axes=([tensor.ndim - 1], [0]))
    return HomogeneousPolynomial(tensor, P.domain, P.codomain, degree=n - count)


def differential(P: HomogeneousPolynomial, a, k: int) -> HomogeneousPolynomial:
    """(1/k!) d^k P(a) as the degree-k polynomial x -> C(n,k) P_check(a^{n-k}, x^k)."""
    n = P.degree
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    return polynomial_slice(P, a, n - k) * math.comb(n, k)


def power_times_linear(gamma: Functional, u: LinearOperator, degree: int) -> HomogeneousPolynomial:
    """x -> gamma(x)^{degree-1} u(x)."""
    if u.domain.dim != gamma.space.dim:
        raise DimensionMismatch("gamma and u must share the domain")
    P = HomogeneousPolynomial(u.matrix, u.domain, u.codomain)
    for _ in range(degree - 1):
        P = multiply_functional_poly(P, gamma)
    return P


def operator_norm(op, restarts: int = 16, iters: int = 200, seed: int = 0) -> float:
    """sup ||T(x_1..x_n)|| over unit balls (sup ||P(x)|| for polynomials).

    Exact for Euclidean linear maps (largest singular value), for linear maps
    out of l_1, and wherever the form estimator enumerates polytope vertices;
    otherwise alternating maximisation with restarts, a lower estimate.
    """
    from .estimators.forms import form_norm, poly_form_norm
    from .sampling import ball_vertices, sphere_points

    if isinstance(op, HomogeneousPolynomial):
        if op.degree == 0:
            return float(lq_norm(op.tensor, op.codomain.q))
        dual = op.codomain.dual()
        psis = ball_vertices(dual)
        psis = sphere_points(dual, 64, seed=seed) if psis is None else psis / lq_norm(psis, dual.q)[:, None]
        S = np.tensordot(psis, op.tensor, axes=([1], [0]))
        vals, X = poly_form_norm(S, op.domain, restarts=restarts, iters=iters, seed=seed)
        x = X[int(np.argmax(vals))]
        best = float(lq_norm(op(x), op.codomain.q))
        # alternate psi = norming(P(x)) and x = argmax |psi(P(x))|; never decreases
        for _ in range(iters):
            psi = norming_array(op(x), op.codomain.q)
            S = np.tensordot(psi[None, :], op.tensor, axes=([1], [0]))
            _, Xn = poly_form_norm(S, op.domain, restarts=restarts, iters=iters, seed=seed)
            val = float(lq_norm(op(Xn[0]), op.codomain.q))
            if val <= best * (1 + 1e-13):
                break
            best, x = val, Xn[0]
        return best
    if op.degree == 1:
        M = op.matrix
        qe, qf = float(op.domain.q), float(op.codomain.q)
        if qe == 2.0 and qf == 2.0:
            return float(np.linalg.norm(M, 2)) if M.size else 0.0
        if qe == 1.0:
            return float(lq_norm(M.T, qf).max())
    # the (n+1)-linear scalar form (psi, x_1..x_n) with psi in the unit ball of F'
    spaces = (op.codomain.dual(),) + tuple(op.domains)
    val, _ = form_norm(op.tensor[None, ...], spaces, restarts=restarts, iters=iters, seed=seed)
    return float(val[0])
