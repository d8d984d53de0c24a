"""Finite-dimensional real l_q spaces, their duals, vectors and functionals.

Every operation here works on plain numpy arrays as well as on the thin
:class:`Vector` / :class:`Functional` wrappers, since the estimators only ever
touch coefficient arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "Exponent",
    "NormedSpace",
    "Vector",
    "Functional",
    "DimensionMismatch",
    "conjugate_exponent",
    "lq_norm",
    "norming_array",
    "vector_norm",
    "functional_norm",
    "pairing",
    "norming_functional",
]


class DimensionMismatch(ValueError):
    pass


class Exponent(float):
    """An exponent in [1, inf].

    Finite values are ordinary floats; 1 and inf are exact, so the endpoint
    cases never divide by zero.
    """

    def __new__(cls, value) -> "Exponent":
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            value = _parse_exponent_text(value)
        elif isinstance(value, Fraction):
            value = float(value)
        value = float(value)
        if math.isnan(value) or value < 1.0:
            raise ValueError(f"exponent must lie in [1, inf], got {value!r}")
        return super().__new__(cls, value)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self)

    def conjugate(self) -> "Exponent":
        return conjugate_exponent(self)

    def __repr__(self) -> str:
        return "Exponent(inf)" if self.is_inf else f"Exponent({float(self)!r})"


def _parse_exponent_text(text: str) -> float:
    text = text.strip().lower()
    if text in {"inf", "infinity", "oo"}:
        return math.inf
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def conjugate_exponent(p) -> Exponent:
    """Return p* with 1/p + 1/p* = 1 (1 <-> inf)."""
    p = Exponent(p)
    if p == 1.0:
        return Exponent(math.inf)
    if p.is_inf:
        return Exponent(1.0)
    return Exponent(1.0 / (1.0 - 1.0 / p))


@dataclass(frozen=True)
class NormedSpace:
    """The space R^dim with the l_q norm on coordinates."""

    dim: int
    q: Exponent

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "q", Exponent(self.q))

    def dual(self) -> "NormedSpace":
        return NormedSpace(self.dim, conjugate_exponent(self.q))

    def norm(self, coords) -> float:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim} coordinates, got {coords.shape[-1]}")
        return float(lq_norm(coords, self.q))

    @property
    def is_polytope(self) -> bool:
        """Whether the unit ball is a polytope (q = 1 or q = inf)."""
        return self.q == 1.0 or self.q.is_inf

    def __str__(self) -> str:
        q = "inf" if self.q.is_inf else repr(float(self.q))
        return f"l_{q}^{self.dim}"


def lq_norm(arr, q, axis: int = -1):
    """l_q norm along ``axis``; vectorised over the remaining axes."""
    arr = np.abs(np.asarray(arr, dtype=float))
    q = float(q)
    if arr.shape[axis] == 0:
        return np.zeros(np.delete(arr.shape, axis % arr.ndim)) if arr.ndim > 1 else 0.0
    if math.isinf(q):
        return arr.max(axis=axis)
    if q == 1.0:
        return arr.sum(axis=axis)
    if q == 2.0:
        return np.sqrt((arr * arr).sum(axis=axis))
    # scale first so large/small entries don't overflow under the power
    scale = arr.max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    out = (((arr / safe) ** q).sum(axis=axis, keepdims=True)) ** (1.0 / q) * scale
    return np.squeeze(out, axis=axis)


def norming_array(arr, q):
    """Unit l_{q*} vectors phi with <phi, x> = ||x||_q, row-wise along the last axis.

    Zero rows map to zero. For q = inf the lowest-index coordinate of maximal
    modulus carries the mass; for q = 1 the sign vector uses sign(0) = +1.
    """
    x = np.asarray(arr, dtype=float)
    q = float(q)
    sign = np.where(x >= 0, 1.0, -1.0)
    if math.isinf(q):
        out = np.zeros_like(x)
        k = np.argmax(np.abs(x), axis=-1)
        np.put_along_axis(out, k[..., None], np.take_along_axis(sign, k[..., None], -1), -1)
    elif q == 1.0:
        out = sign.copy()
    else:
        nrm = lq_norm(x, q)
        safe = np.where(nrm > 0, nrm, 1.0)[..., None]
        out = sign * (np.abs(x) / safe) ** (q - 1.0)
    zero = lq_norm(x, q) == 0
    if np.any(zero):
        out = np.where(np.asarray(zero)[..., None], 0.0, out)
    return out


@dataclass(frozen=True, eq=False)
class Vector:
    coords: np.ndarray
    space: NormedSpace

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape[0] != self.space.dim:
            raise DimensionMismatch(
                f"vector has {coords.shape[0]} coordinates, space {self.space} needs {self.space.dim}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def __eq__(self, other):
        return (
            isinstance(other, Vector)
            and self.space == other.space
            and np.array_equal(self.coords, other.coords)
        )

    def __mul__(self, scalar: float) -> "Vector":
        return Vector(self.coords * float(scalar), self.space)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional on ``space``; its own norm is the dual l_{q*} norm."""

    coords: np.ndarray
    space: NormedSpace

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape[0] != self.space.dim:
            raise DimensionMismatch(
                f"functional has {coords.shape[0]} coordinates, space {self.space} needs {self.space.dim}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def __eq__(self, other):
        return (
            isinstance(other, Functional)
            and self.space == other.space
            and np.array_equal(self.coords, other.coords)
        )

    def __call__(self, x: Vector) -> float:
        return pairing(self, x)


def vector_norm(x: Vector) -> float:
    return x.space.norm(x.coords)


def functional_norm(phi: Functional) -> float:
    return float(lq_norm(phi.coords, conjugate_exponent(phi.space.q)))


def pairing(phi: Functional, x: Vector) -> float:
    if phi.space.dim != x.space.dim:
        raise DimensionMismatch(f"cannot pair a functional on {phi.space} with a vector in {x.space}")
    return float(phi.coords @ x.coords)


def norming_functional(x: Vector) -> Functional:
    """The deterministic norm-one functional attaining ||x||."""
    if not np.any(x.coords):
        raise ValueError("the zero vector has no norming functional")
    return Functional(norming_array(x.coords, x.space.q), x.space)
