"""Witnesses, brackets and discrete domination measures."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..seqnorms import FunctionalFamily, VectorFamily
from ..spaces import NormedSpace

__all__ = ["WitnessData", "NormBracket", "DiscreteMeasure", "InconsistentRatio", "DegenerateGrid"]


class InconsistentRatio(ArithmeticError):
    """A ratio had a zero denominator but a positive numerator."""


class DegenerateGrid(RuntimeError):
    """The domination program was infeasible on the given grids."""


@dataclass(frozen=True, eq=False)
class WitnessData:
    """Vector families (one per slot) and a functional family for one flavor.

    For the multiple flavor the functional family has shape (m,) * n; for
    every other flavor it is flat with one functional per index i.
    """

    vector_families: tuple[VectorFamily, ...]
    functional_family: FunctionalFamily
    flavor: str

    def __post_init__(self):
        fams = tuple(self.vector_families)
        object.__setattr__(self, "vector_families", fams)
        shape = self.functional_family.shape
        if self.flavor == "mcoh":
            m = tuple(len(f) for f in fams)
            if shape != m:
                raise ValueError(f"multi-indexed functionals of shape {shape} do not match family lengths {m}")
        else:
            lengths = {len(f) for f in fams}
            if len(lengths) != 1 or shape != (lengths.pop(),):
                raise ValueError("every slot must carry one vector per functional")

    @property
    def degree(self) -> int:
        return len(self.vector_families)

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor,
            "vectors": [f.members.tolist() for f in self.vector_families],
            "functionals": self.functional_family.coeffs.tolist(),
        }


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms in the unit ball of the bidual with simplex weights."""

    atoms: np.ndarray
    weights: np.ndarray
    space: NormedSpace

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must lie on the probability simplex")
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atoms", np.asarray(self.atoms, dtype=float))

    def integral(self, phis: np.ndarray, power: float) -> np.ndarray:
        """sum_k mu_k |psi_k(phi)|^power for each row phi."""
        return np.abs(np.asarray(phis) @ self.atoms.T) ** power @ self.weights

    def support(self, tol: float = 1e-12) -> np.ndarray:
        return self.atoms[self.weights > tol]


@dataclass(frozen=True, eq=False)
class NormBracket:
    lower: float | None = None
    upper: float | None = None
    witness: WitnessData | None = None
    measure: DiscreteMeasure | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def inverted(self) -> bool:
        """True when both ends exist and lower exceeds upper by more than 1e-9 relative."""
        if self.lower is None or self.upper is None:
            return False
        return self.lower > self.upper * (1 + 1e-9) + 1e-12

    def merge(self, other: "NormBracket") -> "NormBracket":
        """Combine two brackets of the same norm: best lower, best upper."""
        lowers = [b for b in (self, other) if b.lower is not None]
        uppers = [b for b in (self, other) if b.upper is not None]
        lo = max(lowers, key=lambda b: b.lower) if lowers else None
        up = min(uppers, key=lambda b: b.upper) if uppers else None
        return NormBracket(
            lower=lo.lower if lo else None,
            upper=up.upper if up else None,
            witness=lo.witness if lo else None,
            measure=up.measure if up else None,
            diagnostics={**self.diagnostics, **other.diagnostics},
        )

    def contains(self, value: float, rel: float = 0.0) -> bool:
        lo = -np.inf if self.lower is None else self.lower * (1 - rel)
        hi = np.inf if self.upper is None else self.upper * (1 + rel)
        return lo <= value <= hi

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "diagnostics": self.diagnostics,
        }
