"""Restriction to an anticanonical K3 section and the Mukai pairing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chow_core import ChowClass, FanoData, euler_pair, frac
from .instanton_invariants import DeviationRecord, gamma


@dataclass(frozen=True)
class K3Class:
    """ch on the surface: rank, multiple of H_S, degree of ch2."""

    r: Fraction
    aS: Fraction
    s: Fraction

    def __post_init__(self) -> None:
        for name in ("r", "aS", "s"):
            object.__setattr__(self, name, frac(getattr(self, name)))

    def __add__(self, other: "K3Class") -> "K3Class":
        return K3Class(self.r + other.r, self.aS + other.aS, self.s + other.s)

    def __mul__(self, t) -> "K3Class":
        return K3Class(t * self.r, t * self.aS, t * self.s)

    __rmul__ = __mul__


@dataclass(frozen=True)
class K3Data:
    h2: int

    @classmethod
    def of(cls, X: FanoData) -> "K3Data":
        # S is in |iH|, so H_S^2 = H . H . iH
        return cls(X.index * X.degree)

    @property
    def todd(self) -> K3Class:
        return K3Class(1, 0, 2)


def restrict(A: ChowClass, X: FanoData) -> K3Class:
    return K3Class(A.r, A.a, X.index * A.b)


def euler_pair_k3(u: K3Class, v: K3Class, S: K3Data) -> Fraction:
    """Degree two part of u^dual * v * td(S)."""
    return u.r * v.s + u.s * v.r + 2 * u.r * v.r - u.aS * v.aS * S.h2


def lagrangian_check(X: FanoData, n: int, k: int) -> tuple[bool, DeviationRecord]:
    """Tangent dimension on the K3 is twice the instanton moduli dimension."""
    g = gamma(X, n, k).character
    gs = restrict(g, X)
    lhs = 2 * (1 - euler_pair(g, g, X))
    rhs = 2 - euler_pair_k3(gs, gs, K3Data.of(X))
    rec = DeviationRecord(
        "half-dimension identity on the K3 section", lhs, rhs, "2(1 - chi_X) vs 2 - chi_S", f"{X.label} n={n} k={k}"
    )
    return rec.ok, rec
