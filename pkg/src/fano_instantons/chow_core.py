"""Numerical Chow ring of a Picard-rank-one Fano threefold.

Classes are written against the basis ``1, H, l, p`` (hyperplane, line,
point) with ``H*H = d*l``, ``H*l = p`` and everything above degree three
zero.  All coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from typing import Iterable, Union

Number = Union[int, Fraction]

REGISTRY_ENV = "FIC_REGISTRY"


def frac(x: Number | str) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ChowClass:
    """Chern character ``r + a H + b l + c p``."""

    r: Fraction
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in ("r", "a", "b", "c"):
            object.__setattr__(self, name, frac(getattr(self, name)))

    @classmethod
    def of(cls, *coeffs: Number | str) -> "ChowClass":
        return cls(*(frac(x) for x in coeffs))

    def __iter__(self):
        return iter((self.r, self.a, self.b, self.c))

    def __add__(self, other: "ChowClass") -> "ChowClass":
        return ChowClass(*(x + y for x, y in zip(self, other)))

    def __sub__(self, other: "ChowClass") -> "ChowClass":
        return ChowClass(*(x - y for x, y in zip(self, other)))

    def __neg__(self) -> "ChowClass":
        return ChowClass(*(-x for x in self))

    def __mul__(self, s: Number) -> "ChowClass":
        if not isinstance(s, (int, Fraction)):
            return NotImplemented
        return ChowClass(*(s * x for x in self))

    __rmul__ = __mul__

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.r, self.a, self.b, self.c)

    def to_json(self) -> list[str]:
        return [str(x) for x in self]

    @classmethod
    def from_json(cls, data: Iterable[Number | str]) -> "ChowClass":
        return cls.of(*data)

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self) + ")"


ZERO = ChowClass(0)
UNIT = ChowClass(1)
HYPERPLANE = ChowClass(0, 1)
LINE = ChowClass(0, 0, 1)
POINT = ChowClass(0, 0, 0, 1)


class InvalidThreefold(ValueError):
    pass


@dataclass(frozen=True)
class FanoData:
    """Numerical type of a Fano threefold: index, degree ``H^3`` and genus."""

    index: int
    degree: int
    genus: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        i, d, g = self.index, self.degree, self.genus
        if i == 4 and d == 1 or i == 3 and d == 2 or i == 2 and 1 <= d <= 5:
            if g is not None:
                raise InvalidThreefold(f"genus given for index {i}")
            return
        if i == 1:
            if g is None:
                raise InvalidThreefold("index 1 needs a genus")
            if not 3 <= g <= 12 or d != 2 * g - 2:
                raise InvalidThreefold(f"index 1 needs d = 2g-2, 3 <= g <= 12 (got g={g}, d={d})")
            return
        raise InvalidThreefold(f"no threefold with index {i} and degree {d}")

    @property
    def q(self) -> int:
        return self.index // 2

    @property
    def r_twist(self) -> int:
        return self.index % 2

    @property
    def c2_tangent(self) -> Fraction:
        """c2(T_X) in units of l, from c1*c2 = 24."""
        return Fraction(24, self.index)

    @cached_property
    def todd(self) -> ChowClass:
        i, d = self.index, self.degree
        return ChowClass(1, Fraction(i, 2), (i * i * d + self.c2_tangent) / 12, 1)

    @property
    def label(self) -> str:
        return self.name or f"i{self.index}d{self.degree}"


def mul(A: ChowClass, B: ChowClass, X: FanoData) -> ChowClass:
    d = X.degree
    return ChowClass(
        A.r * B.r,
        A.r * B.a + A.a * B.r,
        A.r * B.b + A.b * B.r + d * A.a * B.a,
        A.r * B.c + A.c * B.r + A.a * B.b + A.b * B.a,
    )


def exp_h(m: Number, X: FanoData) -> ChowClass:
    m, d = frac(m), X.degree
    return ChowClass(1, m, m * m * d / 2, m**3 * d / 6)


def twist(A: ChowClass, m: Number, X: FanoData) -> ChowClass:
    return mul(A, exp_h(m, X), X)


def dual_ch(A: ChowClass) -> ChowClass:
    return ChowClass(A.r, -A.a, A.b, -A.c)


def todd(X: FanoData) -> ChowClass:
    return X.todd


def euler_char(A: ChowClass, X: FanoData) -> Fraction:
    return mul(A, X.todd, X).c


def euler_pair(A: ChowClass, B: ChowClass, X: FanoData) -> Fraction:
    """chi(A, B) = sum (-1)^i ext^i(A, B)."""
    return euler_char(mul(dual_ch(A), B, X), X)


def hilbert_polynomial(A: ChowClass, X: FanoData) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Coefficients (c0, c1, c2, c3) of t -> chi(A(t))."""
    r, a, b, c = A
    d, (_, t1, t2, _) = X.degree, X.todd
    # chi(A(t)) expanded in t; matches euler_char(twist(A, t)) identically
    c3 = r * d / 6
    c2 = a * d / 2 + r * d * t1 / 2
    c1 = b + a * d * t1 + r * t2
    c0 = euler_char(A, X)
    return (c0, c1, c2, c3)


def eval_poly(coeffs: Iterable[Fraction], t: Number) -> Fraction:
    return sum((cf * frac(t) ** j for j, cf in enumerate(coeffs)), Fraction(0))


def reduced_hilbert_compare(A: ChowClass, B: ChowClass, X: FanoData) -> str:
    """Compare reduced Hilbert polynomials, leading coefficient first."""
    if A.r == 0 or B.r == 0:
        raise ValueError("reduced Hilbert polynomial needs positive rank")
    pa = [x / A.r for x in reversed(hilbert_polynomial(A, X))]
    pb = [x / B.r for x in reversed(hilbert_polynomial(B, X))]
    return "<" if pa < pb else ">" if pa > pb else "="


def slope(A: ChowClass) -> Fraction:
    if A.r == 0:
        raise ValueError("slope of a rank zero class")
    return A.a / A.r


def line_class(j: int, X: FanoData) -> ChowClass:
    """ch(O_l(j)): the class with ch2 = l and chi = j + 1."""
    return ChowClass(0, 0, 1, j + 1 - Fraction(X.index, 2))


def ch_from_chern(rank: Number, c1: Number, c2: Number, c3: Number, X: FanoData) -> ChowClass:
    """Chern classes (c1 in H, c2 in l, c3 in p) to Chern character."""
    c1, c2, c3, d = frac(c1), frac(c2), frac(c3), X.degree
    return ChowClass(rank, c1, c1 * c1 * d / 2 - c2, (c1**3 * d - 3 * c1 * c2 + 3 * c3) / 6)


def chern_from_ch(A: ChowClass, X: FanoData) -> tuple[Fraction, Fraction, Fraction]:
    d = X.degree
    c1 = A.a
    c2 = c1 * c1 * d / 2 - A.b
    c3 = 2 * A.c - (c1**3 * d - 3 * c1 * c2) / 3
    return c1, c2, c3


def has_integral_chern_classes(A: ChowClass, X: FanoData) -> bool:
    return A.r.denominator == 1 and all(x.denominator == 1 for x in chern_from_ch(A, X))


# registry


def default_registry_path() -> str:
    env = os.environ.get(REGISTRY_ENV)
    if env:
        return env
    return str(resources.files("fano_instantons") / "data" / "threefolds.json")


def load_registry(path: str | os.PathLike | None = None) -> dict[str, FanoData]:
    path = path or default_registry_path()
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    out = {}
    for entry in raw["threefolds"]:
        X = FanoData(entry["index"], entry["degree"], entry.get("genus"), name=entry["name"])
        out[X.name] = X
    return out


def registry_hash(path: str | os.PathLike | None = None) -> str:
    import hashlib

    with open(path or default_registry_path(), "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


_REGISTRY: dict[str, FanoData] | None = None


def threefold(name: str) -> FanoData:
    """Look up a threefold in the bundled registry."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = load_registry(str(resources.files("fano_instantons") / "data" / "threefolds.json"))
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown threefold {name!r}") from None


def prime_fano(g: int) -> FanoData:
    return FanoData(1, 2 * g - 2, g, name=f"X{g}")
