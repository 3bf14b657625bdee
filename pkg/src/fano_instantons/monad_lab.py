"""Explicit instanton monads on P^3 and their cohomology by exact linear algebra.

A monad ``O(-1)^k --A--> O^w --B--> O(1)^k`` with ``w = 2k + n`` is stored as
two integer arrays of linear-form coefficients: ``A[i, j, v]`` is the
coefficient of ``x_v`` in entry ``(i, j)``.  Arithmetic runs over the integers
(exact, rational ranks) or a prime field via python-flint.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, gcd

import flint
import numpy as np

from .chow_core import euler_char, threefold, twist
from .instanton_invariants import gamma

DEFAULT_PRIME = 2**31 - 1
MAX_ATTEMPTS = 20
SCHEMA = 1


class SamplingExhausted(RuntimeError):
    pass


class InvalidMonad(ValueError):
    pass


class DegenerateLine(ValueError):
    pass


@dataclass(frozen=True)
class Field:
    """Exact rationals (``p is None``) or the prime field of order ``p``."""

    p: int | None = None

    @classmethod
    def parse(cls, entry) -> "Field":
        if isinstance(entry, Field):
            return entry
        if entry in (None, "QQ"):
            return cls()
        if isinstance(entry, tuple) and entry[0] == "GF":
            return cls(int(entry[1]))
        if isinstance(entry, str) and entry.startswith("GF"):
            body = entry[2:].strip("()")
            return cls(int(body) if body else DEFAULT_PRIME)
        raise ValueError(f"unknown field {entry!r}")

    def __str__(self) -> str:
        return "QQ" if self.p is None else f"GF({self.p})"

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        return arr if self.p is None else arr % self.p

    def random(self, rng: np.random.Generator, shape, bound: int = 9) -> np.ndarray:
        if self.p is None:
            vals = rng.integers(-bound, bound + 1, size=shape)
        else:
            vals = rng.integers(0, self.p, size=shape)
        return vals.astype(object)

    def _mat(self, M: np.ndarray):
        r, c = M.shape
        flat = [int(x) for x in M.reshape(-1)]
        return flint.fmpz_mat(r, c, flat) if self.p is None else flint.nmod_mat(r, c, flat, self.p)

    def rank(self, M: np.ndarray) -> int:
        if M.size == 0:
            return 0
        return self._mat(M).rank()

    def nullspace(self, M: np.ndarray) -> np.ndarray:
        """Basis of the right kernel, one vector per column."""
        r, c = M.shape
        if r == 0:
            return np.eye(c, dtype=object)
        basis, nullity = self._mat(M).nullspace()
        out = np.array([[int(basis[i, j]) for j in range(nullity)] for i in range(c)], dtype=object)
        return out.reshape(c, nullity)


@lru_cache(maxsize=None)
def monomials(deg: int, nvars: int = 4) -> tuple[tuple[int, ...], ...]:
    if deg < 0:
        return ()
    out = []
    for combo in combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return tuple(out)


@lru_cache(maxsize=None)
def _shift_table(deg: int, nvars: int = 4) -> np.ndarray:
    """``table[m, v]`` is the index of ``monomial_m * x_v`` in degree ``deg + 1``."""
    index = {e: i for i, e in enumerate(monomials(deg + 1, nvars))}
    src = monomials(deg, nvars)
    table = np.zeros((len(src), nvars), dtype=np.int64)
    for m, e in enumerate(src):
        for v in range(nvars):
            f = list(e)
            f[v] += 1
            table[m, v] = index[tuple(f)]
    return table


def dim_s(deg: int) -> int:
    return comb(deg + 3, 3) if deg >= 0 else 0


def multiplication_matrix(M: np.ndarray, deg: int) -> np.ndarray:
    """Matrix of ``S_deg^cols -> S_{deg+1}^rows`` for a matrix of linear forms."""
    rows, cols, nv = M.shape
    src, dst = dim_s(deg), dim_s(deg + 1)
    out = np.zeros((rows * dst, cols * src), dtype=object)
    if src == 0:
        return out
    table = _shift_table(deg, nv)
    base = np.arange(src)
    for i in range(rows):
        for j in range(cols):
            for v in range(nv):
                coef = M[i, j, v]
                if coef:
                    out[i * dst + table[:, v], j * src + base] += coef
    return out


@dataclass(frozen=True, eq=False)
class MonadInstance:
    n: int
    k: int
    A: np.ndarray  # w x k x 4
    B: np.ndarray  # k x w x 4
    seed: int
    field: Field
    attempts: int = 1

    @property
    def w(self) -> int:
        return 2 * self.k + self.n

    def to_json(self) -> dict:
        body = {
            "schema": SCHEMA,
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "field": str(self.field),
            "attempts": self.attempts,
            "A": [[[str(x) for x in e] for e in row] for row in self.A],
            "B": [[[str(x) for x in e] for e in row] for row in self.B],
        }
        body["hash"] = content_hash(body)
        return body

    @classmethod
    def from_json(cls, data: dict) -> "MonadInstance":
        def arr(x):
            return np.array([[[int(c) for c in e] for e in row] for row in x], dtype=object)

        return cls(data["n"], data["k"], arr(data["A"]), arr(data["B"]), data["seed"], Field.parse(data["field"]), data["attempts"])

    def __eq__(self, other) -> bool:
        return isinstance(other, MonadInstance) and self.to_json() == other.to_json()

    def __hash__(self) -> int:
        return hash(self.to_json()["hash"])


def content_hash(body: dict) -> str:
    payload = {key: value for key, value in body.items() if key != "hash"}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _primitive(vec: np.ndarray) -> np.ndarray:
    g = 0
    for x in vec:
        g = gcd(g, int(x))
    return vec // g if g > 1 else vec


def _candidate(n: int, k: int, F: Field, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray] | None:
    w = 2 * k + n
    B = F.random(rng, (k, w, 4))
    kernel = F.nullspace(multiplication_matrix(B, 1))
    if kernel.shape[1] < k:
        return None
    coeffs = F.random(rng, (kernel.shape[1], k), bound=3)
    cols = F.reduce(kernel.dot(coeffs))
    if F.p is None:
        cols = np.stack([_primitive(cols[:, j]) for j in range(k)], axis=1)
    # degree one sections of O^w are indexed column-block by variable order
    A = np.zeros((w, k, 4), dtype=object)
    mono = monomials(1)
    for j in range(k):
        for i in range(w):
            for m, e in enumerate(mono):
                A[i, j, e.index(1)] = cols[i * 4 + m, j]
    return A, B


def sample_monad(n: int, k: int, seed: int = 0, field="QQ", max_attempts: int = MAX_ATTEMPTS, points: int = 50) -> MonadInstance:
    if n < 1 or k < -(-n // 2):
        raise ValueError(f"(n, k) = ({n}, {k}) is outside the instanton range on P3")
    F = Field.parse(field)
    for attempt in range(1, max_attempts + 1):
        rng = np.random.default_rng([seed, n, k, attempt])
        cand = _candidate(n, k, F, rng)
        if cand is None:
            continue
        M = MonadInstance(n, k, cand[0], cand[1], seed, F, attempt)
        if validate_monad(M, points).ok:
            return M
    raise SamplingExhausted(f"no valid monad for (n, k) = ({n}, {k}) after {max_attempts} attempts")


@dataclass
class ValidationReport:
    composition: bool
    injective: bool
    surjective: bool
    points: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.composition and self.injective and self.surjective


def _evaluate(M: np.ndarray, x: np.ndarray, F: Field) -> np.ndarray:
    return F.reduce(M.dot(x))


def composition_vanishes(M: MonadInstance) -> bool:
    # coefficient of x_u x_v in (BA)_{il} is C[u, v] + C[v, u]
    C = np.einsum("ijv,jlu->ilvu", M.B, M.A)
    S = M.field.reduce(C + C.transpose(0, 1, 3, 2))
    return not np.any(S)


def validate_monad(M: MonadInstance, points: int = 50, seed: int = 0) -> ValidationReport:
    F = M.field
    rng = np.random.default_rng([seed, 7919])
    report = ValidationReport(composition_vanishes(M), True, True, points)
    if not report.composition:
        report.failures.append("B A != 0")
    for idx in range(points):
        x = F.random(rng, 4, bound=100)
        if not any(x):
            continue
        if F.rank(_evaluate(M.A, x, F)) < M.k:
            report.injective = False
            report.failures.append(f"A drops rank at point {idx}")
        if F.rank(_evaluate(M.B, x, F)) < M.k:
            report.surjective = False
            report.failures.append(f"B drops rank at point {idx}")
    return report


def _require_valid(M: MonadInstance) -> None:
    if not composition_vanishes(M):
        raise InvalidMonad("B A != 0")


def _rank_mult(M: np.ndarray, deg: int, F: Field) -> int:
    return F.rank(multiplication_matrix(M, deg))


def monad_cohomology(M: MonadInstance, t: int) -> tuple[int, int, int, int]:
    """``h^i(E(t))`` for the homology ``E`` of the monad."""
    _require_valid(M)
    F, k, w = M.field, M.k, M.w
    At, Bt = M.A.transpose(1, 0, 2), M.B.transpose(1, 0, 2)
    s = -t - 4
    ker_B = w * dim_s(t) - _rank_mult(M.B, t, F)
    h0 = ker_B - _rank_mult(M.A, t - 1, F)
    h1 = k * dim_s(t + 1) - _rank_mult(M.B, t, F)
    # Serre duality with the dual monad O(-1)^k --B^T--> O^w --A^T--> O(1)^k
    rank_At = _rank_mult(At, s, F)
    h2 = k * dim_s(s + 1) - rank_At
    h3 = w * dim_s(s) - rank_At - _rank_mult(Bt, s - 1, F)
    return h0, h1, h2, h3


def cohomology_table(M: MonadInstance, twists) -> dict[int, tuple[int, int, int, int]]:
    return {t: monad_cohomology(M, t) for t in twists}


def expected_euler(M: MonadInstance, t: int):
    X = threefold("P3")
    return euler_char(twist(gamma(X, M.n, M.k).character, t, X), X)


def chi_consistent(M: MonadInstance, twists=range(-5, 6)) -> dict[int, bool]:
    out = {}
    for t, h in cohomology_table(M, twists).items():
        out[t] = h[0] - h[1] + h[2] - h[3] == expected_euler(M, t)
    return out


def instanton_vanishing_check(M: MonadInstance) -> tuple[bool, dict]:
    table = cohomology_table(M, (-3, -2, -1))
    checks = {
        "h1(E(-2))": table[-2][1],
        "h1(E(-3))": table[-3][1],
        "h2(E(-2))": table[-2][2],
        "h2(E(-1))": table[-1][2],
        "h*(E(-2))": sum(table[-2]),
    }
    return all(v == 0 for v in checks.values()), {"checks": checks, "table": table}


# restriction to a line


def _line_forms(M: np.ndarray, P: np.ndarray, Q: np.ndarray, F: Field) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of s and u after substituting x = s P + u Q."""
    return _evaluate(M, P, F), _evaluate(M, Q, F)


def _mult_line(alpha: np.ndarray, beta: np.ndarray, lo: int, hi: int, F: Field) -> np.ndarray:
    """Multiplication by ``alpha s + beta u`` on vectors of monomials with s-exponent in ``[lo, hi]``.

    Output monomials have s-exponent in ``[lo, hi + 1]``; blocks are per row or column.
    """
    rows, cols = alpha.shape
    size = hi - lo + 1
    out = np.zeros((rows * (size + 1), cols * size), dtype=object)
    for i in range(rows):
        for j in range(cols):
            for a in range(size):
                out[i * (size + 1) + a + 1, j * size + a] += alpha[i, j]
                out[i * (size + 1) + a, j * size + a] += beta[i, j]
    return F.reduce(out)


def _block_rows(blocks: int, size: int, offsets: np.ndarray) -> np.ndarray:
    return np.concatenate([b * size + offsets for b in range(blocks)])


def _h0_restricted(aA, bA, aB, bB, k: int, w: int, t: int, F: Field) -> int:
    """h^0(E|_l(t)) through the display E -> coker(A) -> O(1)^k."""
    if t >= 0:
        B_t = _mult_line(aB, bB, 0, t, F)
        return w * (t + 1) - F.rank(B_t) - k * t
    # H^0 comes from classes c in H^1(O(t-1))^k, s-exponents t..-1, killed by A
    Ac = _mult_line(aA, bA, t, -1, F)  # s-exponents t..0 in degree t
    exps = np.arange(t, 1)
    cls = np.nonzero((exps >= t + 1) & (exps <= -1))[0]
    ker = F.nullspace(Ac[_block_rows(w, len(exps), cls)]) if cls.size else np.eye(k * -t, dtype=object)
    if t <= -2 or ker.shape[1] == 0:
        return ker.shape[1]
    # t = -1: the part of A c regular away from u = 0 is b1 = coefficient of s^0 u^-1;
    # sigma(c) = B b1 lands in degree 0 as the coefficient of s^0 u^0
    b1 = F.reduce(Ac.dot(ker))[_block_rows(w, len(exps), np.array([len(exps) - 1]))]
    sigma = F.reduce(bB.dot(b1))
    return ker.shape[1] - F.rank(sigma)


def line_splitting(M: MonadInstance, line) -> tuple[int, ...]:
    """Splitting type of E on the line through two points, sorted descending."""
    _require_valid(M)
    F = M.field
    P, Q = (np.array([int(c) for c in pt], dtype=object) for pt in line)
    if F.rank(F.reduce(np.stack([P, Q]))) < 2:
        raise DegenerateLine("points do not span a line")
    aA, bA = _line_forms(M.A, P, Q, F)
    aB, bB = _line_forms(M.B, P, Q, F)
    k, w, n = M.k, M.w, M.n
    h0 = {t: _h0_restricted(aA, bA, aB, bB, k, w, t, F) for t in range(-k - 2, k + 1)}
    degrees: list[int] = []
    for t in range(-k - 1, k + 1):
        # summands with degree >= -t, minus those with degree >= -t + 1
        at_least = h0[t] - h0[t - 1]
        before = h0[t - 1] - h0[t - 2] if t - 2 in h0 else 0
        degrees += [-t] * (at_least - before)
    if len(degrees) != n or sum(degrees) != 0:
        raise DegenerateLine(f"splitting recovery failed: {degrees}")
    return tuple(sorted(degrees, reverse=True))


def is_trivial_on_line(M: MonadInstance, line) -> bool:
    F = M.field
    P, Q = (np.array([int(c) for c in pt], dtype=object) for pt in line)
    aA, bA = _line_forms(M.A, P, Q, F)
    aB, bB = _line_forms(M.B, P, Q, F)
    return _h0_restricted(aA, bA, aB, bB, M.k, M.w, -1, F) == 0


def random_lines(M: MonadInstance, count: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng([seed, 104729])
    out = []
    while len(out) < count:
        P, Q = M.field.random(rng, 4, bound=50), M.field.random(rng, 4, bound=50)
        if M.field.rank(np.stack([P, Q])) == 2:
            out.append((P, Q))
    return out


def splitting_statistics(M: MonadInstance, count: int = 100, seed: int = 0) -> dict[str, int]:
    stats: dict[str, int] = {}
    for line in random_lines(M, count, seed):
        key = ",".join(str(a) for a in line_splitting(M, line))
        stats[key] = stats.get(key, 0) + 1
    return dict(sorted(stats.items()))
