"""Exceptional collections, monad shapes and Beilinson cohomology tables.

Collections are read from ``data/collections.json``.  Bundles are given
by Chern data, by linear combinations of twists and duals of other
bundles, or by reference to the minimal instanton.  Unknown ``ch2``/``ch3``
entries are solved from the collection's own constraints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

import flint

from .chow_core import ChowClass, FanoData, ch_from_chern, chern_from_ch, dual_ch, euler_char, euler_pair, mul, threefold, twist
from .instanton_invariants import DeviationRecord, gamma, minimal_character, printed_gamma_index1

MONAD_THREEFOLDS = ("P3", "Q", "Y5", "X12")


class UnderdeterminedSystem(ValueError):
    pass


class InconsistentSystem(ValueError):
    def __init__(self, message: str, constraints: Sequence[str], partial: dict | None = None):
        super().__init__(message)
        self.constraints = list(constraints)
        self.partial = partial or {}


@dataclass(frozen=True)
class Slot:
    bundle: str
    twist: int = 0
    dual: bool = False

    @classmethod
    def parse(cls, raw: Sequence) -> "Slot":
        return cls(raw[0], int(raw[1]), len(raw) > 2 and raw[2] == "dual")

    def label(self) -> str:
        s = self.bundle + ("*" if self.dual else "")
        return s + (f"({self.twist})" if self.twist else "")


@dataclass(frozen=True)
class ExceptionalCollection:
    X: FanoData
    name: str
    F: tuple[ChowClass, ChowClass, ChowClass]
    G: tuple[ChowClass, ChowClass, ChowClass]
    F_slots: tuple[Slot, Slot, Slot]
    G_slots: tuple[Slot, Slot, Slot]
    bundles: dict
    G_signs: tuple[int, int, int] = (1, 1, 1)

    def pairing_matrix(self) -> list[list[Fraction]]:
        return [[euler_char(mul(f, g, self.X), self.X) for g in self.G] for f in self.F]


@dataclass(frozen=True)
class MonadShape:
    X: FanoData
    n: int
    k: int
    left: tuple[str, ChowClass, int]
    middle: tuple[str, ChowClass, int]
    right: tuple[str, ChowClass, int]

    @property
    def w(self) -> int:
        return self.middle[2]

    def homology_character(self) -> ChowClass:
        return self.middle[2] * self.middle[1] - self.left[2] * self.left[1] - self.right[2] * self.right[1]

    def __str__(self) -> str:
        return " -> ".join(f"{name}^{m}" for name, _, m in (self.left, self.middle, self.right))


@lru_cache(maxsize=1)
def collection_data() -> dict:
    path = resources.files("fano_instantons") / "data" / "collections.json"
    return json.loads(path.read_text(encoding="utf-8"))["collections"]


def _unknowns(name: str) -> list[tuple[str, str]]:
    out = []
    for bname, entry in collection_data()[name]["bundles"].items():
        for comp in ("ch2", "ch3"):
            if entry.get(comp) == "solve":
                out.append((bname, comp))
    return out


def _resolve(name: str, X: FanoData, values: dict, minimal: str) -> dict[str, ChowClass]:
    entries = collection_data()[name]["bundles"]
    done: dict[str, ChowClass] = {}

    def get(b: str) -> ChowClass:
        if b in done:
            return done[b]
        entry = entries[b]
        if "expr" in entry:
            total = ChowClass(0)
            for term in entry["expr"]:
                coef, ref, t = term[0], term[1], term[2]
                base = get(ref)
                if len(term) > 3 and term[3] == "dual":
                    base = dual_ch(base)
                total = total + Fraction(coef) * twist(base, t, X)
            val = total
        elif "ref" in entry:
            val = minimal_character(X) if minimal == "engine" else printed_gamma_index1(X, 1, 0)
        elif entry.get("ch2") == "solve" or entry.get("ch3") == "solve":
            c1 = Fraction(entry["c1"])
            val = ChowClass(entry["rank"], c1, values[(b, "ch2")], values[(b, "ch3")])
        else:
            val = ch_from_chern(entry["rank"], entry["c1"], entry["c2"], entry["c3"], X)
        done[b] = val
        return val

    for b in entries:
        get(b)
    return done


def _slot_class(slot: Slot, bundles: dict, X: FanoData) -> ChowClass:
    base = bundles[slot.bundle]
    return twist(dual_ch(base) if slot.dual else base, slot.twist, X)


def _assemble(name: str, values: dict, minimal: str = "engine", G_slots=None) -> ExceptionalCollection:
    X = threefold(name)
    raw = collection_data()[name]
    bundles = _resolve(name, X, values, minimal)
    F_slots = tuple(Slot.parse(s) for s in raw["F"])
    G_slots = G_slots or tuple(Slot.parse(s) for s in raw["G"])
    F = tuple(_slot_class(s, bundles, X) for s in F_slots)
    G = tuple(_slot_class(s, bundles, X) for s in G_slots)
    return ExceptionalCollection(X, name, F, G, F_slots, G_slots, bundles)


# constraints


def w_table(X: FanoData, n: int, k: int) -> int:
    """Middle multiplicity of the monad; r is the rank of E."""
    i = X.index
    if i == 4:
        return 2 * k + n
    if i == 3:
        return k + n
    if i == 2:
        return 4 * k + n
    return 3 * k + n


HOMOLOGY_PAIRS = {"Y5": ((1, 2), (2, 3)), "X12": ((1, 1), (2, 3))}


def _gamma_for(minimal: str) -> Callable[[FanoData, int, int], ChowClass]:
    if minimal == "engine":
        return lambda X, n, k: gamma(X, n, k).character
    return printed_gamma_index1


def _constraints(name: str, minimal: str = "engine") -> list[tuple[str, Callable[[ExceptionalCollection], Fraction]]]:
    out: list[tuple[str, Callable]] = []
    for i in range(3):
        out.append((f"exceptional F{i - 1}", lambda c, i=i: euler_pair(c.F[i], c.F[i], c.X) - 1))
    for i in range(3):
        for j in range(i + 1, 3):
            out.append((f"chi(F{j - 1},F{i - 1}) = 0", lambda c, i=i, j=j: euler_pair(c.F[j], c.F[i], c.X)))
    for i in range(3):
        for comp in range(4):
            out.append(
                (
                    f"duality F{i - 1} ch{comp}",
                    lambda c, i=i, comp=comp: (dual_ch(c.F[i]) - twist(c.F[2 - i], c.X.r_twist, c.X)).as_tuple()[comp],
                )
            )
    gam = _gamma_for(minimal)
    for n, k in HOMOLOGY_PAIRS.get(name, ()):
        for comp in range(4):
            out.append(
                (
                    f"homology (n,k)=({n},{k}) ch{comp}",
                    lambda c, n=n, k=k, comp=comp: (_homology(c, n, k) - gam(c.X, n, k)).as_tuple()[comp],
                )
            )
    return out


def _homology(c: ExceptionalCollection, n: int, k: int) -> ChowClass:
    return w_table(c.X, n, k) * c.F[1] - k * c.F[0] - k * c.F[2]


def _affine_system(name: str, unknowns, constraints, minimal: str):
    zero = {u: Fraction(0) for u in unknowns}
    base = _assemble(name, zero, minimal)
    b = [-f(base) for _, f in constraints]
    cols = []
    for u in unknowns:
        e = dict(zero)
        e[u] = Fraction(1)
        c = _assemble(name, e, minimal)
        cols.append([f(c) + bi for (_, f), bi in zip(constraints, b)])
    A = [[cols[j][i] for j in range(len(unknowns))] for i in range(len(constraints))]
    return A, b


def _solve(A, b) -> tuple[int, int, list[Fraction] | None]:
    m, n = len(A), len(A[0])
    q = lambda x: flint.fmpq(x.numerator, x.denominator)
    M = flint.fmpq_mat(m, n, [q(x) for row in A for x in row])
    aug = flint.fmpq_mat(m, n + 1, [q(x) for row, bi in zip(A, b) for x in (*row, bi)])
    rA, rAug = M.rank(), aug.rank()
    if rA < rAug or rA < n:
        return rA, rAug, None
    R, _ = aug.rref()
    sol = [Fraction(int(R[i, n].p), int(R[i, n].q)) for i in range(n)]
    return rA, rAug, sol


def solve_unknown_characters(name: str, minimal: str = "engine") -> tuple[ExceptionalCollection, list[DeviationRecord]]:
    """Solve the unknown ch2/ch3 of a collection from its invariants."""
    unknowns = _unknowns(name)
    if not unknowns:
        return _assemble(name, {}, minimal), []
    constraints = _constraints(name, minimal)
    A, b = _affine_system(name, unknowns, constraints, minimal)
    rA, rAug, sol = _solve(A, b)
    X = threefold(name)
    if sol is None and rA == rAug:
        raise UnderdeterminedSystem(f"{name}: rank {rA} < {len(unknowns)} unknowns")
    if sol is None:
        # ch2 rows of the homology identity only involve the ch2 unknowns
        rows = [i for i, (label, _) in enumerate(constraints) if label.startswith("homology") and label.endswith("ch2")]
        cols = [j for j, (_, comp) in enumerate(unknowns) if comp == "ch2"]
        partial: dict = {}
        violated = [label for label, _ in constraints]
        if rows and cols:
            _, _, hsol = _solve([[A[i][j] for j in cols] for i in rows], [b[i] for i in rows])
            if hsol is not None:
                vals = {u: Fraction(0) for u in unknowns}
                vals.update({unknowns[j]: v for j, v in zip(cols, hsol)})
                coll = _assemble(name, vals, minimal)
                ch2 = {unknowns[j][0]: v for j, v in zip(cols, hsol)}
                c2 = {bn: chern_from_ch(coll.bundles[bn], X)[1] for bn in ch2}
                partial = {"ch2": ch2, "c2": c2}
                violated = [label for label, f in constraints if not label.endswith("ch3") and f(coll) != 0]
        raise InconsistentSystem(f"{name}: no character satisfies all constraints", violated, partial)
    vals = dict(zip(unknowns, sol))
    coll = _assemble(name, vals, minimal)
    recs = []
    for bn, comp in unknowns:
        c1, c2, c3 = chern_from_ch(coll.bundles[bn], X)
        integral = all(x.denominator == 1 for x in (c1, c2, c3))
        recs.append(
            DeviationRecord(
                f"solved character of {bn} on {name}",
                True,
                integral,
                f"{comp}={vals[(bn, comp)]}; chern classes ({c1}, {c2}, {c3}) integral",
                name,
            )
        )
    return coll, recs


# validation, repair and calibration


def validate_collection(coll: ExceptionalCollection) -> list[DeviationRecord]:
    X, nm = coll.X, coll.name
    recs = []
    for i in range(3):
        recs.append(DeviationRecord(f"exceptional collection on {nm}", 1, euler_pair(coll.F[i], coll.F[i], X), "chi(F,F)", f"F{i - 1}"))
        for j in range(i + 1, 3):
            recs.append(DeviationRecord(f"exceptional collection on {nm}", 0, euler_pair(coll.F[j], coll.F[i], X), "semiorthogonality", f"chi(F{j - 1},F{i - 1})"))
        recs.append(
            DeviationRecord(f"duality relation on {nm}", dual_ch(coll.F[i]), twist(coll.F[2 - i], X.r_twist, X), "F_i^* = F_-i(r)", f"F{i - 1}")
        )
    P = coll.pairing_matrix()
    for i in range(3):
        for j in range(3):
            printed = 1 if i == j else 0
            recs.append(DeviationRecord(f"dual collection on {nm}", printed, abs(P[i][j]), "|chi(F_i x G_j)|", f"F{i - 1} x {coll.G_slots[j].label()}"))
    return recs


def _column_ok(coll: ExceptionalCollection, j: int) -> bool:
    col = [row[j] for row in coll.pairing_matrix()]
    return all((abs(x) == 1) if i == j else x == 0 for i, x in enumerate(col))


def repair_dual_twists(coll: ExceptionalCollection, search: range = range(-6, 7)) -> tuple[ExceptionalCollection, list[DeviationRecord]]:
    """Re-solve the twist of any G_j whose pairing column is not a unit vector."""
    recs = []
    for j in range(3):
        if _column_ok(coll, j):
            continue
        slot = coll.G_slots[j]
        hits = []
        for m in search:
            trial_slots = tuple(replace(s, twist=m) if idx == j else s for idx, s in enumerate(coll.G_slots))
            G = tuple(_slot_class(s, coll.bundles, coll.X) for s in trial_slots)
            trial = replace(coll, G=G, G_slots=trial_slots)
            if _column_ok(trial, j):
                hits.append(trial)
        if len(hits) != 1:
            recs.append(DeviationRecord(f"dual collection twist on {coll.name}", slot.twist, None, "no unique twist repairs the pairing", f"G{j - 1}"))
            continue
        fixed = hits[0]
        recs.append(
            DeviationRecord(
                f"dual collection twist on {coll.name}",
                slot.twist,
                fixed.G_slots[j].twist,
                f"printed {slot.label()} pairs to {[row[j] for row in coll.pairing_matrix()]} against F",
                f"G{j - 1}",
                "printed",
            )
        )
        coll = fixed
    return coll, recs


@lru_cache(maxsize=1)
def calibration_pattern() -> tuple[int, int, int]:
    """Diagonal of the pairing matrix on P3, where every object is classical."""
    P = _assemble("P3", {}).pairing_matrix()
    return tuple(int(P[i][i]) for i in range(3))


def normalize_signs(coll: ExceptionalCollection) -> tuple[ExceptionalCollection, list[DeviationRecord]]:
    """Shift G_j by one step where needed to match the P3 sign pattern."""
    P = coll.pairing_matrix()
    pattern = calibration_pattern()
    signs = tuple(int(pattern[j] / P[j][j]) if P[j][j] else 1 for j in range(3))
    G = tuple(s * g for s, g in zip(signs, coll.G))
    recs = [
        DeviationRecord(
            f"dual collection normalization on {coll.name}",
            pattern[j],
            signs[j] * P[j][j],
            "shifted by [1]" if signs[j] < 0 else "unchanged",
            f"G{j - 1}",
        )
        for j in range(3)
    ]
    return replace(coll, G=G, G_signs=signs), recs


@lru_cache(maxsize=None)
def collection(name: str) -> ExceptionalCollection:
    """Engine collection: unknowns solved, twists repaired, signs calibrated."""
    coll, _ = solve_unknown_characters(name)
    coll, _ = repair_dual_twists(coll)
    coll, _ = normalize_signs(coll)
    return coll


def collection_report(name: str) -> list[DeviationRecord]:
    coll, recs = solve_unknown_characters(name)
    recs = list(recs)
    recs += validate_collection(coll) if name == "P3" else [r for r in validate_collection(coll) if "dual collection" not in r.claim]
    coll, rep = repair_dual_twists(coll)
    recs += rep
    recs += [r for r in validate_collection(coll) if "dual collection" in r.claim]
    _, norm = normalize_signs(coll)
    return recs + norm


# monad shapes


def _monad_name(X: FanoData) -> str:
    for name in MONAD_THREEFOLDS:
        if threefold(name) == X:
            return name
    raise ValueError(f"no monad description for {X.label}")


def gieseker_min_k(name: str) -> int:
    return {"Y5": 2, "X12": 1}.get(name, 0)


def monad_shape(X: FanoData, n: int, k: int) -> MonadShape:
    name = _monad_name(X)
    if k < gieseker_min_k(name):
        raise ValueError(f"k={k} below the monad range on {name}")
    coll = collection(name)
    labels = [s.label() for s in coll.F_slots]
    w = w_table(X, n, k)
    return MonadShape(X, n, k, (labels[0], coll.F[0], k), (labels[1], coll.F[1], w), (labels[2], coll.F[2], k))


def verify_homology_character(shape: MonadShape, X: FanoData | None = None) -> DeviationRecord:
    X = X or shape.X
    return DeviationRecord(
        f"monad homology character on {_monad_name(X)}",
        gamma(X, shape.n, shape.k).character,
        shape.homology_character(),
        f"w={shape.w}",
        f"n={shape.n} k={shape.k}",
    )


def w_row_audit() -> list[DeviationRecord]:
    """The index one row of the w table against both minimal classes."""
    recs = []
    for minimal, claim in (("printed", "w table index one row with the printed minimal class"), ("engine", "w table index one row with the derived minimal class")):
        try:
            coll, _ = solve_unknown_characters("X12", minimal)
        except InconsistentSystem as exc:
            part = exc.partial
            ch2 = {b: str(v) for b, v in part.get("ch2", {}).items()}
            c2 = {b: str(v) for b, v in part.get("c2", {}).items()}
            note = f"homology identity forces ch2={ch2}, c2={c2}; violates {exc.constraints}"
            recs.append(DeviationRecord(claim, "consistent", "InconsistentSystem", note, "X12", "printed"))
        else:
            U = coll.bundles["U"]
            note = f"ch(U)={U}, chern classes {tuple(str(x) for x in chern_from_ch(U, coll.X))}"
            recs.append(DeviationRecord(claim, "consistent", "consistent", note, "X12"))
    return recs


def cohomology_table(X: FanoData, n: int, k: int) -> tuple[list[list[Fraction]], list[DeviationRecord]]:
    """Rows h^0..h^3 of gamma(n,k) against the calibrated dual collection."""
    name = _monad_name(X)
    coll = collection(name)
    g = gamma(X, n, k).character
    row = [-euler_char(mul(g, G, X), X) for G in coll.G]
    table = [[Fraction(0)] * 3, row, [Fraction(0)] * 3, [Fraction(0)] * 3]
    expected = [k, w_table(X, n, k), k]
    recs = [
        DeviationRecord(f"cohomology table on {name}", e, v, "-chi(E x G_j)", f"n={n} k={k} column {j - 1}")
        for j, (e, v) in enumerate(zip(expected, row))
    ]
    return table, recs
