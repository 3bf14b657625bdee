"""Command-line front end: single queries and the full verification sweep."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import warnings
from dataclasses import dataclass
from importlib import metadata, resources
from typing import Callable, Iterable

from . import instanton_invariants as inv
from . import k3_restriction as k3
from . import kuznetsov_grr as kz
from . import monad_lab as lab
from . import monad_shapes as ms
from .chow_core import (
    REGISTRY_ENV,
    FanoData,
    chern_from_ch,
    euler_char,
    euler_pair,
    load_registry,
    prime_fano,
    registry_hash,
)

SCHEMA = 1
EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
LAB_CASES = ((2, 1), (2, 2), (3, 2), (4, 2))


class UsageError(Exception):
    pass


def engine_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


# grid and registry helpers


@dataclass(frozen=True)
class Grid:
    n_lo: int = 1
    n_hi: int = 6
    k_lo: int | None = None
    k_hi: int = 10

    def cells(self, X: FanoData) -> list[tuple[int, int]]:
        out = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", inv.LowGenusWarning)
            for n in range(self.n_lo, self.n_hi + 1):
                lo = inv.min_charge(X, n) if self.k_lo is None else max(self.k_lo, inv.min_charge(X, n))
                out += [(n, k) for k in range(lo, self.k_hi + 1)]
        return out

    def __str__(self) -> str:
        k_lo = "" if self.k_lo is None else str(self.k_lo)
        return f"n={self.n_lo}..{self.n_hi},k={k_lo}..{self.k_hi}"


_RANGE = re.compile(r"^(n|k)=(-?\d*)\.\.(-?\d+)$")


def parse_grid(text: str | None) -> Grid:
    if not text:
        return Grid()
    values: dict[str, tuple[int | None, int]] = {}
    for part in text.split(","):
        m = _RANGE.match(part.strip())
        if not m:
            raise UsageError(f"bad grid component {part!r}; expected n=a..b or k=a..b")
        values[m.group(1)] = (int(m.group(2)) if m.group(2) else None, int(m.group(3)))
    n_lo, n_hi = values.get("n", (1, 6))
    k_lo, k_hi = values.get("k", (None, 10))
    if (n_lo or 1) < 1 or n_hi < (n_lo or 1):
        raise UsageError("n range must be non-empty and positive")
    return Grid(n_lo or 1, n_hi, k_lo, k_hi)


def parse_range(text: str) -> range:
    m = re.match(r"^(-?\d+)\.\.(-?\d+)$", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    return range(int(m.group(1)), int(m.group(2)) + 1)


def registry(args) -> dict[str, FanoData]:
    path = args.registry or os.environ.get(REGISTRY_ENV)
    try:
        return load_registry(path)
    except OSError as exc:
        raise UsageError(f"cannot read registry: {exc}") from None


def lookup(args) -> FanoData:
    reg = registry(args)
    if args.x not in reg:
        raise UsageError(f"unknown threefold {args.x!r}; known: {', '.join(sorted(reg))}")
    return reg[args.x]


def check_nk(n: int, k: int) -> None:
    if n < 1:
        raise UsageError("n must be positive")
    if k < 0:
        raise UsageError("k must be non-negative")


# verification report


@dataclass(frozen=True)
class Waiver:
    claim_prefix: str
    context_prefix: str
    reason: str

    def covers(self, rec: dict) -> bool:
        return rec["claim"].startswith(self.claim_prefix) and rec["context"].startswith(self.context_prefix)


def load_waivers(path: str | None = None) -> list[Waiver]:
    if path is None:
        text = (resources.files("fano_instantons") / "data" / "waivers.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return [Waiver(w["claim_prefix"], w.get("context_prefix", ""), w["reason"]) for w in json.loads(text)["waivers"]]


def _sweep(Xs: Iterable[FanoData], grid: Grid, check: Callable[[FanoData, int, int], list]) -> list:
    out = []
    for X in Xs:
        for n, k in grid.cells(X):
            out += check(X, n, k)
    return out


def _chi_records(X: FanoData, n: int, k: int) -> list[inv.DeviationRecord]:
    g = inv.gamma(X, n, k).character
    ctx = f"{X.label} n={n} k={k}"
    recs = []
    if X.index % 2 == 0:
        recs.append(inv.DeviationRecord("chi of an instanton of even index", n - X.q * k, euler_char(g, X), "", ctx, "printed"))
    elif X.index == 3:
        S = inv.minimal_character(X)
        recs.append(inv.DeviationRecord("chi of an instanton on the quadric", -k, euler_char(g, X), "", ctx, "printed"))
        recs.append(inv.DeviationRecord("spinor pairing on the quadric", n - 3 * k, euler_pair(S, g, X), "chi(S,E)", ctx, "printed"))
    else:
        delta = X.genus % 2
        F0 = inv.minimal_character(X)
        recs.append(inv.DeviationRecord("chi of an instanton of index one", 0, euler_char(g, X), "", ctx, "printed"))
        recs.append(inv.DeviationRecord("pairing with the minimal instanton", (1 - delta) * n - k, euler_pair(g, F0, X), "chi(E,F0)", ctx, "printed"))
    return recs


def _dims(X: FanoData, n: int, k: int) -> list[inv.DeviationRecord]:
    recs = [inv.moduli_dimension(X, n, k)[1]]
    if X.index > 1:
        recs.append(inv.coker_character(X, n, k)[2])
    return recs


def _monad_tables(grid: Grid) -> list[inv.DeviationRecord]:
    recs = []
    for name in ms.MONAD_THREEFOLDS:
        recs += ms.collection_report(name)
        X = ms.collection(name).X
        for n, k in grid.cells(X):
            if k < ms.gieseker_min_k(name):
                continue
            recs.append(ms.verify_homology_character(ms.monad_shape(X, n, k)))
            recs += ms.cohomology_table(X, n, k)[1]
    return recs + ms.w_row_audit()


def _kuznetsov(grid: Grid) -> list[inv.DeviationRecord]:
    recs = []
    for name in kz.KUZNETSOV_THREEFOLDS:
        X = kz.calibrated(name).X
        cells = [(n, k) for n, k in grid.cells(X) if k >= 1]
        recs += kz.deg_rank_records(name, cells)
        recs += [kz.resolution_character_check(name, n, k) for n, k in cells]
        recs += kz.universal_fiber_checks(name)
    return recs


def _monad_lab(seed: int, samples: int = 3, lines: int = 20) -> list[inv.DeviationRecord]:
    recs = []
    for n, k in LAB_CASES:
        for s in range(seed, seed + samples):
            ctx = f"P3 n={n} k={k} seed={s}"
            try:
                M = lab.sample_monad(n, k, s)
            except lab.SamplingExhausted as exc:
                recs.append(inv.DeviationRecord("monad sampling", "valid", "exhausted", str(exc), ctx, "skipped"))
                continue
            ok, _ = lab.instanton_vanishing_check(M)
            recs.append(inv.DeviationRecord("instanton vanishing of a sampled monad", True, ok, "", ctx))
            chi = lab.chi_consistent(M)
            recs.append(inv.DeviationRecord("euler characteristic of a sampled monad", True, all(chi.values()), "t in -5..5", ctx))
            trivial = sum(lab.is_trivial_on_line(M, line) for line in lab.random_lines(M, lines, s))
            recs.append(
                inv.DeviationRecord("generic splitting of a sampled monad", True, trivial >= 0.9 * lines, f"{trivial}/{lines} trivial", ctx)
            )
    return recs


def build_report(grid: Grid, seed: int = 0, waivers: list[Waiver] | None = None, registry_path: str | None = None) -> dict:
    reg = load_registry(registry_path)
    Xs = list(reg.values())
    index1 = [prime_fano(g) for g in range(4, 13)]
    groups: dict[str, list] = {
        "character displays": _sweep(Xs, grid, inv.character_display_audit),
        "euler characteristic identities": _sweep(
            [X for X in Xs if X.index > 1] + index1, grid, _chi_records
        ),
        "minimal charge thresholds": _sweep(Xs, grid, inv.admissibility_report),
        "moduli dimensions": _sweep(Xs, grid, _dims),
        "half-dimension identity on the K3 section": _sweep(Xs, grid, lambda X, n, k: [k3.lagrangian_check(X, n, k)[1]]),
        "monad shapes and cohomology tables": _monad_tables(grid),
        "rank and degree on the curve": _kuznetsov(grid),
        "sampled monads on P3": _monad_lab(seed),
    }
    waivers = waivers or []
    summary = {"match": 0, "mismatch": 0, "waived": 0, "skipped": 0}
    out_groups = {}
    unwaived = []
    for citation, recs in groups.items():
        rows = []
        for rec in recs:
            row = rec.to_json()
            row["citation"] = citation
            row["waived"] = False
            if rec.provenance == "skipped":
                summary["skipped"] += 1
            elif rec.ok:
                summary["match"] += 1
            else:
                summary["mismatch"] += 1
                waiver = next((w for w in waivers if w.covers(row)), None)
                if waiver:
                    row["waived"] = True
                    row["waiver"] = waiver.reason
                    summary["waived"] += 1
                else:
                    unwaived.append(row)
            rows.append(row)
        out_groups[citation] = rows
    claims: dict[str, int] = {}
    for row in unwaived:
        claims[row["claim"]] = claims.get(row["claim"], 0) + 1
    return {
        "schema": SCHEMA,
        "engine_version": engine_version(),
        "registry_hash": registry_hash(registry_path),
        "grid": str(grid),
        "seed": seed,
        "waivers": len(waivers),
        "summary": summary,
        "groups": out_groups,
        "unwaived_claims": dict(sorted(claims.items())),
        "unwaived_families": sorted({deviation_family(c) for c in claims}),
    }


def deviation_family(claim: str) -> str:
    """Component records ("claim: ch3") belong to the family of their parent claim."""
    return claim.split(":")[0]


def dump_json(data, path: str) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# subcommands


def cmd_chern(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    g = inv.gamma(X, args.n, args.k).character
    c1, c2, c3 = chern_from_ch(g, X)
    print(f"ch(gamma({args.n},{args.k})) on {X.label} = {g}")
    print(f"chern classes c1={c1} c2={c2} c3={c3}")
    recs = inv.character_display_audit(X, args.n, args.k)
    for rec in recs:
        if not rec.ok:
            print(f"deviation: {rec.claim}: printed {rec.paper_value}, engine {rec.engine_value}")
    result = {"character": g.to_json(), "chern": [str(c1), str(c2), str(c3)], "records": [r.to_json() for r in recs]}
    return _finish(args, result)


def cmd_chi(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    g = inv.gamma(X, args.n, args.k).character
    F0 = inv.minimal_character(X)
    result = {
        "chi": str(euler_char(g, X)),
        "chi_E_F0": str(euler_pair(g, F0, X)),
        "chi_F0_E": str(euler_pair(F0, g, X)),
        "chi_E_E": str(euler_pair(g, g, X)),
    }
    for key, value in result.items():
        print(f"{key} = {value}")
    return _finish(args, result)


def cmd_min_charge(args) -> int:
    X = lookup(args)
    check_nk(args.n, 0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", inv.LowGenusWarning)
        kmin = inv.min_charge(X, args.n)
    print(f"minimal charge on {X.label} for n={args.n}: {kmin}")
    for w in caught:
        print(f"warning: {w.message}")
    recs = inv.admissibility_report(X, args.n, kmin)
    for rec in recs:
        print(f"{rec.claim}: printed {rec.paper_value}, chi threshold {rec.engine_value} ({rec.verdict})")
    return _finish(args, {"min_charge": kmin, "records": [r.to_json() for r in recs]})


def cmd_dims(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    dim, rec = inv.moduli_dimension(X, args.n, args.k)
    print(f"dimension 1 - chi(E,E) = {dim} (closed form {rec.paper_value}, {rec.verdict})")
    result = {"dimension": dim, "records": [rec.to_json()]}
    if X.index > 1:
        C, cdim, crec = inv.coker_character(X, args.n, args.k)
        print(f"cokernel ch = {C}, dimension {cdim} (closed form {crec.paper_value}, {crec.verdict})")
        result["cokernel_dimension"] = cdim
        result["records"].append(crec.to_json())
    return _finish(args, result)


def cmd_monad_shape(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    try:
        shape = ms.monad_shape(X, args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(shape)
    table, recs = ms.cohomology_table(X, args.n, args.k)
    print("h^1 row against the dual collection:", " ".join(str(x) for x in table[1]))
    rec = ms.verify_homology_character(shape)
    print(f"homology character {rec.engine_value} ({rec.verdict})")
    return _finish(args, {"shape": str(shape), "w": shape.w, "h1_row": [str(x) for x in table[1]], "records": [r.to_json() for r in recs + [rec]]})


def cmd_kuznetsov(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    if X.name not in kz.KUZNETSOV_THREEFOLDS:
        raise UsageError(f"no curvilinear Kuznetsov component data for {X.label}")
    if args.k < 1:
        raise UsageError("k must be at least 1")
    data = kz.calibrated(X.name)
    rank, degree = kz.grr_image(data, args.n, args.k)
    res = kz.resolution_character_check(X.name, args.n, args.k)
    print(f"eta^2 sign {data.sign}; rank {rank}, degree {degree}; phi_rank {kz.phi_rank(X, args.n, args.k)}")
    print(f"resolution: {res.note} ({res.verdict})")
    return _finish(args, {"rank": str(rank), "degree": str(degree), "sign": data.sign, "records": [res.to_json()]})


def cmd_k3(args) -> int:
    X = lookup(args)
    check_nk(args.n, args.k)
    ok, rec = k3.lagrangian_check(X, args.n, args.k)
    gs = k3.restrict(inv.gamma(X, args.n, args.k).character, X)
    print(f"restriction to S: (r, aS, s) = ({gs.r}, {gs.aS}, {gs.s}); H_S^2 = {k3.K3Data.of(X).h2}")
    print(f"2(1 - chi_X(E,E)) = {rec.paper_value}, 2 - chi_S = {rec.engine_value} ({rec.verdict})")
    return _finish(args, {"ok": ok, "records": [rec.to_json()]})


def cmd_monad(args) -> int:
    check_nk(args.n, args.k)
    try:
        M = lab.sample_monad(args.n, args.k, args.seed, args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except lab.SamplingExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"monad n={M.n} k={M.k} w={M.w} field={M.field} seed={M.seed} attempts={M.attempts} hash={M.to_json()['hash'][:16]}")
    table = lab.cohomology_table(M, args.twists)
    print(" t   h0   h1   h2   h3  chi")
    for t, h in table.items():
        print(f"{t:2d} {h[0]:4d} {h[1]:4d} {h[2]:4d} {h[3]:4d} {lab.expected_euler(M, t)!s:>4}")
    ok, _ = lab.instanton_vanishing_check(M)
    print(f"instanton vanishing: {ok}")
    stats = lab.splitting_statistics(M, args.lines, args.seed) if args.lines else {}
    for key, count in stats.items():
        print(f"splitting ({key}): {count}/{args.lines}")
    result = {
        "instance": M.to_json(),
        "table": {str(t): list(h) for t, h in table.items()},
        "vanishing": ok,
        "splitting": stats,
    }
    return _finish(args, result)


def cmd_verify_all(args) -> int:
    grid = parse_grid(args.grid)
    waivers = [] if args.strict else load_waivers(args.waivers)
    path = args.registry or os.environ.get(REGISTRY_ENV)
    report = build_report(grid, args.seed, waivers, path)
    s = report["summary"]
    print(f"grid {report['grid']}; match {s['match']}, mismatch {s['mismatch']}, waived {s['waived']}, skipped {s['skipped']}")
    for claim, count in report["unwaived_claims"].items():
        print(f"MISMATCH {claim}: {count}")
    if report["unwaived_families"]:
        print(f"unwaived deviation families: {len(report['unwaived_families'])}")
    if args.json:
        dump_json(report, args.json)
    return EXIT_OK if not report["unwaived_claims"] else EXIT_MISMATCH


def _finish(args, result: dict) -> int:
    if args.json:
        dump_json({"schema": SCHEMA, "command": args.command, "result": result}, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", default=argparse.SUPPRESS, help="threefold registry JSON")
    common.add_argument("--json", default=argparse.SUPPRESS, help="write a JSON result to this file ('-' for stdout)")
    common.add_argument("--grid", default=argparse.SUPPRESS, help="sweep grid, e.g. n=1..6,k=..10")
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS, help="ignore the waiver allowlist")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="fano-instantons", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def single(name: str, func, help_text: str, need_k: bool = True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--x", required=True, help="threefold name")
        p.add_argument("-n", type=int, required=True)
        if need_k:
            p.add_argument("-k", type=int, required=True)
        p.set_defaults(func=func)
        return p

    single("chern", cmd_chern, "character and Chern classes of gamma(n,k)")
    single("chi", cmd_chi, "Euler characteristics of gamma(n,k)")
    single("min-charge", cmd_min_charge, "minimal charge and its thresholds", need_k=False)
    single("dims", cmd_dims, "moduli dimensions")
    single("monad-shape", cmd_monad_shape, "monad shape and cohomology row")
    single("kuznetsov", cmd_kuznetsov, "rank and degree on the curve")
    single("k3", cmd_k3, "restriction to the K3 section")

    p = sub.add_parser("monad", parents=[common], help="sample an instanton monad on P3")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--twists", type=parse_range, default=range(-3, 2))
    p.add_argument("--lines", type=int, default=0)
    p.add_argument("--field", default="QQ", help="QQ or GF(p)")
    p.set_defaults(func=cmd_monad)

    p = sub.add_parser("verify-all", parents=[common], help="run every check over the grid")
    p.add_argument("--waivers", default=None, help="waiver allowlist JSON")
    p.set_defaults(func=cmd_verify_all)
    return parser


def _join_negative_ranges(argv: list[str]) -> list[str]:
    # "--twists -3..1" would otherwise be read as an option
    out: list[str] = []
    for item in argv:
        if out and out[-1] in ("--twists", "--grid") and re.match(r"^-\d", item):
            out[-1] = f"{out[-1]}={item}"
        else:
            out.append(item)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_ranges(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for key, default in (("registry", None), ("json", None), ("grid", None), ("strict", False), ("seed", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
