"""Command-line entry point: ``tmwall <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import coding, escape, tmtiles, wall
from .errors import SizeLimit, TmwallError
from .series import LaurentPrefix, cf_expand, thue_morse_prefix

DEFAULT_MEMORY_CAP = 2 << 30
PBM_LINE = 70
# Bench walls have prefix length N and N // 32 rows; the oracle costs about N * rows^4.
BENCH_ROW_DIVISOR = 32


# ---------------------------------------------------------------- output helpers

def pbm_bytes(grid: np.ndarray, binary: bool = False) -> bytes:
    """PBM image with nonzero cells black."""
    bits = (np.asarray(grid) != 0).astype(np.uint8)
    rows, cols = bits.shape
    if binary:
        return f"P4\n{cols} {rows}\n".encode() + np.packbits(bits, axis=1).tobytes()
    out = [f"P1\n{cols} {rows}\n"]
    for r in bits:
        line = "".join("1" if v else "0" for v in r)
        out.extend(line[i:i + PBM_LINE] + "\n" for i in range(0, max(len(line), 1), PBM_LINE))
    return "".join(out).encode()


def grid_text(grid: np.ndarray) -> str:
    return "".join("".join(str(int(v)) for v in row) + "\n" for row in grid)


def grid_csv(grid: np.ndarray, row0: int, col0: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "n", "value"])
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            w.writerow([row0 + i, col0 + j, int(v)])
    return buf.getvalue()


def emit(args, payload: str | bytes) -> None:
    data = payload.encode() if isinstance(payload, str) else payload
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def emit_grid(args, grid: np.ndarray, row0: int, col0: int) -> None:
    fmt = args.format
    if fmt == "pbm":
        emit(args, pbm_bytes(grid, args.binary))
    elif fmt == "csv":
        emit(args, grid_csv(grid, row0, col0))
    elif fmt == "json":
        emit(args, json.dumps({"row0": row0, "col0": col0, "rows": grid.astype(int).tolist()}) + "\n")
    else:
        emit(args, grid_text(grid))


def check_cap(args, nbytes: int) -> None:
    if nbytes > args.memory_cap:
        raise SizeLimit(f"projected {nbytes} bytes exceeds the memory cap of {args.memory_cap}")


def source_prefix(args) -> LaurentPrefix:
    if args.values:
        return LaurentPrefix.from_values([int(v) for v in args.values.split(",")], args.p)
    if args.random:
        rng = random.Random(args.seed)
        return LaurentPrefix.from_values([rng.randrange(args.p) for _ in range(args.random)], args.p)
    if args.p != 2:
        raise ValueError("the Thue-Morse source is defined over F_2; pass --values or --random")
    return thue_morse_prefix(args.n)


def frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


# ---------------------------------------------------------------- subcommands

def cmd_tm(args) -> int:
    theta = thue_morse_prefix(args.n)
    if args.format == "csv":
        emit(args, "n,b\n" + "".join(f"{i},{b}\n" for i, b in enumerate(theta.coeffs, 1)))
    elif args.format == "json":
        emit(args, json.dumps(list(theta.coeffs)) + "\n")
    else:
        emit(args, str(theta) + "\n")
    return 0


def cmd_cf(args) -> int:
    cf = cf_expand(source_prefix(args))
    degs = cf.certified_degrees()
    if args.format == "json":
        emit(args, json.dumps({"degrees": list(degs), "convergent_degrees": list(cf.convergent_degrees[:len(degs)]),
                               "valid_count": cf.valid_count, "precision": cf.precision}) + "\n")
    elif args.format == "csv":
        rows = "".join(f"{k},{d},{i}\n" for k, (d, i) in enumerate(zip(degs, cf.convergent_degrees), 1))
        emit(args, "k,degree,convergent_degree\n" + rows)
    else:
        lines = [f"a_{k} = {q}" for k, q in enumerate(cf.quotients[:cf.valid_count], 1)]
        emit(args, "\n".join(lines) + ("\n" if lines else ""))
    return 0


def _wall_rows(args, theta: LaurentPrefix) -> int:
    rows = args.rows if args.rows is not None else (theta.precision - 1) // 2
    check_cap(args, (rows + 3) * (theta.precision + 3) * (1 if theta.field.p == 2 else 8))
    return rows


def _wall_grid(w: wall.Wall) -> np.ndarray:
    # Rows 0..M over columns 1..N; cells outside the trapezoid stay 0.
    return (w.values * w.mask())[2:, 1:w.precision + 1]


def cmd_wall(args) -> int:
    theta = source_prefix(args)
    w = wall.generate_wall(theta, _wall_rows(args, theta))
    emit_grid(args, _wall_grid(w), 0, 1)
    return 0


def _dwall_grid(args) -> np.ndarray:
    s = args.size
    top = args.from_row
    check_cap(args, (s + top + 3) * (s + top + 3) * 2)
    if args.values or args.random:
        theta = source_prefix(args)
        d = wall.diagonal_align(wall.generate_wall(theta, max(0, (s + top - 2) // 2)))
    else:
        d = coding.aligned_alpha(s + top)
    return d.block(top, top + s - 1, 1, s)


def cmd_dwall(args) -> int:
    emit_grid(args, _dwall_grid(args), args.from_row, 1)
    return 0


def _tile_matrix(args) -> tmtiles.TileMat:
    check_cap(args, 4 ** args.depth)
    return tmtiles.sigma_iter(tmtiles.tile(args.tile), args.depth, max_cells=args.memory_cap)


def cmd_tiles(args) -> int:
    m = _tile_matrix(args)
    if args.format == "json":
        emit(args, json.dumps(m.names()) + "\n")
    else:
        emit(args, m.dump())
    return 0


def _code_grid(args) -> np.ndarray:
    side = 4 * 2 ** args.depth + 1
    check_cap(args, side * side + 4 ** args.depth)
    return coding.assemble_array(_tile_matrix(args))


def cmd_code(args) -> int:
    emit_grid(args, _code_grid(args), 1, 1)
    return 0


def cmd_render(args) -> int:
    if args.target == "wall":
        theta = source_prefix(args)
        grid = _wall_grid(wall.generate_wall(theta, _wall_rows(args, theta)))
    elif args.target == "dwall":
        grid = _dwall_grid(args)
    elif args.target == "tiles":
        grid = _tile_matrix(args).cells != tmtiles.O
    else:
        grid = _code_grid(args)
    emit(args, pbm_bytes(grid, args.binary))
    return 0


def _escape_cell(cell: tuple[int, int, int]) -> tuple[int, int, int, Fraction]:
    l, j, d = cell
    return l, j, d, escape.E_lj_any(l, j, d)


def _map(args, fn, items: list):
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * args.jobs))))
    return [fn(x) for x in items]


def cmd_escape(args) -> int:
    ds = [int(x) for x in args.d.split(",")]
    if args.trace:
        rows = [(l, escape.j_l(l), d, v) for d in ds
                for l, v in enumerate(escape.full_escape_trace(d, args.lmax))]
    elif args.shift is not None:
        rows = [(escape.level_for_shift(args.shift), args.shift, d, escape.shift_limit(args.shift, d)) for d in ds]
    else:
        ls = [args.l] if args.l is not None else list(range(args.lmax + 1))
        cells = [(l, j, d) for l in ls for d in ds
                 for j in ([args.j] if args.j is not None else range(2 ** (l + 2) + 1))]
        rows = _map(args, _escape_cell, cells)
    if args.format == "json":
        emit(args, json.dumps([{"l": l, "j": j, "d": d, "value": frac(v)} for l, j, d, v in rows]) + "\n")
    elif args.format == "text":
        emit(args, "".join(f"l={l} j={j} d={d} {frac(v)}\n" for l, j, d, v in rows))
    else:
        emit(args, escape.to_csv(rows))
    return 0


# verification suites each return (passed, details)

def suite_equivariance(args):
    details = {"sigma": {l: tmtiles.verify_equivariance(l) for l in range(args.depth + 1)},
               "kappa": {l: coding.kappa_equivariance_check(l) for l in range(args.depth + 1)}}
    return all(details["sigma"].values()) and all(details["kappa"].values()), details


def suite_consistency(args):
    out, ok = {}, True
    for l in (5, 6):
        pats = coding.count_2x2_patterns(tmtiles.sigma_iter(tmtiles.P0, l))
        glued = all(coding.overlap_consistent(*(tmtiles.tile(x) for row in p for x in row)) for p in pats)
        out[l] = {"patterns": len(pats), "overlap_consistent": glued}
        ok &= len(pats) == 64 and glued
    return ok, out


def suite_main(args):
    rep = coding.compare_main(args.depth)
    return rep.agree, rep.summary()


def suite_frames(args):
    size = args.size
    if args.values or args.random:
        theta = source_prefix(args)
        d = wall.diagonal_align(wall.generate_wall(theta, max(0, (size - 2) // 2)))
    else:
        d = coding.aligned_alpha(size)
    rep = wall.check_frame_relations(d, (0, size, 1, size))
    return rep.ok, rep.summary()


def _prop_escape_one(seed: int) -> list:
    rng = random.Random(seed)
    theta = LaurentPrefix.from_values([rng.randrange(2) for _ in range(512)], 2)
    cf = cf_expand(theta)
    d = wall.diagonal_align(wall.generate_wall(theta, 255))
    bad = []
    for k in range(1, cf.valid_count + 1):
        i_k = cf.convergent_degrees[k - 1]
        if 2 * i_k > d.size:
            break
        col = d.column(1, 0, 2 * i_k)
        for thr in range(11):
            if escape.theta_escape(theta, thr, k) != escape.escape_mass(col, thr):
                bad.append([seed, k, thr])
    return bad


def suite_prop_escape(args):
    bad = [b for part in _map(args, _prop_escape_one, list(range(args.seed, args.seed + args.count))) for b in part]
    return not bad, {"series": args.count, "mismatches": bad[:20]}


def _recursion_one(cell):
    l, d = cell
    return [[l, j, d] for j in range(2 ** (l + 2) + 1)
            if escape.E_lj(l, j, d) != escape.E_lj_recursive(l, j, d)]


def suite_recursion(args):
    ds = [int(x) for x in args.d.split(",")]
    cells = [(l, d) for l in range(2, args.lmax + 1) for d in ds]
    bad = [b for part in _map(args, _recursion_one, cells) for b in part]
    sym = all(escape.E_lj(l, j, d) == escape.E_lj(l, 2 ** (l + 2) - j, d)
              for l in range(args.lmax + 1) for d in ds for j in range(2 ** (l + 2) + 1))
    return not bad and sym, {"mismatches": bad[:20], "symmetry": sym}


SUITES = {
    "equivariance": suite_equivariance,
    "consistency": suite_consistency,
    "main": suite_main,
    "frames": suite_frames,
    "prop-escape": suite_prop_escape,
    "recursion": suite_recursion,
}


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    ok, details = SUITES[args.suite](args)
    report = {"suite": args.suite, "pass": bool(ok), "details": details,
              "seconds": round(time.perf_counter() - t0, 3)}
    emit(args, json.dumps(report, default=str) + "\n")
    return 0 if ok else 1


def bench_rows(sizes: list[int], repeat: int = 1) -> list[tuple[int, float, float]]:
    """(size, recurrence_ms, oracle_ms) for Thue-Morse prefixes of each length."""
    out = []
    for n in sizes:
        if n <= 0:
            continue
        theta = thue_morse_prefix(n)
        rows = max(1, n // BENCH_ROW_DIVISOR)
        best_r = best_o = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fast = wall.generate_wall(theta, rows)
            t1 = time.perf_counter()
            slow = wall.oracle_wall(theta, rows)
            t2 = time.perf_counter()
            if not fast.equals(slow):
                raise AssertionError(f"recurrence and oracle walls differ at size {n}")
            best_r, best_o = min(best_r, t1 - t0), min(best_o, t2 - t1)
        out.append((n, best_r * 1e3, best_o * 1e3))
    return out


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    rows = bench_rows(sizes, args.repeat)
    if args.format == "json":
        emit(args, json.dumps([{"size": n, "recurrence_ms": r, "oracle_ms": o} for n, r, o in rows]) + "\n")
    elif args.format == "csv":
        emit(args, "size,recurrence_ms,oracle_ms\n" + "".join(f"{n},{r:.3f},{o:.3f}\n" for n, r, o in rows))
    else:
        lines = [f"{'size':>8} {'recurrence_ms':>14} {'oracle_ms':>12} {'ratio':>8}"]
        lines += [f"{n:>8} {r:>14.2f} {o:>12.2f} {o / r:>8.1f}" for n, r, o in rows]
        emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------- parser

def _source_flags(p: argparse.ArgumentParser, n_default: int = 64) -> None:
    p.add_argument("--n", type=int, default=n_default, help="Thue-Morse prefix length")
    p.add_argument("--p", type=int, default=2, help="prime modulus")
    p.add_argument("--values", help="comma-separated sequence b_1,b_2,... instead of Thue-Morse")
    p.add_argument("--random", type=int, metavar="N", help="random prefix of length N")
    p.add_argument("--seed", type=int, default=0)


def _grid_flags(p: argparse.ArgumentParser, default: str = "text") -> None:
    p.add_argument("--format", choices=("text", "csv", "json", "pbm"), default=default)
    p.add_argument("--binary", action="store_true", help="P4 instead of P1 for PBM output")


def _dwall_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--size", type=int, default=130, help="rendered side length")
    p.add_argument("--from-row", type=int, choices=(0, 1), default=0,
                   help="first wall row shown (1 drops the row of ones above the sequence)")


def _tile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tile", default="p0", choices=tmtiles.TILE_NAMES)
    p.add_argument("--depth", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a value given before the subcommand from being reset after it.
    common.add_argument("--out", "-o", default=argparse.SUPPRESS, help="write output to a file instead of stdout")
    common.add_argument("--memory-cap", type=int, default=argparse.SUPPRESS, help="bytes (default 2 GiB)")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes for sweeps")
    ap = argparse.ArgumentParser(prog="tmwall", description=__doc__, parents=[common])
    ap.set_defaults(out=None, memory_cap=DEFAULT_MEMORY_CAP, jobs=1)
    sub = ap.add_subparsers(dest="cmd", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    p = sub.add_parser("tm", help="Thue-Morse prefix")
    p.add_argument("n", type=int)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_tm)

    p = sub.add_parser("cf", help="continued fraction degrees of a prefix")
    _source_flags(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="json")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("wall", help="Toeplitz number wall, rows 0..M over columns 1..N")
    _source_flags(p)
    p.add_argument("--rows", type=int)
    _grid_flags(p)
    p.set_defaults(func=cmd_wall)

    p = sub.add_parser("dwall", help="diagonally aligned wall")
    _source_flags(p)
    _dwall_flags(p)
    _grid_flags(p)
    p.set_defaults(func=cmd_dwall)

    p = sub.add_parser("tiles", help="substitution image of a tile")
    _tile_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_tiles)

    p = sub.add_parser("code", help="assembled pixel coding of a substitution image")
    _tile_flags(p)
    _grid_flags(p)
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("render", help="PBM image of a wall, aligned wall, tiling or coding")
    p.add_argument("target", choices=("wall", "dwall", "tiles", "code"))
    _source_flags(p)
    _dwall_flags(p)
    _tile_flags(p)
    p.add_argument("--rows", type=int)
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="run a verification suite; exit 1 on any violation")
    p.add_argument("suite", choices=sorted(SUITES))
    _source_flags(p)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--lmax", type=int, default=8)
    p.add_argument("--d", default="5,6,7,8,9,10")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("escape", help="exact escape-of-mass values")
    p.add_argument("--l", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--lmax", type=int, default=4)
    p.add_argument("--d", default="5")
    p.add_argument("--shift", type=int, help="limit escape of the shifted series")
    p.add_argument("--trace", action="store_true", help="values along the full-escape shifts")
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.set_defaults(func=cmd_escape)

    p = sub.add_parser("bench", help="recurrence vs determinant-oracle timings")
    p.add_argument("--sizes", default="256,512,1024")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (TmwallError, ValueError) as exc:
        print(f"tmwall: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
