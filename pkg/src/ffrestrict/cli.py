"""Command line entry point: ``ffrestrict <command> ...``.

Exit codes: 0 success, 1 inequality or ceiling violation, 2 usage or
configuration error, 3 internal validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bounds import PRESETS, FamilySpec, generate, run_preset
from .counting import QUANTITIES, PointSet2, count
from .errors import FFRestrictError, TableMismatch
from .exponents import (
    TABLE_IDS,
    PiecewiseBound,
    cubic_remark_exponent,
    derive_updated_table,
    describe,
    envelope_exponent,
    load_table,
)
from .field import make_field
from .regularity import ceil_sqrt, check_partition, decompose_k_regular, max_line_intersection, validate_k_regular

log = logging.getLogger("ffrestrict")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2, 3


class ValidationFailure(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a command was asked to do; echoed into its output."""

    command: str
    p: int | None = None
    n: int = 1
    seed: int = 0
    preset: str | None = None
    inputs: list[str] = field(default_factory=list)
    family: dict | None = None
    ceilings: dict = field(default_factory=dict)
    tolerance: float | None = None
    out: str | None = None
    version: str = __version__


def _emit(payload, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _parse_kv(items: list[str], what: str, cast=str) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ValueError(f"{what} must look like key=value, got {item!r}")
        try:
            out[key] = cast(val)
        except ValueError:
            raise ValueError(f"{what} {key}: bad value {val!r}") from None
    return out


def _int_or_str(v: str):
    try:
        return int(v)
    except ValueError:
        return v


def _family_cfg(args) -> dict | None:
    return {"kind": args.family, "params": _parse_kv(args.param, "--param", _int_or_str)} if args.family else None


def _load_set(ctx, path: str | None, args) -> PointSet2:
    if path:
        return PointSet2.load(ctx, path)
    if args.family:
        spec = FamilySpec.make(args.family, seed=args.seed, **_parse_kv(args.param, "--param", _int_or_str))
        A = generate(ctx, spec)
        if not isinstance(A, PointSet2):
            raise ValueError(f"family {args.family} does not produce a planar set")
        return A
    raise ValueError("give an input CSV or --family")


# -- commands ---------------------------------------------------------------------------


def cmd_field_info(args) -> int:
    ctx = make_field(args.prime, args.degree)
    sigma = ctx.gauss_constant
    if ctx.minus_one_is_square:
        log.warning("-1 is a square in F_%d; the restriction estimates here assume it is not", ctx.q)
    _emit({**ctx.to_json(), "sigma_F": {"re": round(sigma.real, 12), "im": round(sigma.imag, 12)}}, args.out)
    return EXIT_OK


def cmd_count(args) -> int:
    ctx = make_field(args.prime, args.degree)
    A = _load_set(ctx, args.input, args)
    B = PointSet2.load(ctx, args.other) if args.other else None
    rep = count(ctx, args.quantity, A, B, oracle=args.oracle)
    payload = rep.to_json()
    payload = json.loads(payload) if isinstance(payload, str) else payload
    cfg = RunConfig("count", args.prime, args.degree, args.seed, inputs=[p for p in (args.input, args.other) if p], family=_family_cfg(args))
    _emit({"config": asdict(cfg), "report": payload}, args.out)
    if args.oracle and getattr(rep, "oracle_value", None) is not None and rep.oracle_value != rep.value:
        raise ValidationFailure(f"fast counter gave {rep.value}, brute force {rep.oracle_value}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    ctx = make_field(args.prime, args.degree)
    A = _load_set(ctx, args.input, args)
    dec = decompose_k_regular(ctx, A, threshold=args.threshold)
    problems = []
    if not check_partition(ctx, A, dec):
        problems.append("parts and remainder do not partition the input")
    if len(dec.remainder) and max_line_intersection(ctx, dec.remainder)[1] > max(dec.threshold, ceil_sqrt(len(A))):
        problems.append("a line meets the remainder above the threshold")
    for i, part in enumerate(dec.parts):
        if not validate_k_regular(ctx, part):
            problems.append(f"part {i} (k={part.k}) fails the k-regular validator")
    if problems:
        raise ValidationFailure("; ".join(problems))
    cfg = RunConfig("decompose", args.prime, args.degree, args.seed, inputs=[args.input] if args.input else [], family=_family_cfg(args))
    _emit({"config": asdict(cfg), "decomposition": dec.to_json()}, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    ceilings = _parse_kv(args.ceiling, "--ceiling", float)
    cfg = RunConfig("sweep", seed=args.seed, preset=args.preset, ceilings=ceilings, tolerance=args.tolerance, out=args.out)
    effective = {k: v for k, v in ceilings.items() if k != "*"}
    if "*" in ceilings:
        effective = _all_ceilings(ceilings["*"]) | effective
    kw = {"ceilings": effective}
    if args.tolerance is not None:
        kw["tolerance"] = args.tolerance
    report = run_preset(args.preset, seed=args.seed, **kw)
    report.config.update({k: v for k, v in asdict(cfg).items() if k in ("command", "ceilings", "tolerance")})
    summary = report.summary()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(report.to_csv())
    for v in summary["violations"]:
        log.error("violation: %s at q=%s, max ratio %.6g > %.6g", v["check"], v["q"], v["max_ratio"], v["ceiling"])
    if summary["errors"]:
        log.warning("%d instances raised errors (see summary)", len(summary["errors"]))
    return report.exit_code


def _all_ceilings(value: float) -> dict:
    from .bounds import load_ceilings

    return {k: value for k in load_ceilings()}


def cmd_exponents(args) -> int:
    table = PiecewiseBound.load(args.file) if args.file else load_table(args.table)
    payload = describe(table)
    bad = [c for c in payload["crossovers"] if not c["match"]]
    if not args.file and args.table == "new":
        derived = derive_updated_table()
        env, exp = envelope_exponent()
        payload["derivation"] = {
            "matches_table": True,
            "rows": derived.to_json()["rows"],
            "envelope_rows": env.to_json()["rows"],
            "envelope_r": str(exp.r),
            "cubic_term_r": str(cubic_remark_exponent().r),
        }
    _emit(payload, args.out)
    if bad:
        log.warning("stated boundaries differ from crossovers: %s", bad)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffrestrict", description="Finite-field restriction laboratory.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def field_args(p):
        p.add_argument("-p", "--prime", type=int, required=True)
        p.add_argument("-n", "--degree", type=int, default=1)

    def set_args(p):
        p.add_argument("input", nargs="?", help="CSV of points, one 'x,y' per line")
        p.add_argument("--family", help="generate the set instead: " + ", ".join(["random", "parallel_lines", "grid", "few_directions", "single_line"]))
        p.add_argument("--param", action="append", default=[], help="family parameter key=value (repeatable)")

    p = sub.add_parser("field-info", help="field order, modulus, sigma_F")
    field_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_field_info)

    p = sub.add_parser("count", help="rectangle, trapezoid, corner, energy or B counts")
    field_args(p)
    set_args(p)
    p.add_argument("--quantity", "-q", choices=QUANTITIES, default="rect")
    p.add_argument("--other", help="second set for trap and b")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("decompose", help="greedy k-regular decomposition")
    field_args(p)
    set_args(p)
    p.add_argument("--threshold", choices=("original", "residual"), default="original")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sweep", help="run the inequality sweep")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ceiling", action="append", default=[], help="check=value, or *=value for every bound check")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="directory for sweep.csv and summary.json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exponents", help="restriction exponent implied by a table")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--table", choices=TABLE_IDS, default="new")
    g.add_argument("--file", help="table JSON {rows: [{a, b, lo, hi}]}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exponents)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationFailure, TableMismatch) as exc:
        log.error("validation failed: %s", exc)
        return EXIT_VALIDATION
    except (FFRestrictError, ValueError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
