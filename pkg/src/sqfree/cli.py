"""Command-line front end.

Subcommands: generate, verify, bench, demo-float.  Exit codes are stable:
0 success, 1 a mathematical finding (oracle disagreement or gap violation),
2 generation aborted (no discontinuity in window, non-unit jump, exact
bookkeeping drift), 3 operational trouble (I/O, bad flags, unparsable input).

Record files carry the columns i,k,mu,gap,t_seconds,T_seconds (timings as
decimal seconds, six fractional digits).  Verification reports are JSON with
snake_case keys; see verifier.report_to_dict.  Set SQFREE_OUT_DIR to
redirect relative output paths into another directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .generator import GeneratedRecord, GeneratorError, Mode, run
from .oracle import sieve_mobius, square_divisor
from .verifier import report_to_dict, verify_run

__all__ = ["main", "read_records", "write_records", "CSV_COLUMNS"]

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_ABORT = 2
EXIT_OPERATIONAL = 3

CSV_COLUMNS = ("i", "k", "mu", "gap", "t_seconds", "T_seconds")

ENV_OUT_DIR = "SQFREE_OUT_DIR"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; remap to the operational code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_OPERATIONAL, f"{self.prog}: error: {message}\n")


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(ENV_OUT_DIR)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _record_row(r: GeneratedRecord) -> str:
    return f"{r.i},{r.k},{r.mu},{r.gap},{r.t_seconds:.6f},{r.T_seconds:.6f}"


def write_records(records, path: Path, fmt: str) -> None:
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in records:
                fh.write(_record_row(r) + "\n")
    elif fmt == "json":
        payload = [
            {
                "i": r.i,
                "k": r.k,
                "mu": r.mu,
                "gap": r.gap,
                "t_seconds": round(r.t_seconds, 6),
                "T_seconds": round(r.T_seconds, 6),
            }
            for r in records
        ]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_records(path) -> list[GeneratedRecord]:
    """Parse a records file (CSV or JSON, chosen by extension).

    Raises ValueError on anything malformed; callers map that to exit 3.
    """
    path = Path(path)
    if path.suffix == ".json":
        with open(path) as fh:
            payload = json.load(fh)
        if not isinstance(payload, list):
            raise ValueError("JSON records file must hold a list")
        return [
            GeneratedRecord(
                i=int(row["i"]), k=int(row["k"]), mu=int(row["mu"]),
                gap=int(row["gap"]),
                t_seconds=float(row.get("t_seconds", 0.0)),
                T_seconds=float(row.get("T_seconds", 0.0)),
            )
            for row in payload
        ]
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValueError(f"missing or bad header, expected {','.join(CSV_COLUMNS)}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"bad row: {ln!r}")
        out.append(GeneratedRecord(
            i=int(parts[0]), k=int(parts[1]), mu=int(parts[2]),
            gap=int(parts[3]), t_seconds=float(parts[4]),
            T_seconds=float(parts[5]),
        ))
    if not out:
        raise ValueError("records file holds no data rows")
    return out


def _run_records(args, mode: Mode):
    return list(run(args.limit, mode=mode, scan_cap=args.scan_cap,
                    spot_check_interval=args.spot_check))


def cmd_generate(args) -> int:
    mode = Mode.from_string(args.mode)
    if mode is Mode.FLOAT_DEMO:
        print("use the demo-float subcommand for floating-point runs",
              file=sys.stderr)
        return EXIT_OPERATIONAL
    out = _resolve_out(args.out)
    try:
        records = _run_records(args, mode)
    except GeneratorError as exc:
        print(f"generation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    try:
        write_records(records, out, args.format)
    except OSError as exc:
        print(f"cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    print(f"wrote {len(records)} records to {out}")
    if args.verify:
        sieve = sieve_mobius(args.limit)
        report = verify_run(records, sieve, limit=args.limit)
        report_path = out.with_suffix(".report.json")
        with open(report_path, "w") as fh:
            json.dump(report_to_dict(report), fh, indent=1)
            fh.write("\n")
        print(f"verification report: {report_path}")
        if not report.is_consistent():
            print("findings present", file=sys.stderr)
            return EXIT_FINDING
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.records)
    try:
        records = read_records(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"cannot parse {path}: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    limit = args.limit if args.limit is not None else max(r.k for r in records)
    try:
        sieve = sieve_mobius(limit)
        report = verify_run(records, sieve, limit=limit)
    except ValueError as exc:
        print(f"cannot verify: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    report_path = path.with_suffix(".report.json")
    try:
        with open(report_path, "w") as fh:
            json.dump(report_to_dict(report), fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        print(f"cannot write {report_path}: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    print(f"verification report: {report_path}")
    if report.is_consistent():
        print("consistent: no findings")
        return EXIT_OK
    print("findings present", file=sys.stderr)
    return EXIT_FINDING


def cmd_bench(args) -> int:
    mode = Mode.from_string(args.mode)
    if mode is Mode.FLOAT_DEMO:
        print("bench supports exact and fast modes", file=sys.stderr)
        return EXIT_OPERATIONAL
    prefix = args.out
    if prefix.endswith(".csv"):
        prefix = prefix[: -len(".csv")]
    out_t = _resolve_out(prefix + "_t.csv")
    out_big_t = _resolve_out(prefix + "_T.csv")
    try:
        records = _run_records(args, mode)
    except GeneratorError as exc:
        print(f"generation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    try:
        with open(out_t, "w") as fh:
            fh.write("k,t_seconds\n")
            for r in records:
                fh.write(f"{r.k},{r.t_seconds:.6f}\n")
        with open(out_big_t, "w") as fh:
            fh.write("k,T_seconds\n")
            for r in records:
                fh.write(f"{r.k},{r.T_seconds:.6f}\n")
    except OSError as exc:
        print(f"cannot write bench output: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    print(f"wrote {out_t} and {out_big_t}")
    return EXIT_OK


def cmd_demo_float(args) -> int:
    out = _resolve_out(args.out)
    try:
        records = list(run(args.limit, mode=Mode.FLOAT_DEMO,
                           scan_cap=args.scan_cap))
    except GeneratorError as exc:
        print(f"float run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    try:
        write_records(records, out, args.format)
    except OSError as exc:
        print(f"cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    sieve = sieve_mobius(args.limit)
    findings = [
        {
            "i": r.i,
            "k": r.k,
            "recorded_mu": r.mu,
            "square_divisor": square_divisor(r.k),
        }
        for r in records
        if sieve.mu(r.k) == 0
    ]
    payload: dict = {"limit": args.limit, "square_full_generated": findings}
    if args.compare_exact:
        exact_ks = [r.k for r in run(args.limit, mode=Mode.EXACT,
                                     spot_check_interval=args.spot_check)]
        float_ks = [r.k for r in records]
        divergence = None
        for idx, (a, b) in enumerate(zip(float_ks, exact_ks)):
            if a != b:
                divergence = {"index": idx + 1, "float_k": a, "exact_k": b}
                break
        else:
            if len(float_ks) != len(exact_ks):
                idx = min(len(float_ks), len(exact_ks))
                divergence = {
                    "index": idx + 1,
                    "float_k": float_ks[idx] if idx < len(float_ks) else None,
                    "exact_k": exact_ks[idx] if idx < len(exact_ks) else None,
                }
        payload["first_divergence"] = divergence
    findings_path = out.with_suffix(".findings.json")
    try:
        with open(findings_path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        print(f"cannot write {findings_path}: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    print(f"wrote {len(records)} records to {out}; findings: {findings_path}")
    if findings:
        print(f"{len(findings)} square-full numbers generated by rounding",
              file=sys.stderr)
    return EXIT_OK


def _add_run_flags(sp, default_out: str, with_mode: bool = True):
    sp.add_argument("--limit", type=int, required=True,
                    help="generate every number up to this bound (>= 2)")
    if with_mode:
        sp.add_argument("--mode", choices=["exact", "fast"], default="exact")
    sp.add_argument("--out", default=default_out, help="output path")
    sp.add_argument("--scan-cap", dest="scan_cap", type=int, default=None,
                    help="scan window override (default: current k, the "
                         "gap-condition guard)")
    sp.add_argument("--spot-check", dest="spot_check", type=int, default=1000,
                    help="steps between exact re-verifications")


def build_parser() -> _Parser:
    parser = _Parser(prog="sqfree",
                     description="square-free number generator with exact "
                                 "Mobius values and oracle verification")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    g = sub.add_parser("generate", help="run the generator, write records")
    _add_run_flags(g, "records.csv")
    g.add_argument("--format", choices=["csv", "json"], default="csv")
    g.add_argument("--verify", action="store_true",
                   help="check the stream against the sieve oracle afterwards")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check a records file against the sieve")
    v.add_argument("records", help="records file (CSV or JSON)")
    v.add_argument("--limit", type=int, default=None,
                   help="the limit the run was generated with "
                        "(default: largest k in the file)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="emit plot-ready (k,t) and (k,T) CSVs")
    _add_run_flags(b, "bench")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("demo-float",
                       help="floating-point run demonstrating rounding "
                            "artifacts; findings are informational")
    _add_run_flags(d, "float_records.csv", with_mode=False)
    d.add_argument("--format", choices=["csv", "json"], default="csv")
    d.add_argument("--compare-exact", dest="compare_exact",
                   action="store_true",
                   help="also run exact mode and report the first divergence")
    d.set_defaults(func=cmd_demo_float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "limit", None) is not None and args.command != "verify":
        if args.limit < 2:
            print("limit must be >= 2", file=sys.stderr)
            return EXIT_OPERATIONAL
    if getattr(args, "spot_check", 1) < 1:
        print("spot-check interval must be >= 1", file=sys.stderr)
        return EXIT_OPERATIONAL
    if getattr(args, "scan_cap", None) is not None and args.scan_cap < 1:
        print("scan-cap must be >= 1", file=sys.stderr)
        return EXIT_OPERATIONAL
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
