"""Command-line entry point.

Exit codes: 0 success or identical, 1 ambiguous or different,
2 data error (parse, schema, digest), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .emul import PRESETS, FpConfig, get_backend
from .errors import ProcScopeError
from .fingerprint import (Fingerprint, SignatureDb, assemble, default_db_path, diff, load, load_db,
                          match, paper_table_entries, serialize, synthetic_entries)
from .fphash import FpHashParams, fp_hash
from .probes import EASY_CHECKS, SIN_EXPONENTS, SUM_SIZES, ErrorPayload, run_battery

EXIT_OK, EXIT_DIFFERENT, EXIT_DATA, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("procscope")


def atomic_write(path: Path, data: bytes) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise PermissionError(f"directory not writable: {parent}")


def _yn(flag: str) -> str:
    return {"true": "Yes", "false": "No"}.get(flag, flag)


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def summary(fp: Fingerprint) -> str:
    """Report laid out like the published tables: probe columns, Yes/No cells."""
    out = [f"backend: {fp.backend}", ""]
    easy = fp.payload("easy-computations")
    cells = easy.encode().split(",") if easy and easy.kind == "bools" else ["?"] * 4
    out.append(_table([["Processor"] + [f"{lhs.replace(' ', '')} == {rhs}" if len(lhs) < 20
                                         else f"0.1+...+0.1 == {rhs}" for lhs, rhs in EASY_CHECKS],
                       [fp.backend] + [_yn(c) for c in cells]]))
    out.append("")
    rows = [["sin(10^k pi)", "pi1", "pi2", "pi3", "pi4"]]
    for k in SIN_EXPONENTS:
        row = [f"k={k}"]
        for i in range(1, 5):
            p = fp.payload(f"sin-k{k}-pi{i}")
            row.append(f"{p.dec} ({p.bits.low32():x})" if p is not None and p.kind == "sin" else "error")
        rows.append(row)
    out.append(_table(rows))
    out.append("")
    rows = [["Probe", "Result"]]
    for probe_id in ("sqrt-identity", "gentleman", "rump-f", "rump-p",
                     *(f"sum-residual-{n}" for n in SUM_SIZES), "logistic-default", "popcount-timing"):
        p = fp.payload(probe_id)
        if p is None:
            continue
        if p.kind == "bool":
            text = _yn(p.encode())
        elif p.kind == "residual":
            text = "; ".join(f"{e.approx}{' (exact)' if e.exact else ''}" for e in p.entries)
        elif p.kind == "timing":
            text = (f"software/builtin ratio {p.ratio:.2f}, median {p.sw_median:.4f}s / "
                    f"{p.hw_median:.4f}s" if p.supported else "unsupported")
        else:
            text = p.encode()
        rows.append([probe_id, text])
    out.append(_table(rows))
    return "\n".join(out)


def _db_path(arg: str | None) -> Path:
    return Path(arg or os.environ.get("PROCSCOPE_DB") or default_db_path())


def cmd_run(args: argparse.Namespace) -> int:
    out_path = Path(args.output) if args.output else None
    if out_path is not None:
        _check_writable(out_path)
    backend = get_backend(args.backend)
    include_timing = None if args.timing == "auto" else args.timing == "on"
    results = run_battery(backend, include_timing=include_timing,
                          timing_iterations=args.timing_iterations)
    fp = assemble(results)
    data = serialize(fp)
    if out_path is not None:
        atomic_write(out_path, data)
    if args.format == "machine":
        sys.stdout.write(data.decode("utf-8"))
    else:
        print(summary(fp))
        if out_path is not None:
            print(f"\nwrote {out_path}")
    errors = [r for r in fp.results if isinstance(r.payload, ErrorPayload)]
    for r in errors:
        print(f"error: probe {r.probe_id}: {r.payload.message}", file=sys.stderr)
    return EXIT_DATA if errors else EXIT_OK


def cmd_match(args: argparse.Namespace) -> int:
    fp = load(Path(args.fingerprint).read_bytes())
    db = load_db(_db_path(args.db))
    report = match(fp, db)
    if args.format == "machine":
        for c in report.ranked:
            print(f"class={c.class_name} score={c.score} max={c.max_score} "
                  f"matched={c.matched} total={c.total} weak={c.weak_matches}")
        print(f"verdict={report.verdict}")
    else:
        rows = [["Class", "Score", "Matched", "Provenance"]]
        for c in report.ranked[:args.top]:
            weak = f", {c.weak_matches} weak" if c.weak_matches else ""
            rows.append([c.class_name, f"{c.score}/{c.max_score}", f"{c.matched}/{c.total}{weak}",
                         c.provenance])
        print(_table(rows))
        if report.ambiguous:
            tied = ", ".join(c.class_name for c in report.top())
            print(f"\nverdict: ambiguous ({tied})")
        else:
            print(f"\nverdict: {report.verdict}")
    return EXIT_DIFFERENT if report.ambiguous else EXIT_OK


def cmd_diff(args: argparse.Namespace) -> int:
    a = load(Path(args.a).read_bytes())
    b = load(Path(args.b).read_bytes())
    delta = diff(a, b)
    if not delta:
        print("identical canonical content")
        return EXIT_OK
    rows = [["Probe", a.backend, b.backend]]
    for probe_id, pa, pb in delta:
        rows.append([probe_id, pa.encode() if pa else "-", pb.encode() if pb else "-"])
    print(_table(rows))
    print(f"\n{len(delta)} differing probe(s)")
    return EXIT_DIFFERENT


def _read_input(name: str) -> bytes:
    if name == "-":
        return sys.stdin.buffer.read()
    return Path(name).read_bytes()


def cmd_hash(args: argparse.Namespace) -> int:
    data = _read_input(args.input)

    def params(name: str) -> FpHashParams:
        return FpHashParams(r=args.r, rounds_per_byte=args.rounds, backend=get_backend(name))

    digest = fp_hash(data, params(args.backend))
    if not args.compare:
        print(digest.hexdigest())
        return EXIT_OK
    other = fp_hash(data, params(args.compare))
    print(f"{args.backend}: {digest.hexdigest()}")
    print(f"{args.compare}: {other.hexdigest()}")
    print(f"hamming distance: {digest.hamming(other)} of {len(digest.words) * 64} bits")
    return EXIT_OK


def cmd_emulate_sweep(args: argparse.Namespace) -> int:
    out_path = Path(args.output)
    _check_writable(out_path)
    names = args.configs.split(",") if args.configs else list(PRESETS)
    configs = [FpConfig.from_name(n) for n in names]
    entries = paper_table_entries() if args.with_paper else []
    entries += synthetic_entries(configs)
    db = SignatureDb(tuple(entries))
    atomic_write(out_path, db.serialize())
    print(f"wrote {len(db.entries)} classes to {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procscope",
                                     description="Fingerprint the floating-point environment.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the probe battery and write a fingerprint")
    p.add_argument("--backend", default="native64",
                   help="native64, native32, a preset (BINARY32, SIG64, ...) or sigNexpM-<rnd>")
    p.add_argument("-o", "--output", help="fingerprint file to write")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--timing", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--timing-iterations", type=int, default=100_000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("match", help="rank signature classes for a fingerprint")
    p.add_argument("fingerprint")
    p.add_argument("--db", help="signature database (default: $PROCSCOPE_DB or the shipped one)")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("diff", help="compare two fingerprints probe by probe")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("hash", help="hash a file (or - for stdin) with the FP-dependent hash")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--backend", default="native64")
    p.add_argument("--compare", metavar="BACKEND", help="also hash under this backend and compare")
    p.add_argument("--r", type=float, default=3.999)
    p.add_argument("--rounds", type=int, default=16)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("emulate-sweep", help="build a synthetic signature database")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--configs", help="comma-separated config names (default: all presets)")
    p.add_argument("--with-paper", action="store_true",
                   help="prepend the rows transcribed from the published tables")
    p.set_defaults(func=cmd_emulate_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ProcScopeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
