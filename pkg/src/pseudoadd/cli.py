"""Command-line interface.

Usage::

    pseudoadd eval    --preset hc --q 2 --p 0.5
    pseudoadd entropy --preset hc --q 2 --dist inline:0.5,0.5
    pseudoadd kl      --preset hc --q 2 --dist inline:0.5,0.5 --dist-b inline:0.25,0.75
    pseudoadd verify  --k 1 --phi "1-q" --alpha "1-q"
    pseudoadd scan    --preset hc --q-from 0.5 --q-to 2 --steps 3 --emit-samples > samples.csv
    pseudoadd recover samples.csv --format csv

Exit status: 0 success, 1 domain/validation error, 2 usage or malformed input,
3 ``verify`` ran but the spec failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .axioms import GridSpec, verify
from .content import (
    EPS_PHI,
    PRESETS,
    ContentSpec,
    alpha_over_phi,
    info_content_stable,
    preset,
    tabulate,
)
from .entropy import entropy, kl_divergence, load_distribution
from .errors import InputFormatError, PseudoaddError
from .recover import SampleTable, recover

__all__ = ["main", "build_parser"]

PROG = "pseudoadd"
SAMPLE_P = (0.9, 0.5, 0.25)
ANCHOR_OFFSET = 1e-7


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    # shortest round-trip repr; recovery reads these back bit-exactly
    return repr(float(x))


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc.strerror or exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="print a version banner to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    spec = argparse.ArgumentParser(add_help=False)
    g = spec.add_argument_group("spec source (exactly one)")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--spec", metavar="FILE", help="content spec JSON")
    g.add_argument("--k", type=float, metavar="NUM")
    g.add_argument("--phi", metavar="EXPR")
    g.add_argument("--alpha", metavar="EXPR")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--format", choices=("json", "csv", "text"),
                     help="default: text on a terminal, json otherwise")
    out.add_argument("--out", metavar="FILE", help="write output here instead of stdout")

    p = sub.add_parser("eval", parents=[spec, out], help="information content I_q(p)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("entropy", parents=[spec, out], help="nonextensive entropy S_q")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--dist", required=True, metavar="SRC", help="inline:p1,p2,... or a JSON/CSV file")
    p.add_argument("--renormalize", action="store_true")

    p = sub.add_parser("kl", parents=[spec, out], help="divergence K_q(A||B)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--dist", required=True, metavar="SRC")
    p.add_argument("--dist-b", required=True, metavar="SRC")
    p.add_argument("--renormalize", action="store_true")

    p = sub.add_parser("verify", parents=[spec, out], help="check a spec against the axioms")
    p.add_argument("--grid", metavar="FILE", help='JSON {"q_points": [...], "p_points": [...]}')

    p = sub.add_parser("recover", parents=[out], help="estimate k, phi, alpha from a q,p,I table")
    p.add_argument("table", nargs="?", default="-", help="sample CSV (default: stdin)")

    p = sub.add_parser("scan", parents=[spec, out], help="tabulate phi, alpha, I and S over q")
    p.add_argument("--q-from", type=float)
    p.add_argument("--q-to", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--p", type=float, default=0.5, help="reference p for the I column")
    p.add_argument("--dist", default="inline:0.5,0.5", metavar="SRC")
    p.add_argument("--grid", metavar="FILE", help="q/p points for --emit-samples")
    p.add_argument("--emit-samples", action="store_true",
                   help="emit a q,p,I sample table (input for recover) instead of the scan")
    return parser


def _load_spec(args) -> ContentSpec:
    inline = [args.k is not None, args.phi is not None, args.alpha is not None]
    sources = [args.preset is not None, args.spec is not None, any(inline)]
    if sum(sources) != 1:
        raise UsageError("give exactly one spec source: --preset, --spec, or --k/--phi/--alpha")
    if args.preset is not None:
        return preset(args.preset)
    if args.spec is not None:
        return ContentSpec.from_json(_read_text(args.spec))
    if not all(inline):
        raise UsageError("inline specs need all of --k, --phi and --alpha")
    return ContentSpec.from_strings(args.k, args.phi, args.alpha)


def _format(args) -> str:
    if args.format:
        return args.format
    return "text" if args.out is None and sys.stdout.isatty() else "json"


def _scalar(fmt: str, header: tuple[str, ...], row: tuple[float, ...]) -> str:
    value = row[-1]
    if fmt == "csv":
        return ",".join(header) + "\n" + ",".join(_num(v) for v in row) + "\n"
    if fmt == "json":
        return json.dumps(value) + "\n"
    return _num(value) + "\n"


def _cmd_eval(args) -> tuple[str, int]:
    spec = _load_spec(args)
    value = info_content_stable(spec, args.q, args.p)
    return _scalar(_format(args), ("q", "p", "I"), (args.q, args.p, value)), 0


def _cmd_entropy(args) -> tuple[str, int]:
    spec = _load_spec(args)
    dist = load_distribution(args.dist, args.renormalize)
    return _scalar(_format(args), ("q", "S"), (args.q, entropy(spec, dist, args.q))), 0


def _cmd_kl(args) -> tuple[str, int]:
    spec = _load_spec(args)
    a = load_distribution(args.dist, args.renormalize)
    b = load_distribution(args.dist_b, args.renormalize)
    return _scalar(_format(args), ("q", "K"), (args.q, kl_divergence(spec, a, b, args.q))), 0


def _cmd_verify(args) -> tuple[str, int]:
    spec = _load_spec(args)
    grid = GridSpec.from_json(_read_text(args.grid)) if args.grid else None
    report = verify(spec, grid)
    fmt = _format(args)
    if fmt == "json":
        text = report.to_json() + "\n"
    elif fmt == "csv":
        lines = ["id,status,max_residual,witness"]
        for c in report.checks:
            w = ";".join(f"{key}={_num(val)}" for key, val in (c.witness or {}).items())
            lines.append(f"{c.id},{c.status},{_num(c.max_residual)},{w}")
        text = "\n".join(lines) + "\n"
    else:
        text = report.to_text() + "\n"
    return text, 0 if report.passed else 3


def _cmd_recover(args) -> tuple[str, int]:
    source = "<stdin>" if args.table == "-" else args.table
    table = SampleTable.from_csv(_read_text(args.table), source)
    result = recover(table)
    fmt = _format(args)
    if fmt == "csv":
        return result.to_csv(), 0
    if fmt == "json":
        return json.dumps(result.to_dict(), indent=2) + "\n", 0
    lines = [f"k_hat = {_num(result.k_hat)}",
             f"{'q':>22} {'phi_hat':>24} {'alpha_hat':>24} {'residual':>24}"]
    for r in result.rows:
        flag = "  FLAGGED" if r.flagged else ""
        lines.append(f"{_num(r.q):>22} {_num(r.phi_hat):>24} {_num(r.alpha_hat):>24} {_num(r.residual):>24}{flag}")
    return "\n".join(lines) + "\n", 0


def _uniform(args) -> list[float]:
    if args.q_from is None or args.q_to is None or args.steps is None:
        raise UsageError("scan needs --q-from, --q-to and --steps")
    if args.steps < 1:
        raise UsageError("--steps must be a positive integer")
    lo, hi, n = args.q_from, args.q_to, args.steps
    return [lo + (hi - lo) * i / n for i in range(n)] + [hi]


def _cmd_scan(args) -> tuple[str, int]:
    spec = _load_spec(args)
    fmt = args.format or "csv"
    if args.emit_samples:
        if args.grid:
            grid = GridSpec.from_json(_read_text(args.grid))
            qs, ps = list(grid.q_points), list(grid.p_points)
        else:
            qs, ps = _uniform(args), list(SAMPLE_P)
        if not any(abs(q - 1.0) <= 1e-6 for q in qs):
            # recovery needs a near-1 group to fix k
            qs = sorted(qs + [1.0 - ANCHOR_OFFSET, 1.0 + ANCHOR_OFFSET])
        for q in qs:
            if not spec.in_domain(q):
                raise PseudoaddError(f"scan point q={q!r} lies outside the spec domain")
        table = SampleTable(tabulate(spec, qs, ps))
        if fmt == "json":
            return json.dumps([dict(zip(("q", "p", "I"), r)) for r in table.rows], indent=2) + "\n", 0
        return table.to_csv(), 0

    qs = _uniform(args)
    for q in qs:
        if not spec.in_domain(q):
            raise PseudoaddError(f"scan point q={q!r} lies outside the spec domain")
    dist = load_distribution(args.dist)
    header = ("q", "phi", "alpha", "alpha_over_phi", "I_pref", "S_q")
    rows = []
    for q in qs:
        phi, alpha = spec.phi(q), spec.alpha(q)
        ratio = alpha_over_phi(spec, q, phi, alpha) if abs(phi) < EPS_PHI else alpha / phi
        rows.append((q, phi, alpha, ratio, info_content_stable(spec, q, args.p), entropy(spec, dist, q)))
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n", 0
    return ",".join(header) + "\n" + "".join(",".join(_num(v) for v in r) + "\n" for r in rows), 0


_COMMANDS = {
    "eval": _cmd_eval, "entropy": _cmd_entropy, "kl": _cmd_kl,
    "verify": _cmd_verify, "recover": _cmd_recover, "scan": _cmd_scan,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        print(f"{PROG} {__version__}", file=sys.stderr)
    try:
        text, status = _COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except InputFormatError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except PseudoaddError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"{PROG}: error: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
