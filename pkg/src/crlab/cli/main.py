"""``crlab`` command line.

Every subcommand accepts ``--manifest FILE``; flags override manifest keys.
Exit status is 0 on success, 2 when the run finished but a check failed, and
1 on operational errors (bad manifest, bad input, numerical failure).
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
import sys
from typing import List, Optional

from .manifest import KINDS, Manifest, ManifestError, read_manifest
from .runner import EXIT_ERROR, dumps_report, run_manifest

logger = logging.getLogger("crlab")

# flag dest -> manifest attribute
_OVERRIDES = {
    "cache_dir": "cache_dir", "out": "out", "quad_tol": "quad_tol", "alpha_max": "alpha_max",
    "grid_ratio": "grid_ratio", "smooth": "smooth", "highlog": "highlog", "hilbert": "hilbert",
    "profile": "profile", "weight": "weight", "density": "density", "input": "input", "data": "data",
    "pole_order": "pole_order", "count": "count", "seed": "seed", "csv_dir": "csv_dir",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", metavar="FILE", help="experiment manifest (INI sections)")
    common.add_argument("--cache-dir", metavar="DIR", help="directory for monomial norm caches")
    common.add_argument("--out", metavar="FILE", help="write the JSON report here (default stdout)")
    common.add_argument("--csv-dir", metavar="DIR", help="write eps,value sample dumps here")
    common.add_argument("--quad-tol", type=float, help="relative quadrature tolerance")
    common.add_argument("--alpha-max", type=int, help="largest monomial degree in the norm table")
    common.add_argument("--grid-ratio", type=float, help="consecutive ratio of the geometric sample grids")
    common.add_argument("--smooth", type=int, help="number of smooth powers in the fit basis")
    common.add_argument("--highlog", type=int, help="number of eps^k log(eps) terms (k >= 1)")
    common.add_argument("--deterministic", action="store_true", help="report runtime_ms as 0")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="crlab", description="Volume and kernel asymptotics of strictly pseudoconvex domains.")
    sub = parser.add_subparsers(dest="kind", required=True)
    sub.add_parser("ball", parents=[common], help="unit ball regression")
    p = sub.add_parser("tube", parents=[common], help="disk-bundle tube volumes")
    p.add_argument("--hilbert", metavar="C0,C1,...", help="Hilbert polynomial coefficients c_k of t^k")
    p = sub.add_parser("reinhardt", parents=[common], help="one Reinhardt configuration, both routes")
    p.add_argument("--profile", metavar="EXPR", help="defining polynomial in r1, r2")
    p.add_argument("--weight", metavar="EXPR", help="exponent w of the rescaled defining function e^w p")
    p.add_argument("--density", metavar="EXPR", help="exponent h of the volume element e^h dV")
    sub.add_parser("linvariant", parents=[common], help="log-term invariance over manifest configs")
    p = sub.add_parser("fit", parents=[common], help="fit an expansion to eps,value samples")
    p.add_argument("--data", metavar="CSV", help="eps,value[,err] samples")
    p.add_argument("--pole-order", type=int, help="leading pole order n")
    p = sub.add_parser("symbols", parents=[common], help="symbol calculus self-test")
    p.add_argument("--selftest", action="store_true", help="run the property corpus (the default action)")
    p.add_argument("--count", type=int, help="number of random symbols")
    p.add_argument("--seed", type=int, help="random seed")
    p = sub.add_parser("psi2", parents=[common], help="log-term density on the three-sphere")
    p.add_argument("--input", metavar="JSON", help="pseudohermitian data {R, A, connection}")
    return parser


def manifest_from_args(args: argparse.Namespace) -> Manifest:
    if args.manifest:
        m = read_manifest(args.manifest)
        if m.kind != args.kind:
            raise ManifestError(f"manifest kind {m.kind!r} does not match subcommand {args.kind!r}")
    else:
        m = Manifest.for_kind(args.kind)
    for dest, attr in _OVERRIDES.items():
        val = getattr(args, dest, None)
        if val is not None:
            setattr(m, attr, val)
    if m.csv_dir is None and m.out:
        m.csv_dir = str(Path(m.out).parent / f"{m.name}_samples")
    return m.validate()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        m = manifest_from_args(args)
        code, report = run_manifest(m, deterministic=args.deterministic)
    except (ManifestError, ValueError, OSError, ArithmeticError, KeyError) as exc:
        logger.error("%s", exc)
        return EXIT_ERROR
    text = dumps_report(report)
    if m.out:
        Path(m.out).parent.mkdir(parents=True, exist_ok=True)
        with open(m.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report["checks"]:
        logger.info("check %-40s %s  %s", c["name"], "pass" if c["pass"] else "FAIL", c["detail"])
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
