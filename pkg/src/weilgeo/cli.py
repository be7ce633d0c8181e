"""Thin command-line client over the service layer.

Commands call the same handlers the HTTP endpoints use, in-process by
default; ``--server URL`` sends the identical request to a running
service instead.  Exit codes: 0 success, 1 assertion/tolerance failure,
2 usage or input error.

Output files are byte-deterministic for identical inputs: JSON is dumped
with sorted keys, CSV floats use 17 significant digits.  Relative output
paths resolve against $WEILGEO_OUT_DIR when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from typing import Sequence

from . import __version__, service
from .parsing import SPEC_SYNTAX_HELP
from .sdg import comparison_csv as sdg_comparison_csv

OUT_DIR_ENV = "WEILGEO_OUT_DIR"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _out_path(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _write(path: str, payload: str) -> str:
    full = _out_path(path)
    with open(full, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
    return full


def _json_dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _post(server: str, endpoint: str, payload: dict) -> dict:
    import httpx

    try:
        response = httpx.post(server.rstrip("/") + endpoint, json=payload,
                              timeout=600.0)
    except httpx.HTTPError as err:
        raise service.InputError(f"cannot reach {server}: {err}") from err
    if response.status_code >= 400:
        raise service.InputError(
            f"server returned {response.status_code}: {response.text}")
    return response.json()


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def _parse_point(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError as err:
        raise service.InputError(f"bad point {text!r}: {err}") from err


def _parse_vector(text: str | None) -> list[float] | None:
    return None if text is None else _parse_point(text)


def cmd_curvature(args) -> int:
    request = service.CurvatureRequest(
        chart=args.chart,
        dim=args.dim,
        radius=args.radius,
        points=[_parse_point(p) for p in args.point],
        gamma=args.gamma,
        tolerance=args.tolerance,
        t1=_parse_vector(args.t1),
        t2=_parse_vector(args.t2),
        t3=_parse_vector(args.t3),
    )
    if args.server:
        report = _post(args.server, "/curvature", request.model_dump())
    else:
        report = service.run_curvature(request).model_dump()
    if args.format == "csv":
        payload = sdg_comparison_csv(report["records"])
        default_name = "curvature_report.csv"
    else:
        payload = _json_dumps(report)
        default_name = "curvature_report.json"
    path = _write(args.output or default_name, payload)
    status = "ok" if report["passed"] else "tolerance exceeded"
    print(f"{report['chart']}: max_rel_err={report['max_rel_err']:.3e} "
          f"tolerance={report['tolerance']:.3e} -> {status} ({path})")
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def cmd_algebra(args) -> int:
    request = service.AlgebraRequest(spec=args.spec, expr=args.expr)
    if args.server:
        result = _post(args.server, "/algebra", request.model_dump())
    else:
        result = service.run_algebra(request).model_dump()
    print(result["canonical"])
    print(f"augmentation: {result['augmentation']}")
    if args.output:
        path = _write(args.output, _json_dumps(result))
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _parse_tau(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise service.InputError(
            f"bad tau range {text!r}; expected lo:hi, e.g. -2:2")
    try:
        return float(lo), float(hi)
    except ValueError as err:
        raise service.InputError(f"bad tau range {text!r}: {err}") from err


def _timeline_csv_from_rows(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "rho", "regime", "curvature_scalar",
                     "curvature_weil_json", "side"])
    for row in rows:
        writer.writerow([
            _fmt(row["tau"]),
            _fmt(row["rho"]),
            row["regime"],
            "" if row["curvature_scalar"] is None else _fmt(row["curvature_scalar"]),
            "" if row["curvature_weil"] is None else json.dumps(
                row["curvature_weil"], sort_keys=True, separators=(",", ":")),
            row["side"],
        ])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    tau_min, tau_max = _parse_tau(args.tau)
    request = service.SimulateRequest(
        h=args.h, tau_min=tau_min, tau_max=tau_max, steps=args.steps,
        order_k=args.order_k, m=args.m, profile=args.profile,
        epsilon1=args.eps1, epsilon2=args.eps2)
    if args.server:
        result = _post(args.server, "/simulate", request.model_dump())
    else:
        result = service.run_simulate(request).model_dump()
    if args.format == "csv":
        payload = _timeline_csv_from_rows(result["timeline"])
        default_name = "timeline.csv"
    else:
        payload = _json_dumps(result["timeline"])
        default_name = "timeline.json"
    timeline_path = _write(args.output or default_name, payload)
    atlas_path = _write(args.atlas_output or "atlas.json",
                        _json_dumps(result["atlas"]))
    regimes = [row["regime"] for row in result["timeline"]]
    print(f"{len(regimes)} samples, regimes: {' '.join(regimes)}")
    print(f"guarded divisions below threshold: {result['guarded_divisions']}")
    print(f"wrote {timeline_path} and {atlas_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    request = service.SelftestRequest(suites=args.suite or None)
    if args.server:
        result = _post(args.server, "/selftest", request.model_dump())
    else:
        result = service.run_selftest_request(request).model_dump()
    for suite in result["suites"]:
        mark = "ok" if suite["passed"] else "FAIL"
        print(f"{suite['name']}: {suite['cases']} cases -> {mark}")
        for failure in suite["failures"]:
            print(f"  failed: {failure}", file=sys.stderr)
    if not result["ok"]:
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("weilgeo.service:app", host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------

class _ArgumentParser(argparse.ArgumentParser):
    """Treats values like "-2:2" and "-1.0,2.0" as values, not options,
    and shows defaults in help.  Subcommand parsers inherit this class."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("formatter_class",
                          argparse.ArgumentDefaultsHelpFormatter)
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d+[\d.,:]*$")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="weilgeo",
        description=("Nilpotent-infinitesimal algebra, synthetic curvature "
                     "and the regime-switching shrinking-universe "
                     "simulator."),
        epilog=f"Relative output paths resolve against ${OUT_DIR_ENV} when set.",
    )
    parser.add_argument("--version", action="version",
                        version=f"weilgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature",
                       help="synthetic vs classical curvature comparison")
    p.add_argument("--chart", required=True,
                   choices=["euclidean", "sphere2", "sphere3"])
    p.add_argument("--radius", type=float, help="sphere radius")
    p.add_argument("--dim", type=int, help="euclidean dimension")
    p.add_argument("--point", action="append", required=True,
                   help="comma-separated coordinates; repeatable")
    p.add_argument("--gamma", choices=["closed", "fd"], default="closed",
                   help="closed-form Christoffel symbols or finite differences")
    p.add_argument("--tolerance", type=float,
                   help="relative tolerance (default 1e-6 closed, 1e-3 fd)")
    p.add_argument("--t1", help="comma-separated vector (default e1)")
    p.add_argument("--t2", help="comma-separated vector (default e2)")
    p.add_argument("--t3", help="comma-separated vector (default t1)")
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="report format")
    p.add_argument("--output", help="report path")
    p.add_argument("--server", help="POST to a running service instead")
    p.set_defaults(fn=cmd_curvature)

    p = sub.add_parser("algebra",
                       help="evaluate an expression in a Weil algebra",
                       epilog=SPEC_SYNTAX_HELP)
    p.add_argument("--spec", required=True, help='e.g. "D(2)" or "D_2(3)"')
    p.add_argument("--expr", required=True,
                   help='e.g. "(1+x1)*(1+x2)"; grammar: +, *, ints, parens')
    p.add_argument("--output", help="optional JSON output path")
    p.add_argument("--server", help="POST to a running service instead")
    p.set_defaults(fn=cmd_algebra)

    p = sub.add_parser("simulate", help="run the hybrid shrinking timeline")
    p.add_argument("--h", type=float, required=True,
                   help="regime threshold diameter (> 0)")
    p.add_argument("--tau", default="-2:2", help="time range lo:hi")
    p.add_argument("--steps", type=int, default=9,
                   help="number of uniform time samples (>= 2)")
    p.add_argument("--profile", default="abs", help="shrink profile name")
    p.add_argument("--order-k", dest="order_k", type=int, default=1,
                   help="nilpotency order of the infinitesimal regime")
    p.add_argument("--m", type=int, default=4,
                   help="infinitesimal representation dimension (4..8)")
    p.add_argument("--eps1", type=float, default=0.1, help="upper patch margin")
    p.add_argument("--eps2", type=float, default=0.1, help="lower patch margin")
    p.add_argument("--format", choices=["csv", "json"], default="csv",
                   help="timeline format")
    p.add_argument("--output", help="timeline path")
    p.add_argument("--atlas-output", dest="atlas_output",
                   help="atlas report path")
    p.add_argument("--server", help="POST to a running service instead")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("selftest", help="run the module invariant suites")
    p.add_argument("--suite", action="append",
                   help="restrict to named suites; repeatable")
    p.add_argument("--server", help="POST to a running service instead")
    p.set_defaults(fn=cmd_selftest)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except service.InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
