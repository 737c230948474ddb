"""Command-line front end.

Each subcommand builds a request from a JSON run configuration
(``--config``), a spacetime spec (``--spec``) and flags, in that order of
increasing precedence, validates it, and then either runs it in-process or
posts it to a running service (``--server``).

Exit codes: 0 success, 1 a verified comparison property failed (the failing
sample is printed on stderr), 2 usage, config or domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from . import __version__
from .schemas import REQUESTS, TOLERANCE_FIELDS, CommandResponse, RunConfig
from .workflows import CSV_COLUMNS, parse_request, respond

SEED_ENV = "LORENTZ_COMPARE_SEED"

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

SUMMARIES = {
    "table": "closed-form comparison model row for (kappa, beta, n)",
    "riccati": "scalar Riccati run, or seeded matrix runs checked against dim * s_kappa",
    "geodesic": "integrate a geodesic of a spec spacetime",
    "tau": "time separation between two points, or signed distance to the spec hypersurface",
    "busemann": "Busemann function of the normal ray at a foot point, with truncations",
    "compare": "area and volume ratio monotonicity against a comparison model",
    "split": "reconstruct the level-set metrics from the model warping function",
    "counterexample": "two models satisfying the same weak curvature condition with different volumes",
}


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _float_rows(text: str) -> List[List[float]]:
    return [_floats(row) for row in text.split(";") if row.strip()]


def _default(command: str, name: str) -> str:
    field = REQUESTS[command].model_fields[name]
    if field.is_required():
        return "required"
    value = field.get_default(call_default_factory=True)
    return f"default: {value}"


def _add(p, command: str, flag: str, help_text: str, **kw):
    name = kw.pop("dest", flag.lstrip("-").replace("-", "_"))
    p.add_argument(flag, dest=name, default=None, help=f"{help_text} ({_default(command, name)})", **kw)


def _common(p) -> None:
    g = p.add_argument_group("run options")
    g.add_argument("--spec", help="spacetime spec JSON file (overrides spec_path in --config)")
    g.add_argument("--config", help="JSON run configuration; unknown keys are rejected and flags override it")
    g.add_argument("--dry-run", action="store_true", help="validate the configuration without computing")
    g.add_argument("--seed", type=int, default=None,
                   help=f"random seed (fallback: ${SEED_ENV}, then the request default 0)")
    g.add_argument("--format", choices=("json", "csv"), default=None, help="output format (default: json)")
    g.add_argument("--output", default=None, help="write the output to this file instead of stdout")
    g.add_argument("--jobs", type=int, default=None, help="worker processes for batched runs (default: 1)")
    g.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                   help="tolerance override; repeatable")
    g.add_argument("--server", default=None, help="service base URL; without it the run is in-process")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorentz-compare",
        description="Lorentzian comparison geometry on warped-product spacetimes. Points are given as "
                    "t,x1,...,xm; write negative leading values as --p=-1,0.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for command, summary in SUMMARIES.items():
        tols = ", ".join(TOLERANCE_FIELDS[command]) or "none"
        p = sub.add_parser(command, help=summary, description=summary,
                           epilog=f"CSV columns: {CSV_COLUMNS[command]}. Tolerance keys: {tols}.")
        _common(p)
        _COMMAND_FLAGS[command](p, command)
    return parser


def _flags_table(p, c):
    _add(p, c, "--kappa", "curvature bound kappa", type=float)
    _add(p, c, "--beta", "mean curvature bound beta", type=float)
    _add(p, c, "--n", "spacetime dimension", type=int)


def _flags_riccati(p, c):
    _add(p, c, "--kappa", "kappa of the Riccati equation", type=float)
    _add(p, c, "--mode", "scalar initial value problem or matrix comparison runs",
         choices=("scalar", "matrix"))
    _add(p, c, "--dim", "matrix dimension", type=int)
    _add(p, c, "--t0", "scalar start time", type=float)
    _add(p, c, "--s0", "scalar initial value", type=float)
    _add(p, c, "--direction", "scalar integration direction", choices=("forward", "backward"))
    _add(p, c, "--horizon", "integration length", type=float)
    _add(p, c, "--eps0", "matrix runs start at (s_kappa - eps0) Id", type=float)
    _add(p, c, "--t-start", "matrix start time standing in for t -> 0", type=float)
    _add(p, c, "--perturbations", "seeded PSD perturbation runs after the saturating one", type=int)
    _add(p, c, "--support", "lo,hi support of the perturbation bump", type=_floats)


def _flags_geodesic(p, c):
    _add(p, c, "--p", "initial point t,x1,...", type=_floats)
    _add(p, c, "--v", "initial velocity dt,dx1,...", type=_floats)
    _add(p, c, "--span", "affine parameter span", type=float)
    _add(p, c, "--samples", "output samples", type=int)


def _flags_tau(p, c):
    _add(p, c, "--p", "past point t,x1,...", type=_floats)
    _add(p, c, "--q", "future point t,x1,...", type=_floats)
    p.add_argument("--to-sigma", dest="to_sigma", action="store_const", const=True, default=None,
                   help="signed distance from the spec hypersurface to q (default: False)")


def _flags_busemann(p, c):
    _add(p, c, "--foot", "fiber coordinates x1,... of the ray's foot point", type=_floats)
    _add(p, c, "--x", "evaluation point t,x1,...", type=_floats)
    _add(p, c, "--schedule", "increasing ray parameters r1,r2,...", type=_floats)
    p.add_argument("--asymptote", action="store_const", const=True, default=None,
                   help="also compute the asymptote at x (default: False)")


def _flags_compare(p, c):
    _add(p, c, "--kappa", "model kappa", type=float)
    _add(p, c, "--beta", "model beta", type=float)
    _add(p, c, "--radius", "radius of the fiber ball A", type=float)
    _add(p, c, "--t-grid", "increasing positive distances t1,t2,...", type=_floats)


def _flags_split(p, c):
    _add(p, c, "--kappa", "model kappa (taken from a model spec when omitted)", type=float)
    _add(p, c, "--beta", "model beta (taken from a model spec when omitted)", type=float)
    _add(p, c, "--t-grid", "increasing positive distances t1,t2,...", type=_floats)
    _add(p, c, "--fiber-samples", "fiber points 'x1,..;x1,..'", type=_float_rows)


def _flags_counterexample(p, c):
    _add(p, c, "--kappa", "weak curvature bound kappa (<= 0)", type=float)
    _add(p, c, "--beta", "weak mean curvature bound beta", type=float)
    _add(p, c, "--beta-tildes", "model betas to compare b1,b2,...", type=_floats)
    _add(p, c, "--n", "spacetime dimension", type=int)
    _add(p, c, "--t-eval", "time at which volumes are compared", type=float)


_COMMAND_FLAGS = {
    "table": _flags_table,
    "riccati": _flags_riccati,
    "geodesic": _flags_geodesic,
    "tau": _flags_tau,
    "busemann": _flags_busemann,
    "compare": _flags_compare,
    "split": _flags_split,
    "counterexample": _flags_counterexample,
}


# run options whose names coincide with request fields; handled separately
_RUN_OPTIONS = ("spec", "seed", "tol")


def _read_json(path: Path, what: str) -> dict:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {what} {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{what} {path} must hold a JSON object")
    return data


def _env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def build_request(args: argparse.Namespace):
    """Merge config file, spec file and flags into a validated request.

    Returns ``(request, config)``; raises UsageError or ValidationError.
    """
    command = args.command
    config = RunConfig()
    base = Path.cwd()
    if args.config:
        cpath = Path(args.config)
        config = RunConfig.model_validate(_read_json(cpath, "config"))
        base = cpath.parent
    if config.command is not None and config.command != command:
        raise UsageError(f"config is for {config.command!r}, not {command!r}")
    model = REQUESTS[command]
    fields = model.model_fields
    params = dict(config.params)

    spec_path = Path(args.spec) if args.spec else (base / config.spec_path if config.spec_path else None)
    if spec_path is not None:
        if "spec" not in fields:
            raise UsageError(f"{command} does not take a spacetime spec")
        params["spec"] = _read_json(spec_path, "spec")

    for name in fields:
        if name in _RUN_OPTIONS:
            continue
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value

    tolerances = dict(config.tolerances)
    for item in args.tol:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects KEY=VALUE, got {item!r}")
        try:
            tolerances[key.strip()] = float(value)
        except ValueError as exc:
            raise UsageError(f"--tol {key}: {value!r} is not a number") from exc
    allowed = TOLERANCE_FIELDS[command]
    for key, value in tolerances.items():
        if key not in allowed:
            raise UsageError(f"unknown tolerance {key!r} for {command}; allowed: {', '.join(allowed) or 'none'}")
        params[key] = value

    if "seed" in fields:
        seed = args.seed if args.seed is not None else config.seed
        if seed is None:
            seed = _env_seed()
        if seed is not None:
            params["seed"] = seed
    return parse_request(command, params), config


def _post(server: str, command: str, request, jobs: int, dry_run: bool) -> CommandResponse:
    import httpx

    url = f"{server.rstrip('/')}/{command}"
    try:
        resp = httpx.post(url, json=request.model_dump(mode="json"),
                          params={"jobs": jobs, "dry_run": str(dry_run).lower()}, timeout=None)
    except httpx.HTTPError as exc:
        raise UsageError(f"cannot reach {url}: {exc}") from exc
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise UsageError(f"server answered {resp.status_code}: {detail}")
    return CommandResponse.model_validate(resp.json())


def render(response: CommandResponse, fmt: str) -> str:
    if fmt == "csv" and response.csv is not None:
        return response.csv
    payload = response.model_dump(exclude={"csv"})
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        request, config = build_request(args)
        fmt = args.format or config.output.format
        out_path = args.output or config.output.path
        jobs = args.jobs if args.jobs is not None else config.jobs
        if jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if args.server:
            response = _post(args.server, args.command, request, jobs, args.dry_run)
        else:
            response = respond(args.command, request, jobs=jobs, dry_run=args.dry_run)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(response, fmt)
    if out_path:
        try:
            Path(out_path).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    if response.violation:
        print(f"violation: {response.failing_sample}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


__all__ = ["build_parser", "build_request", "main", "render"]
