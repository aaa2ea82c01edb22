"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(vanishing amplitude, missing bracket, tolerance exceeded, failed checks).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

import numpy as np

from . import analysis
from .checks import CHECKS, run_checks
from .errors import ConfigError, MixPhaseError
from .loops import DEFAULT_STEPS
from .models import ModelConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULTS = {
    "model": "three-level",
    "phase": "interferometric",
    "loop": None,
    "phi0": 0.0,
    "omega": 1,
    "R": 1.0,
    "method": "closed",
    "n_steps": DEFAULT_STEPS,
    "threads": None,
    "output": None,
    "format": None,
    "strict": False,
    "T": None,
    "t_min": 0.2,
    "t_max": 6.0,
    "n_points": 400,
    "spacing": "linear",
    "bracket": None,
    "tol": 1e-10,
    "check": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--model", choices=["two-level", "three-level"], default=S)
    p.add_argument("--phase", choices=["interferometric", "uhlmann", "both"], default=S)
    p.add_argument("--loop", choices=["equator", "meridian"], default=S)
    p.add_argument("--phi0", type=float, default=S, help="meridian longitude in radians")
    p.add_argument("--omega", type=int, default=S, help="winding number")
    p.add_argument("--R", type=float, default=S, help="energy scale")
    p.add_argument("--method", choices=["closed", "numeric", "both"], default=S)
    p.add_argument("--n-steps", dest="n_steps", type=int, default=S, help="steps per winding")
    p.add_argument("--threads", type=int, default=S)
    p.add_argument("--output", default=S, help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=S)
    p.add_argument("--strict", action="store_true", default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="mixphase", description="Interferometric and Uhlmann phases of thermal states.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("phase", help="one amplitude at one temperature, as JSON")
    _common(p)
    p.add_argument("--T", type=float, default=S, help="temperature")

    p = sub.add_parser("sweep", help="temperature sweep, as CSV or JSON")
    _common(p)
    p.add_argument("--t-min", dest="t_min", type=float, default=S)
    p.add_argument("--t-max", dest="t_max", type=float, default=S)
    p.add_argument("--n-points", dest="n_points", type=int, default=S)
    p.add_argument("--spacing", choices=["linear", "log"], default=S)

    p = sub.add_parser("find-tc", help="transition temperature by bisection")
    _common(p)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("T_LO", "T_HI"), default=S)
    p.add_argument("--tol", type=float, default=S)

    p = sub.add_parser("verify", help="run the verification suite")
    _common(p)
    p.add_argument("--check", action="append", choices=sorted(CHECKS), default=S)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    opts = dict(DEFAULTS)
    if args.command == "verify":
        opts["n_steps"] = 4000
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config field {key!r}")
            opts[key] = value
    for key, value in vars(args).items():
        if key in DEFAULTS:
            opts[key] = value
    if opts["n_steps"] is None or int(opts["n_steps"]) < 8:
        raise ConfigError("n_steps must be >= 8")
    if opts["threads"] is not None and int(opts["threads"]) < 1:
        raise ConfigError("threads must be >= 1")
    return opts


def _model(opts: dict) -> ModelConfig:
    return ModelConfig(opts["model"], opts["R"], opts["omega"], opts["loop"], opts["phi0"])


def _kinds(opts) -> list[str]:
    return ["interferometric", "uhlmann"] if opts["phase"] == "both" else [opts["phase"]]


def _methods(opts) -> list[str]:
    return ["closed", "numeric"] if opts["method"] == "both" else [opts["method"]]


def _finite(x: float):
    """JSON has no nan/inf; non-finite numbers become null."""
    return x if math.isfinite(x) else None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False, allow_nan=False) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_phase(opts: dict) -> int:
    if opts["T"] is None:
        raise UsageError("--T is required")
    cfg = _model(opts)
    kinds, methods = _kinds(opts), _methods(opts)
    out = {}
    for kind in kinds:
        values = {}
        for m in methods:
            r = analysis.evaluate(cfg, kind, opts["T"], m, int(opts["n_steps"]), strict=True)
            values[m] = r
            sfx = "".join(f"_{s}" for s, multi in ((kind, len(kinds) > 1), (m, len(methods) > 1)) if multi)
            out[f"re_g{sfx}"] = r.G.real
            out[f"im_g{sfx}"] = r.G.imag
            out[f"phase{sfx}"] = _finite(r.phase)
            out[f"visibility{sfx}"] = r.visibility
            out[f"g{sfx}"] = _finite(r.g)
            out[f"residuals{sfx}"] = {k: _finite(float(v)) for k, v in sorted(r.residuals.items())}
        if len(methods) > 1:
            sfx = f"_{kind}" if len(kinds) > 1 else ""
            out[f"abs_diff{sfx}"] = abs(values["closed"].G - values["numeric"].G)
    _emit(_dump(out), opts["output"])
    return EXIT_OK


def _grid(opts) -> np.ndarray:
    lo, hi, n = float(opts["t_min"]), float(opts["t_max"]), int(opts["n_points"])
    if n < 2:
        raise UsageError("n_points must be >= 2")
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise UsageError("need 0 < t_min < t_max")
    if opts["spacing"] == "log":
        return np.geomspace(lo, hi, n)
    if opts["spacing"] != "linear":
        raise UsageError(f"unknown spacing {opts['spacing']!r}")
    return np.linspace(lo, hi, n)


def format_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("T,re_g,im_g,visibility,g,phase\n")
    for r in rows:
        buf.write(",".join("%.17g" % v for v in (r.T, r.re_g, r.im_g, r.visibility, r.g, r.phase)) + "\n")
    return buf.getvalue()


def format_json_rows(rows) -> str:
    keys = ("T", "re_g", "im_g", "visibility", "g", "phase")
    data = [{**{k: _finite(getattr(r, k)) for k in keys}, "error": r.error} for r in rows]
    return _dump({"rows": data})


def cmd_sweep(opts: dict) -> int:
    if opts["phase"] == "both" or opts["method"] == "both":
        raise UsageError("sweep takes a single --phase and a single --method")
    cfg = _model(opts)
    rows = analysis.sweep(cfg, opts["phase"], _grid(opts), opts["method"], int(opts["n_steps"]), opts["threads"])
    fmt = opts["format"] or "csv"
    _emit(format_csv(rows) if fmt == "csv" else format_json_rows(rows), opts["output"])
    failed = [r for r in rows if r.error or math.isnan(r.phase)]
    for r in failed:
        print(f"row T={r.T:.17g}: {r.error or 'zero_amplitude'}", file=sys.stderr)
    if opts["strict"] and failed:
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_find_tc(opts: dict) -> int:
    if opts["phase"] == "both" or opts["method"] == "both":
        raise UsageError("find-tc takes a single --phase and a single --method")
    cfg = _model(opts)
    bracket = tuple(opts["bracket"]) if opts["bracket"] else None
    r = analysis.find_tc(cfg, opts["phase"], bracket, float(opts["tol"]), opts["method"], int(opts["n_steps"]))
    _emit(_dump({"tc": r.tc, "iterations": r.iterations, "visibility_at_tc": r.visibility_at_tc}), opts["output"])
    return EXIT_OK


def cmd_verify(opts: dict) -> int:
    results = run_checks(opts["check"], int(opts["n_steps"]))
    width = max(len(r.name) for r in results)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
    failed = [r.name for r in results if not r.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        lines.append("failed: " + ", ".join(failed))
    _emit("\n".join(lines) + "\n", opts["output"])
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"phase": cmd_phase, "sweep": cmd_sweep, "find-tc": cmd_find_tc, "verify": cmd_verify}


def _error(code: str, message: str) -> None:
    sys.stderr.write(_dump({"error": {"code": code, "message": message}}))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = resolve(args)
        if opts["threads"] is None:
            opts["threads"] = os.cpu_count() or 1
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    except ConfigError as exc:
        _error(exc.code, str(exc))
        return EXIT_USAGE
    except MixPhaseError as exc:
        _error(exc.code, str(exc))
        return EXIT_NUMERIC
    except (TypeError, ValueError) as exc:
        _error("usage", str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
