"""Command-line entry point.

Every subcommand builds a report, renders it as json, latex or csv, and
writes it to ``--output``, to ``$CARLEMAN_BPM_OUTPUT_DIR/<name>.<ext>`` when
that variable is set, or to stdout.  Exit status is 0 when every checked
property passes, 1 when one fails and 2 for a bad configuration.

Settings resolve as flags > ``--config`` JSON file > defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from . import numverify, reports

__all__ = ["main", "build_parser", "ENV_OUTPUT_DIR"]

ENV_OUTPUT_DIR = "CARLEMAN_BPM_OUTPUT_DIR"
EXT = {"json": "json", "latex": "tex", "csv": "csv"}

DEFAULTS = {
    "expand": {"n": 4, "self_check": True},
    "coeffs": {"n": 4, "m": None},
    "identities": {"max_n": 40},
    "verify": {
        "n": 4, "alpha": "1", "x0": None, "t0": None, "beta": None, "T": 1.0, "L": 1.0,
        "nt": 201, "nx": 201, "octaves": 3, "per_octave": 2, "tol": 0.05,
    },
    "caputo": {"power_rule": False, "composition": False, "lift": False, "sizes": [256, 512, 1024, 2048, 4096]},
}


class ConfigError(ValueError):
    pass


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return parse


def _rational(text: str) -> str:
    try:
        Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1 or -3/2, got {text!r}") from None
    return text


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=tuple(EXT), default=S, help="output format (default json)")
    common.add_argument("--output", "-o", type=Path, default=S, help="output file (written atomically)")
    common.add_argument("--config", type=Path, default=S, help="JSON file of settings; flags override it")
    common.add_argument("--schema", action="store_true", default=S, help="print the JSON schema of this command's report")

    p = argparse.ArgumentParser(prog="carleman-bpm", description="Exact and numerical checks for weighted estimates of alpha d_t + d_x^n.")
    p.add_argument("--schema", action="store_true", help="print all report schemas and exit")
    sub = p.add_subparsers(dest="command")

    e = sub.add_parser("expand", parents=[common], help="conjugated expansion and I1/I2/I3 split")
    e.add_argument("--n", type=_int_at_least(0), default=S)
    e.add_argument("--no-self-check", dest="self_check", action="store_false", default=S)

    c = sub.add_parser("coeffs", parents=[common], help="diagonal and cross coefficients by two routes")
    c.add_argument("--n", type=_int_at_least(2), default=S)
    c.add_argument("--m", type=_int_at_least(0), default=S, help="which d_m gets the per-node ledger (default n//2)")

    i = sub.add_parser("identities", parents=[common], help="exhaustive exact identity sweep")
    i.add_argument("--max-n", dest="max_n", type=_int_at_least(2), default=S)

    v = sub.add_parser("verify", parents=[common], help="numerical sweep of the weighted inequality")
    v.add_argument("--n", type=_int_at_least(2), default=S)
    v.add_argument("--alpha", type=_rational, default=S)
    for name in ("x0", "t0", "beta", "T", "L", "tol"):
        v.add_argument(f"--{name}", type=float, default=S)
    v.add_argument("--nt", type=_int_at_least(16), default=S)
    v.add_argument("--nx", type=_int_at_least(16), default=S)
    v.add_argument("--octaves", type=_int_at_least(1), default=S)
    v.add_argument("--per-octave", dest="per_octave", type=_int_at_least(1), default=S)

    k = sub.add_parser("caputo", parents=[common], help="Caputo derivative studies (all three when none selected)")
    k.add_argument("--power-rule", dest="power_rule", action="store_true", default=S)
    k.add_argument("--composition", action="store_true", default=S)
    k.add_argument("--lift", action="store_true", default=S)
    k.add_argument("--sizes", type=_int_at_least(16), nargs="+", default=S)
    return p


def _settings(command: str, ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    cfg.update({"format": "json", "output": None})
    path = getattr(ns, "config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(data)
    cfg.update({k: v for k, v in vars(ns).items() if k not in ("command", "config", "schema")})
    return cfg


def _build(command: str, cfg: dict) -> dict:
    if command == "expand":
        return reports.build_expand(int(cfg["n"]), bool(cfg["self_check"]))
    if command == "coeffs":
        return reports.build_coeffs(int(cfg["n"]), None if cfg["m"] is None else int(cfg["m"]))
    if command == "identities":
        return reports.build_identities(int(cfg["max_n"]))
    if command == "verify":
        grid = numverify.Grid(float(cfg["T"]), float(cfg["L"]), int(cfg["nt"]), int(cfg["nx"]))
        w = numverify.default_weight(grid.T, grid.L)
        w = numverify.WeightSpec(
            w.x0 if cfg["x0"] is None else float(cfg["x0"]),
            w.t0 if cfg["t0"] is None else float(cfg["t0"]),
            w.beta if cfg["beta"] is None else float(cfg["beta"]),
            1.0,
            grid.T,
            grid.L,
        )
        return reports.build_verify(
            int(cfg["n"]), Fraction(str(cfg["alpha"])), grid, w, int(cfg["octaves"]), int(cfg["per_octave"]), float(cfg["tol"])
        )
    if command == "caputo":
        sel = [bool(cfg["power_rule"]), bool(cfg["composition"]), bool(cfg["lift"])]
        if not any(sel):
            sel = [True, True, True]
        sizes = sorted(int(s) for s in cfg["sizes"])
        return reports.build_caputo(*sel, sizes=sizes)
    raise ConfigError(f"unknown command {command!r}")


def _destination(command: str, cfg: dict) -> Path | None:
    if cfg["output"] is not None:
        return Path(cfg["output"])
    base = os.environ.get(ENV_OUTPUT_DIR)
    if base:
        return Path(base) / f"{command}.{EXT[cfg['format']]}"
    return None


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        if ns.schema:
            print(json.dumps({c: reports.load_schema(c) for c in reports.COMMANDS}, indent=2, sort_keys=True))
            return 0
        parser.print_usage(sys.stderr)
        return 2
    if getattr(ns, "schema", False):
        print(json.dumps(reports.load_schema(ns.command), indent=2, sort_keys=True))
        return 0
    try:
        cfg = _settings(ns.command, ns)
        if cfg["format"] not in EXT:
            raise ConfigError(f"format must be one of {sorted(EXT)}")
        report = _build(ns.command, cfg)
        text = reports.render(report, cfg["format"])
    except ValueError as exc:
        print(f"carleman-bpm {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    dest = _destination(ns.command, cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        reports.write_atomic(dest, text)
    return 0 if report.get("pass") else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
