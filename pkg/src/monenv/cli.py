"""Command-line front-end.

Exit codes
----------
0  success
1  numerical failure (non-convergence, floating-point breakdown)
2  bad command-line flags or arguments
3  invalid or unsupported instance

Errors are reported as a JSON object ``{"error", "message", "exit_code"}`` on
stderr. Floats are written with 17 significant digits in CSV; JSON uses the
shortest representation that round-trips to the same double.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import schema
from .branching import BranchKind, ConvergenceError, balanced_point, min_volume_family
from .core import InvalidInstanceError, MonomialInstance, cone_params, eval_f, identities_ok, wedge_params
from .envelopes import EnvelopeKind, lower_env_value, membership, upper_env_value
from .geometry2d import volume
from .oracle import tightness_comparison

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_INSTANCE = 0, 1, 2, 3

_SETS = {"hull": EnvelopeKind.HULL_2D, "Y": EnvelopeKind.Y_PROJECTION,
         "upper": EnvelopeKind.UPPER_WEDGE, "orthant": EnvelopeKind.UPPER_ORTHANT}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return values


def _oracle(text: str):
    if text == "quad":
        return ("quad",)
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "mc":
        try:
            seed, n = int(parts[1]), int(float(parts[2]))
        except ValueError:
            pass
        else:
            if seed >= 0 and n >= 1000:
                return ("mc", seed, n)
    raise argparse.ArgumentTypeError("expected 'quad' or 'mc:SEED:N' with SEED >= 0 and N >= 1000")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="monenv", description="Envelopes, hulls and branching for monomials on a wedge.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-i", "--instance", required=True, help="instance JSON file ('-' for stdin)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    command("params", "cone and wedge parameters")
    p = command("eval", "f and both envelopes at a point")
    p.add_argument("-x", type=_floats, required=True)
    p.add_argument("--with-z", type=float, dest="with_z")
    p = command("check", "membership of (x, z) in a convex set")
    p.add_argument("-x", type=_floats, required=True)
    p.add_argument("--z", type=float)
    p.add_argument("--set", choices=tuple(_SETS), default="hull", dest="set_name")
    p = command("volume", "hull volume, optionally cross-checked")
    p.add_argument("--oracle", type=_oracle)
    p = command("branch", "branching point selection")
    p.add_argument("--criterion", choices=("balanced", "minvol"), default="balanced")
    p.add_argument("--on", choices=("ratio", "value", "both"), default="both")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--eps", type=float)
    p = command("levelset", "points of the level curves f = xi between the wedge faces")
    p.add_argument("--xi", type=_floats, required=True)
    p.add_argument("--points", type=int, default=200)
    p = command("compare", "wedge hull versus McCormick (bilinear instances)")
    p.add_argument("--grid", type=int, default=100)
    return parser


def load_instance(path: str) -> MonomialInstance:
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_INSTANCE, "instance", f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INSTANCE, "instance", f"{path} is not valid JSON: {exc}")
    try:
        schema.validate_instance(data)
    except Exception as exc:  # jsonschema.ValidationError
        raise CliError(EXIT_INSTANCE, "instance", f"schema violation: {getattr(exc, 'message', exc)}")
    try:
        return MonomialInstance.from_dict(data)
    except InvalidInstanceError as exc:
        raise CliError(EXIT_INSTANCE, "instance", str(exc))


def _need_n2(instance, what):
    if instance.n != 2:
        raise CliError(EXIT_INSTANCE, "instance", f"{what} needs a two-variable instance (n=2), got n={instance.n}")


def _point(instance, x):
    if len(x) != instance.n:
        raise CliError(EXIT_USAGE, "usage", f"-x has {len(x)} coordinates, instance has n={instance.n}")
    if min(x) < 0:
        raise CliError(EXIT_USAGE, "usage", "-x must be non-negative")
    return np.asarray(x, dtype=float)


def cmd_params(inst, args):
    cone, w = cone_params(inst), wedge_params(inst)
    return {
        "z0": cone.z0, "gamma": cone.gamma, "beta": cone.beta,
        "d_i": w.d_i, "d_j": w.d_j, "eta_i": w.eta_i, "eta_j": w.eta_j,
        "lambda": w.lam, "zeta": w.zeta, "sigma": w.sigma, "tau": w.tau,
        "identities_ok": identities_ok(inst),
    }


def cmd_eval(inst, args):
    x = _point(inst, args.x)
    out = {
        "f": eval_f(inst, x),
        "upper_env": upper_env_value(inst, x),
        "lower_env": lower_env_value(inst, x) if inst.n == 2 else None,
    }
    if args.with_z is not None:
        kind = EnvelopeKind.HULL_2D if inst.n == 2 else EnvelopeKind.UPPER_WEDGE
        out["z"] = args.with_z
        out["verdict"] = membership(inst, kind, x, args.with_z).to_dict()
    return out


def cmd_check(inst, args):
    kind = _SETS[args.set_name]
    if kind.needs_n2:
        _need_n2(inst, f"--set {args.set_name}")
    if kind is not EnvelopeKind.Y_PROJECTION and args.z is None:
        raise CliError(EXIT_USAGE, "usage", f"--set {args.set_name} needs --z")
    return membership(inst, kind, _point(inst, args.x), args.z).to_dict()


def cmd_volume(inst, args):
    _need_n2(inst, "volume")
    oracle = args.oracle or ()
    if oracle[:1] == ("mc",):
        report = volume(inst, quadrature=False, mc_seed=oracle[1], mc_samples=oracle[2])
    else:
        report = volume(inst, quadrature=oracle == ("quad",))
    return report.to_dict()


def cmd_branch(inst, args):
    _need_n2(inst, "branch")
    if not args.tol > 0:
        raise CliError(EXIT_USAGE, "usage", "--tol must be positive")

    def run(kind):
        if args.criterion == "balanced":
            return balanced_point(inst, kind, args.tol)
        return min_volume_family(inst, kind, args.eps, args.tol)

    if args.on != "both":
        return run(BranchKind(args.on)).to_dict()
    ratio, value = run(BranchKind.RATIO), run(BranchKind.VALUE)
    best = ratio if ratio.total <= value.total else value
    return {"ratio": ratio.to_dict(), "value": value.to_dict(), "best": best.to_dict()}


def level_curve(inst: MonomialInstance, xi: float, points: int) -> np.ndarray:
    """``points`` samples ``(x1, x2)`` of ``{f = xi}`` on rays from face P to face Q."""
    a1, a2 = inst.a_i, inst.a_j
    r = np.linspace(inst.p, inst.q, points)
    r[-1] = inst.q
    x1 = np.exp((math.log(xi) - a2 * np.log(r)) / (a1 + a2))
    return np.column_stack([x1, r * x1])


def cmd_levelset(inst, args):
    _need_n2(inst, "levelset")
    if args.points < 2:
        raise CliError(EXIT_USAGE, "usage", "--points must be >= 2")
    if min(args.xi) <= 0:
        raise CliError(EXIT_USAGE, "usage", "--xi values must be positive")
    rows = []
    for xi in args.xi:
        pts = level_curve(inst, xi, args.points)
        for k, (x1, x2) in enumerate(pts):
            rows.append({"xi": xi, "x1": float(x1), "x2": float(x2),
                         "on_P": k == 0, "on_Q": k == args.points - 1})
    return rows


def cmd_compare(inst, args):
    _need_n2(inst, "compare")
    if args.grid < 2:
        raise CliError(EXIT_USAGE, "usage", "--grid must be >= 2")
    try:
        return tightness_comparison(inst, args.grid).to_dict()
    except ValueError as exc:
        raise CliError(EXIT_INSTANCE, "instance", str(exc))


COMMANDS = {
    "params": cmd_params, "eval": cmd_eval, "check": cmd_check, "volume": cmd_volume,
    "branch": cmd_branch, "levelset": cmd_levelset, "compare": cmd_compare,
}


def flatten(data, prefix="") -> dict:
    """Nested dict to a flat ``{"a.b": value}`` mapping."""
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def to_csv(result) -> str:
    rows = [flatten(r) for r in result] if isinstance(result, list) else [flatten(result)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_cell(v) for v in row.values()])
    return buf.getvalue()


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _emit_error(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        inst = load_instance(args.instance)
        result = _plain(COMMANDS[args.command](inst, args))
    except CliError as exc:
        return _emit_error(exc.code, exc.kind, str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ConvergenceError, ArithmeticError) as exc:
        return _emit_error(EXIT_NUMERIC, "numerical", str(exc))
    except ValueError as exc:
        return _emit_error(EXIT_USAGE, "usage", str(exc))
    try:
        text = to_csv(result) if args.format == "csv" else json.dumps(result, allow_nan=False) + "\n"
    except ValueError as exc:  # non-finite number in the result
        return _emit_error(EXIT_NUMERIC, "numerical", str(exc))
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
