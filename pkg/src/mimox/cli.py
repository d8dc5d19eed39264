"""Command-line front end: ``region``, ``construct``, ``simulate``, ``sweep``.

Reports are deterministic: sorted keys, floats at 12 significant digits,
rationals as ``"p/q"`` strings and complex matrices as row-major
``[re, im]`` pairs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import __version__
from .alignment import (
    BeamformingPlan,
    construct_three_symbol_plan,
    construct_time_varying_plan,
    construct_zero_forcing_plan,
    diagnose,
    randomize_aligned_directions,
)
from .cognitive import (
    INTERFERENCE_CASES,
    CognitivePlan,
    cognitive_interference_plan,
    cognitive_rx_plan,
    cognitive_tx_plan,
)
from .errors import MimoxError
from .numerics import LINKS, RANK_TOL, AntennaConfig, child_seed, per_slot_channel_set, random_channel_set
from .region import (
    check_zfx_bound,
    enumerate_vertices,
    eta_mbi,
    eta_out_closed_form,
    integer_innerbound_max,
    max_weighted_sum,
    outerbound_polytope,
)
from .simulator import SnrSweep, estimate_dof

SCHEMA = 1
SCHEMES = ("zero-forcing", "three-symbol", "time-varying", "cognitive-tx", "cognitive-rx", "cognitive-ic")
SCHEME_ALIASES = {"theorem3": "zero-forcing", "theorem5": "three-symbol"}
PLAN_TAG = 1
BASELINE_TAG = 2
CSV_HEADER = ("snr_db", "sum_rate", "r11", "r12", "r21", "r22")
SWEEP_HEADER = ("m1", "m2", "n1", "n2", "eta_out", "lp_max", "integer_max", "status")
GRID_LIMIT = 8


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- encoding

def _num(x: float) -> Any:
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    return float(f"{x:.12g}")


def encode(value: Any) -> Any:
    """JSON-ready form of results (see module docstring for conventions)."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _num(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_num(value.real), _num(value.imag)]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value) or value.ndim == 2:
            arr = np.atleast_2d(np.asarray(value, dtype=complex))
            return [[[_num(z.real), _num(z.imag)] for z in row] for row in arr]
        return [encode(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [encode(v) for v in items]
    return value


def dumps(report: dict) -> str:
    return json.dumps(encode(report), sort_keys=True, indent=2) + "\n"


def input_hash(config: dict) -> str:
    canonical = json.dumps(encode(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------- parsing

def _int_list(text: str, count: int | None, name: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name} must be comma-separated integers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"{name} needs {count} values, got {len(values)}")
    return values


def _antennas(text: str) -> AntennaConfig:
    values = _int_list(text, 4, "--antennas")
    try:
        return AntennaConfig(*values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dof(text: str) -> tuple[int, ...]:
    values = _int_list(text, 4, "--dof")
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("--dof entries must be nonnegative")
    return values


def _snr(text: str) -> SnrSweep:
    try:
        return SnrSweep(tuple(float(v) for v in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--snr: {exc}") from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _tol(text: str) -> float:
    value = float(text)
    if not (0 < value < 1):
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return value


def _links(text: str) -> tuple[str, ...]:
    links = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [v for v in links if v not in LINKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown links {bad}; choose from {list(LINKS)}")
    return links


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimox", description="DoF regions and alignment schemes for the MIMO X channel")
    parser.add_argument("--version", action="version", version=f"mimox {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def output(p):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    region = sub.add_parser("region", help="outer region, vertices and sum-DoF values")
    region.add_argument("--antennas", type=_antennas, required=True, metavar="M1,M2,N1,N2")
    output(region)

    for name, helptext in (("construct", "build a beamforming plan and report diagnostics"),
                           ("simulate", "finite-SNR rate curve and DoF slope")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--scheme", type=lambda s: SCHEME_ALIASES.get(s, s), choices=SCHEMES, required=True)
        p.add_argument("--antennas", type=_antennas, metavar="M1,M2,N1,N2")
        p.add_argument("--m", type=_positive_int, help="antennas per node for equal-antenna schemes")
        p.add_argument("--dof", type=_dof, metavar="d11,d12,d21,d22")
        p.add_argument("--case", choices=INTERFERENCE_CASES, help="sharing case for cognitive-ic")
        p.add_argument("--varying", type=_links, default=LINKS,
                       help="links whose coefficient changes per slot (time-varying scheme)")
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--tol", type=_tol, default=RANK_TOL)
        if name == "simulate":
            p.add_argument("--snr", type=_snr, default=SnrSweep(), metavar="dB,dB,...")
            p.add_argument("--baseline", choices=("misaligned",),
                           help="replace aligned directions with random ones (zero-forcing only)")
        output(p)

    sweep = sub.add_parser("sweep", help="closed form vs vertex enumeration over an antenna grid")
    sweep.add_argument("--grid-min", type=int, default=1)
    sweep.add_argument("--grid-max", type=int, default=4)
    output(sweep)
    return parser


# ---------------------------------------------------------------- commands

def _vertex(v) -> dict:
    return {"point": list(v.point), "active": sorted(v.active)}


def cmd_region(args) -> dict:
    cfg = args.antennas
    poly = outerbound_polytope(cfg)
    lp_value, lp_vertex = max_weighted_sum(poly)
    best_int, arg_int = integer_innerbound_max(cfg)
    return {
        "inequalities": [
            {"label": label, "coefficients": list(c), "bound": b}
            for label, (c, b) in zip(poly.labels, poly.inequalities)
        ],
        "vertices": [_vertex(v) for v in enumerate_vertices(poly)],
        "eta_out": eta_out_closed_form(cfg),
        "eta_out_lp": lp_value,
        "eta_out_lp_vertex": _vertex(lp_vertex),
        "eta_mbi": eta_mbi(cfg),
        "integer_innerbound_max": best_int,
        "integer_innerbound_argmax": list(arg_int),
        "zfx_bound_holds": check_zfx_bound(cfg),
    }


def _equal_config(args) -> AntennaConfig:
    if args.m is not None:
        return AntennaConfig.equal(args.m)
    if args.antennas is not None:
        if len(set(args.antennas.as_tuple())) != 1:
            raise UsageError(f"--scheme {args.scheme} needs equal antenna counts; use --m")
        return args.antennas
    raise UsageError(f"--scheme {args.scheme} needs --m")


def build_plan(args):
    """Channels and plan for the requested scheme."""
    seed = args.seed
    plan_seed = child_seed(seed, PLAN_TAG)
    if args.scheme == "zero-forcing":
        if args.antennas is None or args.dof is None:
            raise UsageError("--scheme zero-forcing needs --antennas and --dof")
        channels = random_channel_set(args.antennas, seed)
        return channels, construct_zero_forcing_plan(channels, args.dof, plan_seed, args.tol)
    if args.scheme == "time-varying":
        channels = per_slot_channel_set(seed, 3, args.varying)
        return channels, construct_time_varying_plan(channels, plan_seed, args.tol)
    channels = random_channel_set(_equal_config(args), seed)
    if args.scheme == "three-symbol":
        return channels, construct_three_symbol_plan(channels, plan_seed, args.tol)
    if args.scheme == "cognitive-tx":
        return channels, cognitive_tx_plan(channels, plan_seed, args.tol)
    if args.scheme == "cognitive-rx":
        return channels, cognitive_rx_plan(channels, plan_seed, args.tol)
    if args.case is None:
        raise UsageError("--scheme cognitive-ic needs --case")
    return channels, cognitive_interference_plan(channels, args.case, plan_seed, args.tol)


def _alignment(meta) -> dict:
    return {"r1": meta.r1, "r2": meta.r2, "r": meta.r, "r0": meta.r0,
            "aligned_pairs": [list(p) for p in meta.pairs], "zero_forced": list(meta.zero_forced)}


def describe_plan(channels, plan) -> dict:
    base = plan.plan if isinstance(plan, CognitivePlan) else plan
    out = {
        "scheme": base.scheme,
        "counts": list(base.counts),
        "extension_factor": base.extension_factor,
        "streams_per_use": base.counts.total / base.extension_factor,
        "beamformers": {f"v{m}": base.v(m) for m in LINKS},
        "alignment": {"rx1": _alignment(base.rx1), "rx2": _alignment(base.rx2)},
        "certificates": dict(base.certificates),
    }
    if isinstance(plan, CognitivePlan):
        out["certificates"].update(plan.certificates)
        out["sharing"] = {"channel": plan.pattern.channel, "shared": [list(p) for p in sorted(plan.pattern.shared)]}
        out["linked_payloads"] = [
            {"source": l.source, "mirror": l.mirror, "sign": complex(l.sign), "directions": l.directions}
            for l in plan.linked_payloads
        ]
        out["subtraction_rules"] = [{"receiver": r, "cancels": m} for r, m in plan.subtraction_rules]
    else:
        diag = diagnose(channels, plan)
        out["diagnostics"] = {
            "interference_dims_rx1": diag.interference_dims_rx1,
            "interference_dims_rx2": diag.interference_dims_rx2,
            "desired_plus_interference_rank_rx1": diag.desired_plus_interference_rank_rx1,
            "desired_plus_interference_rank_rx2": diag.desired_plus_interference_rank_rx2,
            "alignment_residual": diag.alignment_residual,
            "zero_forcing_residual": diag.zero_forcing_residual,
        }
    return out


def cmd_construct(args) -> dict:
    channels, plan = build_plan(args)
    return describe_plan(channels, plan)


def cmd_simulate(args) -> dict:
    channels, plan = build_plan(args)
    if args.baseline == "misaligned":
        if not isinstance(plan, BeamformingPlan) or args.scheme != "zero-forcing":
            raise UsageError("--baseline misaligned applies to --scheme zero-forcing")
        plan = randomize_aligned_directions(plan, child_seed(args.seed, BASELINE_TAG))
    est = estimate_dof(channels, plan, args.snr, args.tol)
    return {
        "scheme": (plan.plan if isinstance(plan, CognitivePlan) else plan).scheme,
        "baseline": args.baseline,
        "rate_curve": [dict(zip(CSV_HEADER, row)) for row in est.curve.rows()],
        "slope": {
            "total_dof": est.total_dof,
            "per_message_dof": dict(zip(("d11", "d12", "d21", "d22"), est.per_message_dof)),
            "fit_residual": est.fit_residual,
        },
    }


def cmd_sweep(args) -> dict:
    lo, hi = args.grid_min, args.grid_max
    if lo < 1 or hi > GRID_LIMIT:
        raise UsageError(f"grid bounds must lie in 1..{GRID_LIMIT}")
    rows = []
    for counts in itertools.product(range(lo, hi + 1), repeat=4):
        cfg = AntennaConfig(*counts)
        closed = eta_out_closed_form(cfg)
        lp, _ = max_weighted_sum(outerbound_polytope(cfg))
        best_int, _ = integer_innerbound_max(cfg)
        integral = lp.denominator == 1
        ok = closed == lp and best_int <= closed and (best_int == lp or not integral)
        status = "fail" if not ok else ("pass" if best_int == lp else "pass-fractional-gap")
        rows.append({"antennas": list(counts), "eta_out": closed, "lp_max": lp,
                     "integer_max": best_int, "status": status})
    return {
        "grid": [lo, hi],
        "configs": rows,
        "all_pass": all(r["status"] != "fail" for r in rows),
        "fractional_gaps": sum(r["status"] == "pass-fractional-gap" for r in rows),
    }


COMMANDS = {"region": cmd_region, "construct": cmd_construct, "simulate": cmd_simulate, "sweep": cmd_sweep}


# ---------------------------------------------------------------- output

def _csv_text(command: str, results: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if command == "simulate":
        writer.writerow(CSV_HEADER)
        for row in results["rate_curve"]:
            writer.writerow([f"{float(row[k]):.12g}" for k in CSV_HEADER])
    elif command == "sweep":
        writer.writerow(SWEEP_HEADER)
        for r in results["configs"]:
            writer.writerow([*r["antennas"], encode(r["eta_out"]), encode(r["lp_max"]), r["integer_max"], r["status"]])
    else:
        raise UsageError("--format csv is available for simulate and sweep")
    return buf.getvalue()


def _config_echo(args) -> dict:
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in ("out", "format"):
            continue
        if isinstance(value, AntennaConfig):
            value = list(value.as_tuple())
        elif isinstance(value, SnrSweep):
            value = list(value.points_db)
        echo[key] = value
    return echo


def run(argv: Sequence[str] | None = None) -> tuple[str, str | None]:
    """Parse and execute; returns ``(report_text, out_path)`` without writing files."""
    args = build_parser().parse_args(argv)
    results = COMMANDS[args.command](args)
    if args.format == "csv":
        return _csv_text(args.command, results), args.out
    config = _config_echo(args)
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "config": config,
        "input_hash": input_hash(config),
        "tool_version": __version__,
        "seed": getattr(args, "seed", None),
        "results": results,
    }
    return dumps(report), args.out


def main(argv: Sequence[str] | None = None) -> int:
    try:
        text, out = run(argv)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, MimoxError):
            print(f"mimox: {type(exc).__name__}: {exc}", file=sys.stderr)
            return exc.exit_code
        print(f"mimox: error: {exc}", file=sys.stderr)
        return 2
    except MimoxError as exc:
        print(f"mimox: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
