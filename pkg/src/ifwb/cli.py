"""Command-line front end.

Subcommands: rates, optimize-a, region, simulate, sweep. Channels are read
from CSV (one matrix row per line); complex channels are given as a pair of
real/imaginary CSV files and converted to their real block representation.
SNR is given in dB on the command line and converted to a linear power
ratio internally.

Exit codes: 0 success, 2 parse/validation error, 3 singular integer matrix,
4 dimension guard hit. All reports are JSON with at least 12 significant
digits on floats; region and sweep also emit CSV for plotting.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import DimensionTooLarge, IfwbError, SingularA, WrongDimension
from .lattice import int_det
from .linalg import complex_to_real
from .rates import (
    ChannelInstance,
    allocate_rates,
    as_integer_matrix,
    if_effective_model,
    if_rates,
    mmse_sic_plan,
    optimal_a,
    pseudo_triangularize,
    successive_if_rates,
    successive_objective,
    waterfilling_capacity,
    white_input_capacity,
)
from .region import enumerate_achievable_points
from .simulate import SimConfig, run_successive_if_trials

SCHEMES = ("zf-baseline", "mmse-sic", "if", "s-if")
_MODES = {"kz": "kz_exact", "lll": "kz_lll", "brute": "brute_force"}


class CliError(Exception):
    """Input problem mapped to exit code 2."""


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _read_matrix_csv(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = [
                [float(tok) for tok in line.strip().split(",")]
                for line in fh
                if line.strip()
            ]
    except OSError as exc:
        raise CliError(f"cannot read channel file {path}: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"bad number in {path}: {exc}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise CliError(f"{path} is not a rectangular CSV matrix")
    return np.array(rows)


def _load_channel(args) -> ChannelInstance:
    if args.channel is None:
        raise CliError("--channel is required")
    h = _read_matrix_csv(args.channel)
    if getattr(args, "channel_imag", None):
        him = _read_matrix_csv(args.channel_imag)
        if him.shape != h.shape:
            raise CliError("real and imaginary channel files differ in shape")
        h = complex_to_real(h + 1j * him)
    snr_db = _parse_snr_list(args.snr_db)
    if len(snr_db) != 1:
        raise CliError("this subcommand takes a single --snr-db value")
    try:
        return ChannelInstance(h, 10.0 ** (snr_db[0] / 10.0))
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _parse_snr_list(text) -> list[float]:
    if text is None:
        raise CliError("--snr-db is required")
    try:
        values = [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise CliError(f"bad --snr-db value: {exc}") from exc
    if not values or any(not np.isfinite(v) for v in values):
        raise CliError("--snr-db needs one or more finite values")
    return values


def _parse_a_matrix(text: str) -> np.ndarray:
    try:
        rows = [[int(tok) for tok in row.split(",")] for row in text.split(";")]
        return as_integer_matrix(rows)
    except ValueError as exc:
        raise CliError(f"bad --a-matrix: {exc}") from exc


def _parse_order(text: str, m: int) -> tuple:
    try:
        order = tuple(int(tok) - 1 for tok in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad --order: {exc}") from exc
    if sorted(order) != list(range(m)):
        raise CliError(f"--order must be a 1-based permutation of 1..{m}")
    return order


def _one_based(perm) -> list[int]:
    return [int(i) + 1 for i in perm]


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(ch: ChannelInstance, snr_db: float, results: dict, residuals: dict) -> dict:
    return {
        "channel": {
            "rows": ch.num_receive,
            "cols": ch.num_streams,
            "entries": ch.H.tolist(),
        },
        "snr_db": snr_db,
        "results": results,
        "residuals": residuals,
        "version": __version__,
    }


def _resolve_a(ch: ChannelInstance, args) -> np.ndarray:
    if getattr(args, "a_matrix", None):
        a = _parse_a_matrix(args.a_matrix)
        if a.shape[0] != ch.num_streams:
            raise CliError(
                f"--a-matrix must be {ch.num_streams}x{ch.num_streams} for this channel"
            )
        if int_det(a) == 0:
            raise SingularA("--a-matrix is singular")
        return a
    mode = _MODES[getattr(args, "mode", "kz") or "kz"]
    return optimal_a(ch, mode, bound=getattr(args, "coeff_bound", None))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rates(args) -> int:
    ch = _load_channel(args)
    snr_db = _parse_snr_list(args.snr_db)[0]
    a = _resolve_a(ch, args)
    order = _parse_order(args.order, ch.num_streams) if args.order else None

    cap, _ = waterfilling_capacity(ch)
    cwi = white_input_capacity(ch)
    sic = mmse_sic_plan(ch, decode_order=order)
    par = if_rates(ch, a)
    sif = successive_if_rates(ch, a)
    allocations = []
    for tri in pseudo_triangularize(a):
        plan = allocate_rates(ch, a, tri.permutation)
        allocations.append(
            {
                "permutation": _one_based(plan.permutation),
                "stream_rates": list(plan.stream_rates),
                "monotone_feasible": plan.monotone_feasible,
                "sum_rate": plan.sum_rate,
                "sum_rate_gap": plan.sum_rate_gap,
            }
        )
    results = {
        "capacity": cap,
        "white_input_capacity": cwi,
        "a_matrix": a.tolist(),
        "a_det": int_det(a),
        "mmse_sic": {
            "decode_order": _one_based(sic.decode_order),
            "rates": list(sic.rates),
            "stream_rates": list(sic.stream_rates),
            "sum_rate": sic.sum_rate,
        },
        "if": {
            "rates": list(par.rates),
            "raw": list(par.raw),
            "undecodable": list(par.undecodable),
            "symmetric_rate": par.symmetric_rate,
        },
        "successive_if": {
            "per_step": list(sif.per_step),
            "symmetric_total": sif.symmetric_total,
            "sum_rate": sif.sum_rate,
            "sum_rate_gap": sif.det_gap,
        },
        "allocations": allocations,
    }
    residuals = {
        "mmse_sic_sum_minus_cwi": sic.sum_rate - cwi,
        "successive_if_identity": sif.sum_rate + sif.det_gap - cwi,
    }
    _emit(_report(ch, snr_db, results, residuals), args.out)
    return 0


def cmd_optimize_a(args) -> int:
    ch = _load_channel(args)
    snr_db = _parse_snr_list(args.snr_db)[0]
    mode = _MODES[args.mode or "kz"]
    a = optimal_a(ch, mode, bound=args.coeff_bound)
    results = {
        "mode": mode,
        "a_matrix": a.tolist(),
        "a_det": int_det(a),
        "max_step_residual": successive_objective(ch, a),
        "successive_if_per_step": list(successive_if_rates(ch, a).per_step),
    }
    _emit(_report(ch, snr_db, results, {}), args.out)
    return 0


def cmd_region(args) -> int:
    ch = _load_channel(args)
    snr_db = _parse_snr_list(args.snr_db)[0]
    if args.coeff_bound is None or args.coeff_bound < 1:
        raise CliError("--coeff-bound must be a positive integer")
    if ch.num_streams != 2:
        raise WrongDimension("region subcommand needs a 2-stream channel")
    reg = enumerate_achievable_points(ch, args.coeff_bound)

    def point_dict(p):
        return {
            "r1": p.rates[0],
            "r2": p.rates[1],
            "source": p.source,
            "a": [list(row) for row in p.A],
            "det_a": p.det_a,
            "permutation": _one_based(p.permutation),
        }

    results = {
        "coeff_bound": args.coeff_bound,
        "capacity_vertices": [list(v) for v in reg.capacity_vertices],
        "points": [point_dict(p) for p in reg.points],
        "frontier": [point_dict(p) for p in reg.frontier],
    }
    _emit(_report(ch, snr_db, results, {}), args.out)
    csv_lines = ["R1,R2,source,detA"]
    csv_lines += [
        f"{p.rates[0]!r},{p.rates[1]!r},{p.source},{p.det_a}" for p in reg.frontier
    ]
    if args.csv_out:
        _write_text("\n".join(csv_lines) + "\n", args.csv_out)
    return 0


def cmd_simulate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {args.config}: {exc}") from exc
    try:
        if "channel_file" in raw:
            h = _read_matrix_csv(raw["channel_file"])
        else:
            h = np.array(raw["channel"], dtype=float)
        if "channel_imag" in raw:
            h = complex_to_real(h + 1j * np.array(raw["channel_imag"], dtype=float))
        ch = ChannelInstance(h, 10.0 ** (float(raw["snr_db"]) / 10.0))
        a = (
            as_integer_matrix(raw["a_matrix"])
            if "a_matrix" in raw
            else optimal_a(ch, "kz_exact")
        )
        cfg = SimConfig(
            ch=ch,
            A=a,
            pam_points=args.pam if args.pam is not None else int(raw.get("pam_points", 4)),
            trials=args.trials if args.trials is not None else int(raw["trials"]),
            seed=args.seed if args.seed is not None else int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad simulation config: {exc}") from exc

    result = run_successive_if_trials(cfg, noise_scale=float(raw.get("noise_scale", 1.0)))
    analytic = if_effective_model(ch, cfg.A).Ktilde
    scale = float(np.abs(analytic).max())
    results = {
        "a_matrix": cfg.A.tolist(),
        "pam_points": cfg.pam_points,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "symbol_error_rate": list(result.symbol_error_rate),
        "equation_error_rate": list(result.equation_error_rate),
        "empirical_ktilde": result.empirical_Ktilde.tolist(),
        "analytic_ktilde": analytic.tolist(),
        "ktilde_max_abs_relative_error": float(
            np.abs(result.empirical_Ktilde - analytic).max() / scale
        ),
    }
    _emit(_report(ch, float(raw["snr_db"]), results, {}), args.out)
    return 0


def cmd_sweep(args) -> int:
    snr_list = _parse_snr_list(args.snr_db)
    schemes = [s.strip() for s in (args.schemes or ",".join(SCHEMES)).split(",") if s.strip()]
    if not schemes:
        raise CliError("--schemes must name at least one scheme")
    for s in schemes:
        if s not in SCHEMES:
            raise CliError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
    if args.channel is None:
        raise CliError("--channel is required")
    h = _read_matrix_csv(args.channel)
    if getattr(args, "channel_imag", None):
        h = complex_to_real(h + 1j * _read_matrix_csv(args.channel_imag))
    mode = _MODES[args.mode or "kz"]

    lines = ["snr_db,scheme,symmetric_rate,sum_rate"]
    for snr_db in snr_list:
        ch = ChannelInstance(h, 10.0 ** (snr_db / 10.0))
        m = ch.num_streams
        ident = np.eye(m, dtype=np.int64)
        a_opt = optimal_a(ch, mode, bound=args.coeff_bound)
        for scheme in schemes:
            if scheme == "zf-baseline":
                r = if_rates(ch, ident)
                sym, tot = r.symmetric_rate, float(sum(r.rates))
            elif scheme == "mmse-sic":
                plan = mmse_sic_plan(ch)
                sym, tot = m * min(plan.rates), plan.sum_rate
            elif scheme == "if":
                r = if_rates(ch, a_opt)
                sym, tot = r.symmetric_rate, float(sum(r.rates))
            else:  # s-if
                sif = successive_if_rates(ch, a_opt)
                clamped = [max(0.0, v) for v in sif.per_step]
                sym, tot = m * min(clamped), float(sum(clamped))
            lines.append(f"{snr_db!r},{scheme},{sym!r},{tot!r}")
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_channel_args(sub) -> None:
    sub.add_argument("--channel", help="CSV file, one channel-matrix row per line")
    sub.add_argument("--channel-imag", help="CSV file with imaginary parts (complex channel)")
    sub.add_argument("--snr-db", help="SNR in dB (comma list for sweep)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifwb", description="Integer-forcing MIMO receiver workbench"
    )
    parser.add_argument("--version", action="version", version=f"ifwb {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("rates", help="capacities and per-stream rates for one channel")
    _add_channel_args(p)
    p.add_argument("--a-matrix", help='integer matrix, rows ; separated: "1,1;3,2"')
    p.add_argument("--order", help='1-based MMSE-SIC decode order, e.g. "2,1"')
    p.add_argument("--mode", choices=sorted(_MODES), default="kz")
    p.add_argument("--coeff-bound", type=int, help="entry bound for brute mode")
    p.add_argument("--out", help="write JSON report here instead of stdout")
    p.set_defaults(func=cmd_rates)

    p = subs.add_parser("optimize-a", help="optimal integer matrix for successive IF")
    _add_channel_args(p)
    p.add_argument("--mode", choices=sorted(_MODES), default="kz")
    p.add_argument("--coeff-bound", type=int, help="entry bound for brute mode")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize_a)

    p = subs.add_parser("region", help="2-user achievable region and Pareto frontier")
    _add_channel_args(p)
    p.add_argument("--coeff-bound", type=int, help="integer box half-width to scan")
    p.add_argument("--out", help="JSON output path")
    p.add_argument("--csv-out", help="frontier CSV output path")
    p.set_defaults(func=cmd_region)

    p = subs.add_parser("simulate", help="Monte Carlo PAM link simulation")
    p.add_argument("--config", required=True, help="JSON simulation config")
    p.add_argument("--trials", type=int, help="override trials from config")
    p.add_argument("--seed", type=int, help="override seed from config")
    p.add_argument("--pam", type=int, help="override pam_points from config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("sweep", help="rate-vs-SNR table (CSV)")
    _add_channel_args(p)
    p.add_argument("--schemes", help=f"comma list from: {', '.join(SCHEMES)}")
    p.add_argument("--mode", choices=sorted(_MODES), default="kz")
    p.add_argument("--coeff-bound", type=int)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ifwb: {exc}", file=sys.stderr)
        return 2
    except SingularA as exc:
        print(f"ifwb: singular integer matrix: {exc}", file=sys.stderr)
        return 3
    except (DimensionTooLarge, WrongDimension) as exc:
        print(f"ifwb: dimension guard: {exc}", file=sys.stderr)
        return 4
    except (ValueError, IfwbError) as exc:
        print(f"ifwb: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
