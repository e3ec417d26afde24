"""Command-line entry point.

Exit status: 0 success, 1 invalid input (bad flag, file, key or value),
2 physics failure at a required point (no steady state, unphysical soft
mode, unstable dynamics, no interior optimum).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import asdict

from softmode import noise, sweep
from softmode.constants import TWO_PI
from softmode.errors import ParameterError, PhysicsError
from softmode.params import apply_entries, reference_params, read_param_file
from softmode.stability import classify
from softmode.steady_state import solve_steady_state, steady_state_residual

SUBCOMMANDS = ("steady", "stability", "stability-map", "spectrum", "powersweep", "map", "sql", "optimal-power")

# preset used for base parameters when a subcommand has no figure of its own
_DEFAULT_PRESET = {
    "spectrum": "fig2",
    "powersweep": "fig3",
    "map": "fig4",
    "stability-map": "fig4",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value parameter file")
    common.add_argument("--preset", metavar="NAME", choices=sweep.PRESET_NAMES, help="built-in parameter/grid preset")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json", "text"), help="output format")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="parameter override (repeatable)"
    )
    common.add_argument("--full-formula", action="store_true", help="use the general spectrum instead of Δ̃=0, κ≫ω")
    common.add_argument("--hz", action="store_true", help="frequency flags are ordinary frequencies (x 2π)")

    freq = argparse.ArgumentParser(add_help=False)
    grp = freq.add_mutually_exclusive_group()
    grp.add_argument("--omega", type=float, help="analysis frequency (rad/s, or Hz with --hz)")
    grp.add_argument("--omega-ratio", type=float, help="analysis frequency as a multiple of ω_m")
    grp.add_argument("--soft-mode", action="store_true", help="track ω = sqrt(ω_m ω̃_m)")

    power_axis = argparse.ArgumentParser(add_help=False)
    power_axis.add_argument("--power-min", type=float, metavar="W")
    power_axis.add_argument("--power-max", type=float, metavar="W")
    power_axis.add_argument("--power-points", type=int)

    parser = argparse.ArgumentParser(prog="softmode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="steady state and residuals")
    sub.add_parser("stability", parents=[common], help="stability report")
    p = sub.add_parser("stability-map", parents=[common, power_axis], help="status grid over power x g_q/g_l")
    _ratio_args(p)
    p = sub.add_parser("spectrum", parents=[common], help="noise budget versus frequency")
    p.add_argument("--omega-min", type=float, help="rad/s, or Hz with --hz")
    p.add_argument("--omega-max", type=float)
    p.add_argument("--points", type=int)
    sub.add_parser("powersweep", parents=[common, freq, power_axis], help="noise budget versus power")
    p = sub.add_parser("map", parents=[common, freq, power_axis], help="total noise over power x g_q/g_l")
    _ratio_args(p)
    sub.add_parser("sql", parents=[common, freq], help="SQL-type bound 1/(γ_m|χ̃_m|)")
    sub.add_parser("optimal-power", parents=[common, freq, power_axis], help="power minimising total noise")
    return parser


def _ratio_args(p):
    p.add_argument("--ratio-min", type=float)
    p.add_argument("--ratio-max", type=float)
    p.add_argument("--ratio-points", type=int)


def _parse_overrides(items):
    entries = {}
    for item in items:
        if "=" not in item:
            raise ParameterError("--set", f"expected KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        entries[key.strip().lower()] = value.strip()
    return entries


def load_params(args):
    """Base parameters: preset, then config file, then --set overrides."""
    name = args.preset or _DEFAULT_PRESET.get(args.command)
    base = sweep.preset(name).base if name else reference_params()
    if args.config:
        base = apply_entries(base, read_param_file(args.config))
    if args.overrides:
        base = apply_entries(base, _parse_overrides(args.overrides))
    return base


def _freq_value(args, value):
    return TWO_PI * value if args.hz else value


def _eval_frequency(args, params, default):
    if getattr(args, "soft_mode", False):
        return noise.SOFT_MODE
    if getattr(args, "omega", None) is not None:
        return _freq_value(args, args.omega)
    if getattr(args, "omega_ratio", None) is not None:
        return args.omega_ratio * params.omega_m
    return default


def _power_axis(args, template: sweep.Axis) -> sweep.Axis:
    return sweep.Axis(
        "power",
        args.power_min if args.power_min is not None else template.start,
        args.power_max if args.power_max is not None else template.stop,
        args.power_points if args.power_points is not None else template.n_points,
        "log",
    )


def _ratio_axis(args, template: sweep.Axis) -> sweep.Axis:
    return sweep.Axis(
        "gq_over_gl",
        args.ratio_min if args.ratio_min is not None else template.start,
        args.ratio_max if args.ratio_max is not None else template.stop,
        args.ratio_points if args.ratio_points is not None else template.n_points,
    )


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_mapping(data: dict, fmt: str, fh):
    if fmt == "json":
        json.dump(data, fh, indent=1, default=str)
        fh.write("\n")
    elif fmt == "csv":
        fh.write(",".join(data) + "\n")
        fh.write(",".join(sweep.format_value(v) for v in data.values()) + "\n")
    else:
        for key, value in data.items():
            fh.write(f"{key} = {sweep.format_value(value)}\n")


def _formula(args):
    return noise.FULL if args.full_formula else noise.RESONANT


def _cmd_steady(args, params):
    ss = solve_steady_state(params)
    r1, r2 = steady_state_residual(params, ss)
    data = asdict(ss)
    data["c_s_real"] = ss.c_s.real
    data["c_s_imag"] = ss.c_s.imag
    del data["c_s"]
    data["omega_m_eff_over_omega_m"] = ss.omega_m_eff / params.omega_m
    data["residual_x"] = r1
    data["residual_c"] = r2
    return data


def _cmd_stability(args, params):
    report = classify(params)
    data = {
        "status": report.status,
        "routh_hurwitz_stable": report.routh_hurwitz_stable,
        "eigen_stable": report.eigen_stable,
        "physical": report.physical,
        "max_real_part": report.max_real_part,
        "margin": report.margin,
    }
    if report.char_poly is not None:
        for i, a in enumerate(report.char_poly):
            data[f"a{i}"] = float(a)
    if report.steady_state is not None:
        data["omega_m_eff"] = report.steady_state.omega_m_eff
    if report.message:
        data["message"] = report.message
    return data


def _cmd_sql(args, params):
    omega = _eval_frequency(args, params, params.omega_m)
    if omega == noise.SOFT_MODE:
        ss = solve_steady_state(params)
        w = noise.resolve_frequency(omega, params, ss)
        return {"omega_rad_s": w, "omega_m_eff": ss.omega_m_eff, "sql": noise.sql_bound(params, w, ss.omega_m_eff)}
    return {"omega_rad_s": omega, "sql": noise.sql_bound(params, omega)}


def _cmd_optimal_power(args, params):
    omega = _eval_frequency(args, params, params.omega_m)
    lo = args.power_min if args.power_min is not None else 1e-8
    hi = args.power_max if args.power_max is not None else 1e-2
    res = noise.optimal_power(params, omega, (lo, hi), formula=_formula(args))
    bd = res.breakdown
    return {
        "power_W": res.power,
        "total": res.total,
        "thermal": bd.thermal,
        "backaction": bd.backaction,
        "shot": bd.shot,
        "omega_rad_s": bd.omega,
        "omega_m_eff": res.steady_state.omega_m_eff,
        "constrained": res.constrained,
        "formula": bd.formula,
    }


def _sweep_spec(args, params) -> sweep.SweepSpec:
    template = sweep.preset(args.preset or _DEFAULT_PRESET[args.command])
    formula = _formula(args)
    if args.command == "spectrum":
        axis = template.axis1
        lo = _freq_value(args, args.omega_min) if args.omega_min is not None else 0.2 * params.omega_m
        hi = _freq_value(args, args.omega_max) if args.omega_max is not None else 1.6 * params.omega_m
        n = args.points if args.points is not None else (axis.n_points if template.kind == sweep.FREQUENCY else 2000)
        return sweep.SweepSpec(sweep.FREQUENCY, sweep.Axis("omega", lo, hi, n), params, formula=formula)
    power_template = template.axis1 if template.kind in (sweep.POWER, sweep.MAP) else sweep.preset("fig3").axis1
    if args.command == "powersweep":
        return sweep.SweepSpec(
            sweep.POWER,
            _power_axis(args, power_template),
            params,
            eval_frequency=_eval_frequency(args, params, noise.SOFT_MODE),
            formula=formula,
        )
    ratio_template = template.axis2 if template.axis2 is not None else sweep.preset("fig4").axis2
    return sweep.SweepSpec(
        sweep.MAP,
        _power_axis(args, power_template),
        params,
        axis2=_ratio_axis(args, ratio_template),
        eval_frequency=_eval_frequency(args, params, noise.SOFT_MODE),
        formula=formula,
        with_noise=args.command == "map",
    )


_SINGLE_POINT = {
    "steady": _cmd_steady,
    "stability": _cmd_stability,
    "sql": _cmd_sql,
    "optimal-power": _cmd_optimal_power,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; usage errors are input errors here
        return 0 if exc.code == 0 else 1
    try:
        params = load_params(args)
        if args.command in _SINGLE_POINT:
            data = _SINGLE_POINT[args.command](args, params)
            with _output(args.out) as fh:
                _write_mapping(data, args.format or "text", fh)
        else:
            result = sweep.run(_sweep_spec(args, params))
            fmt = args.format or "csv"
            with _output(args.out) as fh:
                if fmt == "json":
                    result.to_json(fh)
                elif fmt == "csv":
                    result.to_csv(fh)
                else:
                    for row in result.rows:
                        fh.write(" ".join(f"{c}={sweep.format_value(row.get(c))}" for c in result.columns) + "\n")
    except ParameterError as err:
        print(f"softmode: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"softmode: error: {err}", file=sys.stderr)
        return 1
    except PhysicsError as err:
        print(f"softmode: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
