"""Command-line front end.

Exit codes: 0 success, 1 the subcommand's "interesting" verdict (non-CP,
not physical, entangled, violation found, slippage fails), 2 invalid input,
3 numerical failure.
"""
import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import QuasiFreeError
from .scenarios import (
    ScenarioConfig,
    emit_timeseries,
    run_cp_sweep,
    run_slippage_demo,
    scan,
)
from .semigroup import (
    SingleModeParams,
    TwoModeParams,
    boundary_violation_rate,
    cp_discriminant,
    drift_for,
    drift_single,
    evolve_closed,
    first_negativity_time,
    is_completely_positive,
    worst_boundary_state,
)
from .states import (
    matrix_from_json,
    ppt_witness,
    state_from_json,
    state_from_matrix,
    state_to_json,
    validate,
)

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SWEEP_TOL = 1e-8


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _InputError(message)


def _float(x):
    return float(format(float(x), ".17g"))


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_state_file(path):
    """Load a state file, enforcing Hermiticity and the CCR diagonal."""
    return state_from_json(_load_json(path))


def _write(doc, out):
    text = json.dumps(doc, indent=2) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _add_params(p, two_mode_flags=True):
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--lam-re", type=float, default=0.0)
    p.add_argument("--lam-im", type=float, default=0.0)
    p.add_argument("--omega", "--omega1", dest="omega1", type=float, default=0.0)
    if two_mode_flags:
        p.add_argument("--omega2", type=float, default=0.0)


def _single_params(args):
    return SingleModeParams(omega=args.omega1, eta=args.eta, sigma=args.sigma,
                            lam=complex(args.lam_re, args.lam_im))


def _params_for(args, modes):
    if modes == 2:
        return TwoModeParams(omega1=args.omega1, omega2=args.omega2, eta=args.eta,
                             sigma=args.sigma, lam=complex(args.lam_re, args.lam_im))
    return _single_params(args)


def cmd_check_cp(args):
    params = _single_params(args)
    cp = is_completely_positive(params)
    _write({"cp": cp, "discriminant": _float(cp_discriminant(params))}, args.out)
    return EXIT_OK if cp else EXIT_VERDICT


def cmd_validate(args):
    v = validate(matrix_from_json(_load_json(args.state)))
    _write({"psd": v.psd, "min_eig": _float(v.min_eig), "structure_ok": v.structure_ok}, args.out)
    return EXIT_OK if v.psd and v.structure_ok else EXIT_VERDICT


def cmd_evolve(args):
    state = parse_state_file(args.state)
    modes = {"single": 1, "two": 2}[args.mode]
    if state.modes != modes:
        raise _InputError(f"--mode {args.mode} does not match a {state.modes}-mode state file")
    drift = drift_for(_params_for(args, modes))
    if args.t is not None:
        if args.t < 0:
            raise _InputError("--t must be non-negative")
        G = state.G if args.t == 0 else evolve_closed(state.G, drift, args.t)
        _write(state_to_json(state_from_matrix(G)), args.out)
        return EXIT_OK
    if args.horizon is None:
        raise _InputError("evolve needs --t or --horizon")
    traj = scan(state, drift, args.horizon, args.dt)
    if args.out in (None, "-"):
        emit_timeseries(traj, args.format, sys.stdout)
    else:
        emit_timeseries(traj, args.format, args.out)
    return EXIT_OK


def cmd_find_violation(args):
    params = _single_params(args)
    state = worst_boundary_state(params, args.beta)
    rate = boundary_violation_rate(params, args.beta)
    onset = first_negativity_time(state.G, drift_single(params), args.horizon, args.dt)
    _write({
        "state": state_to_json(state),
        "rate": _float(rate),
        "onset_time": None if onset is None else _float(onset),
        "cp": is_completely_positive(params),
    }, args.out)
    return EXIT_VERDICT if onset is not None else EXIT_OK


def cmd_witness(args):
    state = parse_state_file(args.state)
    if state.modes != 2:
        raise _InputError("witness needs a two-mode state")
    res = ppt_witness(state)
    _write({"entangled": res.entangled, "min_eig_pt": _float(res.min_eig_pt)}, args.out)
    return EXIT_VERDICT if res.entangled else EXIT_OK


def cmd_slippage_demo(args):
    report = run_slippage_demo(ScenarioConfig.from_dict(_load_json(args.config)))
    _write(report.to_dict(), args.out)
    return EXIT_VERDICT if report.verdict == "slippage_fails" else EXIT_OK


def cmd_sweep(args):
    summary = run_cp_sweep(ScenarioConfig.from_dict(_load_json(args.config)))
    _write(summary, args.out)
    return EXIT_VERDICT if summary["min_min_eig"] < -SWEEP_TOL else EXIT_OK


def build_parser():
    parser = _Parser(prog="quasifree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check-cp", help="complete-positivity test of the generator")
    _add_params(p, two_mode_flags=False)
    p.set_defaults(func=cmd_check_cp)

    p = sub.add_parser("validate", help="positivity and CCR diagnostics of a state file")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evolve", help="evolve a state; --t for one time, --horizon for a time series")
    p.add_argument("--mode", choices=["single", "two"], default="single")
    _add_params(p)
    p.add_argument("--state", required=True)
    p.add_argument("--t", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("find-violation", help="worst boundary state, its rate and onset time")
    _add_params(p, two_mode_flags=False)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_find_violation)

    p = sub.add_parser("witness", help="partial-transpose entanglement witness")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("slippage-demo", help="critical entangled state under non-CP dynamics")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_slippage_demo)

    p = sub.add_parser("sweep", help="random CP parameter/state sweep")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_sweep)

    for action in sub.choices.values():
        action.add_argument("--out", default="-", help="output path (default: stdout)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with np.errstate(over="raise", invalid="raise"):
            return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QuasiFreeError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
