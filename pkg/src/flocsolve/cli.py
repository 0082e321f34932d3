"""Command-line driver.

Subcommands: solve (single steady state, JSON), check-theorem (JSON report),
convergence (CSV of degree/error), sweep (CSV of sweep rows), validate-rates
(human-readable assumption report).

Exit codes: 0 success, 1 solver non-convergence, 2 invalid input/config.
"""
from __future__ import annotations

import argparse
import json
import sys

from .assembly import DiscreteModel, SpectralWorkspace
from .rates import CONVENTIONS, ParamSet, build_rates, validate_rates
from .solver import SolverConfig, solve_newton, solve_picard
from .studies import (SweepSpec, convergence_to_csv, run_convergence_study,
                      run_sweep, sweep_to_csv)
from .theory import check_theorem1

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_BAD_INPUT = 2


def _load_params(args) -> ParamSet:
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("configuration must be a JSON object")
    if args.cmu_convention:
        config["c_mu_convention"] = args.cmu_convention
    return ParamSet.from_config(config)


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to a JSON parameter configuration")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--cmu-convention", choices=CONVENTIONS,
                   help="removal coefficient convention (default exp_decay)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flocsolve",
        description="Steady-state flocculation size distributions by spectral collocation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute a single steady state (JSON)")
    _common_flags(p)
    p.add_argument("--n", type=int, default=50, help="polynomial degree (default 50)")
    p.add_argument("--mode", choices=("ivp", "bvp"), default="ivp")
    p.add_argument("--cq", type=float, help="renewal constant (bvp mode)")
    p.add_argument("--method", choices=("newton", "picard"), default="newton")
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("check-theorem", help="evaluate the fixed-point conditions (JSON)")
    _common_flags(p)
    p.add_argument("--samples", type=int, default=4096)

    p = sub.add_parser("convergence", help="grid-refinement study (CSV)")
    _common_flags(p)
    p.add_argument("--kind", choices=("linear", "nonlinear"), default="linear")
    p.add_argument("--n-values", default="4,8,12,16,20,24,28,32",
                   help="comma-separated ascending grid degrees")
    p.add_argument("--reference-n", type=int, default=200,
                   help="reference degree for the nonlinear study")

    p = sub.add_parser("sweep", help="parameter sweep over shear/growth rates (CSV)")
    _common_flags(p)
    p.add_argument("--gamma-dots", default="1,5,10,20",
                   help="comma-separated shear rates")
    p.add_argument("--c-gs", default="1", help="comma-separated growth coefficients")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--mode", choices=("ivp", "bvp"), default="ivp")
    p.add_argument("--cq", type=float, help="renewal constant (bvp mode)")
    p.add_argument("--parallel", type=int, default=1, help="concurrent solves")

    p = sub.add_parser("validate-rates", help="check model assumptions on the rates")
    _common_flags(p)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--tol", type=float, default=1e-9)

    return parser


def _cmd_solve(args) -> int:
    params = _load_params(args)
    model = DiscreteModel(build_rates(params), SpectralWorkspace(args.n, params.max_size))
    config = SolverConfig(tol=args.tol)
    if args.method == "picard":
        state = solve_picard(model, config)
    else:
        state = solve_newton(model, config, mode=args.mode, c_q=args.cq)
    _write(state.to_json(), args.output)
    return EXIT_OK if state.converged else EXIT_NOT_CONVERGED


def _cmd_check_theorem(args) -> int:
    params = _load_params(args)
    report = check_theorem1(build_rates(params), n_samples=args.samples)
    _write(report.to_json(), args.output)
    return EXIT_OK


def _cmd_convergence(args) -> int:
    params = _load_params(args)
    n_values = [int(s) for s in args.n_values.split(",") if s]
    rows = run_convergence_study(args.kind, n_values, params,
                                 reference_n=args.reference_n)
    _write(convergence_to_csv(rows), args.output)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


def _cmd_sweep(args) -> int:
    params = _load_params(args)
    spec = SweepSpec(
        gamma_dot_values=tuple(float(s) for s in args.gamma_dots.split(",") if s),
        c_g_values=tuple(float(s) for s in args.c_gs.split(",") if s),
        n=args.n, mode=args.mode, c_q=args.cq, base=params,
        convention=args.cmu_convention or "exp_decay")
    rows = run_sweep(spec, parallel=args.parallel)
    _write(sweep_to_csv(rows), args.output)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


def _cmd_validate_rates(args) -> int:
    params = _load_params(args)
    report = validate_rates(build_rates(params), n_samples=args.samples, tol=args.tol)
    _write(str(report), args.output)
    return EXIT_OK if report.passed else EXIT_BAD_INPUT


_COMMANDS = {
    "solve": _cmd_solve,
    "check-theorem": _cmd_check_theorem,
    "convergence": _cmd_convergence,
    "sweep": _cmd_sweep,
    "validate-rates": _cmd_validate_rates,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
