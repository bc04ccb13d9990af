"""Command-line interface.

Subcommands: ``feasibility``, ``solve-lm``, ``solve-meb``, ``sop``, ``srm``
and ``experiment``. Network layouts are given in the key-value text format,
e.g. ``--config "Ma=12 Nb=2 da=3 K=4 Mk=9 Nk=4 dk=2 L=16"``; powers are in
dB relative to the unit noise floor.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._backend import backend_name
from .alignment import (
    SolverSettings,
    detect_cancellation,
    lm_ia_solve,
    meb_ia_solve,
    solution_to_json,
)
from .channel import generate_channels, parse_config_text
from .errors import ConfigurationError
from .feasibility import estimate_flops, lm_necessary_condition, meb_necessary_condition, predict_cancellation
from .harness import (
    RECIPES,
    db_to_linear,
    default_spec,
    load_spec,
    median_boundary_summary,
    run_experiment,
    secrecy_model_from_solution,
)
from .secrecy import (
    PowerProfile,
    SecrecyModel,
    sop_closed_form,
    sop_monte_carlo,
    srm_solve,
    theta_high_snr,
)


def _add_shared(parser):
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--restarts", type=int, default=1, help="random solver restarts")
    parser.add_argument("--samples", type=int, default=0, help="Monte Carlo sample count")
    parser.add_argument("--out", type=str, default=None, help="output file or directory")


def _add_solver_flags(parser):
    parser.add_argument("--max-iter", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None, help="convergence tolerance")


def _settings_from(args):
    kwargs = {}
    if args.max_iter is not None:
        kwargs["max_iterations"] = args.max_iter
    if args.tol is not None:
        kwargs["convergence_tol"] = args.tol
    return SolverSettings(**kwargs)


def _config_from(args):
    config, seed = parse_config_text(args.config)
    if seed is not None and args.seed == 0:
        args.seed = seed
    return config


def cmd_feasibility(args):
    config = _config_from(args)
    rows = []
    for da in range(1, config.Ma):
        try:
            cfg = type(config)(
                Ma=config.Ma, Nb=config.Nb, da=da, K=config.K,
                Mk=config.Mk, Nk=config.Nk, dk=config.dk, L=config.L,
            )
        except ConfigurationError:
            continue
        lm = lm_necessary_condition(cfg)
        meb = meb_necessary_condition(cfg)
        rows.append(
            dict(
                da=da,
                lm_ok=lm.satisfied,
                lm_da_max=lm.da_max,
                meb_ok=meb.satisfied,
                meb_da_max=meb.da_max,
                cancellation=predict_cancellation(cfg),
            )
        )
    print(f"config: {config.to_text()}")
    print(f"{'da':>3}  {'LM ok':>6}  {'MEB ok':>7}  {'cancellation predicted':>23}")
    for r in rows:
        print(f"{r['da']:>3}  {str(r['lm_ok']):>6}  {str(r['meb_ok']):>7}  {str(r['cancellation']):>23}")
    if rows:
        print(f"admissible range: LM da <= {rows[0]['lm_da_max']}, MEB da <= {rows[0]['meb_da_max']}")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=1))
        print(f"wrote {args.out}")
    return 0


def _run_solver(args, scheme):
    config = _config_from(args)
    settings = _settings_from(args)
    channels = generate_channels(config, args.seed)
    solver = lm_ia_solve if scheme == "LM" else meb_ia_solve
    sol = solver(channels, config, settings, seed=args.seed, restarts=args.restarts)
    check = detect_cancellation(channels, sol)
    flops = estimate_flops(config, scheme)
    print(f"scheme: {scheme}  backend: {backend_name()}  seed: {args.seed}")
    print(f"leakage: {sol.leakage:.6e}  iterations: {sol.iterations}  converged: {sol.converged}")
    print(f"feasible (leakage < {settings.feasibility_tol:g}): {sol.leakage < settings.feasibility_tol}")
    print(f"main-channel gain: {check.gain:.6e}  cancelled: {check.cancelled}")
    print(f"flops per iteration (model): {flops.per_iteration_total}")
    if args.out:
        Path(args.out).write_text(solution_to_json(sol, seed=args.seed, settings=settings))
        print(f"wrote {args.out}")
    return 0


def cmd_solve_lm(args):
    return _run_solver(args, "LM")


def cmd_solve_meb(args):
    return _run_solver(args, "MEB")


def _model_from_args(args, config, need_filters=False):
    pa = db_to_linear(args.pa_db)
    pk = db_to_linear(args.pk_db if args.pk_db is not None else args.pa_db)
    profile = PowerProfile(Pa=pa, Pk=(pk,) * config.K, theta=args.theta)
    filters = None
    if args.sigma2 is not None and not need_filters:
        model = SecrecyModel(
            power=profile, alpha_a=config.da, alpha_k=config.dk,
            L=config.L, eps_th=args.eps_th, sigma2=args.sigma2,
            Rb=getattr(args, "rb", None),
        )
    else:
        channels = generate_channels(config, args.seed)
        sol = meb_ia_solve(channels, config, seed=args.seed, restarts=args.restarts)
        model = secrecy_model_from_solution(
            channels, sol, theta=args.theta, Pa=pa, Pk=(pk,) * config.K,
            L=config.L, eps_th=args.eps_th, Rb=getattr(args, "rb", None),
        )
        if args.sigma2 is not None:
            model = SecrecyModel(
                power=model.power, alpha_a=model.alpha_a, alpha_k=model.alpha_k,
                L=model.L, eps_th=model.eps_th, sigma2=args.sigma2, Rb=model.Rb,
            )
        filters = sol
    return model, filters


def cmd_sop(args):
    config = _config_from(args)
    model, filters = _model_from_args(args, config, need_filters=args.samples > 0)
    eps = sop_closed_form(model, args.rs)
    print(f"theta={args.theta}  Rb={args.rb}  Rs={args.rs}  L={model.L}")
    print(f"closed-form outage probability: {eps:.6g}")
    result = {"theta": args.theta, "Rb": args.rb, "Rs": args.rs, "eps_closed": eps}
    if args.samples > 0:
        mc = sop_monte_carlo(model, filters, args.rs, args.samples, args.seed)
        print(f"Monte Carlo estimate: {mc.estimate:.6g} +/- {mc.stderr:.2g} ({mc.n_samples} samples)")
        result.update(eps_mc=mc.estimate, stderr=mc.stderr, n_samples=mc.n_samples)
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=1))
        print(f"wrote {args.out}")
    return 0


def cmd_srm(args):
    config = _config_from(args)
    args.theta = 1.0  # placeholder; the optimizer chooses the split
    model, _ = _model_from_args(args, config)
    sol = srm_solve(model)
    print(f"Pa={args.pa_db} dB  Pk={args.pk_db if args.pk_db is not None else args.pa_db} dB  "
          f"L={model.L}  eps_th={model.eps_th}  sigma2={model.sigma2:.4g}")
    print(f"optimal split theta* = {sol.theta_star:.6f}  ({sol.branch.value})")
    print(f"secrecy rate Rs* = {sol.Rs_star:.6f} bpcu  w* = {sol.w_star:.6g}")
    print(f"high-power approximation of theta*: {theta_high_snr(model):.6f}")
    if args.out:
        payload = {
            "theta_star": sol.theta_star, "Rs_star": sol.Rs_star,
            "branch": sol.branch.value, "w_star": sol.w_star,
            "rs_prime_at_1": sol.rs_prime_at_1, "rs_prime_at_0": sol.rs_prime_at_0,
        }
        Path(args.out).write_text(json.dumps(payload, indent=1))
        print(f"wrote {args.out}")
    return 0


def cmd_experiment(args):
    target = args.recipe
    overrides = {}
    if args.seeds:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.samples:
        overrides["samples"] = args.samples
    if args.out:
        overrides["out_dir"] = args.out
    if Path(target).suffix == ".json" and Path(target).exists():
        spec = load_spec(target)
        for key, val in overrides.items():
            setattr(spec, key, val)
    else:
        spec = default_spec(target, **overrides)
    records = run_experiment(spec)
    print(f"recipe {spec.name}: {len(records)} records")
    if spec.name == "meb-boundary-table":
        print(f"{'config':<44} {'da':>3} {'median leakage':>15}")
        for (config, da), med in median_boundary_summary(records).items():
            print(f"{config:<44} {da:>3} {med:>15.3e}")
    if spec.out_dir:
        print(f"wrote {Path(spec.out_dir) / (spec.name + '.csv')}")
        print(f"wrote {Path(spec.out_dir) / (spec.name + '.json')}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="secalign",
        description="Artificial-noise interference alignment and secrecy-rate optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasibility", help="analytic feasibility table over da")
    p.add_argument("--config", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_feasibility)

    for name, fn in (("solve-lm", cmd_solve_lm), ("solve-meb", cmd_solve_meb)):
        p = sub.add_parser(name, help=f"run the {name.split('-')[1].upper()} alignment solver")
        p.add_argument("--config", required=True)
        _add_shared(p)
        _add_solver_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("sop", help="secrecy outage probability (closed form, optional Monte Carlo)")
    p.add_argument("--config", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--rb", type=float, required=True, help="codeword rate (bpcu)")
    p.add_argument("--rs", type=float, required=True, help="secrecy rate (bpcu)")
    p.add_argument("--pa-db", type=float, default=20.0)
    p.add_argument("--pk-db", type=float, default=None)
    p.add_argument("--eps-th", type=float, default=0.1)
    p.add_argument("--sigma2", type=float, default=1.0,
                   help="main-channel gain; the outage itself does not depend on it")
    _add_shared(p)
    p.set_defaults(func=cmd_sop)

    p = sub.add_parser("srm", help="secrecy-rate-maximizing power split")
    p.add_argument("--config", required=True)
    p.add_argument("--pa-db", type=float, default=20.0)
    p.add_argument("--pk-db", type=float, default=None)
    p.add_argument("--eps-th", type=float, default=0.1)
    p.add_argument("--sigma2", type=float, default=None,
                   help="main-channel gain; solved from the channels when omitted")
    _add_shared(p)
    p.set_defaults(func=cmd_srm)

    p = sub.add_parser("experiment", help="run a named recipe or a JSON spec file")
    p.add_argument("recipe", help=f"one of {sorted(RECIPES)} or a spec file path")
    p.add_argument("--seeds", type=str, default=None, help="comma list, e.g. 0,1,2")
    _add_shared(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
