"""Command-line frontend: certify, rate, simulate, converge and report."""
import argparse
import json
import os
import sys

import numpy as np

from ._accel import set_threads
from .certificates import check_theorem1, check_theorem2
from .config import ConfigError, RunConfig
from .diagnostics import convergence_curve, rate_comparison
from .errors import ExplosionError, LevyErgodicityError, RateRangeError
from .levy_kernel import tail_constants
from .rates import log_time_grid, write_psi_csv
from .simulator import simulate_chain

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2
EXIT_FAIL = 3
EXIT_INCONCLUSIVE = 4


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _out_dir(cfg, args):
    out = args.out or cfg.output["dir"]
    os.makedirs(out, exist_ok=True)
    return out


def _resolved(cfg, args):
    """The full config with command-line overrides folded in."""
    data = cfg.to_dict()
    if args.seed is not None:
        data["simulation"]["seed"] = args.seed
    if args.out:
        data["output"]["dir"] = args.out
    return data


def cmd_certify(cfg, args):
    model = cfg.build_model()
    f = cfg.rate_function()
    c = cfg.certificate
    grid = cfg.outer_grid()
    if cfg.theorem() == 1:
        if "p" not in c:
            raise ConfigError("theorem 1 needs certificate.p")
        tails = tail_constants(model)
        cert = check_theorem1(
            model, float(c["p"]), f, grid=grid, x_far=float(c["x_far"]), tails=tails, margin_fraction=float(c["margin_fraction"])
        )
    else:
        if "beta" not in c:
            raise ConfigError("theorem 2 needs certificate.beta")
        cert = check_theorem2(
            model,
            float(c["beta"]),
            float(c.get("zeta", 0.0)),
            kappa=c.get("kappa"),
            f=f,
            grid=grid,
            x_far=float(c["x_far"]),
            alpha=c.get("alpha"),
            margin_fraction=float(c["margin_fraction"]),
        )
    out = _out_dir(cfg, args)
    payload = {"config": _resolved(cfg, args), "seed": _resolved(cfg, args)["simulation"]["seed"], "certificate": cert.to_dict()}
    path = os.path.join(out, "certificate.json")
    _write_json(path, payload)
    print(f"{cert.verdict}: case {cert.case}, margin {cert.margin:.6g} (required {cert.required_margin:.6g}), "
          f"C = {cert.lyapunov_C:.6g}, R = {cert.radius_R} -> {path}")
    return EXIT_OK if cert.certified else EXIT_NOT_CERTIFIED


def cmd_rate(cfg, args):
    plan = cfg.rate_plan()
    r = cfg.rate
    ts = log_time_grid(float(r["t_min"]), float(r["t_max"]), int(r["points"]))
    out = _out_dir(cfg, args)
    path = os.path.join(out, "rate.csv")
    write_psi_csv(path, plan, ts, method=r["method"], config=_resolved(cfg, args))
    print(f"closed form: {plan.closed_form or 'none'} -> {path}")
    return EXIT_OK


def cmd_simulate(cfg, args):
    model = cfg.build_model()
    sim = cfg.sim_config(seed=args.seed)
    sample = simulate_chain(model, sim)
    out = _out_dir(cfg, args)
    csv_path = os.path.join(out, "chain.csv")
    sample.write(csv_path, os.path.join(out, "chain.json"), extra={"run_config": _resolved(cfg, args)})
    print(f"{sim.N} replicas x {sim.steps} steps -> {csv_path}")
    return EXIT_OK


def cmd_converge(cfg, args):
    model = cfg.build_model()
    conv = cfg.convergence
    if "t_grid" not in conv or "T_ref" not in conv:
        raise ConfigError("convergence block needs t_grid and T_ref")
    sim = cfg.sim_config(seed=args.seed, t=float(conv["T_ref"]))
    plan = cfg.rate_plan()
    curve = convergence_curve(
        model,
        sim,
        sim.x0,
        conv["t_grid"],
        float(conv["T_ref"]),
        plan=plan,
        bins=conv.get("bins"),
        n_boot=int(conv["n_boot"]),
    )
    record = rate_comparison(curve, plan, factor=float(conv["factor"]))
    out = _out_dir(cfg, args)
    resolved = _resolved(cfg, args)
    curve.to_csv(os.path.join(out, "tv_curve.csv"), config=resolved)
    _write_json(
        os.path.join(out, "comparison.json"),
        {"config": resolved, "seed": sim.seed, "comparison": record, "curve": curve.to_dict()},
    )
    print(f"rate comparison: {record['verdict']} (fitted {record['fitted']}, predicted {record['predicted']:.6g})")
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[record["verdict"]]


def cmd_report(cfg, args):
    out = _out_dir(cfg, args)
    summary = {"config": _resolved(cfg, args)}
    for name in ("certificate", "comparison", "chain"):
        path = os.path.join(out, f"{name}.json")
        if os.path.exists(path):
            with open(path) as fh:
                summary[name] = json.load(fh)
    if len(summary) == 1:
        raise ConfigError(f"no outputs found in {out}; run certify, simulate or converge first")
    _write_json(os.path.join(out, "report.json"), summary)
    if "certificate" in summary:
        cert = summary["certificate"]["certificate"]
        print(f"certificate: {cert['verdict']} (case {cert['case']}, margin {cert['margin']:.6g})")
    if "comparison" in summary:
        comp = summary["comparison"]["comparison"]
        print(f"convergence: {comp['verdict']} (fitted {comp['fitted']}, predicted {comp['predicted']:.6g})")
    return EXIT_OK


COMMANDS = {
    "certify": cmd_certify,
    "rate": cmd_rate,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="levy-ergodicity", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides simulation.seed)")
        p.add_argument("--threads", type=int, help="worker threads for the replica loop")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        set_threads(args.threads)
        cfg = RunConfig.load(args.config)
        return COMMANDS[args.command](cfg, args)
    except ExplosionError as exc:
        print(f"error: explosion at step {exc.step} (replica {exc.replica}): {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RateRangeError as exc:
        print(f"error: {exc} (F is bounded when the rate exponent exceeds 1)", file=sys.stderr)
        return EXIT_ERROR
    except (LevyErgodicityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
