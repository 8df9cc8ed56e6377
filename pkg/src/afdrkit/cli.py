"""Command-line front end.

Subcommands:
    norm         certified peak-gain bound of a system file
    beta-star    largest safe FIR gain for an experiment config
    simulate     single closed-loop run, writing trace CSV + summary JSON
    monte-carlo  batch of runs over random uncertainties

Exit codes: 0 success, 1 usage/config error, 2 analysis infeasible,
3 simulation diverged (single-run mode only).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .lft import beta_star, build_afdr_lft
from .lti import (
    LtiError,
    UnstableSystemError,
    as_state_space,
    induced_linf_norm,
    load_system,
    system_from_dict,
)
from .sim import (
    DisturbanceParams,
    ScenarioConfig,
    monte_carlo,
    run_scenario,
    write_summary_json,
    write_trace_csv,
)
from .uncertainty import UncertaintySpec, paper_delta, random_delta

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_DIVERGED = 3


class ConfigError(Exception):
    pass


def _load_named_system(entry, base_dir: Path):
    if isinstance(entry, dict) and "file" in entry:
        path = Path(entry["file"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"referenced system file not found: {path}")
        return as_state_space(load_system(path))
    return as_state_space(system_from_dict(entry))


def load_experiment(path) -> dict:
    path = Path(path)
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    exp = dict(raw)
    try:
        exp["plant"] = _load_named_system(raw["plant"], base)
        exp["controller"] = _load_named_system(raw["controller"], base)
    except KeyError as exc:
        raise ConfigError(f"config missing required key: {exc}") from exc
    return exp


def scenario_from_experiment(exp: dict, beta, safety_enabled: bool,
                             delta_system, noise_seed=None) -> ScenarioConfig:
    rls = exp.get("rls", {})
    return ScenarioConfig(
        plant=exp["plant"],
        controller=exp["controller"],
        delta_system=delta_system,
        duration=exp.get("duration", 20.0),
        t_on=exp.get("t_on", 10.0),
        fir_length=exp.get("fir_length", 8),
        beta=beta,
        safety_enabled=safety_enabled,
        disturbance=DisturbanceParams(**exp.get("disturbance", {})),
        noise_seed=exp.get("noise_seed", 0) if noise_seed is None else noise_seed,
        lam_init=rls.get("lambda_init", 1e4),
        forgetting=rls.get("forgetting", 1.0),
        instability_threshold=exp.get("instability_threshold", 1e6),
        rls_from_start=exp.get("rls_from_start", True),
    )


def resolve_beta(exp: dict) -> float:
    """A literal beta passes through; "auto" resolves to 0.6 * beta_star."""
    beta = exp.get("beta", "auto")
    if beta == "auto":
        cert = _certificate(exp)
        if not cert.feasible:
            raise ConfigError("beta=auto but the small-gain LP is infeasible")
        return 0.6 * cert.beta_star
    return float(beta)


def _certificate(exp: dict):
    partition = build_afdr_lft(exp["plant"], exp["controller"],
                               float(exp.get("delta", 0.0)))
    return beta_star(partition, rel_tol=exp.get("norm_rel_tol", 1e-6))


def cmd_norm(args) -> int:
    try:
        system = as_state_space(load_system(args.system))
    except (OSError, LtiError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        value = induced_linf_norm(system, args.rel_tol)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"{value:.12g}")
    return EXIT_OK


def cmd_beta_star(args) -> int:
    exp = load_experiment(args.config)
    cert = _certificate(exp)
    print(cert.to_json())
    return EXIT_OK if cert.feasible else EXIT_INFEASIBLE


def _resolve_uncertainty(kind: str, exp: dict):
    if kind == "none":
        return None
    if kind == "paper":
        return paper_delta(exp["plant"].ts)
    if kind.startswith("random:"):
        try:
            seed = int(kind.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad random seed in --uncertain: {kind}") from exc
        spec = UncertaintySpec(float(exp.get("delta", 0.0)),
                               exp.get("uncertainty_order", 2), seed)
        return random_delta(spec, exp["plant"].ts)
    raise ConfigError(f"unknown --uncertain value: {kind}")


def cmd_simulate(args) -> int:
    exp = load_experiment(args.config)
    safety = args.safety == "on"
    beta = resolve_beta(exp) if safety else exp.get("beta")
    if safety and not isinstance(beta, float):
        beta = float(beta)
    delta_system = _resolve_uncertainty(args.uncertain, exp)
    cfg = scenario_from_experiment(exp, beta if safety else None, safety,
                                   delta_system, noise_seed=args.seed)
    result = run_scenario(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(result, out / "trace.csv")
    write_summary_json(result, out / "summary.json")
    print(json.dumps(result.summary_dict(), default=str))
    return EXIT_OK if result.stable else EXIT_DIVERGED


def cmd_monte_carlo(args) -> int:
    exp = load_experiment(args.config)
    beta = resolve_beta(exp)
    cfg = scenario_from_experiment(exp, beta, True, None)
    mc = monte_carlo(cfg, args.n, args.seed, float(exp.get("delta", 0.0)),
                     order=exp.get("uncertainty_order", 2), jobs=args.jobs)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["run", "delta_seed", "std_pre", "std_post",
                         "stable", "diverged_at"])
        for i in range(len(mc.stable)):
            writer.writerow([i, args.seed + i,
                             f"{mc.std_pre[i]:.9g}",
                             f"{mc.std_post[i]:.9g}",
                             int(mc.stable[i]),
                             "" if mc.diverged_at[i] is None else mc.diverged_at[i]])
    aggregate = mc.aggregate_dict()
    with open(out / "aggregate.json", "w") as f:
        json.dump(aggregate, f, indent=2)
        f.write("\n")
    print(json.dumps(aggregate))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afdrkit",
        description="Robust adaptive FIR disturbance rejection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="certified peak-gain bound of a system file")
    p.add_argument("system", help="JSON system file (tf or ss)")
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("beta-star", help="largest safe FIR gain bound")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_beta_star)

    p = sub.add_parser("simulate", help="single closed-loop run")
    p.add_argument("--config", required=True)
    p.add_argument("--uncertain", default="none",
                   help="none | paper | random:<seed>")
    p.add_argument("--safety", choices=["on", "off"], default="on")
    p.add_argument("--seed", type=int, default=None,
                   help="override the disturbance noise seed")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monte-carlo", help="batch over random uncertainties")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0,
                   help="base seed for the uncertainty sampler")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_monte_carlo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, LtiError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
