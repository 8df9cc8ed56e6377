"""Closed-loop time stepping of the adaptive disturbance-rejection loop.

A scenario advances the physical loop (true plant = nominal model plus an
optional additive uncertainty), reconstructs the effective disturbance with
the nominal model, runs the RLS coefficient update, and applies the safety
filter to the FIR command.  Monte-Carlo orchestration sweeps random
uncertainties with per-run seeds.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .adaptive import DisturbanceEstimator, FirState, RlsState
from .lti import (
    LtiError,
    StateSpace,
    as_state_space,
    feedback_unity,
    is_stable,
    series,
    system_from_dict,
    system_to_dict,
)
from .safety import matrix_inf_norm, safety_filter_solve
from .uncertainty import UncertaintySpec, random_delta

TRACE_HEADER = ["k", "t", "d", "n", "what", "r_circ", "r", "y",
                "saturated", "theta_norm"]


@dataclass(frozen=True)
class DisturbanceParams:
    """Two sinusoids plus white noise: a1 sin(f1 t) + a2 sin(f2 t + phase) + n."""

    amp1: float = 1.4
    freq1: float = 3.0
    amp2: float = 0.9
    freq2: float = 5.0
    phase2: float = 0.4
    noise_std: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    plant: StateSpace
    controller: StateSpace
    delta_system: StateSpace | None = None
    duration: float = 20.0
    t_on: float = 10.0
    fir_length: int = 8
    beta: float | None = 2.8
    safety_enabled: bool = True
    disturbance: DisturbanceParams = field(default_factory=DisturbanceParams)
    noise_seed: int = 0
    lam_init: float = 1e4
    forgetting: float = 1.0
    instability_threshold: float = 1e6
    rls_from_start: bool = True

    def __post_init__(self):
        if not (self.duration > self.t_on > 0):
            raise ValueError("need duration > AFDR-on time > 0")
        if self.fir_length < 1:
            raise ValueError("FIR length must be at least 1")
        if self.safety_enabled and self.beta is None:
            raise ValueError("safety filter requires a beta bound")

    @property
    def ts(self) -> float:
        return self.plant.ts


@dataclass
class SimResult:
    """Per-sample traces plus window statistics and the stability verdict."""

    t: np.ndarray
    d: np.ndarray
    n: np.ndarray
    w_hat: np.ndarray
    r_circ: np.ndarray
    r: np.ndarray
    y: np.ndarray
    saturated: np.ndarray
    theta_norm: np.ndarray
    std_pre: float
    std_post: float
    stable: bool
    diverged_at: int | None
    config_hash: str

    def summary_dict(self) -> dict:
        return {
            "std_pre": self.std_pre,
            "std_post": self.std_post,
            "stable": self.stable,
            "diverged_at": self.diverged_at,
            "config_hash": self.config_hash,
        }


def disturbance_sample(k: int, cfg: ScenarioConfig, noise: float = 0.0) -> float:
    """Disturbance at sample k; frequencies are rad/s of continuous time."""
    p = cfg.disturbance
    t = k * cfg.ts
    return (p.amp1 * math.sin(p.freq1 * t)
            + p.amp2 * math.sin(p.freq2 * t + p.phase2) + noise)


def config_hash(cfg: ScenarioConfig) -> str:
    payload = {
        "plant": system_to_dict(cfg.plant),
        "controller": system_to_dict(cfg.controller),
        "delta_system": (system_to_dict(cfg.delta_system)
                         if cfg.delta_system is not None else None),
        "duration": cfg.duration,
        "t_on": cfg.t_on,
        "fir_length": cfg.fir_length,
        "beta": cfg.beta,
        "safety_enabled": cfg.safety_enabled,
        "disturbance": vars(cfg.disturbance),
        "noise_seed": cfg.noise_seed,
        "lam_init": cfg.lam_init,
        "forgetting": cfg.forgetting,
        "instability_threshold": cfg.instability_threshold,
        "rls_from_start": cfg.rls_from_start,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_scenario(cfg: ScenarioConfig) -> SimResult:
    """Step the loop for duration/ts samples (inclusive of the final sample).

    Per sample: generate the disturbance, read the plant output, reconstruct
    the effective disturbance, update RLS, form the FIR command (zero before
    the switch-on time), safety-filter it, close the loop, and advance all
    states.  Aborts early once |y| exceeds the instability threshold.
    """
    g_hat = as_state_space(cfg.plant)
    k_sys = as_state_space(cfg.controller)
    if g_hat.n_inputs != 1 or g_hat.n_outputs != 1:
        raise LtiError("plant must be SISO")
    if np.any(g_hat.d) or (cfg.delta_system is not None
                           and np.any(cfg.delta_system.d)):
        raise LtiError("true plant must be strictly proper")
    _, t_hat = feedback_unity(series(k_sys, g_hat))
    if not is_stable(t_hat):
        raise LtiError("inner loop is unstable")

    est = DisturbanceEstimator(t_hat)
    fir = FirState(cfg.fir_length)
    rls = RlsState(t_hat, cfg.fir_length, cfg.lam_init, cfg.forgetting)
    delta = cfg.delta_system

    rng = np.random.default_rng(cfg.noise_seed)
    n_samples = int(round(cfg.duration / cfg.ts)) + 1
    k_on = int(round(cfg.t_on / cfg.ts))
    noise = (cfg.disturbance.noise_std * rng.standard_normal(n_samples)
             if cfg.disturbance.noise_std > 0 else np.zeros(n_samples))

    x_g = np.zeros(g_hat.n_states)
    x_k = np.zeros(k_sys.n_states)
    x_delta = np.zeros(delta.n_states) if delta is not None else None

    tr = {name: np.zeros(n_samples) for name in
          ("d", "w_hat", "r_circ", "r", "y", "theta_norm")}
    sat = np.zeros(n_samples, dtype=bool)
    stable = True
    diverged_at = None
    filled = n_samples

    for k in range(n_samples):
        d_k = disturbance_sample(k, cfg, noise[k])
        v = (g_hat.c @ x_g)[0]
        if delta is not None:
            v += (delta.c @ x_delta)[0]
        y = v + d_k
        w_hat = y - est.predicted_state_output()[0]

        if cfg.rls_from_start or k >= k_on:
            phi = rls.regressor(w_hat)
            zeta = rls.update(phi, w_hat)
            fir.set_coefficients(zeta)
        fir.push(w_hat)

        if k >= k_on:
            r_circ = float(fir.output()[0])
        else:
            r_circ = 0.0
        if cfg.safety_enabled:
            decision = safety_filter_solve([r_circ], fir.window, cfg.beta)
            r = float(decision.r[0])
            sat[k] = bool(decision.saturated[0])
            applied_norm = matrix_inf_norm(decision.theta)
        else:
            r = r_circ
            applied_norm = matrix_inf_norm(fir.theta)

        e = r - y
        u = (k_sys.c @ x_k)[0] + k_sys.d[0, 0] * e

        x_g = g_hat.a @ x_g + g_hat.b[:, 0] * u
        x_k = k_sys.a @ x_k + k_sys.b[:, 0] * e
        if delta is not None:
            x_delta = delta.a @ x_delta + delta.b[:, 0] * u
        est.advance(r)

        tr["d"][k] = d_k
        tr["w_hat"][k] = w_hat
        tr["r_circ"][k] = r_circ
        tr["r"][k] = r
        tr["y"][k] = y
        tr["theta_norm"][k] = applied_norm if k >= k_on else 0.0

        if abs(y) > cfg.instability_threshold:
            stable = False
            diverged_at = k
            filled = k + 1
            break

    sl = slice(0, filled)
    t_axis = np.arange(n_samples)[sl] * cfg.ts
    y_arr = tr["y"][sl]
    pre = y_arr[:min(k_on, filled)]
    post = y_arr[k_on:filled]
    std_pre = float(np.std(pre)) if pre.size else float("nan")
    std_post = float(np.std(post)) if post.size else float("inf")
    if not stable:
        std_post = float("inf")

    return SimResult(
        t=t_axis, d=tr["d"][sl], n=noise[sl], w_hat=tr["w_hat"][sl],
        r_circ=tr["r_circ"][sl], r=tr["r"][sl], y=y_arr,
        saturated=sat[sl], theta_norm=tr["theta_norm"][sl],
        std_pre=std_pre, std_post=std_post,
        stable=stable, diverged_at=diverged_at,
        config_hash=config_hash(cfg),
    )


def write_trace_csv(result: SimResult, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for k in range(result.t.size):
            writer.writerow([
                k,
                f"{result.t[k]:.9g}",
                f"{result.d[k]:.9g}",
                f"{result.n[k]:.9g}",
                f"{result.w_hat[k]:.9g}",
                f"{result.r_circ[k]:.9g}",
                f"{result.r[k]:.9g}",
                f"{result.y[k]:.9g}",
                int(result.saturated[k]),
                f"{result.theta_norm[k]:.9g}",
            ])


def write_summary_json(result: SimResult, path) -> None:
    summary = result.summary_dict()
    if math.isinf(summary["std_post"]):
        summary["std_post"] = None
    with open(path, "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")


@dataclass
class MonteCarloResult:
    std_pre: list
    std_post: list
    stable: list
    diverged_at: list
    unstable_count: int

    def aggregate_dict(self) -> dict:
        finite = [s for s in self.std_post if math.isfinite(s)]
        def stats(xs):
            if not xs:
                return {"mean": None, "min": None, "max": None}
            return {"mean": float(np.mean(xs)), "min": float(np.min(xs)),
                    "max": float(np.max(xs))}
        return {
            "runs": len(self.stable),
            "unstable_count": self.unstable_count,
            "std_pre": stats(self.std_pre),
            "std_post": stats(finite),
        }


def _mc_worker(args):
    cfg_payload, delta_bound, order, seed = args
    cfg = config_from_dict(cfg_payload)
    delta = random_delta(UncertaintySpec(delta_bound, order, seed), cfg.ts)
    result = run_scenario(replace(cfg, delta_system=delta))
    return result.std_pre, result.std_post, result.stable, result.diverged_at


def monte_carlo(cfg: ScenarioConfig, n_runs: int, base_seed: int,
                delta_bound: float, order: int = 2,
                jobs: int | None = None) -> MonteCarloResult:
    """Run n_runs scenarios with per-run uncertainties seeded base_seed + i.

    The disturbance noise seed is taken from the config and shared across
    runs.  A diverged run is recorded, not fatal.
    """
    if n_runs < 1:
        raise ValueError("need at least one run")
    payload = config_to_dict(cfg)
    args = [(payload, delta_bound, order, base_seed + i) for i in range(n_runs)]
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    if jobs > 1 and n_runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_mc_worker, args, chunksize=4))
    else:
        rows = [_mc_worker(a) for a in args]
    std_pre, std_post, stable, diverged = map(list, zip(*rows))
    return MonteCarloResult(std_pre, std_post, stable, diverged,
                            unstable_count=sum(not s for s in stable))


# --- config (de)serialization ----------------------------------------------

def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "plant": system_to_dict(cfg.plant),
        "controller": system_to_dict(cfg.controller),
        "delta_system": (system_to_dict(cfg.delta_system)
                         if cfg.delta_system is not None else None),
        "duration": cfg.duration,
        "t_on": cfg.t_on,
        "fir_length": cfg.fir_length,
        "beta": cfg.beta,
        "safety_enabled": cfg.safety_enabled,
        "disturbance": vars(cfg.disturbance),
        "noise_seed": cfg.noise_seed,
        "lam_init": cfg.lam_init,
        "forgetting": cfg.forgetting,
        "instability_threshold": cfg.instability_threshold,
        "rls_from_start": cfg.rls_from_start,
    }


def config_from_dict(obj: dict) -> ScenarioConfig:
    delta = obj.get("delta_system")
    return ScenarioConfig(
        plant=as_state_space(system_from_dict(obj["plant"])),
        controller=as_state_space(system_from_dict(obj["controller"])),
        delta_system=(as_state_space(system_from_dict(delta))
                      if delta is not None else None),
        duration=obj.get("duration", 20.0),
        t_on=obj.get("t_on", 10.0),
        fir_length=obj.get("fir_length", 8),
        beta=obj.get("beta"),
        safety_enabled=obj.get("safety_enabled", True),
        disturbance=DisturbanceParams(**obj.get("disturbance", {})),
        noise_seed=obj.get("noise_seed", 0),
        lam_init=obj.get("lam_init", 1e4),
        forgetting=obj.get("forgetting", 1.0),
        instability_threshold=obj.get("instability_threshold", 1e6),
        rls_from_start=obj.get("rls_from_start", True),
    )
