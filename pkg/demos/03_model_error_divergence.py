"""A tiny model error destabilizes the unconstrained adaptive loop.

The additive plant perturbation here has a peak gain below 3e-4, invisible
to the inner PID loop, yet the unconstrained FIR adaptation winds up its
coefficients until the output blows past the divergence threshold.  The same
run with the certified safety filter stays bounded.
"""

import numpy as np

import afdrkit as ak
from afdrkit.benchmark import nominal_plant, pid_controller

g_hat = ak.tf_to_ss(nominal_plant())
k = ak.tf_to_ss(pid_controller())
delta = ak.paper_delta()
print("perturbation peak gain:", f"{ak.induced_linf_norm(delta):.2e}")

unsafe = ak.run_scenario(ak.ScenarioConfig(
    plant=g_hat, controller=k, delta_system=delta,
    beta=None, safety_enabled=False))
print("\nwithout safety filter:")
print("  stable:", unsafe.stable)
print("  diverged at t =", None if unsafe.diverged_at is None
      else round(unsafe.diverged_at * 0.01, 2), "s")
print("  peak coefficient norm:", f"{np.nanmax(unsafe.theta_norm):.3g}")

safe = ak.run_scenario(ak.ScenarioConfig(
    plant=g_hat, controller=k, delta_system=delta, beta=2.8))
print("\nwith safety filter (beta = 2.8):")
print("  stable:", safe.stable)
print("  std over [10,20] s:", round(safe.std_post, 4))
print("  peak coefficient norm:", round(safe.theta_norm.max(), 3))
