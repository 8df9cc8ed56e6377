"""Interconnection analysis for the adaptive-FIR loop: the partitioned
nominal dynamics M, the scaled small-gain test, and the largest certified
FIR gain bound computed from a two-variable linear program.

The uncertainty channel is additive at the plant output (G = G_hat + Delta,
with Delta driven by the control input u) and the adaptive filter channel
maps the disturbance estimate w_hat to the injected reference r.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .lti import (
    LtiError,
    StateSpace,
    feedback_unity,
    from_blocks,
    induced_linf_norm,
    is_stable,
    negate,
    series,
    static_gain,
    subsystem,
)


@dataclass(frozen=True)
class LftPartition:
    """Blocks of the nominal interconnection M.

    Inputs are grouped (q, r, d) and outputs (u, w_hat, y); M11 maps (q, r)
    to (u, w_hat), M12 maps d to (u, w_hat), M21 maps (q, r) to y, and M22
    maps d to y.  delta is the bound on the uncertainty wrapped around the
    (u, q) channel pair.
    """

    m11: StateSpace
    m12: StateSpace
    m21: StateSpace
    m22: StateSpace
    n_u: int
    n_q: int
    n_w: int
    n_r: int
    n_d: int
    n_y: int
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise LtiError("uncertainty bound must be nonnegative")
        dims = {
            "m11": (self.n_u + self.n_w, self.n_q + self.n_r),
            "m12": (self.n_u + self.n_w, self.n_d),
            "m21": (self.n_y, self.n_q + self.n_r),
            "m22": (self.n_y, self.n_d),
        }
        ts = self.m11.ts
        for name, (p, m) in dims.items():
            g = getattr(self, name)
            if (g.n_outputs, g.n_inputs) != (p, m):
                raise LtiError(f"{name} must be {p}x{m}, got "
                               f"{g.n_outputs}x{g.n_inputs}")
            if g.ts != ts:
                raise LtiError("all blocks must share the sample time")
            if not is_stable(g):
                raise LtiError(f"{name} must be stable")


@dataclass(frozen=True)
class SmallGainCertificate:
    """Result of the largest-safe-gain computation.

    beta_star is the supremum of FIR gain bounds satisfying the scaled
    small-gain condition; any beta strictly below it certifies robust
    finite-gain stability.  s1 is a scaling that witnesses feasibility for
    beta slightly below beta_star.
    """

    beta_star: float
    s1: float
    h11: float
    h12: float
    h21: float
    h22: float
    feasible: bool

    def to_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "s1": self.s1,
            "norms": {"h11": self.h11, "h12": self.h12,
                      "h21": self.h21, "h22": self.h22},
            "feasible": self.feasible,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_afdr_lft(g_hat: StateSpace, k: StateSpace, delta: float) -> LftPartition:
    """Construct M for the adaptive-FIR loop with additive plant uncertainty.

    With S and T the inner-loop sensitivity / complementary sensitivity,
    closing the physical loop around the plant model gives

        u     = K S (r - q - d)
        w_hat = S (q + d)
        y     = T r + S (q + d)

    so M11 = [[-KS, KS], [S, 0]], M12 = [[-KS], [S]], M21 = [S, T],
    M22 = S.
    """
    if g_hat.n_inputs != 1 or g_hat.n_outputs != 1:
        raise LtiError("plant must be SISO")
    if k.n_inputs != 1 or k.n_outputs != 1:
        raise LtiError("controller must be SISO")
    s, t = feedback_unity(series(k, g_hat))
    if not is_stable(s):
        raise LtiError("inner loop is unstable")
    ks = series(s, k)
    ts = g_hat.ts
    zero = static_gain([[0.0]], ts)
    m11 = from_blocks([[negate(ks), ks], [s, zero]], ts)
    m12 = from_blocks([[negate(ks)], [s]], ts)
    m21 = from_blocks([[s, t]], ts)
    return LftPartition(m11=m11, m12=m12, m21=m21, m22=s,
                        n_u=1, n_q=1, n_w=1, n_r=1, n_d=1, n_y=1, delta=delta)


def scaled_m11_norm_bounds(p: LftPartition,
                           rel_tol: float = 1e-6) -> tuple[float, float, float, float]:
    """Induced l-infinity norms of the four blocks of H = M11 diag(delta I, I).

    H11 maps q to u, H12 maps r to u, H21 maps q to w_hat, H22 maps r to
    w_hat; the delta scaling is absorbed into the q-input blocks.
    """
    u_rows = range(p.n_u)
    w_rows = range(p.n_u, p.n_u + p.n_w)
    q_cols = range(p.n_q)
    r_cols = range(p.n_q, p.n_q + p.n_r)

    def block_norm(rows, cols, factor):
        if factor == 0.0:
            return 0.0
        return factor * induced_linf_norm(subsystem(p.m11, rows, cols), rel_tol)

    h11 = block_norm(u_rows, q_cols, p.delta)
    h12 = block_norm(u_rows, r_cols, 1.0)
    h21 = block_norm(w_rows, q_cols, p.delta)
    h22 = block_norm(w_rows, r_cols, 1.0)
    return h11, h12, h21, h22


def check_scaled_small_gain(p: LftPartition, s1: float, beta: float,
                            rel_tol: float = 1e-6) -> bool:
    """Evaluate the two-row small-gain condition with s2 fixed to 1.

    True iff s1 (||H11|| - 1) + beta ||H12|| < 0 and
    s1 ||H21|| + beta ||H22|| < 1.
    """
    if not s1 > 0:
        raise LtiError("scaling s1 must be positive")
    if beta < 0:
        raise LtiError("beta must be nonnegative")
    h11, h12, h21, h22 = scaled_m11_norm_bounds(p, rel_tol)
    return _feasible(h11, h12, h21, h22, s1, beta)


def _feasible(h11, h12, h21, h22, s1, beta) -> bool:
    return (s1 * (h11 - 1.0) + beta * h12 < 0.0
            and s1 * h21 + beta * h22 < 1.0)


def beta_star_from_norms(h11: float, h12: float, h21: float,
                         h22: float) -> SmallGainCertificate:
    """Closed-form solution of  max beta  s.t.
    s1 (h11 - 1) + beta h12 < 0,  s1 h21 + beta h22 < 1,  s1, beta > 0.

    The supremum is (1 - h11) / (h22 (1 - h11) + h21 h12) when h11 < 1; the
    reported s1 witnesses feasibility for any beta strictly below it.
    """
    if h11 >= 1.0:
        return SmallGainCertificate(0.0, 0.0, h11, h12, h21, h22, False)
    denom = h22 * (1.0 - h11) + h21 * h12
    if denom <= 0.0:
        beta_star = math.inf
        s1 = 1.0 if h21 == 0.0 else 0.5 / h21
        return SmallGainCertificate(beta_star, s1, h11, h12, h21, h22, True)
    beta_star = (1.0 - h11) / denom
    if h12 > 0.0:
        # vertex scaling, pulled marginally off the active constraint so the
        # certificate stays strictly feasible for beta just below beta_star
        s1 = (1.0 - 1e-6) * beta_star * h12 / (1.0 - h11)
    elif h21 > 0.0:
        # beta_star = 1/h22 here; any small s1 is feasible for beta < beta_star
        s1 = 1e-3 / h21
    else:
        s1 = 1.0
    return SmallGainCertificate(beta_star, s1, h11, h12, h21, h22, True)


def beta_star(p: LftPartition, rel_tol: float = 1e-6) -> SmallGainCertificate:
    """Largest FIR gain bound certified by the scaled small-gain condition."""
    h11, h12, h21, h22 = scaled_m11_norm_bounds(p, rel_tol)
    return beta_star_from_norms(h11, h12, h21, h22)
