"""Online disturbance estimation and the RLS-updated adaptive FIR filter.

The estimator reconstructs the effective disturbance left after the inner
loop as w_hat = y - T_hat r.  The FIR filter maps a rolling window of
disturbance estimates to an injected reference.  Its coefficients are the
recursive solution of a growing least-squares problem whose regressors are
the window entries filtered once through T_hat; the recursion reproduces the
regularized batch solution at every step when the forgetting factor is 1.
"""

from __future__ import annotations

import numpy as np

from .lti import LtiError, StateSpace, is_stable


class DisturbanceEstimator:
    """Stateful reconstruction of the effective disturbance w_hat = y - T_hat r."""

    def __init__(self, t_hat: StateSpace):
        if not is_stable(t_hat):
            raise LtiError("estimator model must be stable")
        self.model = t_hat
        self.x = np.zeros(t_hat.n_states)

    @property
    def strictly_proper(self) -> bool:
        return not np.any(self.model.d)

    def predicted_state_output(self) -> np.ndarray:
        """Feedthrough-free part of (T_hat r) at the current step."""
        return self.model.c @ self.x

    def advance(self, r_t) -> None:
        r_t = np.atleast_1d(np.asarray(r_t, dtype=float))
        self.x = self.model.a @ self.x + self.model.b @ r_t

    def estimate(self, r_t, y_t) -> np.ndarray:
        """w_hat_t = y_t - (T_hat r)_t, advancing the internal state by r_t."""
        r_t = np.atleast_1d(np.asarray(r_t, dtype=float))
        y_t = np.atleast_1d(np.asarray(y_t, dtype=float))
        if r_t.size != self.model.n_inputs or y_t.size != self.model.n_outputs:
            raise LtiError("estimator input dimension mismatch")
        w_hat = y_t - (self.model.c @ self.x + self.model.d @ r_t)
        self.advance(r_t)
        return w_hat


class FirState:
    """FIR coefficients and the rolling window of disturbance estimates.

    The window stacks w_hat_t, w_hat_{t-1}, ..., w_hat_{t-H+1} (newest
    first), zero-prefilled for samples before time 0.
    """

    def __init__(self, fir_length: int, n_r: int = 1, n_w: int = 1):
        if fir_length < 1:
            raise ValueError("FIR length must be at least 1")
        self.fir_length = fir_length
        self.n_r = n_r
        self.n_w = n_w
        self.theta = np.zeros((n_r, n_w * fir_length))
        self.window = np.zeros(n_w * fir_length)

    def push(self, w_hat_t) -> None:
        w_hat_t = np.atleast_1d(np.asarray(w_hat_t, dtype=float))
        if w_hat_t.size != self.n_w:
            raise ValueError("window push dimension mismatch")
        self.window = np.concatenate([w_hat_t, self.window[:-self.n_w]])

    def output(self) -> np.ndarray:
        return self.theta @ self.window

    def set_coefficients(self, zeta) -> None:
        """Install the stacked coefficient vector (rows of theta concatenated)."""
        zeta = np.asarray(zeta, dtype=float).ravel()
        if zeta.size != self.theta.size:
            raise ValueError(
                f"expected {self.theta.size} coefficients, got {zeta.size}")
        self.theta = zeta.reshape(self.n_r, self.n_w * self.fir_length)


def fir_output(f: FirState) -> np.ndarray:
    return f.output()


def set_fir_coefficients(f: FirState, zeta) -> FirState:
    f.set_coefficients(zeta)
    return f


class RlsState:
    """Recursive least squares over filtered FIR regressors.

    The batch problem at time t is
        min_zeta ||Phi_t zeta + w_hat_{0:t}||^2 + (1/lambda_init) ||zeta||^2
    where row block s of Phi_t is the window of disturbance estimates at time
    s filtered through the closed-loop model t_hat.  The recursion maintains
    zeta and the inverse-Gram matrix P (P_0 = lambda_init I).  A forgetting
    factor below 1 exponentially down-weights old data.
    """

    def __init__(self, t_hat: StateSpace, fir_length: int,
                 lam_init: float = 1e4, forgetting: float = 1.0):
        if not 0.0 < forgetting <= 1.0:
            raise ValueError("forgetting factor must be in (0, 1]")
        if not lam_init > 0:
            raise ValueError("lambda_init must be positive")
        self.model = t_hat
        self.fir_length = fir_length
        self.n_r = t_hat.n_inputs
        self.n_w = t_hat.n_outputs
        self.dim = self.n_r * self.n_w * fir_length
        self.lam_init = lam_init
        self.forgetting = forgetting
        self.zeta = np.zeros(self.dim)
        self.p = lam_init * np.eye(self.dim)
        self._siso = self.n_r == 1 and self.n_w == 1
        if self._siso:
            # fast path: one filtered scalar signal plus a delay line
            self._gx = np.zeros(t_hat.n_states)
            self._gwin = np.zeros(fir_length)
        else:
            # general path: filter every column of the stacked regressor
            self._zx = np.zeros((t_hat.n_states, self.dim))
            self._wwin = np.zeros(self.n_w * fir_length)
        self._t = -1
        self._updated_t = -1

    def regressor(self, w_hat_t) -> np.ndarray:
        """Advance one step and return the current regressor (n_w x dim).

        Must be called exactly once per time step, in order, and before the
        matching update call.
        """
        if self._t != self._updated_t:
            raise RuntimeError("regressor called twice without an update")
        self._t += 1
        w_hat_t = np.atleast_1d(np.asarray(w_hat_t, dtype=float))
        m = self.model
        if self._siso:
            g = m.c @ self._gx + m.d @ w_hat_t
            self._gx = m.a @ self._gx + m.b @ w_hat_t
            self._gwin = np.concatenate([g, self._gwin[:-1]])
            return self._gwin.reshape(1, -1)
        self._wwin = np.concatenate([w_hat_t, self._wwin[:-self.n_w]])
        x_t = np.kron(np.eye(self.n_r), self._wwin)  # n_r x dim
        phi = m.c @ self._zx + m.d @ x_t
        self._zx = m.a @ self._zx + m.b @ x_t
        return phi

    def update(self, phi: np.ndarray, w_hat_t) -> np.ndarray:
        """One RLS step with observation target -w_hat_t; returns zeta."""
        if self._t == self._updated_t:
            raise RuntimeError("update called without a new regressor")
        self._updated_t = self._t
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        target = -np.atleast_1d(np.asarray(w_hat_t, dtype=float))
        rho = self.forgetting
        p_phi_t = self.p @ phi.T
        gram = rho * np.eye(phi.shape[0]) + phi @ p_phi_t
        gain = np.linalg.solve(gram.T, p_phi_t.T).T
        self.zeta = self.zeta + gain @ (target - phi @ self.zeta)
        self.p = (self.p - gain @ p_phi_t.T) / rho
        self.p = (self.p + self.p.T) / 2.0  # symmetry drifts over long runs
        return self.zeta


def rls_regressor(r: RlsState, w_hat_t) -> np.ndarray:
    return r.regressor(w_hat_t)


def rls_update(r: RlsState, phi, w_hat_t) -> np.ndarray:
    return r.update(phi, w_hat_t)
