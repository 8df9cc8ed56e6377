"""Safety filter for the adaptive FIR command.

The safe set is the ball of coefficient matrices with induced infinity-norm
at most beta.  The filter minimally perturbs the unconstrained command in
the infinity-norm while restricting the implied coefficients to the safe
set; the optimum has an explicit form, and the resulting command equals an
elementwise saturation at r_max = beta * ||window||_inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SafeSet:
    """Coefficient matrices Theta (n_r x n_w*H) with ||Theta||_inf <= beta."""

    beta: float
    n_r: int
    n_w: int
    fir_length: int

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    def contains(self, theta) -> bool:
        return matrix_inf_norm(theta) <= self.beta + 1e-12


@dataclass(frozen=True)
class FilterDecision:
    """Safe command r, the coefficients that realize it, and saturation flags."""

    r: np.ndarray
    theta: np.ndarray
    saturated: np.ndarray
    r_max: float


def matrix_inf_norm(theta) -> float:
    """Induced infinity-norm of a matrix: maximum absolute row sum."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(theta), axis=1)))


def safety_filter_clip(r_circ, window, beta: float):
    """Saturate the command elementwise at r_max = beta * ||window||_inf.

    Returns (r, saturated flags, r_max).  Does not form the optimal
    coefficients; equals the command from safety_filter_solve.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    r_circ = np.atleast_1d(np.asarray(r_circ, dtype=float))
    window = np.atleast_1d(np.asarray(window, dtype=float))
    r_max = beta * float(np.max(np.abs(window))) if window.size else 0.0
    saturated = np.abs(r_circ) > r_max
    r = np.clip(r_circ, -r_max, r_max)
    # sign(0) = 0 convention: clip already maps r_circ = 0 to 0
    return r, saturated, r_max


def safety_filter_solve(r_circ, window, beta: float) -> FilterDecision:
    """Explicit optimizer of the minimal-perturbation program.

    i0 is the first index attaining ||window||_inf.  Row i of the optimal
    coefficient matrix is min(|r_circ(i)|, beta |window(i0)|) * sign(r_circ(i))
    / window(i0) on column i0 and zero elsewhere.  A zero window admits only
    the zero command, so the decision degenerates to r = 0, Theta = 0.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    r_circ = np.atleast_1d(np.asarray(r_circ, dtype=float))
    window = np.atleast_1d(np.asarray(window, dtype=float))
    n_r, dim = r_circ.size, window.size
    theta = np.zeros((n_r, dim))
    i0 = int(np.argmax(np.abs(window)))
    w0 = window[i0]
    r_max = beta * abs(w0)
    saturated = np.abs(r_circ) > r_max
    if w0 == 0.0:
        return FilterDecision(np.zeros(n_r), theta, saturated, 0.0)
    c = np.minimum(np.abs(r_circ), r_max)
    theta[:, i0] = c * np.sign(r_circ) / w0
    r = theta @ window
    return FilterDecision(r, theta, saturated, r_max)
