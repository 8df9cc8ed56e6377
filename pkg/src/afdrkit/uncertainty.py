"""Norm-bounded additive plant uncertainties.

Provides the specific second-order model error used by the reference
experiment and a seeded sampler of random stable uncertainties whose induced
l-infinity norm is rescaled to lie inside a prescribed bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import StateSpace, TransferFunction, induced_linf_norm, tf_to_ss

POLE_RADIUS = 0.9


@dataclass(frozen=True)
class UncertaintySpec:
    """Sampler parameters: norm bound, model order, and RNG seed."""

    delta: float
    order: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.order < 1:
            raise ValueError("order must be at least 1")


def paper_delta(ts: float = 0.01) -> StateSpace:
    """The reference model error: 1e-4 (0.5366 z - 1.195) / (z^2 + 0.1429 z - 0.2798)."""
    tf = TransferFunction(1e-4 * np.array([0.5366, -1.195]),
                          [1.0, 0.1429, -0.2798], ts)
    return tf_to_ss(tf)


def random_delta(spec: UncertaintySpec, ts: float = 0.01) -> StateSpace:
    """Sample a stable strictly proper SISO uncertainty with norm <= delta.

    Poles are drawn uniformly from the disk of radius 0.9 (conjugate pairs or
    reals with equal probability), zeros uniformly from [-1, 1], and the gain
    is rescaled so the certified induced l-infinity norm equals a magnitude
    drawn uniformly from [delta/2, delta].  Deterministic given the seed.
    """
    if spec.delta == 0.0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)),
                          np.zeros((1, 0)), [[0.0]], ts)
    rng = np.random.default_rng(spec.seed)
    poles: list[complex] = []
    remaining = spec.order
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.5:
            radius = POLE_RADIUS * np.sqrt(rng.random())
            angle = np.pi * rng.random()
            p = radius * np.exp(1j * angle)
            poles.extend([p, np.conj(p)])
            remaining -= 2
        else:
            poles.append(complex(rng.uniform(-POLE_RADIUS, POLE_RADIUS)))
            remaining -= 1
    zeros = rng.uniform(-1.0, 1.0, size=spec.order - 1)
    target = spec.delta * rng.uniform(0.5, 1.0)
    den = np.real(np.poly(poles))
    num = np.poly(zeros) if zeros.size else np.ones(1)
    sys = tf_to_ss(TransferFunction(num, den, ts))
    norm = induced_linf_norm(sys)
    scale = target / norm
    return StateSpace(sys.a, sys.b, scale * sys.c, scale * sys.d, ts)
