"""Discrete-time LTI systems: representations, interconnections, simulation,
and certified induced l-infinity norm bounds.

Transfer functions are SISO rational functions in z with coefficients in
descending powers.  State-space models are MIMO.  All closed loops are built
by state-space interconnection formulas; polynomial arithmetic is only used
for the transfer-function-to-state-space conversion itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class LtiError(ValueError):
    """Invalid system definition or incompatible interconnection."""


class UnstableSystemError(LtiError):
    """Operation requires a stable system (spectral radius < 1)."""


class AlgebraicLoopError(LtiError):
    """Feedback interconnection has a singular I + D."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TransferFunction:
    """SISO rational transfer function in z, coefficients in descending powers.

    Must be proper (numerator degree <= denominator degree) with a nonzero
    denominator leading coefficient.
    """

    num: np.ndarray
    den: np.ndarray
    ts: float

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        num = np.trim_zeros(num, "f")
        if num.size == 0:
            num = np.zeros(1)
        if den.size == 0 or den[0] == 0.0:
            raise LtiError("denominator leading coefficient must be nonzero")
        if num.size > den.size:
            raise LtiError("improper transfer function (num degree > den degree)")
        if not self.ts > 0:
            raise LtiError("sample time must be positive")
        object.__setattr__(self, "num", _freeze(num))
        object.__setattr__(self, "den", _freeze(den))


@dataclass(frozen=True)
class StateSpace:
    """Discrete-time state-space model x+ = Ax + Bu, y = Cx + Du."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    ts: float

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        d = np.atleast_2d(np.asarray(self.d, dtype=float))
        n = a.shape[0]
        if a.shape != (n, n):
            raise LtiError(f"A must be square, got {a.shape}")
        if b.shape[0] != n:
            raise LtiError(f"B rows ({b.shape[0]}) must match A ({n})")
        if c.shape[1] != n:
            raise LtiError(f"C cols ({c.shape[1]}) must match A ({n})")
        if d.shape != (c.shape[0], b.shape[1]):
            raise LtiError(f"D must be {c.shape[0]}x{b.shape[1]}, got {d.shape}")
        if not self.ts > 0:
            raise LtiError("sample time must be positive")
        for name, m in (("a", a), ("b", b), ("c", c), ("d", d)):
            object.__setattr__(self, name, _freeze(m))

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.c.shape[0]


def static_gain(d, ts: float) -> StateSpace:
    """Zero-state system realizing a constant gain matrix."""
    d = np.atleast_2d(np.asarray(d, dtype=float))
    p, m = d.shape
    return StateSpace(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), d, ts)


def tf_to_ss(tf: TransferFunction) -> StateSpace:
    """Controllable-canonical realization of a proper SISO transfer function."""
    den = tf.den / tf.den[0]
    num = tf.num / tf.den[0]
    n = den.size - 1
    num = np.concatenate([np.zeros(den.size - num.size), num])
    d = num[0]
    if n == 0:
        return static_gain([[d]], tf.ts)
    # strictly proper remainder after pulling out the feedthrough
    rem = num[1:] - d * den[1:]
    a = np.zeros((n, n))
    a[0, :] = -den[1:]
    if n > 1:
        a[1:, :-1] = np.eye(n - 1)
    b = np.zeros((n, 1))
    b[0, 0] = 1.0
    return StateSpace(a, b, rem.reshape(1, -1), [[d]], tf.ts)


def _check_ts(g1: StateSpace, g2: StateSpace):
    if g1.ts != g2.ts:
        raise LtiError(f"sample-time mismatch: {g1.ts} vs {g2.ts}")


def series(g1: StateSpace, g2: StateSpace) -> StateSpace:
    """Cascade: the output of g1 drives the input of g2 (returns g2*g1)."""
    _check_ts(g1, g2)
    if g2.n_inputs != g1.n_outputs:
        raise LtiError("series: g2 inputs must match g1 outputs")
    n1, n2 = g1.n_states, g2.n_states
    a = np.block([[g1.a, np.zeros((n1, n2))], [g2.b @ g1.c, g2.a]])
    b = np.vstack([g1.b, g2.b @ g1.d])
    c = np.hstack([g2.d @ g1.c, g2.c])
    d = g2.d @ g1.d
    return StateSpace(a, b, c, d, g1.ts)


def parallel(g1: StateSpace, g2: StateSpace) -> StateSpace:
    """Sum of outputs for a shared input."""
    _check_ts(g1, g2)
    if g1.n_inputs != g2.n_inputs or g1.n_outputs != g2.n_outputs:
        raise LtiError("parallel: I/O dimensions must match")
    n1, n2 = g1.n_states, g2.n_states
    a = np.block([[g1.a, np.zeros((n1, n2))], [np.zeros((n2, n1)), g2.a]])
    b = np.vstack([g1.b, g2.b])
    c = np.hstack([g1.c, g2.c])
    return StateSpace(a, b, c, g1.d + g2.d, g1.ts)


def negate(g: StateSpace) -> StateSpace:
    return StateSpace(g.a, g.b, -g.c, -g.d, g.ts)


def feedback_unity(loop: StateSpace) -> tuple[StateSpace, StateSpace]:
    """Sensitivity S = (I+L)^-1 and complementary sensitivity T = L(I+L)^-1
    for a square loop L under negative unity feedback.

    Both realizations share the closed-loop A matrix; no polynomial
    cancellation is involved.
    """
    if loop.n_inputs != loop.n_outputs:
        raise LtiError("feedback_unity: loop must be square")
    m = loop.n_inputs
    i_plus_d = np.eye(m) + loop.d
    if abs(np.linalg.det(i_plus_d)) < 1e-12:
        raise AlgebraicLoopError("I + D is singular")
    e = np.linalg.inv(i_plus_d)
    a_cl = loop.a - loop.b @ e @ loop.c
    b_cl = loop.b @ e
    ct = e @ loop.c
    dt = e @ loop.d
    t = StateSpace(a_cl, b_cl, ct, dt, loop.ts)
    s = StateSpace(a_cl, b_cl, -ct, np.eye(m) - dt, loop.ts)
    return s, t


def simulate(g: StateSpace, u, x0=None) -> np.ndarray:
    """Run y_t = C x_t + D u_t, x_{t+1} = A x_t + B u_t over an input sequence.

    u has shape (N,) for single-input systems or (N, m).  The output keeps the
    corresponding shape convention.
    """
    u = np.asarray(u, dtype=float)
    squeeze = u.ndim == 1
    if squeeze:
        if g.n_inputs != 1:
            raise LtiError("1-D input sequence requires a single-input system")
        u = u.reshape(-1, 1)
    if u.shape[1] != g.n_inputs:
        raise LtiError(f"input dimension {u.shape[1]} != {g.n_inputs}")
    x = np.zeros(g.n_states) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x.size != g.n_states:
        raise LtiError("initial state dimension mismatch")
    n = u.shape[0]
    y = np.empty((n, g.n_outputs))
    a, b, c, d = g.a, g.b, g.c, g.d
    for k in range(n):
        y[k] = c @ x + d @ u[k]
        x = a @ x + b @ u[k]
    if squeeze and g.n_outputs == 1:
        return y.ravel()
    return y


def impulse_response(g: StateSpace, n: int) -> np.ndarray:
    """First n Markov parameters, shape (n, p, m)."""
    h = np.empty((n, g.n_outputs, g.n_inputs))
    if n == 0:
        return h
    h[0] = g.d
    x = g.b.copy()
    for k in range(1, n):
        h[k] = g.c @ x
        x = g.a @ x
    return h


def frequency_response(g: StateSpace, w, ts: float | None = None) -> np.ndarray:
    """Evaluate C (zI - A)^-1 B + D at z = exp(j w Ts).  Test/diagnostic use."""
    ts = g.ts if ts is None else ts
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty((w.size, g.n_outputs, g.n_inputs), dtype=complex)
    eye = np.eye(g.n_states)
    for i, wi in enumerate(w):
        z = np.exp(1j * wi * ts)
        out[i] = g.c @ np.linalg.solve(z * eye - g.a, g.b) + g.d
    return out


def spectral_radius(g: StateSpace) -> float:
    if g.n_states == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(g.a))))


STABILITY_MARGIN = 1e-9


def is_stable(g: StateSpace, margin: float = STABILITY_MARGIN) -> bool:
    return spectral_radius(g) < 1.0 - margin


def induced_linf_norm(g: StateSpace, rel_tol: float = 1e-6) -> float:
    """Certified upper bound on the peak-to-peak (l-infinity induced) gain.

    Equals the l1 norm of the impulse response: max over output rows of the
    absolute sum of all impulse-response entries.  The truncated partial sum
    is completed with a geometric tail bound built from a power m such that
    ||A^m||_inf < 1, so the returned value is always >= the true norm and is
    within a factor (1 + rel_tol) of it.
    """
    if not rel_tol > 0:
        raise LtiError("rel_tol must be positive")
    if g.n_states == 0:
        return float(np.max(np.sum(np.abs(g.d), axis=1)))
    if not is_stable(g):
        raise UnstableSystemError("induced l-infinity norm requires a stable system")

    # contraction certificate: smallest power of two m with ||A^m||_inf < 1
    a_pow = g.a.copy()
    m = 1
    while np.max(np.sum(np.abs(a_pow), axis=1)) >= 1.0:
        a_pow = a_pow @ a_pow
        m *= 2
        if m > 1 << 24:
            raise UnstableSystemError("no contraction certificate found")
    gamma = float(np.max(np.sum(np.abs(a_pow), axis=1)))

    row_sums = np.sum(np.abs(g.d), axis=1)
    x = g.b.copy()
    horizon = 256
    k = 0
    while True:
        while k < horizon:
            row_sums = row_sums + np.sum(np.abs(g.c @ x), axis=1)
            x = g.a @ x
            k += 1
        # tail after k terms: sum the next m terms, then geometric decay
        block = 0.0
        xt = x.copy()
        for _ in range(m):
            block += float(np.max(np.sum(np.abs(g.c @ xt), axis=1)))
            xt = g.a @ xt
        tail = block / (1.0 - gamma)
        partial = float(np.max(row_sums))
        if tail <= rel_tol * max(partial, np.finfo(float).tiny):
            return partial + tail
        horizon *= 2


# --- JSON system files -----------------------------------------------------

def system_to_dict(g) -> dict:
    if isinstance(g, TransferFunction):
        return {"type": "tf", "num": g.num.tolist(), "den": g.den.tolist(), "ts": g.ts}
    if isinstance(g, StateSpace):
        return {
            "type": "ss",
            "a": g.a.tolist(),
            "b": g.b.tolist(),
            "c": g.c.tolist(),
            "d": g.d.tolist(),
            "ts": g.ts,
        }
    raise LtiError(f"not a system: {type(g)!r}")


def system_from_dict(obj: dict):
    kind = obj.get("type")
    if kind == "tf":
        return TransferFunction(obj["num"], obj["den"], obj["ts"])
    if kind == "ss":
        return StateSpace(obj["a"], obj["b"], obj["c"], obj["d"], obj["ts"])
    raise LtiError(f"unknown system type: {kind!r}")


def load_system(path):
    with open(path) as f:
        return system_from_dict(json.load(f))


def save_system(g, path):
    with open(path, "w") as f:
        json.dump(system_to_dict(g), f, indent=2)
        f.write("\n")


def as_state_space(g) -> StateSpace:
    """Accept either representation and return a state-space model."""
    if isinstance(g, TransferFunction):
        return tf_to_ss(g)
    if isinstance(g, StateSpace):
        return g
    raise LtiError(f"not a system: {type(g)!r}")


def from_blocks(grid, ts: float) -> StateSpace:
    """Assemble a MIMO system from a 2-D grid of blocks.

    grid[i][j] maps input group j to output group i.  Blocks in a row must
    agree on output dimension and blocks in a column on input dimension.
    States are block-diagonal across all entries.
    """
    rows = len(grid)
    cols = len(grid[0])
    blocks = [[as_state_space(grid[i][j]) for j in range(cols)] for i in range(rows)]
    out_dims = [blocks[i][0].n_outputs for i in range(rows)]
    in_dims = [blocks[0][j].n_inputs for j in range(cols)]
    for i in range(rows):
        for j in range(cols):
            g = blocks[i][j]
            if g.ts != ts:
                raise LtiError("from_blocks: sample-time mismatch")
            if g.n_outputs != out_dims[i] or g.n_inputs != in_dims[j]:
                raise LtiError("from_blocks: inconsistent block dimensions")
    n_total = sum(g.n_states for row in blocks for g in row)
    p_total, m_total = sum(out_dims), sum(in_dims)
    a = np.zeros((n_total, n_total))
    b = np.zeros((n_total, m_total))
    c = np.zeros((p_total, n_total))
    d = np.zeros((p_total, m_total))
    ofs = 0
    row_ofs = np.concatenate([[0], np.cumsum(out_dims)]).astype(int)
    col_ofs = np.concatenate([[0], np.cumsum(in_dims)]).astype(int)
    for i in range(rows):
        for j in range(cols):
            g = blocks[i][j]
            n = g.n_states
            a[ofs:ofs + n, ofs:ofs + n] = g.a
            b[ofs:ofs + n, col_ofs[j]:col_ofs[j + 1]] = g.b
            c[row_ofs[i]:row_ofs[i + 1], ofs:ofs + n] = g.c
            d[row_ofs[i]:row_ofs[i + 1], col_ofs[j]:col_ofs[j + 1]] = g.d
            ofs += n
    return StateSpace(a, b, c, d, ts)


def subsystem(g: StateSpace, outputs, inputs) -> StateSpace:
    """Select output rows and input columns (state dimension unchanged)."""
    outputs = list(outputs)
    inputs = list(inputs)
    return StateSpace(
        g.a, g.b[:, inputs], g.c[outputs, :], g.d[np.ix_(outputs, inputs)], g.ts
    )


def scale_output(g: StateSpace, factor: float) -> StateSpace:
    return StateSpace(g.a, g.b, factor * g.c, factor * g.d, g.ts)
