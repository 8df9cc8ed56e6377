import numpy as np
import pytest

import afdrkit as ak
from afdrkit.benchmark import nominal_plant, pid_controller


@pytest.fixture(scope="session")
def paper_g():
    return ak.tf_to_ss(nominal_plant())


@pytest.fixture(scope="session")
def paper_k():
    return ak.tf_to_ss(pid_controller())


@pytest.fixture(scope="session")
def inner_st(paper_g, paper_k):
    return ak.feedback_unity(ak.series(paper_k, paper_g))


@pytest.fixture(scope="session")
def paper_partition(paper_g, paper_k):
    return ak.build_afdr_lft(paper_g, paper_k, 3e-4)


@pytest.fixture(scope="session")
def paper_certificate(paper_partition):
    return ak.beta_star(paper_partition)


def long_division(num, den, n_terms):
    """Impulse response of num(z)/den(z) by polynomial long division in z^-1."""
    num = np.asarray(num, dtype=float) / den[0]
    den = np.asarray(den, dtype=float) / den[0]
    num = np.concatenate([np.zeros(len(den) - len(num)), num])
    h = np.zeros(n_terms)
    for k in range(n_terms):
        acc = num[k] if k < num.size else 0.0
        for j in range(1, min(k, den.size - 1) + 1):
            acc -= den[j] * h[k - j]
        h[k] = acc
    return h


def random_stable_tf(rng, max_order=5, ts=0.01):
    order = int(rng.integers(1, max_order + 1))
    poles = []
    remaining = order
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.5:
            radius = 0.95 * np.sqrt(rng.random())
            angle = np.pi * rng.random()
            p = radius * np.exp(1j * angle)
            poles.extend([p, np.conj(p)])
            remaining -= 2
        else:
            poles.append(complex(rng.uniform(-0.95, 0.95)))
            remaining -= 1
    den = np.real(np.poly(poles))
    num = rng.standard_normal(int(rng.integers(1, order + 2)))
    if not np.any(num):
        num = np.ones(1)
    return ak.TransferFunction(num, den, ts)
