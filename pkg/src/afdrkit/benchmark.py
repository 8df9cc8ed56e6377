"""The reference plant, inner-loop PID controller, and disturbance used
throughout the examples and tests.

The plant is a discretized double integrator with a lightly damped resonance
near 150 rad/s; the controller is a discretized PID with approximate
derivative and a loop bandwidth near 12.5 rad/s.  Sample time is 0.01 s.
"""

import numpy as np

from .lti import StateSpace, TransferFunction, feedback_unity, series, tf_to_ss

SAMPLE_TIME = 0.01

PLANT_NUM = 1e-4 * np.array([5.399, 5.308, 3.143, 4.459])
PLANT_DEN = np.array([1.0, -2.14, 2.249, -2.08, 0.9704])

CONTROLLER_NUM = np.array([75.78, -148.4, 72.63])
CONTROLLER_DEN = np.array([1.0, -1.535, 0.5353])


def nominal_plant() -> TransferFunction:
    return TransferFunction(PLANT_NUM, PLANT_DEN, SAMPLE_TIME)


def pid_controller() -> TransferFunction:
    return TransferFunction(CONTROLLER_NUM, CONTROLLER_DEN, SAMPLE_TIME)


def inner_loop(g_hat: StateSpace | None = None,
               k: StateSpace | None = None) -> tuple[StateSpace, StateSpace]:
    """Sensitivity and complementary sensitivity of the inner feedback loop."""
    g_hat = tf_to_ss(nominal_plant()) if g_hat is None else g_hat
    k = tf_to_ss(pid_controller()) if k is None else k
    return feedback_unity(series(k, g_hat))
