"""Shared reference data for the test suite.

The coefficient tables below are the reference N=1,2,3,5 unitary-time
and unitary-power models (coefficients a_1..a_N with the constant term
last) used as ground truth throughout the suite, together with the R^2
each degree is known to reach on the bench data the models summarize.
"""

import numpy as np
import pytest

TIME_COEFFS = {
    1: np.array([2.2099914856800486e-8, -3.8009730591705355e-9]),
    2: np.array([-9.735453234983343e-8, 2.5788445217705575e-7, 9.108921796113016e-9]),
    3: np.array([
        2.02832389645393e-7,
        -1.0752502679701515e-6,
        1.896143146635804e-6,
        -1.255705816272474e-8,
    ]),
    5: np.array([
        2.552185568785448e-7,
        -2.6519199128882676e-6,
        1.377818601033809e-5,
        -3.620192787590071e-5,
        3.931483477481734e-5,
        -9.670487968130997e-9,
    ]),
}

POWER_COEFFS = {
    1: np.array([1.5494595400323655e-6, -2.5743414725331627e-7]),
    2: np.array([-6.657123621939238e-6, 1.7716797092615685e-5, 6.294823989253881e-7]),
    3: np.array([
        1.3140123132090488e-5,
        -7.020307908219697e-5,
        1.2505013045008978e-4,
        -7.993831511196679e-7,
    ]),
    5: np.array([
        4.527807344256729e-5,
        -4.420569095699989e-4,
        0.00213149480634911,
        -0.0051157195265432165,
        0.004973491938471852,
        -1.8106915811166857e-6,
    ]),
}

TIME_R2 = {1: 0.6915586, 2: 0.9604319, 3: 0.9974816, 5: 0.9999581}
POWER_R2 = {1: 0.7017766, 2: 0.9637507, 3: 0.9970168, 5: 0.9998981}


def reference_model(coeffs, x):
    """Brute-force evaluation of sum_k a_k / x**k + a_inf.

    Written as a plain loop on purpose: it is the independent oracle the
    package implementation is checked against.
    """
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x) + coeffs[-1]
    for k in range(1, len(coeffs)):
        total = total + coeffs[k - 1] / x**k
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
