from fractions import Fraction

import numpy as np
import pytest

from relaytree.core import ErrorState


def property_grid():
    """alpha, beta in {0.02, ..., 0.96} with alpha + beta <= 0.98."""
    return [
        ErrorState(i / 50, j / 50)
        for i in range(1, 49)
        for j in range(1, 49)
        if i + j <= 49
    ]


def triangle_sample(n, seed=0):
    """Uniform draws from the open triangle alpha, beta > 0, alpha + beta < 1."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b = rng.random(2)
        if a > 0 and b > 0 and a + b < 1:
            out.append(ErrorState(float(a), float(b)))
    return out


def exact_evolve(alpha, beta, rules):
    """Reference recursion in rational arithmetic, written as 1 - (1 - x)**2."""
    a, b = Fraction(alpha), Fraction(beta)
    for r in rules:
        if r == "A":
            a, b = 1 - (1 - a) ** 2, b * b
        else:
            a, b = a * a, 1 - (1 - b) ** 2
    return a, b


@pytest.fixture(scope="session")
def grid():
    return property_grid()


@pytest.fixture(scope="session")
def sample200():
    return triangle_sample(200, seed=0)
