import numpy as np
import pytest

from pebms import AnalyticSpace, AxiomProfile, FiniteSpace


@pytest.fixture
def ebm_235():
    """3-point space: distance 20 off the diagonal, control 1 + x + y."""
    labels = (2, 3, 4)
    P = 20.0 * (1.0 - np.eye(3))
    Theta = np.array([[1.0 + a + b for b in labels] for a in labels])
    return FiniteSpace(labels, P, Theta, AxiomProfile.ebm())


@pytest.fixture
def max_space():
    """p = max(x, y), control 1 + x + y on [0, 1]."""
    return AnalyticSpace((0.0, 1.0), "max(x, y)", "1 + x + y")


@pytest.fixture
def absx_space():
    """p = |x - y| + x (not symmetric), control 1 + x + y on [0, 1]."""
    return AnalyticSpace((0.0, 1.0), "abs(x - y) + x", "1 + x + y")


@pytest.fixture
def min_space():
    """p = |x - y| + min(x, y), control 1 + x + y on [0, 2]."""
    return AnalyticSpace((0.0, 2.0), "abs(x - y) + min(x, y)", "1 + x + y")
