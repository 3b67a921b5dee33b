import numpy as np
import pytest

from deepaug.rng import Rng


@pytest.fixture
def rng():
    return Rng(0xC0FFEE)


def rel_err(a, b):
    """Norm-based relative error between two gradient arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.linalg.norm(a) + np.linalg.norm(b) + 1e-12
    return np.linalg.norm(a - b) / denom


def finite_diff_grad(f, x, h=1e-3):
    """Central finite differences of scalar f at x, elementwise."""
    x = np.asarray(x)
    g = np.zeros(x.shape, dtype=np.float64)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2 * h)
    return g
