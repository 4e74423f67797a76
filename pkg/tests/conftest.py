import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def central_difference(f, M, step=1e-5):
    """Entrywise central finite-difference gradient of a scalar function of a matrix."""
    G = np.zeros_like(M)
    for idx in np.ndindex(M.shape):
        E = np.zeros_like(M)
        E[idx] = step
        G[idx] = (f(M + E) - f(M - E)) / (2 * step)
    return G


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def batch_means_se(x, n_batches=50):
    """Monte Carlo standard error of the mean of a correlated series."""
    x = np.asarray(x, dtype=float)
    size = x.size // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return means.std(ddof=1) / np.sqrt(n_batches)


class Recorder:
    """Chain callback keeping every post-burn-in state."""

    def __init__(self, burn_in=0):
        self.burn_in = burn_in
        self.states = []
        self.accepted = []

    def __call__(self, t, M, accepted):
        if t > self.burn_in:
            self.states.append(np.array(M))
            self.accepted.append(accepted)

    @property
    def samples(self):
        return np.array(self.states)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
