import numpy as np
import pytest

from spinphonon.synth import synthetic_dataset


def random_couplings(rng, n_s, n_q):
    freqs = np.sort(rng.uniform(30.0, 3000.0, n_q))
    g = rng.normal(0.0, 1e-3, (n_s, n_q))
    return g, freqs


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_dataset():
    return synthetic_dataset(n_modes=12, seed=3, freq_band=(20.0, 400.0))


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
