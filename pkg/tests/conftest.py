import csv
from pathlib import Path

import numpy as np
import pytest

from bellgamma import _kernels, circuit, score
from bellgamma.circuit import CONFIG_LABELS

DATA = Path(__file__).parent / "data"

_BACKENDS = {
    "numba": (_kernels.apply_1q_numba, _kernels.apply_cnot_numba, _kernels.lawson_hanson_numba),
    "numpy": (_kernels.apply_1q_numpy, _kernels.apply_cnot_numpy, _kernels.lawson_hanson_numpy),
}


@pytest.fixture(params=sorted(_BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    one, cnot, lh = _BACKENDS[request.param]
    monkeypatch.setattr(_kernels, "apply_1q", one)
    monkeypatch.setattr(_kernels, "apply_cnot", cnot)
    monkeypatch.setattr(_kernels, "lawson_hanson", lh)
    return request.param


@pytest.fixture(scope="session")
def ideal_data():
    return score.ExperimentData(
        {xz: circuit.ideal_distribution(xz) for xz in CONFIG_LABELS}, method="uncorrected"
    )


@pytest.fixture(scope="session")
def uniform_data():
    return score.ExperimentData({xz: np.full(16, 1 / 16) for xz in CONFIG_LABELS})


def load_individual_scores():
    """Per-run device scores, one row per hardware job."""
    with open(DATA / "individual_scores.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def sessions_for(device, dates, column="optimization"):
    rows = load_individual_scores()
    return [
        [float(r[column]) for r in rows if r["device"] == device and r["date"] == d]
        for d in dates
    ]


def random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state_amplitudes(rng, n):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


# one PASS/FAIL line per exit criterion, filled in by test_acceptance
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
