"""Readout-error mitigation by calibration-matrix inversion and by NNLS.

The calibration matrix ``C`` is column-stochastic: column ``j`` is the
observed outcome distribution when basis state ``j`` is prepared, so that
``observed = C @ ideal``.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .noise import (
    STREAM_CALIBRATION,
    NoiseModel,
    apply_readout_confusion,
    confusion_matrix,
    rng_for,
    sample_counts,
)
from .outcomes import Counts, OutcomeDistribution

KKT_RTOL = 1e-8
MAX_CONDITION = 1e12


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CalibrationMatrix:
    matrix: np.ndarray
    provenance: str = "exact-from-model"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("calibration matrix must be square")
        if (m < 0).any():
            raise ValueError("calibration matrix has negative entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def column_sums(self):
        return self.matrix.sum(axis=0)


@dataclass(frozen=True)
class NnlsSolution:
    x: np.ndarray
    residual_norm: float
    iterations: int


def _keys(seed):
    return tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)


def _readout_of(noise):
    return noise.readout if isinstance(noise, NoiseModel) else tuple(noise)


def exact_calibration_matrix(readout):
    """Tensor product of per-qubit confusions, qubit 0 as the most significant bit."""
    if isinstance(readout, NoiseModel):
        readout = readout.readout
    return CalibrationMatrix(confusion_matrix(readout), "exact-from-model")


def measure_calibration_matrix(noise, shots, seed):
    """Estimate C by preparing each basis state and sampling ``shots`` readouts.

    ``noise`` is a NoiseModel or a sequence of per-qubit ReadoutConfusion.
    Preparation X gates are taken as perfect, so only readout error enters.
    Each prepared state draws from its own stream keyed by ``(*seed, state)``;
    ``seed`` is an int or a tuple of ints.
    """
    readout = _readout_of(noise)
    n = len(readout)
    dim = 2**n
    if int(shots) < 1:
        raise ValueError("shots must be at least 1")
    cols = []
    for j in range(dim):
        prepared = np.zeros(dim)
        prepared[j] = 1.0
        observed = apply_readout_confusion(OutcomeDistribution(prepared), readout)
        counts = sample_counts(observed, shots, rng_for(*_keys(seed), STREAM_CALIBRATION, j))
        cols.append(counts.frequencies())
    return CalibrationMatrix(np.column_stack(cols), f"measured({int(shots)})")


def _frequencies(counts):
    if isinstance(counts, Counts):
        return counts.frequencies()
    y = np.asarray(counts, dtype=float)
    return y / y.sum()


def correct_by_inversion(C, counts):
    """x = C^-1 (counts / shots); negative entries survive as quasiprobabilities."""
    y = _frequencies(counts)
    m = C.matrix
    if np.linalg.cond(m) > MAX_CONDITION:
        raise SingularMatrixError("calibration matrix is numerically singular")
    try:
        x = np.linalg.solve(m, y)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from None
    return OutcomeDistribution(x)


def nnls(A, y, tol=None, max_outer=None):
    """min ||A x - y||_2 subject to x >= 0, by the Lawson-Hanson active-set method.

    Parameters
    ----------
    A : array_like, shape (m, n)
    y : array_like, shape (m,)
    tol : float, optional
        Stopping threshold on the largest free gradient component. Defaults
        to ``1e-12 * max(1, ||A^T y||_inf)``.
    max_outer : int, optional
        Cap on outer (column-entering) iterations, default ``3 * n``.

    Returns
    -------
    NnlsSolution

    Raises
    ------
    ConvergenceError
        If the outer-iteration cap is reached before the KKT test passes.
    """
    A = np.ascontiguousarray(A, dtype=float)
    y = np.ascontiguousarray(y, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError("A must be a nonempty 2-D array")
    if A.shape[0] != y.size:
        raise ValueError(f"A has {A.shape[0]} rows but y has {y.size} entries")
    if not (np.isfinite(A).all() and np.isfinite(y).all()):
        raise ValueError("A and y must be finite")
    n = A.shape[1]
    if tol is None:
        tol = 1e-12 * max(1.0, np.abs(A.T @ y).max())
    if max_outer is None:
        max_outer = 3 * n
    x, iters, ok = _kernels.lawson_hanson(A, y, float(tol), int(max_outer))
    if not ok:
        raise ConvergenceError(f"NNLS did not converge in {max_outer} outer iterations")
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return NnlsSolution(x=x, residual_norm=float(np.linalg.norm(A @ x - y)), iterations=int(iters))


def correct_by_nnls(C, counts):
    """Nonnegative correction, renormalized to unit total probability."""
    y = _frequencies(counts)
    sol = nnls(C.matrix, y)
    total = sol.x.sum()
    if total <= 0:
        raise ArithmeticError("NNLS returned the zero vector")
    return OutcomeDistribution(sol.x / total)


def kkt_violation(A, y, x):
    """Largest relative breach of the NNLS optimality conditions at ``x``."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    g = A.T @ (A @ x - y)
    scale = max(np.abs(A.T @ y).max(), np.finfo(float).tiny)
    free = x > 0
    worst = 0.0
    if free.any():
        worst = max(worst, np.abs(g[free]).max() / scale)
    if (~free).any():
        worst = max(worst, max(0.0, -g[~free].min()) / scale)
    if (x < 0).any():
        worst = np.inf
    return worst

