"""Inner loops for gate application and the Lawson-Hanson solver.

Each kernel exists twice: an ``@njit`` index-loop version and a pure numpy
version. The module-level names (``apply_1q``, ``apply_cnot``,
``lawson_hanson``) point at the numba versions unless numba is missing or the
environment variable ``BELLGAMMA_DISABLE_NUMBA`` is set to a non-empty value
other than ``0``. The flag is read once, at import.

Register convention: qubit 0 is the most significant bit of a flat index.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_flag = os.environ.get("BELLGAMMA_DISABLE_NUMBA", "")
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations


def apply_1q_numpy(vec, n_qubits, target, u):
    psi = vec.reshape((2,) * n_qubits)
    out = np.tensordot(u, psi, axes=([1], [target]))
    return np.ascontiguousarray(np.moveaxis(out, 0, target)).reshape(-1)


def apply_cnot_numpy(vec, n_qubits, control, target):
    psi = vec.reshape((2,) * n_qubits).copy()
    sel = [slice(None)] * n_qubits
    sel[control] = 1
    sel = tuple(sel)
    # axis index of `target` inside the control=1 slice
    t_axis = target if target < control else target - 1
    psi[sel] = np.flip(psi[sel], axis=t_axis)
    return psi.reshape(-1)


def _lstsq_on(A, y, passive):
    idx = np.flatnonzero(passive)
    z = np.zeros(A.shape[1])
    if idx.size:
        z[idx] = np.linalg.lstsq(A[:, idx], y, rcond=None)[0]
    return z


def lawson_hanson_numpy(A, y, tol, max_outer):
    """Active-set NNLS. Returns ``(x, outer_iterations, converged)``."""
    n = A.shape[1]
    x = np.zeros(n)
    passive = np.zeros(n, dtype=np.bool_)
    w = A.T @ y
    outer = 0
    while True:
        cand = np.where(passive, -np.inf, w)
        if passive.all() or cand.max() <= tol:
            return x, outer, True
        if outer >= max_outer:
            return x, outer, False
        outer += 1
        # argmax returns the lowest index among ties
        j = int(np.argmax(cand))
        passive[j] = True
        z = _lstsq_on(A, y, passive)
        if z[j] <= 0.0:
            # the entering column cannot improve the fit; park it
            passive[j] = False
            w[j] = 0.0
            continue
        while True:
            neg = np.flatnonzero(passive & (z <= 0.0))
            if neg.size == 0:
                break
            ratios = x[neg] / (x[neg] - z[neg])
            k = int(np.argmin(ratios))
            x = x + ratios[k] * (z - x)
            x[neg[k]] = 0.0
            passive &= x > 0.0
            x[~passive] = 0.0
            z = _lstsq_on(A, y, passive)
        x = z
        x[~passive] = 0.0
        w = A.T @ (y - A @ x)


# ---------------------------------------------------------------------------
# numba implementations


def _apply_1q_loop(vec, n_qubits, target, u):
    dim = vec.shape[0]
    mask = 1 << (n_qubits - 1 - target)
    out = np.empty_like(vec)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i in range(dim):
        if i & mask:
            continue
        j = i | mask
        a0 = vec[i]
        a1 = vec[j]
        out[i] = u00 * a0 + u01 * a1
        out[j] = u10 * a0 + u11 * a1
    return out


def _apply_cnot_loop(vec, n_qubits, control, target):
    dim = vec.shape[0]
    cmask = 1 << (n_qubits - 1 - control)
    tmask = 1 << (n_qubits - 1 - target)
    out = np.empty_like(vec)
    for i in range(dim):
        if i & cmask:
            out[i ^ tmask] = vec[i]
        else:
            out[i] = vec[i]
    return out


def _lstsq_loop(A, y, passive):
    m, n = A.shape
    k = 0
    for i in range(n):
        if passive[i]:
            k += 1
    z = np.zeros(n)
    if k == 0:
        return z
    sub = np.empty((m, k))
    cols = np.empty(k, dtype=np.int64)
    c = 0
    for i in range(n):
        if passive[i]:
            cols[c] = i
            for r in range(m):
                sub[r, c] = A[r, i]
            c += 1
    sol = np.linalg.lstsq(sub, y)[0]
    for c in range(k):
        z[cols[c]] = sol[c]
    return z


def _lawson_hanson_loop(A, y, tol, max_outer):
    n = A.shape[1]
    x = np.zeros(n)
    passive = np.zeros(n, dtype=np.bool_)
    w = A.T @ y
    outer = 0
    while True:
        j = -1
        best = tol
        for i in range(n):
            if not passive[i] and w[i] > best:
                best = w[i]
                j = i
        if j < 0:
            return x, outer, True
        if outer >= max_outer:
            return x, outer, False
        outer += 1
        passive[j] = True
        z = _lstsq_nb(A, y, passive)
        if z[j] <= 0.0:
            passive[j] = False
            w[j] = 0.0
            continue
        while True:
            alpha = np.inf
            k = -1
            for i in range(n):
                if passive[i] and z[i] <= 0.0:
                    r = x[i] / (x[i] - z[i])
                    if r < alpha:
                        alpha = r
                        k = i
            if k < 0:
                break
            for i in range(n):
                x[i] = x[i] + alpha * (z[i] - x[i])
            x[k] = 0.0
            for i in range(n):
                if passive[i] and x[i] <= 0.0:
                    passive[i] = False
                if not passive[i]:
                    x[i] = 0.0
            z = _lstsq_nb(A, y, passive)
        for i in range(n):
            x[i] = z[i] if passive[i] else 0.0
        w = A.T @ (y - A @ x)


if HAVE_NUMBA:
    apply_1q_numba = njit(cache=True)(_apply_1q_loop)
    apply_cnot_numba = njit(cache=True)(_apply_cnot_loop)
    _lstsq_nb = njit(cache=True)(_lstsq_loop)
    lawson_hanson_numba = njit(cache=True)(_lawson_hanson_loop)
else:  # pragma: no cover
    apply_1q_numba = apply_1q_numpy
    apply_cnot_numba = apply_cnot_numpy
    lawson_hanson_numba = lawson_hanson_numpy

if USE_NUMBA:
    apply_1q = apply_1q_numba
    apply_cnot = apply_cnot_numba
    lawson_hanson = lawson_hanson_numba
else:
    apply_1q = apply_1q_numpy
    apply_cnot = apply_cnot_numpy
    lawson_hanson = lawson_hanson_numpy
