"""Dense pure-state and density-operator evolution for registers of 1-4 qubits.

Qubit 0 is the most significant bit of every flat index. A density operator
on ``n`` qubits is evolved as a ``2n``-qubit vector (row bits first, column
bits second), so the same index kernels serve both representations.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .outcomes import OutcomeDistribution

MAX_QUBITS = 4
ALGEBRA_TOL = 1e-12


def _check_n_qubits(n_qubits):
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits!r}")


def _check_qubit(index, n_qubits):
    if not isinstance(index, (int, np.integer)) or not 0 <= index < n_qubits:
        raise ValueError(f"qubit index {index!r} outside 0..{n_qubits - 1}")


@dataclass(frozen=True)
class Gate1Q:
    """A 2x2 unitary with a display label."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        u = np.array(self.matrix, dtype=np.complex128)
        if u.shape != (2, 2):
            raise ValueError(f"gate matrix must be 2x2, got {u.shape}")
        err = np.abs(u.conj().T @ u - np.eye(2)).max()
        if err > ALGEBRA_TOL:
            raise ValueError(f"gate {self.label!r} is not unitary (error {err:.2e})")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    def is_identity(self):
        return bool(np.array_equal(self.matrix, np.eye(2)))

    def dagger(self):
        return Gate1Q(self.matrix.conj().T, self.label + "^dag")


_S = 1.0 / np.sqrt(2.0)
I = Gate1Q(np.eye(2), "I")
H = Gate1Q([[_S, _S], [_S, -_S]], "H")
X = Gate1Q([[0, 1], [1, 0]], "X")
Y = Gate1Q([[0, -1j], [1j, 0]], "Y")
Z = Gate1Q([[1, 0], [0, -1]], "Z")
PAULIS = (I, X, Y, Z)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.size != 2**self.n_qubits:
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amp.size}")
        norm = np.vdot(amp, amp).real
        if abs(norm - 1.0) > ALGEBRA_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True)
class DensityOperator:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        dim = 2**self.n_qubits
        rho = np.array(self.matrix, dtype=np.complex128).reshape(dim, dim)
        if np.abs(rho - rho.conj().T).max() > ALGEBRA_TOL:
            raise ValueError("density operator is not Hermitian")
        if abs(np.trace(rho) - 1.0) > ALGEBRA_TOL:
            raise ValueError(f"density operator trace is {np.trace(rho)!r}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def new_zero_state(n_qubits):
    """|0...0> on ``n_qubits`` qubits."""
    _check_n_qubits(n_qubits)
    amp = np.zeros(2**n_qubits, dtype=np.complex128)
    amp[0] = 1.0
    return StateVector(n_qubits, amp)


def basis_state(bits):
    """Computational basis state from a bitstring such as ``"0110"``."""
    n = len(bits)
    _check_n_qubits(n)
    amp = np.zeros(2**n, dtype=np.complex128)
    amp[int(bits, 2)] = 1.0
    return StateVector(n, amp)


def _conjugate_flat(rho_flat, n, u, target):
    """U rho U^dag on the flattened ``2n``-qubit view."""
    out = _kernels.apply_1q(rho_flat, 2 * n, target, u)
    return _kernels.apply_1q(out, 2 * n, n + target, np.ascontiguousarray(u.conj()))


def apply_gate1q(state, gate, target):
    """Apply ``gate`` to qubit ``target`` of a state vector or density operator."""
    n = state.n_qubits
    _check_qubit(target, n)
    if isinstance(state, StateVector):
        out = _kernels.apply_1q(state.amplitudes.copy(), n, int(target), gate.matrix)
        return StateVector(n, out)
    flat = state.matrix.reshape(-1).copy()
    out = _conjugate_flat(flat, n, gate.matrix, int(target))
    return DensityOperator(n, out.reshape(2**n, 2**n))


def apply_cnot(state, control, target):
    """Flip ``target`` where ``control`` is 1; works on both state kinds."""
    n = state.n_qubits
    _check_qubit(control, n)
    _check_qubit(target, n)
    if control == target:
        raise ValueError("control and target must differ")
    c, t = int(control), int(target)
    if isinstance(state, StateVector):
        return StateVector(n, _kernels.apply_cnot(state.amplitudes.copy(), n, c, t))
    flat = state.matrix.reshape(-1).copy()
    flat = _kernels.apply_cnot(flat, 2 * n, c, t)
    flat = _kernels.apply_cnot(flat, 2 * n, n + c, n + t)
    return DensityOperator(n, flat.reshape(2**n, 2**n))


def conjugate_paulis(rho, paulis):
    """Return ``P rho P`` for a Pauli string given as ``{qubit: Gate1Q}``.

    Works on a raw ``2^n x 2^n`` array and skips the trace/Hermiticity
    checks, because channels call it on intermediate sums.
    """
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    flat = np.ascontiguousarray(rho).reshape(-1)
    for q, p in paulis.items():
        flat = _conjugate_flat(flat, n, p.matrix, q)
    return flat.reshape(dim, dim)


def outcome_probabilities(state):
    """Computational-basis Born rule."""
    if isinstance(state, StateVector):
        p = np.abs(state.amplitudes) ** 2
    else:
        p = np.real(np.diag(state.matrix)).copy()
    if abs(p.sum() - 1.0) > ALGEBRA_TOL:
        raise ArithmeticError(f"probabilities sum to {p.sum()!r}")
    return OutcomeDistribution(p)


def density_from_pure(state):
    amp = state.amplitudes
    return DensityOperator(state.n_qubits, np.outer(amp, amp.conj()))


def fidelity_up_to_phase(a, b):
    """|<a|b>| for two state vectors; 1 means equal up to global phase."""
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))
