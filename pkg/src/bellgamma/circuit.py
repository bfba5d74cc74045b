"""The four-qubit entanglement-swapping circuit and its twelve measurement settings.

Register order is (A, B1, B2, C): Alice, Bob's two qubits, Charlie. Two
|Phi+> pairs are prepared on (A, B1) and (B2, C); Bob undoes the Bell basis
on (B1, B2) with CNOT then H; Alice and Charlie rotate their measurement axes
onto z.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from . import qcore
from .qcore import Gate1Q

QUBIT_A, QUBIT_B1, QUBIT_B2, QUBIT_C = 0, 1, 2, 3
N_QUBITS = 4

CONFIG_LABELS = ("11", "12", "21", "22", "13", "14", "33", "34", "25", "26", "35", "36")

_PI = np.pi
# (phi1, theta1, phi2, theta2) per xz
_ANGLES = {
    "11": (0.0, 0.0, 0.0, _PI / 4),
    "12": (0.0, 0.0, 0.0, -_PI / 4),
    "21": (0.0, _PI / 2, 0.0, _PI / 4),
    "22": (0.0, _PI / 2, 0.0, -_PI / 4),
    "13": (0.0, 0.0, _PI / 2, _PI / 4),
    "14": (0.0, 0.0, -_PI / 2, _PI / 4),
    "33": (_PI / 2, _PI / 2, _PI / 2, _PI / 4),
    "34": (_PI / 2, _PI / 2, -_PI / 2, _PI / 4),
    "25": (0.0, _PI / 2, _PI / 4, _PI / 2),
    "26": (0.0, _PI / 2, -_PI / 4, _PI / 2),
    "35": (_PI / 2, _PI / 2, _PI / 4, _PI / 2),
    "36": (_PI / 2, _PI / 2, -_PI / 4, _PI / 2),
}


@dataclass(frozen=True)
class MeasurementConfig:
    xz: str
    phi1: float
    theta1: float
    phi2: float
    theta2: float


def angle_lookup(xz):
    """Rotation angles for one of the twelve ``xz`` labels."""
    key = str(xz)
    if key not in _ANGLES:
        raise ValueError(f"unknown measurement configuration {xz!r}")
    return MeasurementConfig(key, *_ANGLES[key])


def all_configs():
    return [angle_lookup(xz) for xz in CONFIG_LABELS]


def rotation_gate(axis, angle):
    """cos(angle/2) I - i sin(angle/2) sigma_axis, for axis ``"y"`` or ``"z"``."""
    paulis = {"x": qcore.X, "y": qcore.Y, "z": qcore.Z}
    if axis not in paulis:
        raise ValueError(f"unknown rotation axis {axis!r}")
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    u = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * paulis[axis].matrix
    return Gate1Q(u, f"R{axis}({angle:.6g})")


def basis_change(phi, theta):
    """Gates that map sigma_n, n = (cos phi sin theta, sin phi sin theta, cos theta), onto sigma_z.

    Returned in application order: Rz(-phi) first, then Ry(-theta).
    """
    return rotation_gate("z", -phi), rotation_gate("y", -theta)


def measured_operator(phi, theta):
    """sigma_n for the Bloch direction given by (phi, theta)."""
    n = (np.cos(phi) * np.sin(theta), np.sin(phi) * np.sin(theta), np.cos(theta))
    return n[0] * qcore.X.matrix + n[1] * qcore.Y.matrix + n[2] * qcore.Z.matrix


class GateOp(NamedTuple):
    gate: Gate1Q
    target: int


class CnotOp(NamedTuple):
    control: int
    target: int
    slot: int  # position among the three CNOTs, used to attach per-gate noise


Op = Union[GateOp, CnotOp]


def _outcome_labels():
    labels = {}
    for i in range(2**N_QUBITS):
        bits = format(i, "04b")
        a = 1 if bits[QUBIT_A] == "0" else -1
        c = 1 if bits[QUBIT_C] == "0" else -1
        labels[bits] = (a, int(bits[QUBIT_B1]), int(bits[QUBIT_B2]), c)
    return labels


OUTCOME_SIGNS = _outcome_labels()


@dataclass(frozen=True)
class Circuit:
    config: MeasurementConfig
    ops: tuple
    n_qubits: int = N_QUBITS
    outcome_labels: dict = field(default_factory=_outcome_labels, compare=False)

    def cnots(self):
        return [op for op in self.ops if isinstance(op, CnotOp)]


def bell_pair_ops(first, second, slot):
    return [GateOp(qcore.H, first), CnotOp(first, second, slot)]


def bell_measurement_ops(first, second, slot):
    """CNOT then H: |Phi+>->00, |Phi->->10, |Psi+>->01, |Psi->->11 on (first, second)."""
    return [CnotOp(first, second, slot), GateOp(qcore.H, first)]


def build_experiment(config):
    if isinstance(config, str):
        config = angle_lookup(config)
    ops = []
    ops += bell_pair_ops(QUBIT_A, QUBIT_B1, slot=0)
    ops += bell_pair_ops(QUBIT_B2, QUBIT_C, slot=1)
    ops += bell_measurement_ops(QUBIT_B1, QUBIT_B2, slot=2)
    for gate in basis_change(config.phi1, config.theta1):
        ops.append(GateOp(gate, QUBIT_A))
    for gate in basis_change(config.phi2, config.theta2):
        ops.append(GateOp(gate, QUBIT_C))
    return Circuit(config=config, ops=tuple(ops))


def run_ops(ops, state):
    """Apply ``ops`` in order with no noise; works on either state kind."""
    for op in ops:
        if isinstance(op, CnotOp):
            state = qcore.apply_cnot(state, op.control, op.target)
        else:
            state = qcore.apply_gate1q(state, op.gate, op.target)
    return state


def final_state(circuit):
    return run_ops(circuit.ops, qcore.new_zero_state(circuit.n_qubits))


def ideal_distribution(config):
    """Noise-free Born-rule distribution over the 16 outcomes."""
    circ = config if isinstance(config, Circuit) else build_experiment(config)
    return qcore.outcome_probabilities(final_state(circ))
