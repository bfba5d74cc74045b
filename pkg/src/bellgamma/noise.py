"""Noisy execution of the experiment circuit, shot sampling, and calibration ingestion.

Gate noise is depolarizing: after each non-identity single-qubit gate the
target sees ``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``, and after each
CNOT its pair sees ``(1-p) rho + p/15 sum_{P != II} P rho P``. Readout error
is a per-qubit column-stochastic confusion applied to the final diagonal.

Shot sampling uses numpy's ``Generator`` on PCG64, seeded through
``SeedSequence``; ``Generator.multinomial`` draws by sequential binomial
conditioning over the 16 bins in label order. Streams for independent jobs are
keyed by integer tuples, e.g. ``(master_seed, STREAM_EXPERIMENT, session,
repeat, int(xz))``.
"""

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import qcore
from .circuit import CnotOp, N_QUBITS
from .outcomes import Counts, OutcomeDistribution

STREAM_EXPERIMENT = 1
STREAM_CALIBRATION = 2


class CalibrationParseError(ValueError):
    """A calibration file could not be parsed; the message names the line."""


@dataclass(frozen=True)
class ReadoutConfusion:
    p01: float = 0.0  # read 1 given 0
    p10: float = 0.0  # read 0 given 1

    def __post_init__(self):
        for name in ("p01", "p10"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v!r} is not a probability")

    @classmethod
    def symmetric(cls, p):
        return cls(p, p)

    def matrix(self):
        return np.array([[1 - self.p01, self.p10], [self.p01, 1 - self.p10]])


def _probability(name, v):
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"{name}={v!r} is not a probability")
    return v


@dataclass(frozen=True)
class NoiseModel:
    readout: tuple = (ReadoutConfusion(),) * N_QUBITS
    depol1q: float = 0.0
    depol2q: tuple = (0.0, 0.0, 0.0)
    label: str = "noiseless"

    def __post_init__(self):
        readout = tuple(
            r if isinstance(r, ReadoutConfusion) else ReadoutConfusion.symmetric(r)
            for r in self.readout
        )
        if len(readout) != N_QUBITS:
            raise ValueError(f"need {N_QUBITS} readout confusions, got {len(readout)}")
        depol2q = tuple(_probability("depol2q", p) for p in self.depol2q)
        if len(depol2q) != 3:
            raise ValueError(f"need 3 CNOT depolarizing strengths, got {len(depol2q)}")
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "depol2q", depol2q)
        object.__setattr__(self, "depol1q", _probability("depol1q", self.depol1q))

    @property
    def has_gate_noise(self):
        return self.depol1q > 0 or any(p > 0 for p in self.depol2q)

    def readout_only(self):
        return replace(self, depol1q=0.0, depol2q=(0.0, 0.0, 0.0), label=self.label + " (readout only)")


NOISELESS = NoiseModel()

_PAULI_1Q = (qcore.X, qcore.Y, qcore.Z)
_PAULI_2Q = [
    (p, q) for p, q in itertools.product(qcore.PAULIS, repeat=2) if not (p is qcore.I and q is qcore.I)
]


def depolarize_1q(rho, p, qubit):
    if p == 0.0:
        return rho
    acc = (1.0 - p) * rho
    for P in _PAULI_1Q:
        acc = acc + (p / 3.0) * qcore.conjugate_paulis(rho, {qubit: P})
    return acc


def depolarize_2q(rho, p, pair):
    if p == 0.0:
        return rho
    q0, q1 = pair
    acc = (1.0 - p) * rho
    for P0, P1 in _PAULI_2Q:
        paulis = {}
        if P0 is not qcore.I:
            paulis[q0] = P0
        if P1 is not qcore.I:
            paulis[q1] = P1
        acc = acc + (p / 15.0) * qcore.conjugate_paulis(rho, paulis)
    return acc


def evolve_density(circuit, noise):
    """Final density operator of ``circuit`` under the gate part of ``noise``."""
    rho = qcore.density_from_pure(qcore.new_zero_state(circuit.n_qubits))
    for op in circuit.ops:
        if isinstance(op, CnotOp):
            rho = qcore.apply_cnot(rho, op.control, op.target)
            m = depolarize_2q(rho.matrix, noise.depol2q[op.slot], (op.control, op.target))
        else:
            rho = qcore.apply_gate1q(rho, op.gate, op.target)
            if op.gate.is_identity():
                continue
            m = depolarize_1q(rho.matrix, noise.depol1q, op.target)
        rho = qcore.DensityOperator(circuit.n_qubits, m)
    return rho


def apply_readout_confusion(dist, readout):
    """Push a probability vector through independent per-qubit confusions."""
    if isinstance(dist, OutcomeDistribution):
        if dist.kind != "probability":
            raise ValueError("readout confusion needs a probability distribution")
        values = dist.values
    else:
        values = np.asarray(dist, dtype=float)
    n = values.size.bit_length() - 1
    if len(readout) != n:
        raise ValueError(f"need {n} readout confusions, got {len(readout)}")
    out = values.astype(float)
    for q, r in enumerate(readout):
        out = qcore._kernels.apply_1q(out, n, q, r.matrix())
    return OutcomeDistribution(out)


def confusion_matrix(readout):
    """Explicit tensor product of the per-qubit confusions (qubit 0 leftmost)."""
    m = np.ones((1, 1))
    for r in readout:
        m = np.kron(m, r.matrix())
    return m


def simulate_noisy(circuit, noise=NOISELESS):
    rho = evolve_density(circuit, noise)
    probs = np.clip(np.real(np.diag(rho.matrix)), 0.0, None)
    probs = probs / probs.sum()
    return apply_readout_confusion(OutcomeDistribution(probs), noise.readout)


def rng_for(*keys):
    """Independent generator for a tuple of nonnegative integer keys."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


def sample_counts(dist, shots, seed):
    """Multinomial draw of ``shots`` outcomes.

    ``seed`` is an int, a sequence of ints (hashed through ``SeedSequence``),
    or an existing ``numpy.random.Generator``.
    """
    if not isinstance(dist, OutcomeDistribution):
        dist = OutcomeDistribution(np.asarray(dist, dtype=float))
    if dist.kind != "probability":
        raise ValueError("cannot sample from a quasiprobability distribution")
    if int(shots) < 1:
        raise ValueError("shots must be at least 1")
    if isinstance(seed, np.random.Generator):
        rng = seed
    elif isinstance(seed, (int, np.integer)):
        rng = rng_for(seed)
    else:
        rng = rng_for(*seed)
    p = np.clip(dist.values, 0.0, None)
    p = p / p.sum()
    return Counts(rng.multinomial(int(shots), p))


# ---------------------------------------------------------------------------
# calibration files


@dataclass(frozen=True)
class QubitCalibration:
    date: str
    qubit: int
    t1_us: float
    t2_us: float
    freq_ghz: float
    anharm_ghz: float
    readout_err: float


@dataclass(frozen=True)
class PairCalibration:
    date: str
    pair: tuple
    cnot_err: float
    gate_time_ns: float


@dataclass(frozen=True)
class CalibrationRecord:
    date: str
    qubits: dict = field(default_factory=dict)  # physical index -> QubitCalibration
    pairs: dict = field(default_factory=dict)  # sorted (i, j) -> PairCalibration
    device: str = ""


def _parse_pair(text):
    parts = text.strip().split("-")
    if len(parts) != 2:
        raise ValueError(f"pair {text!r} is not of the form i-j")
    i, j = (int(p) for p in parts)
    return (i, j)


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def read_calibration_file(path):
    """Parse every row of a calibration file into ``{date: CalibrationRecord}``."""
    path = Path(path)
    device = path.stem
    section = None
    qubits, pairs = {}, {}
    seen_rows = False
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tag = line[1:].strip().lower()
                if tag in ("qubits", "pairs"):
                    section = tag
                elif tag.startswith("device"):
                    device = tag.partition("=")[2].strip() or device
                continue
            row = [c.strip() for c in next(csv.reader([line]))]
            try:
                if section == "qubits":
                    if len(row) != 7:
                        raise ValueError(f"expected 7 fields, got {len(row)}")
                    rec = QubitCalibration(
                        row[0], int(row[1]), *(_finite(v) for v in row[2:7])
                    )
                    _probability("readout_err", rec.readout_err)
                    qubits.setdefault(rec.date, {})[rec.qubit] = rec
                elif section == "pairs":
                    if len(row) != 4:
                        raise ValueError(f"expected 4 fields, got {len(row)}")
                    pair = _parse_pair(row[1])
                    rec = PairCalibration(row[0], pair, _finite(row[2]), _finite(row[3]))
                    _probability("cnot_err", rec.cnot_err)
                    pairs.setdefault(rec.date, {})[tuple(sorted(pair))] = rec
                else:
                    raise ValueError("data row before a #qubits or #pairs header")
            except ValueError as exc:
                raise CalibrationParseError(f"{path}:{lineno}: {exc}") from None
            seen_rows = True
    if not seen_rows:
        raise CalibrationParseError(f"{path}: no calibration rows")
    dates = sorted(set(qubits) | set(pairs))
    return {
        d: CalibrationRecord(d, qubits.get(d, {}), pairs.get(d, {}), device) for d in dates
    }


def load_calibration(path, date=None):
    """Load one calibration date from a file.

    With ``date=None`` the file must hold a single date.
    """
    records = read_calibration_file(path)
    if date is None:
        if len(records) != 1:
            raise ValueError(f"{path} holds dates {sorted(records)}; choose one")
        return next(iter(records.values()))
    if date not in records:
        raise ValueError(f"{path} has no calibration for {date}")
    return records[date]


def _route_strength(record, route):
    """Depolarizing strength charged to one CNOT slot.

    A plain pair ``(i, j)`` costs its own CNOT error. A longer path
    ``(i, k, ..., j)`` stands for SWAPs along every edge but the last (three
    CNOTs each) followed by the CNOT on the last edge; the depolarizing
    channels compose by multiplying their Pauli-fidelity factors ``1 - 16p/15``.
    """
    if len(route) < 2 or len(set(route)) != len(route):
        raise ValueError(f"bad route {'-'.join(map(str, route))}")
    edges = list(zip(route[:-1], route[1:]))
    if len(edges) == 1:
        key = tuple(sorted(edges[0]))
        if key not in record.pairs:
            raise ValueError(f"pair {key[0]}-{key[1]} not in calibration for {record.date}")
        return record.pairs[key].cnot_err
    fidelity = 1.0
    for n_edge, (i, j) in enumerate(edges):
        key = tuple(sorted((i, j)))
        if key not in record.pairs:
            raise ValueError(f"pair {key[0]}-{key[1]} not in calibration for {record.date}")
        uses = 1 if n_edge == len(edges) - 1 else 3
        fidelity *= (1.0 - 16.0 * record.pairs[key].cnot_err / 15.0) ** uses
    return min(1.0, 15.0 * (1.0 - fidelity) / 16.0)


def _parse_route(pair):
    if isinstance(pair, str):
        return tuple(int(p) for p in pair.split("-"))
    return tuple(int(p) for p in pair)


def noise_from_calibration(record, qubit_choice, pair_choice, depol1q=0.0, label=None):
    """Noise model for the logical register (A, B1, B2, C) mapped onto physical qubits.

    ``pair_choice`` names the physical pair charged for each CNOT slot, in
    circuit order (A-B1 prep, B2-C prep, B1-B2 measurement). Entries are
    ``"i-j"`` or, where the two qubits are not coupled, a route such as
    ``"2-1-3"`` (see ``_route_strength``).
    """
    qubit_choice = tuple(int(q) for q in qubit_choice)
    if len(qubit_choice) != N_QUBITS:
        raise ValueError(f"need {N_QUBITS} physical qubits")
    readout = []
    for q in qubit_choice:
        if q not in record.qubits:
            raise ValueError(f"qubit {q} not in calibration for {record.date}")
        readout.append(ReadoutConfusion.symmetric(record.qubits[q].readout_err))
    if len(pair_choice) != 3:
        raise ValueError("need 3 physical pairs, one per CNOT")
    depol2q = tuple(_route_strength(record, _parse_route(p)) for p in pair_choice)
    if label is None:
        label = f"{record.device} {record.date}".strip()
    return NoiseModel(tuple(readout), depol1q, depol2q, label)


# ---------------------------------------------------------------------------
# noise files

DATA_DIR = Path(__file__).parent / "data"
_NOISE_KEYS = {"label", "calibration", "date", "qubits", "pairs", "depol1q", "readout", "depol2q"}


def builtin_path(name, suffix):
    """Resolve ``name`` to a file: an existing path, else a bundled data file."""
    p = Path(name)
    if p.exists():
        return p
    candidate = DATA_DIR / (name if name.endswith(suffix) else name + suffix)
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"no such file or bundled {suffix} file: {name}")


def read_key_values(path, allowed):
    """Flat ``key = value`` text; ``#`` starts a comment; unknown keys are errors."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lower()
            if not sep or not key:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            if key not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value.strip()
    return out


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def load_noise_model(path):
    """Build a NoiseModel from a noise file.

    A file either points at calibration data (``calibration``, ``date``,
    ``qubits``, ``pairs``) or gives ``readout``/``depol2q`` directly; explicit
    values override calibration-derived ones.
    """
    if str(path).lower() == "none":
        return NOISELESS
    path = builtin_path(str(path), ".noise")
    kv = read_key_values(path, _NOISE_KEYS)
    base = NOISELESS
    if "calibration" in kv:
        cal_path = Path(kv["calibration"])
        if not cal_path.is_absolute() and (path.parent / cal_path).exists():
            cal_path = path.parent / cal_path
        record = load_calibration(builtin_path(str(cal_path), ".csv"), kv.get("date"))
        if "qubits" not in kv or "pairs" not in kv:
            raise ValueError(f"{path}: calibration needs both qubits and pairs")
        qubits = [int(q) for q in kv["qubits"].split(",")]
        pairs = [p.strip() for p in kv["pairs"].split(",")]
        base = noise_from_calibration(record, qubits, pairs)
    readout = base.readout
    if "readout" in kv:
        readout = tuple(ReadoutConfusion.symmetric(p) for p in _floats(kv["readout"]))
    depol2q = tuple(_floats(kv["depol2q"])) if "depol2q" in kv else base.depol2q
    depol1q = float(kv.get("depol1q", base.depol1q))
    label = kv.get("label", base.label if "calibration" in kv else path.stem)
    return NoiseModel(readout, depol1q, depol2q, label)
