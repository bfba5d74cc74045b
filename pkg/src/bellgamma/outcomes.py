"""Outcome vectors over the 16 four-bit strings ``abc`` = ``a b1 b2 c``."""

from dataclasses import dataclass

import numpy as np

N_OUTCOMES = 16
OUTCOME_LABELS = tuple(format(i, "04b") for i in range(N_OUTCOMES))

# entries below this count as negative when classifying a distribution
NEGATIVE_TOL = 1e-12
SUM_TOL = 1e-9


def label_index(label):
    """Index of a bitstring label (qubit 0 is the leftmost character)."""
    if len(label) == 0 or set(label) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {label!r}")
    return int(label, 2)


@dataclass(frozen=True)
class OutcomeDistribution:
    """A normalized real vector over outcome labels.

    ``kind`` is ``"quasiprobability"`` when any entry is below ``-1e-12``,
    otherwise ``"probability"``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0 or v.size & (v.size - 1):
            raise ValueError("distribution length must be a power of two")
        if not np.all(np.isfinite(v)):
            raise ValueError("distribution has non-finite entries")
        if abs(v.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"distribution sums to {v.sum()!r}, not 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def kind(self):
        if self.values.min() < -NEGATIVE_TOL:
            return "quasiprobability"
        return "probability"

    @property
    def n_qubits(self):
        return self.values.size.bit_length() - 1

    def __getitem__(self, label):
        return self.values[label_index(label)]

    def as_dict(self):
        width = self.n_qubits
        return {format(i, f"0{width}b"): float(p) for i, p in enumerate(self.values)}


@dataclass(frozen=True)
class Counts:
    """Integer shot tallies over the outcome labels."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts)
        if c.ndim != 1 or c.size == 0 or c.size & (c.size - 1):
            raise ValueError("counts length must be a power of two")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ValueError("counts must be integers")
        c = c.astype(np.int64)
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def shots(self):
        return int(self.counts.sum())

    def frequencies(self):
        if self.shots == 0:
            raise ValueError("no shots recorded")
        return self.counts / self.shots

    def __getitem__(self, label):
        return int(self.counts[label_index(label)])

    @classmethod
    def from_dict(cls, tallies, n_qubits=4):
        c = np.zeros(2**n_qubits, dtype=np.int64)
        for label, k in tallies.items():
            if len(label) != n_qubits:
                raise ValueError(f"label {label!r} is not {n_qubits} bits")
            c[label_index(label)] += int(k)
        return cls(c)
