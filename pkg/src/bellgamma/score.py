"""The score Gamma, its per-b decomposition, and the session aggregation protocol."""

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CONFIG_LABELS, OUTCOME_SIGNS
from .outcomes import OUTCOME_LABELS, SUM_TOL, OutcomeDistribution

IDEAL_GAMMA = 6.0 * math.sqrt(2.0)
REAL_BOUND = 7.66
CLASSICAL_BOUND = 6.0

B_LABELS = ("00", "01", "10", "11")
METHODS = ("uncorrected", "inversion", "nnls")


def _term_sign(xz, b1, b2):
    """Prefactor of S_xz^b in T_b."""
    s1 = -1 if b1 else 1
    s2 = -1 if b2 else 1
    return {
        "11": s2, "12": s2,
        "21": s1, "22": -s1,
        "13": s2, "14": s2,
        "33": -s1 * s2, "34": s1 * s2,
        "25": s1, "26": s1,
        "35": -s1 * s2, "36": s1 * s2,
    }[xz]


@dataclass
class ExperimentData:
    """Per-configuration outcome distributions for one run."""

    distributions: dict
    shots: int = 0
    method: str = "uncorrected"

    def __post_init__(self):
        missing = [xz for xz in CONFIG_LABELS if xz not in self.distributions]
        if missing:
            raise ValueError(f"missing configurations: {', '.join(missing)}")
        if self.method not in METHODS and self.method != "ideal":
            raise ValueError(f"unknown method {self.method!r}")
        dists = {}
        for xz in CONFIG_LABELS:
            d = self.distributions[xz]
            if not isinstance(d, OutcomeDistribution):
                d = OutcomeDistribution(np.asarray(d, dtype=float))
            if d.values.size != len(OUTCOME_LABELS):
                raise ValueError(f"configuration {xz} needs 16 outcomes")
            dists[xz] = d
        self.distributions = dists

    def matrix(self):
        """16 x 12 array, rows in outcome order and columns in CONFIG_LABELS order."""
        return np.column_stack([self.distributions[xz].values for xz in CONFIG_LABELS])


@dataclass
class ScoreReport:
    gamma: float
    t: dict
    s: dict
    method: str = "uncorrected"
    metadata: dict = field(default_factory=dict)


@dataclass
class SessionAggregate:
    sessions: list
    selected: list
    mean: float
    sigma: float


def conditional_correlator(dist, b):
    """Signed sum of a*c*P(abc|xz) over the four outcomes with Bob's result ``b``."""
    values = dist.values if isinstance(dist, OutcomeDistribution) else np.asarray(dist)
    if abs(values.sum() - 1.0) > SUM_TOL:
        raise ValueError("distribution does not sum to 1")
    if b not in B_LABELS:
        raise ValueError(f"b must be one of {B_LABELS}, got {b!r}")
    b1, b2 = int(b[0]), int(b[1])
    total = 0.0
    for i, label in enumerate(OUTCOME_LABELS):
        a, ob1, ob2, c = OUTCOME_SIGNS[label]
        if (ob1, ob2) == (b1, b2):
            total += a * c * values[i]
    return float(total)


def _check_data(data):
    if not isinstance(data, ExperimentData):
        data = ExperimentData(dict(data))
    return data


def t_score(data, b):
    data = _check_data(data)
    b1, b2 = int(b[0]), int(b[1])
    return float(
        sum(
            _term_sign(xz, b1, b2) * conditional_correlator(data.distributions[xz], b)
            for xz in CONFIG_LABELS
        )
    )


def weight_tensor():
    """16 x 12 matrix of +-1 weights so that Gamma = sum(w * P)."""
    w = np.zeros((len(OUTCOME_LABELS), len(CONFIG_LABELS)), dtype=np.int64)
    for i, label in enumerate(OUTCOME_LABELS):
        a, b1, b2, c = OUTCOME_SIGNS[label]
        for j, xz in enumerate(CONFIG_LABELS):
            w[i, j] = _term_sign(xz, b1, b2) * a * c
    return w


_W = weight_tensor()


def gamma_from_weights(data):
    data = _check_data(data)
    return float(np.sum(_W * data.matrix()))


def gamma(data, metadata=None):
    """Score one run. Both the weight-tensor and T_b routes are evaluated and compared."""
    data = _check_data(data)
    s = {
        xz: {b: conditional_correlator(data.distributions[xz], b) for b in B_LABELS}
        for xz in CONFIG_LABELS
    }
    t = {b: t_score(data, b) for b in B_LABELS}
    g = sum(t.values())
    g_w = gamma_from_weights(data)
    if abs(g - g_w) > 1e-10:
        raise ArithmeticError(f"score routes disagree: {g!r} vs {g_w!r}")
    return ScoreReport(
        gamma=g,
        t=t,
        s=s,
        method=data.method,
        metadata=dict(metadata or {}, shots=data.shots),
    )


def gamma_standard_error(observed, shots, correction=None):
    """Shot-noise standard error of Gamma from one run.

    Parameters
    ----------
    observed : ExperimentData or mapping
        The true distributions the shots are drawn from (before mitigation).
    shots : int
        Shots per configuration.
    correction : array_like, optional
        Linear map applied to each frequency vector before scoring, e.g.
        ``C^-1`` for inversion. Identity when omitted.

    Notes
    -----
    Gamma is linear in the frequencies, so its variance is the sum over
    configurations of the multinomial variance of ``u . f`` with
    ``u = correction^T w_xz``.
    """
    observed = _check_data(observed)
    p = observed.matrix()
    u = _W.astype(float) if correction is None else np.asarray(correction, float).T @ _W
    var = 0.0
    for j in range(p.shape[1]):
        mean = u[:, j] @ p[:, j]
        var += (u[:, j] ** 2 @ p[:, j] - mean**2) / shots
    return math.sqrt(max(var, 0.0))


def select_session(scores):
    """(min, median, max) of one session; even-sized sessions take the lower middle."""
    if len(scores) < 3:
        raise ValueError(f"a session needs at least 3 scores, got {len(scores)}")
    ordered = sorted(scores)
    return [ordered[0], ordered[(len(ordered) - 1) // 2], ordered[-1]]


def aggregate(sessions):
    if not sessions:
        raise ValueError("no sessions to aggregate")
    sessions = [list(s) for s in sessions]
    selected = [v for s in sessions for v in select_session(s)]
    mean = float(np.mean(selected))
    sigma = float(np.std(selected, ddof=1)) if len(selected) > 1 else 0.0
    return SessionAggregate(sessions=sessions, selected=selected, mean=mean, sigma=sigma)
