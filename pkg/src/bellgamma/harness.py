"""End-to-end runs: sample all twelve settings per repeat, mitigate, score, aggregate, write files."""

import csv
import io
import logging
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import circuit, mitigate, noise, score
from .circuit import CONFIG_LABELS
from .outcomes import OUTCOME_LABELS, Counts, label_index

log = logging.getLogger(__name__)

MITIGATION_CHOICES = ("none", "inversion", "nnls", "all")
_CONFIG_KEYS = {
    "shots", "repeats", "sessions", "seed", "noise", "mitigation",
    "calibration", "calibration_shots", "out",
}


@dataclass
class RunConfig:
    shots: int = 32000
    repeats: int = 3
    sessions: int = 3
    seed: int = 0
    noise: str = "none"
    mitigation: str = "all"
    calibration: str = "exact"  # or "measured"
    calibration_shots: int = 20000
    out: str = "results"

    def __post_init__(self):
        for name in ("shots", "repeats", "sessions", "seed", "calibration_shots"):
            setattr(self, name, int(getattr(self, name)))
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.sessions < 1 or self.repeats < 1:
            raise ValueError("sessions and repeats must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.mitigation not in MITIGATION_CHOICES:
            raise ValueError(f"mitigation must be one of {MITIGATION_CHOICES}")
        if self.calibration not in ("exact", "measured"):
            raise ValueError("calibration must be 'exact' or 'measured'")

    @property
    def methods(self):
        return {
            "none": ("uncorrected",),
            "inversion": ("uncorrected", "inversion"),
            "nnls": ("uncorrected", "nnls"),
            "all": ("uncorrected", "inversion", "nnls"),
        }[self.mitigation]

    def to_text(self):
        """Config as ``key = value`` lines. ``out`` is left out so that the
        same run written to two places produces identical files."""
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items() if k != "out")


def load_run_config(path, **overrides):
    """Read a flat ``key = value`` config; non-None ``overrides`` win."""
    values = noise.read_key_values(path, _CONFIG_KEYS) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


@dataclass
class RunResult:
    config: RunConfig
    noise_label: str
    reports: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)  # (session, repeat) -> {xz: Counts}
    data: dict = field(default_factory=dict)  # (session, repeat, method) -> ExperimentData


def run_id(session, repeat):
    return f"s{session}r{repeat}"


def correct(counts_by_xz, method, C, shots=None):
    """Turn per-setting counts into ExperimentData with one mitigation method."""
    dists = {}
    for xz in CONFIG_LABELS:
        c = counts_by_xz[xz]
        if method == "uncorrected":
            dists[xz] = c.frequencies()
        elif method == "inversion":
            dists[xz] = mitigate.correct_by_inversion(C, c)
        elif method == "nnls":
            dists[xz] = mitigate.correct_by_nnls(C, c)
        else:
            raise ValueError(f"unknown method {method!r}")
    if shots is None:
        shots = counts_by_xz[CONFIG_LABELS[0]].shots
    return score.ExperimentData(dists, shots=shots, method=method)


def run_experiment(config, noise_model=None):
    """Run every (session, repeat) and score each requested method.

    Per-setting shot streams are keyed by (seed, session, repeat, xz), so the
    result does not depend on evaluation order.
    """
    if noise_model is None:
        noise_model = noise.load_noise_model(config.noise)
    exact = {xz: noise.simulate_noisy(circuit.build_experiment(xz), noise_model) for xz in CONFIG_LABELS}
    result = RunResult(config=config, noise_label=noise_model.label)
    scores = {m: [] for m in config.methods}
    for s in range(config.sessions):
        if config.calibration == "measured":
            C = mitigate.measure_calibration_matrix(
                noise_model, config.calibration_shots, (config.seed, s)
            )
        else:
            C = mitigate.exact_calibration_matrix(noise_model.readout)
        session_scores = {m: [] for m in config.methods}
        for r in range(config.repeats):
            counts = {
                xz: noise.sample_counts(
                    exact[xz],
                    config.shots,
                    noise.rng_for(config.seed, noise.STREAM_EXPERIMENT, s, r, int(xz)),
                )
                for xz in CONFIG_LABELS
            }
            result.counts[(s, r)] = counts
            for method in config.methods:
                data = correct(counts, method, C, config.shots)
                rep = score.gamma(
                    data,
                    metadata={
                        "run_id": run_id(s, r),
                        "session": s,
                        "repeat": r,
                        "seed": config.seed,
                        "noise": noise_model.label,
                    },
                )
                result.data[(s, r, method)] = data
                result.reports.append(rep)
                session_scores[method].append(rep.gamma)
            log.debug("run %s done", run_id(s, r))
        for m in config.methods:
            scores[m].append(session_scores[m])
    if config.repeats >= 3:
        result.aggregates = {m: score.aggregate(scores[m]) for m in config.methods}
    return result


# ---------------------------------------------------------------------------
# file formats


def _fmt(v):
    text = f"{v:.6f}"
    return "0.000000" if text == "-0.000000" else text


def probability_matrix_text(data):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["abc", *CONFIG_LABELS])
    m = data.matrix()
    for i, label in enumerate(OUTCOME_LABELS):
        w.writerow([label, *(_fmt(v) for v in m[i])])
    return buf.getvalue()


def emit_probability_matrix(data, path):
    """16 x 12 table: outcome rows, one column per setting, six decimals."""
    Path(path).write_text(probability_matrix_text(data))


def read_probability_matrix(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0][1:]
    m = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return {xz: m[:, j] for j, xz in enumerate(header)}


_SCORE_HEADER = ["record", "run_id", "session", "repeat", "method", "gamma", "mean", "sigma"]


def scores_text(reports, aggregates):
    if not reports:
        raise ValueError("no reports to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_SCORE_HEADER)
    for rep in reports:
        md = rep.metadata
        w.writerow(
            ["run", md.get("run_id", ""), md.get("session", ""), md.get("repeat", ""),
             rep.method, _fmt(rep.gamma), "", ""]
        )
    for method, agg in aggregates.items():
        w.writerow(["aggregate", "", "", "", method, "", _fmt(agg.mean), _fmt(agg.sigma)])
    return buf.getvalue()


def emit_scores(reports, aggregates, path):
    Path(path).write_text(scores_text(reports, aggregates))


def read_scores(path):
    """Return (run rows, aggregate rows) as lists of dicts."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [r for r in rows if r["record"] == "run"], [r for r in rows if r["record"] == "aggregate"]


def counts_text(counts_by_xz):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xz", "abc", "count"])
    for xz in CONFIG_LABELS:
        c = counts_by_xz[xz]
        for i, label in enumerate(OUTCOME_LABELS):
            w.writerow([xz, label, int(c.counts[i])])
    return buf.getvalue()


def read_counts(path):
    """Parse an ``xz,abc,count`` file into ``{xz: Counts}``."""
    tallies = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if lineno == 1 and row[0].strip() == "xz":
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected xz,abc,count")
            xz, abc, k = (c.strip() for c in row)
            circuit.angle_lookup(xz)
            if len(abc) != 4:
                raise ValueError(f"{path}:{lineno}: outcome {abc!r} is not 4 bits")
            vec = tallies.setdefault(xz, np.zeros(len(OUTCOME_LABELS), dtype=np.int64))
            try:
                vec[label_index(abc)] += int(k)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    missing = [xz for xz in CONFIG_LABELS if xz not in tallies]
    if missing:
        raise ValueError(f"{path}: no counts for settings {', '.join(missing)}")
    return {xz: Counts(v) for xz, v in tallies.items()}


def calibration_matrix_text(C):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["observed\\prepared", *OUTCOME_LABELS[: C.dim]])
    for i in range(C.dim):
        w.writerow([OUTCOME_LABELS[i], *(_fmt(v) for v in C.matrix[i])])
    return buf.getvalue()


def read_calibration_matrix(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    m = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return mitigate.CalibrationMatrix(m, "measured")


def write_outputs(result, out_dir):
    """Write all files for ``result``; nothing lands in ``out_dir`` unless every file succeeds."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir.parent))
    try:
        (staging / "run_config.txt").write_text(
            result.config.to_text() + f"noise_label = {result.noise_label}\n"
        )
        emit_scores(result.reports, result.aggregates, staging / "scores.csv")
        ideal = score.ExperimentData(
            {xz: circuit.ideal_distribution(xz) for xz in CONFIG_LABELS}, method="ideal"
        )
        emit_probability_matrix(ideal, staging / "probabilities_ideal.csv")
        for (s, r), counts in sorted(result.counts.items()):
            run_dir = staging / "runs" / run_id(s, r)
            run_dir.mkdir(parents=True)
            (run_dir / "counts.csv").write_text(counts_text(counts))
            for method in result.config.methods:
                emit_probability_matrix(
                    result.data[(s, r, method)], run_dir / f"probabilities_{method}.csv"
                )
        out_dir.mkdir(exist_ok=True)
        for item in sorted(staging.iterdir()):
            dest = out_dir / item.name
            if dest.is_dir():
                shutil.rmtree(dest)
            elif dest.exists():
                dest.unlink()
            shutil.move(str(item), str(dest))
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return out_dir
