"""Command line entry point: ``bellgamma {run,calibrate,score,ideal}``."""

import argparse
import logging
import sys
from pathlib import Path

from . import circuit, harness, mitigate, noise, score
from .circuit import CONFIG_LABELS


def _cmd_run(args):
    config = harness.load_run_config(
        args.config,
        seed=args.seed,
        shots=args.shots,
        mitigation=args.mitigation,
        noise=args.noise,
        out=args.out,
        sessions=args.sessions,
        repeats=args.repeats,
        calibration=args.calibration,
    )
    result = harness.run_experiment(config)
    out = harness.write_outputs(result, config.out)
    for method, agg in result.aggregates.items():
        print(f"{method:12s} mean {agg.mean:.4f}  sigma {agg.sigma:.4f}")
    print(f"wrote {out}")


def _cmd_calibrate(args):
    model = noise.load_noise_model(args.noise)
    if args.exact:
        C = mitigate.exact_calibration_matrix(model.readout)
    else:
        C = mitigate.measure_calibration_matrix(model, args.shots, args.seed)
    text = harness.calibration_matrix_text(C)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_score(args):
    counts = harness.read_counts(args.counts)
    if args.calibration_matrix:
        C = harness.read_calibration_matrix(args.calibration_matrix)
    else:
        C = mitigate.exact_calibration_matrix(noise.load_noise_model(args.noise).readout)
    methods = harness.RunConfig(mitigation=args.mitigation).methods
    for method in methods:
        rep = score.gamma(harness.correct(counts, method, C))
        t = " ".join(f"T{b}={rep.t[b]:.4f}" for b in score.B_LABELS)
        print(f"{method:12s} gamma {rep.gamma:.6f}  {t}")


def _cmd_ideal(args):
    data = score.ExperimentData(
        {xz: circuit.ideal_distribution(xz) for xz in CONFIG_LABELS}, method="ideal"
    )
    text = harness.probability_matrix_text(data)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bellgamma", description="Simulate and score the four-qubit complex-vs-real Bell test."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="sample, mitigate, score and aggregate")
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--mitigation", choices=harness.MITIGATION_CHOICES)
    p.add_argument("--noise", help="noise file, bundled preset name, or 'none'")
    p.add_argument("--out", help="output directory")
    p.add_argument("--sessions", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--calibration", choices=("exact", "measured"))
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("calibrate", help="build and print a calibration matrix")
    p.add_argument("--noise", default="none")
    p.add_argument("--shots", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="tensor-product matrix instead of sampling")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("score", help="score an xz,abc,count file")
    p.add_argument("--counts", required=True)
    p.add_argument("--noise", default="none", help="noise model whose readout defines C")
    p.add_argument("--calibration-matrix", help="CSV written by 'calibrate'")
    p.add_argument("--mitigation", choices=harness.MITIGATION_CHOICES, default="all")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("ideal", help="write the noise-free probability matrix")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ideal)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"bellgamma: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
