"""Time the numba and numpy kernel backends against each other.

    python benchmarks/bench_kernels.py [--repeat 5]

Backends are swapped in-process by rebinding the public names in
``bellgamma._kernels``; the numba versions are warmed up first so compile
time is excluded.
"""

import argparse
import timeit

import numpy as np

from bellgamma import _kernels, circuit, harness, mitigate, noise
from bellgamma.harness import RunConfig

BACKENDS = {
    "numba": (_kernels.apply_1q_numba, _kernels.apply_cnot_numba, _kernels.lawson_hanson_numba),
    "numpy": (_kernels.apply_1q_numpy, _kernels.apply_cnot_numpy, _kernels.lawson_hanson_numpy),
}


def use(name):
    _kernels.apply_1q, _kernels.apply_cnot, _kernels.lawson_hanson = BACKENDS[name]


def workloads():
    rng = np.random.default_rng(0)
    rho = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    u = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

    def gates():
        v = rho
        for q in range(8):
            v = _kernels.apply_1q(v, 8, q, u)
        for c, t in ((0, 1), (2, 3), (1, 2), (4, 5), (6, 7), (5, 6)):
            v = _kernels.apply_cnot(v, 8, c, t)

    lima = noise.load_noise_model("ibmq_lima")
    C = mitigate.exact_calibration_matrix(lima.readout)
    y = C.matrix @ rng.dirichlet(np.ones(16))
    y[3] -= 0.01
    y /= y.sum()

    def nnls():
        mitigate.nnls(C.matrix, y)

    def density():
        noise.simulate_noisy(circuit.build_experiment("22"), lima)

    def full_run():
        harness.run_experiment(RunConfig(noise="ibmq_lima", shots=2000, seed=1))

    return {
        "gates (8-qubit vector, 14 ops)": (gates, 2000),
        "nnls 16x16": (nnls, 2000),
        "noisy density evolution": (density, 50),
        "full 3x3 run": (full_run, 2),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    jobs = workloads()
    use("numba")
    for fn, _ in jobs.values():
        fn()  # compile
    timings = {}
    for name in BACKENDS:
        use(name)
        for label, (fn, number) in jobs.items():
            best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            timings[label, name] = best
    print(f"{'workload':34s} {'numba':>12s} {'numpy':>12s} {'speedup':>8s}")
    for label in jobs:
        a, b = timings[label, "numba"], timings[label, "numpy"]
        print(f"{label:34s} {a * 1e6:10.1f}us {b * 1e6:10.1f}us {b / a:7.2f}x")


if __name__ == "__main__":
    main()
